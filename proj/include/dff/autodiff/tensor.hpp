#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dff::autodiff {

/// Reverse-mode value node. All tensors are dense row-major 2-D doubles;
/// scalars are 1x1 and row vectors 1xn.
struct Node {
  int rows = 0, cols = 0;
  std::vector<double> value;
  std::vector<double> grad;  // allocated when requires_grad
  bool requires_grad = false;
  std::string name;  // parameters only
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;  // pulls this->grad into parents

  std::size_t size() const { return value.size(); }
  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

/// Value-semantic handle on a graph node.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> n) : n_(std::move(n)) {}

  static Tensor zeros(int rows, int cols, bool requires_grad = false);
  static Tensor from(int rows, int cols, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double v);
  static Tensor param(std::string name, int rows, int cols, std::vector<double> data);

  bool defined() const { return n_ != nullptr; }
  int rows() const { return n_->rows; }
  int cols() const { return n_->cols; }
  std::size_t size() const { return n_->size(); }
  bool requires_grad() const { return n_->requires_grad; }
  const std::string& name() const { return n_->name; }

  std::vector<double>& values() { return n_->value; }
  const std::vector<double>& values() const { return n_->value; }
  std::vector<double>& grad() { return n_->grad; }
  const std::vector<double>& grad() const { return n_->grad; }

  double item() const;
  double at(int r, int c) const { return n_->value[static_cast<std::size_t>(r) * n_->cols + c]; }

  std::shared_ptr<Node> node() const { return n_; }

 private:
  std::shared_ptr<Node> n_;
};

// ---- graph ops ------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);         // same shape, or b a 1xN row bias
Tensor sub(const Tensor& a, const Tensor& b);         // same shape
Tensor neg(const Tensor& a);
Tensor mul(const Tensor& a, const Tensor& b);         // elementwise, same shape
Tensor mul_scalar(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor mul_rowvec(const Tensor& x, const Tensor& v);  // scale columns by v (1xN)
Tensor div_rowvec(const Tensor& x, const Tensor& v);
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor abs_val(const Tensor& a);
Tensor softmax_rows(const Tensor& a);
Tensor layer_norm_rows(const Tensor& x, const Tensor& gain, const Tensor& bias,
                       double eps = 1e-6);
Tensor column_norm(const Tensor& a);                  // MxN -> 1xN Euclidean column norms
Tensor sum_all(const Tensor& a);                      // -> 1x1
Tensor mean_all(const Tensor& a);                     // -> 1x1
Tensor concat_cols(const std::vector<Tensor>& parts); // same rows
Tensor slice_cols(const Tensor& a, int start, int len);

/// Reverse pass from a scalar loss; accumulates into .grad of every
/// reachable node with requires_grad. Throws on non-scalar loss.
void backward(const Tensor& loss);

void zero_grad(std::span<Tensor> params);

/// FNV-1a over the value bytes; used by freeze-contract checks.
std::uint64_t tensor_hash(const Tensor& t);

}  // namespace dff::autodiff
