#pragma once

#include <vector>

#include "dff/autodiff/tensor.hpp"

namespace dff::autodiff {

struct AdamWOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

/// AdamW with decoupled weight decay. Only the tensors handed to the
/// constructor are ever updated; frozen weights simply stay out of the list.
class AdamW {
 public:
  AdamW(std::vector<Tensor> params, const AdamWOptions& opts = {});

  /// Applies one update from the accumulated gradients, then leaves the
  /// gradients untouched (call zero_grad separately). Throws on NaN gradients,
  /// naming the offending parameter.
  void step();
  void zero_grad();
  long steps_taken() const { return t_; }

 private:
  struct Moments {
    std::vector<double> m, v;
  };
  std::vector<Tensor> params_;
  std::vector<Moments> state_;
  AdamWOptions opts_;
  long t_ = 0;
};

}  // namespace dff::autodiff
