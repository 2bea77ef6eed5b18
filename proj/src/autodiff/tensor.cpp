#include "dff/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_set>

namespace dff::autodiff {

namespace {

std::shared_ptr<Node> make_node(int rows, int cols) {
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->value.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  return n;
}

void check_shape(const Tensor& t, const char* op) {
  if (!t.defined()) throw std::invalid_argument(std::string(op) + ": undefined tensor");
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) +
                              "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                              "x" + std::to_string(b.cols()));
}

/// Builds the result node of an op; wires parents/backward only when a parent
/// tracks gradients, so inference graphs stay flat.
Tensor op_node(int rows, int cols, std::vector<std::shared_ptr<Node>> parents,
               std::function<void(Node&)> backward) {
  auto n = make_node(rows, cols);
  bool track = false;
  for (const auto& p : parents)
    if (p->requires_grad) track = true;
  if (track) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backward = std::move(backward);
  }
  return Tensor(n);
}

void accum(Node& parent, std::size_t idx, double v) {
  if (!parent.requires_grad) return;
  parent.ensure_grad();
  parent.grad[idx] += v;
}

}  // namespace

Tensor Tensor::zeros(int rows, int cols, bool requires_grad) {
  auto n = make_node(rows, cols);
  n->requires_grad = requires_grad;
  return Tensor(n);
}

Tensor Tensor::from(int rows, int cols, std::vector<double> data, bool requires_grad) {
  if (data.size() != static_cast<std::size_t>(rows) * cols)
    throw std::invalid_argument("Tensor::from: data length does not match shape");
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->value = std::move(data);
  n->requires_grad = requires_grad;
  return Tensor(n);
}

Tensor Tensor::scalar(double v) { return from(1, 1, {v}); }

Tensor Tensor::param(std::string name, int rows, int cols, std::vector<double> data) {
  Tensor t = from(rows, cols, std::move(data), true);
  t.node()->name = std::move(name);
  return t;
}

double Tensor::item() const {
  if (size() != 1) throw std::logic_error("Tensor::item: not a scalar");
  return n_->value[0];
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_shape(a, "add");
  check_shape(b, "add");
  if (a.rows() == b.rows() && a.cols() == b.cols()) {
    auto pa = a.node(), pb = b.node();
    Tensor out = op_node(a.rows(), a.cols(), {pa, pb}, [pa, pb](Node& n) {
      for (std::size_t i = 0; i < n.size(); ++i) {
        accum(*pa, i, n.grad[i]);
        accum(*pb, i, n.grad[i]);
      }
    });
    for (std::size_t i = 0; i < out.size(); ++i)
      out.values()[i] = pa->value[i] + pb->value[i];
    return out;
  }
  if (b.rows() == 1 && b.cols() == a.cols()) {  // row-broadcast bias
    auto pa = a.node(), pb = b.node();
    int cols = a.cols();
    Tensor out = op_node(a.rows(), a.cols(), {pa, pb}, [pa, pb, cols](Node& n) {
      for (int r = 0; r < n.rows; ++r)
        for (int c = 0; c < cols; ++c) {
          std::size_t i = static_cast<std::size_t>(r) * cols + c;
          accum(*pa, i, n.grad[i]);
          accum(*pb, static_cast<std::size_t>(c), n.grad[i]);
        }
    });
    for (int r = 0; r < a.rows(); ++r)
      for (int c = 0; c < cols; ++c) {
        std::size_t i = static_cast<std::size_t>(r) * cols + c;
        out.values()[i] = pa->value[i] + pb->value[static_cast<std::size_t>(c)];
      }
    return out;
  }
  shape_error("add", a, b);
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error("sub", a, b);
  auto pa = a.node(), pb = b.node();
  Tensor out = op_node(a.rows(), a.cols(), {pa, pb}, [pa, pb](Node& n) {
    for (std::size_t i = 0; i < n.size(); ++i) {
      accum(*pa, i, n.grad[i]);
      accum(*pb, i, -n.grad[i]);
    }
  });
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = pa->value[i] - pb->value[i];
  return out;
}

Tensor neg(const Tensor& a) { return mul_scalar(a, -1.0); }

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error("mul", a, b);
  auto pa = a.node(), pb = b.node();
  Tensor out = op_node(a.rows(), a.cols(), {pa, pb}, [pa, pb](Node& n) {
    for (std::size_t i = 0; i < n.size(); ++i) {
      accum(*pa, i, n.grad[i] * pb->value[i]);
      accum(*pb, i, n.grad[i] * pa->value[i]);
    }
  });
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = pa->value[i] * pb->value[i];
  return out;
}

Tensor mul_scalar(const Tensor& a, double s) {
  auto pa = a.node();
  Tensor out = op_node(a.rows(), a.cols(), {pa}, [pa, s](Node& n) {
    for (std::size_t i = 0; i < n.size(); ++i) accum(*pa, i, n.grad[i] * s);
  });
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = pa->value[i] * s;
  return out;
}

Tensor add_scalar(const Tensor& a, double s) {
  auto pa = a.node();
  Tensor out = op_node(a.rows(), a.cols(), {pa}, [pa](Node& n) {
    for (std::size_t i = 0; i < n.size(); ++i) accum(*pa, i, n.grad[i]);
  });
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = pa->value[i] + s;
  return out;
}

Tensor mul_rowvec(const Tensor& x, const Tensor& v) {
  if (v.rows() != 1 || v.cols() != x.cols()) shape_error("mul_rowvec", x, v);
  auto px = x.node(), pv = v.node();
  int cols = x.cols();
  Tensor out = op_node(x.rows(), x.cols(), {px, pv}, [px, pv, cols](Node& n) {
    for (int r = 0; r < n.rows; ++r)
      for (int c = 0; c < cols; ++c) {
        std::size_t i = static_cast<std::size_t>(r) * cols + c;
        accum(*px, i, n.grad[i] * pv->value[static_cast<std::size_t>(c)]);
        accum(*pv, static_cast<std::size_t>(c), n.grad[i] * px->value[i]);
      }
  });
  for (int r = 0; r < x.rows(); ++r)
    for (int c = 0; c < cols; ++c) {
      std::size_t i = static_cast<std::size_t>(r) * cols + c;
      out.values()[i] = px->value[i] * pv->value[static_cast<std::size_t>(c)];
    }
  return out;
}

Tensor div_rowvec(const Tensor& x, const Tensor& v) {
  if (v.rows() != 1 || v.cols() != x.cols()) shape_error("div_rowvec", x, v);
  auto px = x.node(), pv = v.node();
  int cols = x.cols();
  Tensor out = op_node(x.rows(), x.cols(), {px, pv}, [px, pv, cols](Node& n) {
    for (int r = 0; r < n.rows; ++r)
      for (int c = 0; c < cols; ++c) {
        std::size_t i = static_cast<std::size_t>(r) * cols + c;
        double vc = pv->value[static_cast<std::size_t>(c)];
        accum(*px, i, n.grad[i] / vc);
        accum(*pv, static_cast<std::size_t>(c), -n.grad[i] * px->value[i] / (vc * vc));
      }
  });
  for (int r = 0; r < x.rows(); ++r)
    for (int c = 0; c < cols; ++c) {
      std::size_t i = static_cast<std::size_t>(r) * cols + c;
      out.values()[i] = px->value[i] / pv->value[static_cast<std::size_t>(c)];
    }
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  auto pa = a.node(), pb = b.node();
  const int m = a.rows(), k = a.cols(), n = b.cols();
  Tensor out = op_node(m, n, {pa, pb}, [pa, pb, m, k, n](Node& node) {
    // dA += G B^T ; dB += A^T G
    if (pa->requires_grad) {
      pa->ensure_grad();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
          double g = node.grad[static_cast<std::size_t>(i) * n + j];
          const double* brow = pb->value.data() + static_cast<std::size_t>(0);
          double* da = pa->grad.data() + static_cast<std::size_t>(i) * k;
          for (int p = 0; p < k; ++p) da[p] += g * brow[static_cast<std::size_t>(p) * n + j];
        }
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      for (int i = 0; i < m; ++i) {
        const double* arow = pa->value.data() + static_cast<std::size_t>(i) * k;
        const double* grow = node.grad.data() + static_cast<std::size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
          double av = arow[p];
          double* db = pb->grad.data() + static_cast<std::size_t>(p) * n;
          for (int j = 0; j < n; ++j) db[j] += av * grow[j];
        }
      }
    }
  });
  double* c = out.values().data();
  const double* av = pa->value.data();
  const double* bv = pb->value.data();
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      double x = av[static_cast<std::size_t>(i) * k + p];
      const double* bp = bv + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += x * bp[j];
    }
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  auto pa = a.node();
  const int m = a.rows(), n = a.cols();
  Tensor out = op_node(n, m, {pa}, [pa, m, n](Node& node) {
    if (!pa->requires_grad) return;
    pa->ensure_grad();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        pa->grad[static_cast<std::size_t>(j) * n + i] +=
            node.grad[static_cast<std::size_t>(i) * m + j];
  });
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      out.values()[static_cast<std::size_t>(j) * m + i] =
          pa->value[static_cast<std::size_t>(i) * n + j];
  return out;
}

Tensor relu(const Tensor& a) {
  auto pa = a.node();
  Tensor out = op_node(a.rows(), a.cols(), {pa}, [pa](Node& n) {
    for (std::size_t i = 0; i < n.size(); ++i)
      if (pa->value[i] > 0.0) accum(*pa, i, n.grad[i]);
  });
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = std::max(pa->value[i], 0.0);
  return out;
}

Tensor abs_val(const Tensor& a) {
  auto pa = a.node();
  Tensor out = op_node(a.rows(), a.cols(), {pa}, [pa](Node& n) {
    for (std::size_t i = 0; i < n.size(); ++i) {
      double s = (pa->value[i] > 0.0) ? 1.0 : (pa->value[i] < 0.0 ? -1.0 : 0.0);
      accum(*pa, i, n.grad[i] * s);
    }
  });
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = std::abs(pa->value[i]);
  return out;
}

Tensor softmax_rows(const Tensor& a) {
  auto pa = a.node();
  const int cols = a.cols();
  auto out_node = make_node(a.rows(), cols);
  for (int r = 0; r < a.rows(); ++r) {
    const double* row = pa->value.data() + static_cast<std::size_t>(r) * cols;
    double* orow = out_node->value.data() + static_cast<std::size_t>(r) * cols;
    double mx = row[0];
    for (int c = 1; c < cols; ++c) mx = std::max(mx, row[c]);
    double sum = 0.0;
    for (int c = 0; c < cols; ++c) {
      orow[c] = std::exp(row[c] - mx);
      sum += orow[c];
    }
    for (int c = 0; c < cols; ++c) orow[c] /= sum;
  }
  if (pa->requires_grad) {
    out_node->requires_grad = true;
    out_node->parents = {pa};
    out_node->backward = [pa, cols](Node& n) {
      pa->ensure_grad();
      for (int r = 0; r < n.rows; ++r) {
        const double* s = n.value.data() + static_cast<std::size_t>(r) * cols;
        const double* g = n.grad.data() + static_cast<std::size_t>(r) * cols;
        double dot = 0.0;
        for (int c = 0; c < cols; ++c) dot += g[c] * s[c];
        double* dst = pa->grad.data() + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) dst[c] += s[c] * (g[c] - dot);
      }
    };
  }
  return Tensor(out_node);
}

Tensor layer_norm_rows(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  if (gain.rows() != 1 || gain.cols() != x.cols()) shape_error("layer_norm_rows", x, gain);
  if (bias.rows() != 1 || bias.cols() != x.cols()) shape_error("layer_norm_rows", x, bias);
  auto px = x.node(), pg = gain.node(), pb = bias.node();
  const int cols = x.cols();
  auto out_node = make_node(x.rows(), cols);
  auto xhat = std::make_shared<std::vector<double>>(x.size());
  auto inv_sigma = std::make_shared<std::vector<double>>(static_cast<std::size_t>(x.rows()));
  for (int r = 0; r < x.rows(); ++r) {
    const double* row = px->value.data() + static_cast<std::size_t>(r) * cols;
    double mu = 0.0;
    for (int c = 0; c < cols; ++c) mu += row[c];
    mu /= cols;
    double var = 0.0;
    for (int c = 0; c < cols; ++c) var += (row[c] - mu) * (row[c] - mu);
    var /= cols;
    double is = 1.0 / std::sqrt(var + eps);
    (*inv_sigma)[static_cast<std::size_t>(r)] = is;
    for (int c = 0; c < cols; ++c) {
      std::size_t i = static_cast<std::size_t>(r) * cols + c;
      (*xhat)[i] = (row[c] - mu) * is;
      out_node->value[i] = (*xhat)[i] * pg->value[static_cast<std::size_t>(c)] +
                           pb->value[static_cast<std::size_t>(c)];
    }
  }
  if (px->requires_grad || pg->requires_grad || pb->requires_grad) {
    out_node->requires_grad = true;
    out_node->parents = {px, pg, pb};
    out_node->backward = [px, pg, pb, xhat, inv_sigma, cols](Node& n) {
      for (int r = 0; r < n.rows; ++r) {
        const double* g = n.grad.data() + static_cast<std::size_t>(r) * cols;
        const double* xh = xhat->data() + static_cast<std::size_t>(r) * cols;
        double is = (*inv_sigma)[static_cast<std::size_t>(r)];
        if (pg->requires_grad) {
          pg->ensure_grad();
          for (int c = 0; c < cols; ++c) pg->grad[static_cast<std::size_t>(c)] += g[c] * xh[c];
        }
        if (pb->requires_grad) {
          pb->ensure_grad();
          for (int c = 0; c < cols; ++c) pb->grad[static_cast<std::size_t>(c)] += g[c];
        }
        if (px->requires_grad) {
          px->ensure_grad();
          double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
          for (int c = 0; c < cols; ++c) {
            double dxh = g[c] * pg->value[static_cast<std::size_t>(c)];
            mean_dxhat += dxh;
            mean_dxhat_xhat += dxh * xh[c];
          }
          mean_dxhat /= cols;
          mean_dxhat_xhat /= cols;
          double* dst = px->grad.data() + static_cast<std::size_t>(r) * cols;
          for (int c = 0; c < cols; ++c) {
            double dxh = g[c] * pg->value[static_cast<std::size_t>(c)];
            dst[c] += is * (dxh - mean_dxhat - xh[c] * mean_dxhat_xhat);
          }
        }
      }
    };
  }
  return Tensor(out_node);
}

Tensor column_norm(const Tensor& a) {
  auto pa = a.node();
  const int m = a.rows(), n = a.cols();
  auto out_node = make_node(1, n);
  for (int c = 0; c < n; ++c) {
    double s = 0.0;
    for (int r = 0; r < m; ++r) {
      double v = pa->value[static_cast<std::size_t>(r) * n + c];
      s += v * v;
    }
    out_node->value[static_cast<std::size_t>(c)] = std::sqrt(s);
  }
  if (pa->requires_grad) {
    out_node->requires_grad = true;
    out_node->parents = {pa};
    out_node->backward = [pa, m, n](Node& node) {
      pa->ensure_grad();
      for (int c = 0; c < n; ++c) {
        double norm = node.value[static_cast<std::size_t>(c)];
        if (norm == 0.0) continue;
        double g = node.grad[static_cast<std::size_t>(c)] / norm;
        for (int r = 0; r < m; ++r) {
          std::size_t i = static_cast<std::size_t>(r) * n + c;
          pa->grad[i] += g * pa->value[i];
        }
      }
    };
  }
  return Tensor(out_node);
}

Tensor sum_all(const Tensor& a) {
  auto pa = a.node();
  Tensor out = op_node(1, 1, {pa}, [pa](Node& n) {
    for (std::size_t i = 0; i < pa->size(); ++i) accum(*pa, i, n.grad[0]);
  });
  double s = 0.0;
  for (double v : pa->value) s += v;
  out.values()[0] = s;
  return out;
}

Tensor mean_all(const Tensor& a) {
  return mul_scalar(sum_all(a), 1.0 / static_cast<double>(a.size()));
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no parts");
  int rows = parts[0].rows(), total = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) shape_error("concat_cols", parts[0], p);
    total += p.cols();
  }
  std::vector<std::shared_ptr<Node>> parents;
  for (const auto& p : parts) parents.push_back(p.node());
  auto offsets = std::make_shared<std::vector<int>>();
  int off = 0;
  for (const auto& p : parts) {
    offsets->push_back(off);
    off += p.cols();
  }
  Tensor out = op_node(rows, total, parents, [parents, offsets, total](Node& n) {
    for (std::size_t pi = 0; pi < parents.size(); ++pi) {
      auto& p = *parents[pi];
      if (!p.requires_grad) continue;
      p.ensure_grad();
      int o = (*offsets)[pi];
      for (int r = 0; r < p.rows; ++r)
        for (int c = 0; c < p.cols; ++c)
          p.grad[static_cast<std::size_t>(r) * p.cols + c] +=
              n.grad[static_cast<std::size_t>(r) * total + o + c];
    }
  });
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    const auto& p = parts[pi];
    int o = (*offsets)[pi];
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < p.cols(); ++c)
        out.values()[static_cast<std::size_t>(r) * total + o + c] = p.at(r, c);
  }
  return out;
}

Tensor slice_cols(const Tensor& a, int start, int len) {
  if (start < 0 || len <= 0 || start + len > a.cols())
    throw std::invalid_argument("slice_cols: range outside tensor");
  auto pa = a.node();
  const int cols = a.cols();
  Tensor out = op_node(a.rows(), len, {pa}, [pa, start, len, cols](Node& n) {
    if (!pa->requires_grad) return;
    pa->ensure_grad();
    for (int r = 0; r < n.rows; ++r)
      for (int c = 0; c < len; ++c)
        pa->grad[static_cast<std::size_t>(r) * cols + start + c] +=
            n.grad[static_cast<std::size_t>(r) * len + c];
  });
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < len; ++c)
      out.values()[static_cast<std::size_t>(r) * len + c] = a.at(r, start + c);
  return out;
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1)
    throw std::invalid_argument("backward: loss must be a scalar tensor");
  if (!loss.requires_grad()) return;

  std::vector<Node*> topo;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.push_back({loss.node().get(), 0});
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node* p = node->parents[idx].get();
      ++idx;
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      topo.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->ensure_grad();
  loss.node()->grad[0] = 1.0;
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
}

void zero_grad(std::span<Tensor> params) {
  for (auto& p : params)
    if (p.defined()) std::fill(p.grad().begin(), p.grad().end(), 0.0);
}

std::uint64_t tensor_hash(const Tensor& t) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto& v = t.values();
  const unsigned char* bytes = reinterpret_cast<const unsigned char*>(v.data());
  for (std::size_t i = 0; i < v.size() * sizeof(double); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace dff::autodiff
