#include "dff/autodiff/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace dff::autodiff {

AdamW::AdamW(std::vector<Tensor> params, const AdamWOptions& opts)
    : params_(std::move(params)), opts_(opts) {
  state_.resize(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    state_[i].m.assign(params_[i].size(), 0.0);
    state_[i].v.assign(params_[i].size(), 0.0);
    params_[i].node()->ensure_grad();
  }
}

void AdamW::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    auto& p = params_[pi];
    auto& st = state_[pi];
    auto& val = p.values();
    const auto& g = p.grad();
    for (std::size_t i = 0; i < val.size(); ++i) {
      if (std::isnan(g[i]))
        throw std::runtime_error("adamw: NaN gradient in parameter '" + p.name() + "' at index " +
                                 std::to_string(i) + " (step " + std::to_string(t_) + ")");
      st.m[i] = opts_.beta1 * st.m[i] + (1.0 - opts_.beta1) * g[i];
      st.v[i] = opts_.beta2 * st.v[i] + (1.0 - opts_.beta2) * g[i] * g[i];
      const double mhat = st.m[i] / bc1;
      const double vhat = st.v[i] / bc2;
      val[i] -= opts_.lr * (mhat / (std::sqrt(vhat) + opts_.eps) + opts_.weight_decay * val[i]);
    }
  }
}

void AdamW::zero_grad() {
  autodiff::zero_grad(params_);
}

}  // namespace dff::autodiff
