#include "dff/autodiff/adapter.hpp"

#include <cmath>
#include <stdexcept>

namespace dff::autodiff {

PeftMethod peft_from_string(const std::string& s) {
  if (s == "lora") return PeftMethod::lora;
  if (s == "dora") return PeftMethod::dora;
  throw std::invalid_argument("unknown peft method '" + s + "'");
}

std::string to_string(PeftMethod m) { return m == PeftMethod::lora ? "lora" : "dora"; }

Linear Linear::make(const std::string& name, int out, int in, Rng& rng, bool with_bias) {
  Linear l;
  l.name = name;
  // Xavier-uniform
  double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  std::vector<double> w(static_cast<std::size_t>(out) * in);
  for (auto& v : w) v = rng.uniform(-bound, bound);
  l.weight = Tensor::param(name + ".weight", out, in, std::move(w));
  if (with_bias)
    l.bias = Tensor::param(name + ".bias", 1, out,
                           std::vector<double>(static_cast<std::size_t>(out), 0.0));
  return l;
}

Tensor Linear::effective_weight() const {
  if (!adapter) return weight;
  Tensor delta = mul_scalar(matmul(adapter->b, adapter->a), adapter->scale);
  Tensor v = add(weight, delta);
  if (adapter->method == PeftMethod::lora) return v;
  return div_rowvec(mul_rowvec(v, adapter->m), column_norm(v));
}

Tensor Linear::forward(const Tensor& x) const {
  Tensor y = matmul(x, transpose(effective_weight()));
  if (bias.defined()) y = add(y, bias);
  return y;
}

void Linear::attach_adapter(const AdapterSpec& spec, Rng& rng) {
  const int out = weight.rows(), in = weight.cols();
  if (spec.rank < 1 || spec.rank >= std::min(out, in))
    throw std::invalid_argument("attach_adapter: rank must satisfy 1 <= r < min(d, k) for " +
                                name);
  Adapter ad;
  ad.method = spec.method;
  ad.scale = spec.scale();
  ad.b = Tensor::param(name + ".lora_b", out, spec.rank,
                       std::vector<double>(static_cast<std::size_t>(out) * spec.rank, 0.0));
  double bound = 1.0 / std::sqrt(static_cast<double>(spec.rank));
  std::vector<double> a(static_cast<std::size_t>(spec.rank) * in);
  for (auto& v : a) v = rng.uniform(-bound, bound);
  ad.a = Tensor::param(name + ".lora_a", spec.rank, in, std::move(a));
  if (spec.method == PeftMethod::dora) {
    std::vector<double> m(static_cast<std::size_t>(in), 0.0);
    for (int c = 0; c < in; ++c) {
      double s = 0.0;
      for (int r = 0; r < out; ++r) {
        double v = weight.at(r, c);
        s += v * v;
      }
      m[static_cast<std::size_t>(c)] = std::sqrt(s);
    }
    ad.m = Tensor::param(name + ".dora_m", 1, in, std::move(m));
  }
  adapter = std::move(ad);
  weight.node()->requires_grad = false;  // freeze the base weight
  if (bias.defined()) bias.node()->requires_grad = false;
}

void Linear::merge_adapter() {
  if (!adapter) return;
  Tensor w = effective_weight();
  weight.values() = w.values();
  adapter.reset();
}

std::vector<Tensor> Linear::trainable_adapter_params() const {
  std::vector<Tensor> out;
  if (!adapter) return out;
  out.push_back(adapter->b);
  out.push_back(adapter->a);
  if (adapter->m.defined()) out.push_back(adapter->m);
  return out;
}

long Linear::adapter_param_count() const {
  long n = 0;
  for (const auto& t : trainable_adapter_params()) n += static_cast<long>(t.size());
  return n;
}

long Linear::base_param_count() const {
  long n = static_cast<long>(weight.size());
  if (bias.defined()) n += static_cast<long>(bias.size());
  return n;
}

}  // namespace dff::autodiff
