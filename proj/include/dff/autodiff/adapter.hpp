#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dff/core/rng.hpp"
#include "dff/autodiff/tensor.hpp"

namespace dff::autodiff {

enum class PeftMethod { lora, dora };

PeftMethod peft_from_string(const std::string& s);
std::string to_string(PeftMethod m);

struct AdapterSpec {
  PeftMethod method = PeftMethod::lora;
  int rank = 8;
  double alpha = 32.0;
  double dropout = 0.0;
  std::vector<std::string> target_modules = {"v_proj", "q_proj", "k_proj", "out_proj"};

  double scale() const { return alpha / static_cast<double>(rank); }
};

/// Low-rank reparameterization attached to one weight matrix (out x in):
///   lora: W' = W0 + scale * B A
///   dora: W' = m .* (W0 + scale * B A) / ||W0 + scale * B A||_c
struct Adapter {
  PeftMethod method = PeftMethod::lora;
  double scale = 4.0;
  Tensor b;  // out x rank, zero-initialized so W' starts at W0
  Tensor a;  // rank x in, small uniform
  Tensor m;  // 1 x in column magnitudes, dora only
};

/// Linear layer y = x W' + bias with an optional adapter behind the weight.
/// The base weight is frozen while an adapter is attached.
struct Linear {
  std::string name;
  Tensor weight;  // out x in
  Tensor bias;    // 1 x out, may be undefined
  std::optional<Adapter> adapter;

  static Linear make(const std::string& name, int out, int in, Rng& rng, bool with_bias = true);

  Tensor effective_weight() const;  // graph expression, out x in
  Tensor forward(const Tensor& x) const;

  void attach_adapter(const AdapterSpec& spec, Rng& rng);
  void detach_adapter() { adapter.reset(); }
  /// Evaluates the effective weight once and folds it into the base weight.
  void merge_adapter();

  std::vector<Tensor> trainable_adapter_params() const;
  long adapter_param_count() const;
  long base_param_count() const;
};

}  // namespace dff::autodiff
