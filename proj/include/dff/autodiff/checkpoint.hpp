#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dff/autodiff/adapter.hpp"

namespace dff::autodiff {

struct NamedTensor {
  std::string name;
  int rows = 0, cols = 0;
  std::vector<double> data;
};

/// Versioned container of named tensors. Adapters are stored separately from
/// base weights so zero-shot and fine-tuned variants share one base file.
struct Checkpoint {
  int version = 1;
  std::string kind;  // "base" | "adapter" | "surrogate" | "scaler"
  std::optional<AdapterSpec> adapter_spec;
  std::vector<NamedTensor> tensors;
  std::map<std::string, std::string> meta;

  const NamedTensor* find(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dff::autodiff
