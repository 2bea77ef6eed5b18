#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dff/core/types.hpp"

namespace dff {

/// Stand-in forecaster dimensions.
struct ModelParams {
  int patch_size = 6;
  int d_model = 64;
  int n_heads = 4;
  int n_layers = 2;
};

/// Adapter configuration shared by LoRA and DoRA jobs.
struct PeftParams {
  int rank = 8;
  double alpha = 32.0;
  double dropout = 0.0;
  std::vector<std::string> targets = {"v_proj", "q_proj", "k_proj", "out_proj"};
};

struct SurrogateParams {
  int hidden1 = 48;
  int hidden2 = 24;
  int ensemble_size = 5;
};

struct TrainingParams {
  double lr = 1e-4;  // fine-tune AdamW learning rate
  int batch_size = 32;
  int epochs = 5;  // fine-tune epochs, fixed-epoch protocol
  double weight_decay = 0.01;
  int pretrain_epochs = 10;
  double pretrain_lr = 1e-3;
  int surrogate_max_epochs = 80;
  int surrogate_patience = 5;
  double surrogate_lr = 1e-3;
  int surrogate_batch = 64;
  int n_augment = 4;  // noisy forecast variants per base forecast per day
  std::uint64_t base_seed = 0;
};

struct DataParams {
  std::string mode = "synthetic";  // "synthetic" | "csv"
  std::string path;
  int n_buildings = 20;
  int n_days = 120;
  std::uint64_t seed = 7;
};

/// Which fine-tune cells to run and with which seeds.
struct RunMatrix {
  std::vector<std::string> losses = {"surrogate", "mse", "mae"};
  std::vector<std::string> pefts = {"lora"};
  std::vector<std::string> modes = {"global"};
  std::vector<int> seeds = {0, 1, 2, 3, 4};
  int threads = 1;
  bool trace = false;
};

/// Full declarative description of one pipeline run.
struct ExperimentConfig {
  BatteryParams battery;
  CostParams cost;
  HorizonSpec horizon;
  SplitSpec splits = default_split_spec();
  ModelParams model;
  PeftParams peft;
  SurrogateParams surrogate;
  TrainingParams training;
  DataParams data;
  RunMatrix run;
};

/// Key-value text form, one key per parameter, nested sections in brackets.
std::string serialize_config(const ExperimentConfig& cfg);

/// Throws std::runtime_error on malformed syntax or unknown keys.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config_file(const std::string& path);
void save_config_file(const ExperimentConfig& cfg, const std::string& path);

/// Returns the list of invariant violations; empty means the config is usable.
std::vector<std::string> validate_config(const ExperimentConfig& cfg);

std::string format_id_set(const std::vector<int>& ids);
std::vector<int> parse_id_set(const std::string& text);

}  // namespace dff
