#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dff/core/types.hpp"

namespace dff::ingest {

enum class Channel { consumption, generation };

/// One half-hourly meter reading; value is kWh over the 30-minute interval.
struct RawRecord {
  int building_id = 0;
  Channel channel = Channel::consumption;
  HourTime hour{};      // hour containing the interval
  int half = 0;         // 0 = first half hour, 1 = second
  double value_kwh = 0.0;
};

/// Sums half-hour kWh pairs into hourly values interpreted as mean kW
/// (dt = 1h makes them numerically equal); prosumption = load - pv, unscaled.
/// Throws on missing half-hours (gap) and duplicate records (ambiguity).
Dataset resample_hourly(const std::vector<RawRecord>& records);

/// Per-building, per-range views into a dataset.
struct SplitView {
  int building_id = 0;
  std::int64_t begin_index = 0;  // inclusive hour index
  std::int64_t end_index = 0;    // exclusive
};

struct PartitionedDataset {
  const Dataset* data = nullptr;
  std::vector<SplitView> finetune_train, finetune_val, finetune_test;
  std::vector<SplitView> surrogate_val_train, surrogate_val_val, surrogate_val_test;
  std::vector<SplitView> eval_train, eval_val, eval_test;
};

/// Eval views exclude the surrogate-validation buildings by construction.
PartitionedDataset split(const Dataset& data, const SplitSpec& spec);

/// Deterministic synthetic corpus: daily sinusoidal load with weekly
/// modulation, a solar bell curve scaled by per-building PV capacity, and
/// AR(1) noise; |prosumption| <= 10 kW. Substitute for the licensed dataset.
Dataset generate_synthetic(int n_buildings, int n_days, std::uint64_t seed);

/// Raw CSV loading. Accepts the wide half-hourly layout
/// (customer id, capacity, category, date, 48 half-hour columns) and the long
/// layout (building_id, channel, timestamp, value).
std::vector<RawRecord> load_raw_csv(const std::string& path);

/// Canonical columnar file: building_id, timestamp, prosumption_kW.
void write_canonical_csv(const Dataset& data, const std::vector<SplitView>& views,
                         const std::string& path);
Dataset read_canonical_csv(const std::string& path);

}  // namespace dff::ingest
