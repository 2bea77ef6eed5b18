#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dff/core/time.hpp"

namespace dff {

/// Scheduling interval length. Power in kW over one step equals energy in kWh.
inline constexpr double kDtHours = 1.0;

/// Position on the shared hourly grid: index 0 corresponds to the dataset epoch.
struct TimePoint {
  std::int64_t index = 0;
  HourTime timestamp{};
};

/// One building's hourly prosumption series (kW), aligned to the dataset grid.
/// load/pv are kept when the raw data provided them; prosumption = load - pv.
struct BuildingSeries {
  int building_id = 0;
  std::vector<double> prosumption;
  std::vector<double> load;  // empty when unavailable
  std::vector<double> pv;    // empty when unavailable
};

/// A set of building series sharing one epoch and grid length.
struct Dataset {
  HourTime epoch{};
  std::vector<BuildingSeries> buildings;

  std::int64_t hour_index(HourTime t) const { return (t - epoch).count(); }
  HourTime time_at(std::int64_t index) const { return epoch + Hours{index}; }
  std::size_t n_hours() const { return buildings.empty() ? 0 : buildings.front().prosumption.size(); }
  const BuildingSeries* find(int building_id) const;
};

/// Battery limits and loss model. Positive battery power charges (energy increases).
struct BatteryParams {
  double p_min = -5.0;   // kW
  double p_max = 5.0;    // kW
  double e_min = 0.0;    // kWh
  double e_max = 13.5;   // kWh
  double mu = 0.05;      // charge/discharge loss coefficient
  double e_init = 6.75;  // kWh, day-1 state of energy
};

/// Grid-exchange and imbalance cost coefficients (EUR per kWh / kWh^2).
struct CostParams {
  double cq_plus = 0.05;
  double cl_plus = 0.3;
  double cq_minus = 0.05;
  double cl_minus = 0.15;
  double cq_delta = 0.05;
  double cl_delta = 0.3;
  double alpha = 10.0;  // imbalance weight
};

/// Forecast/scheduling geometry: 168h context ending at noon, 42h forecast,
/// 30 scheduled steps starting at the upcoming midnight.
struct HorizonSpec {
  int context_hours = 168;
  int forecast_hours = 42;
  int anchor_hour = 12;
  int schedule_steps = 30;
  int schedule_start_offset = 12;
};

/// Temporal and building-dimension partition of the corpus.
struct SplitSpec {
  DateRange train_range;
  DateRange val_range;
  DateRange test_range;
  std::vector<int> finetune_buildings;       // default 1..50
  std::vector<int> surrogate_val_buildings;  // default 51..100
  std::vector<int> eval_buildings;           // default 101..300
};

std::vector<int> id_range(int lo, int hi);
bool contains_id(const std::vector<int>& ids, int id);

SplitSpec default_split_spec();

}  // namespace dff
