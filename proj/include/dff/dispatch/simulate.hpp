#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dff/core/types.hpp"
#include "dff/dispatch/schedule.hpp"
#include "dff/valuation/costs.hpp"

namespace dff::dispatch {

/// One scheduled day: committed schedule, realized dispatch and billed costs.
struct DispatchOutcome {
  DispatchSchedule schedule;
  std::vector<double> actual_p_g;
  std::vector<double> deviations;
  std::vector<double> soc;  // length simulated_steps + 1, soc[0] = schedule-start energy
  valuation::CostBreakdown cost;  // over the billed steps
  double e0 = 0.0;
  BatteryState end_state;  // after the billed steps
};

struct SimulateDayOptions {
  int billed_steps = 24;  // clamped to the scheduling horizon
};

/// Full single-day protocol from the noon decision point: roll the
/// second-level dispatch over the bridge hours against the previous day's
/// still-active schedule (hold policy when absent: the feeder tracks the
/// actual load with the battery idle), solve the day-ahead schedule from the
/// estimated midnight energy, then dispatch the scheduled steps against
/// actuals and bill the first 24.
DispatchOutcome simulate_day(std::span<const double> forecast, std::span<const double> actual,
                             BatteryState state_at_noon, std::span<const double> prev_schedule_tail,
                             const BatteryParams& battery, const CostParams& cost,
                             const HorizonSpec& horizon, const SolveOptions& solve_opts = {},
                             const SimulateDayOptions& day_opts = {});

/// Per-day record of a consecutive multi-day simulation.
struct DayResult {
  std::int64_t day = 0;  // day index from the series start
  DispatchSchedule schedule;
  std::vector<double> actual_p_g;   // billed hours
  std::vector<double> deviations;   // billed hours
  std::vector<double> soc;          // billed hours + 1
  valuation::CostBreakdown cost;
};

/// Yields the forecast (forecast_hours values) anchored at the given hour index.
using ForecastFn = std::function<std::vector<double>(std::int64_t anchor_index)>;

/// Simulates scheduled days [first_day, last_day] of one building. Each day's
/// schedule is solved at the previous noon; the midnight start energy is the
/// exact simulated state because the bridge hours are dispatched against
/// actuals. Day-1 starts from e_init.
std::vector<DayResult> simulate_days(std::span<const double> series, std::int64_t first_day,
                                     std::int64_t last_day, const ForecastFn& forecast,
                                     const BatteryParams& battery, const CostParams& cost,
                                     const HorizonSpec& horizon,
                                     const SolveOptions& solve_opts = {});

}  // namespace dff::dispatch
