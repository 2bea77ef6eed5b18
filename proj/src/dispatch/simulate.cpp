#include "dff/dispatch/simulate.hpp"

#include <algorithm>
#include <stdexcept>

namespace dff::dispatch {

DispatchOutcome simulate_day(std::span<const double> forecast, std::span<const double> actual,
                             BatteryState state_at_noon, std::span<const double> prev_schedule_tail,
                             const BatteryParams& battery, const CostParams& cost,
                             const HorizonSpec& horizon, const SolveOptions& solve_opts,
                             const SimulateDayOptions& day_opts) {
  const int offset = horizon.schedule_start_offset;
  const int steps = horizon.schedule_steps;
  if (static_cast<int>(forecast.size()) != horizon.forecast_hours ||
      static_cast<int>(actual.size()) != horizon.forecast_hours)
    throw std::invalid_argument("simulate_day: series length must equal forecast_hours");
  if (!prev_schedule_tail.empty() && static_cast<int>(prev_schedule_tail.size()) != offset)
    throw std::invalid_argument("simulate_day: previous schedule tail must cover the bridge hours");

  BatteryState state = state_at_noon;
  for (int h = 0; h < offset; ++h) {
    const double sched_pg =
        prev_schedule_tail.empty() ? actual[static_cast<std::size_t>(h)]
                                   : prev_schedule_tail[static_cast<std::size_t>(h)];
    state = dispatch_step(sched_pg, actual[static_cast<std::size_t>(h)], state, battery).state;
  }

  DispatchOutcome out;
  out.e0 = state.energy;
  out.schedule = solve_day_ahead(forecast.subspan(static_cast<std::size_t>(offset),
                                                  static_cast<std::size_t>(steps)),
                                 state.energy, battery, cost, solve_opts);

  const int billed = std::min(day_opts.billed_steps, steps);
  out.actual_p_g.resize(static_cast<std::size_t>(steps));
  out.deviations.resize(static_cast<std::size_t>(steps));
  out.soc.resize(static_cast<std::size_t>(steps) + 1);
  out.soc[0] = state.energy;
  std::vector<double> ds(static_cast<std::size_t>(billed)), imb(static_cast<std::size_t>(billed));
  for (int k = 0; k < steps; ++k) {
    auto r = dispatch_step(out.schedule.p_g[static_cast<std::size_t>(k)],
                           actual[static_cast<std::size_t>(offset + k)], state, battery);
    state = r.state;
    out.actual_p_g[static_cast<std::size_t>(k)] = r.p_g_actual;
    out.deviations[static_cast<std::size_t>(k)] = r.delta_p_g;
    out.soc[static_cast<std::size_t>(k) + 1] = state.energy;
    if (k < billed) {
      ds[static_cast<std::size_t>(k)] =
          valuation::ds_cost(out.schedule.p_g_plus[static_cast<std::size_t>(k)],
                             out.schedule.p_g_minus[static_cast<std::size_t>(k)], cost);
      imb[static_cast<std::size_t>(k)] = valuation::imbalance_cost(r.delta_p_g, cost);
    }
    if (k == billed - 1) out.end_state = state;
  }
  out.cost = valuation::total_cost(ds, imb, cost.alpha);
  return out;
}

std::vector<DayResult> simulate_days(std::span<const double> series, std::int64_t first_day,
                                     std::int64_t last_day, const ForecastFn& forecast,
                                     const BatteryParams& battery, const CostParams& cost,
                                     const HorizonSpec& horizon, const SolveOptions& solve_opts) {
  const int offset = horizon.schedule_start_offset;
  const int steps = horizon.schedule_steps;
  const int billed = std::min(24, steps);
  if ((last_day + 1) * 24 > static_cast<std::int64_t>(series.size()))
    throw std::invalid_argument("simulate_days: series too short for the requested day range");

  std::vector<DayResult> out;
  BatteryState state{battery.e_init};
  for (std::int64_t day = first_day; day <= last_day; ++day) {
    const std::int64_t anchor = (day - 1) * 24 + horizon.anchor_hour;
    std::vector<double> fc = forecast(anchor);
    if (static_cast<int>(fc.size()) != horizon.forecast_hours)
      throw std::runtime_error("simulate_days: forecaster returned wrong horizon length");

    DayResult r;
    r.day = day;
    r.schedule = solve_day_ahead(
        std::span<const double>(fc).subspan(static_cast<std::size_t>(offset),
                                            static_cast<std::size_t>(steps)),
        state.energy, battery, cost, solve_opts);

    std::vector<double> ds(static_cast<std::size_t>(billed)), imb(static_cast<std::size_t>(billed));
    r.actual_p_g.resize(static_cast<std::size_t>(billed));
    r.deviations.resize(static_cast<std::size_t>(billed));
    r.soc.resize(static_cast<std::size_t>(billed) + 1);
    r.soc[0] = state.energy;
    for (int k = 0; k < billed; ++k) {
      const double load = series[static_cast<std::size_t>(day * 24 + k)];
      auto step = dispatch_step(r.schedule.p_g[static_cast<std::size_t>(k)], load, state, battery);
      state = step.state;
      r.actual_p_g[static_cast<std::size_t>(k)] = step.p_g_actual;
      r.deviations[static_cast<std::size_t>(k)] = step.delta_p_g;
      r.soc[static_cast<std::size_t>(k) + 1] = state.energy;
      ds[static_cast<std::size_t>(k)] =
          valuation::ds_cost(r.schedule.p_g_plus[static_cast<std::size_t>(k)],
                             r.schedule.p_g_minus[static_cast<std::size_t>(k)], cost);
      imb[static_cast<std::size_t>(k)] = valuation::imbalance_cost(step.delta_p_g, cost);
    }
    r.cost = valuation::total_cost(ds, imb, cost.alpha);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace dff::dispatch
