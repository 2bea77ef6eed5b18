#pragma once

#include "dff/core/types.hpp"

namespace dff::dispatch {

inline constexpr double kSocTol = 1e-6;  // kWh

struct BatteryState {
  double energy = 0.0;  // kWh
};

/// State-of-energy update with charge/discharge losses:
/// energy' = energy + dt * ((p_plus + p_minus) - mu*p_plus + mu*p_minus).
/// Requires p_s_plus >= 0 and p_s_minus <= 0; throws when the result leaves
/// [e_min - tol, e_max + tol].
BatteryState step_soc(BatteryState state, double p_s_plus, double p_s_minus,
                      const BatteryParams& params);

/// Largest feasible net battery power interval [lb, ub] from a given state;
/// always contains 0 for in-bound states.
struct PowerInterval {
  double lb = 0.0;
  double ub = 0.0;
};
PowerInterval feasible_power(BatteryState state, const BatteryParams& params);

struct DispatchStepResult {
  double p_s = 0.0;        // realized net battery power
  double p_g_actual = 0.0; // realized grid exchange
  double delta_p_g = 0.0;  // deviation from schedule
  BatteryState state;      // after the step
};

/// Second-level dispatch, closed form: track the schedule as closely as the
/// battery allows. Minimizes (delta_p_g)^2 subject to power/energy bounds and
/// the complementary charge/discharge split.
DispatchStepResult dispatch_step(double scheduled_p_g, double actual_load, BatteryState state,
                                 const BatteryParams& params);

}  // namespace dff::dispatch
