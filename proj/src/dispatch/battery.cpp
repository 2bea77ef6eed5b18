#include "dff/dispatch/battery.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dff::dispatch {

BatteryState step_soc(BatteryState state, double p_s_plus, double p_s_minus,
                      const BatteryParams& params) {
  if (p_s_plus < 0.0 || p_s_minus > 0.0)
    throw std::domain_error("step_soc: requires p_s_plus >= 0 and p_s_minus <= 0");
  const double e =
      state.energy + kDtHours * ((p_s_plus + p_s_minus) - params.mu * p_s_plus + params.mu * p_s_minus);
  if (e < params.e_min - kSocTol || e > params.e_max + kSocTol)
    throw std::runtime_error("step_soc: infeasible step, energy " + std::to_string(e) +
                             " outside [" + std::to_string(params.e_min) + ", " +
                             std::to_string(params.e_max) + "]");
  return BatteryState{e};
}

PowerInterval feasible_power(BatteryState state, const BatteryParams& params) {
  PowerInterval iv;
  iv.lb = std::max(params.p_min, (params.e_min - state.energy) / (kDtHours * (1.0 + params.mu)));
  iv.ub = std::min(params.p_max, (params.e_max - state.energy) / (kDtHours * (1.0 - params.mu)));
  // in-bound states always admit p_s = 0; tolerate SoC rounding at the rim
  if (iv.lb > 0.0 && iv.lb < kSocTol) iv.lb = 0.0;
  if (iv.ub < 0.0 && iv.ub > -kSocTol) iv.ub = 0.0;
  return iv;
}

DispatchStepResult dispatch_step(double scheduled_p_g, double actual_load, BatteryState state,
                                 const BatteryParams& params) {
  if (state.energy < params.e_min - kSocTol || state.energy > params.e_max + kSocTol)
    throw std::runtime_error("dispatch_step: state of energy out of bounds");
  const double p_star = scheduled_p_g - actual_load;
  const PowerInterval iv = feasible_power(state, params);
  const double p_s = std::clamp(p_star, iv.lb, iv.ub);

  DispatchStepResult r;
  r.p_s = p_s;
  // delta = (p_s + load) - scheduled == p_s - p_star; the latter form is exact
  // when the clamp is inactive.
  r.delta_p_g = p_s - p_star;
  r.p_g_actual = scheduled_p_g + r.delta_p_g;
  r.state = step_soc(state, std::max(p_s, 0.0), std::min(p_s, 0.0), params);
  return r;
}

}  // namespace dff::dispatch
