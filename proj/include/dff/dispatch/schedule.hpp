#pragma once

#include <span>
#include <vector>

#include "dff/core/types.hpp"
#include "dff/dispatch/battery.hpp"

namespace dff::dispatch {

/// First-level solution: committed grid exchange and the battery plan behind it.
/// All step vectors have the horizon length; e_s has length + 1 with e_s[0] = e0.
struct DispatchSchedule {
  std::vector<double> p_g, p_g_plus, p_g_minus;
  std::vector<double> p_s, p_s_plus, p_s_minus;
  std::vector<double> e_s;
  double objective = 0.0;  // sum of per-step DS costs, EUR
  bool used_branch_and_bound = false;
  int qp_iterations = 0;
};

struct SolveOptions {
  double complementarity_branch_tol = 1e-9;  // branch when min(p+, -p-) exceeds this
  int max_nodes = 4096;
  bool force_full_enumeration = false;  // test hook: enumerate every direction pattern
};

/// Day-ahead schedule minimizing total DS cost subject to battery dynamics,
/// split complementarity and power/energy bounds. Stage 1 solves the convex
/// relaxation without the complementarity constraint; stage 2 runs
/// branch-and-bound over per-step charge/discharge indicators when the
/// relaxation leaves simultaneous splits.
DispatchSchedule solve_day_ahead(std::span<const double> forecast, double e0,
                                 const BatteryParams& battery, const CostParams& cost,
                                 const SolveOptions& opts = {});

/// Worst-case constraint violations of a schedule; used by tests and the
/// post-solve sanity check.
struct ScheduleCheck {
  double split_identity = 0.0;     // |p_g - (p_g_plus + p_g_minus)|, |p_s - ...|
  double complementarity = 0.0;    // max |p_s_plus * p_s_minus|
  double grid_complement = 0.0;    // max |p_g_plus * p_g_minus|
  double dynamics = 0.0;           // SoC recursion residual
  double bounds = 0.0;             // power/energy bound violation
  double balance = 0.0;            // |p_g - (p_s + forecast)|
};
ScheduleCheck check_schedule(const DispatchSchedule& s, std::span<const double> forecast,
                             double e0, const BatteryParams& battery);

}  // namespace dff::dispatch
