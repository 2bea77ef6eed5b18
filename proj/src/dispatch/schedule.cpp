#include "dff/dispatch/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dff/dispatch/qp.hpp"
#include "dff/valuation/costs.hpp"

namespace dff::dispatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSplitReg = 1e-7;  // breaks split degeneracy; favors complementary plans

// Variable layout per step k over horizon T:
//   a = p_s_plus [0,T)   b = p_s_minus [T,2T)  g = p_g_plus [2T,3T)
//   h = p_g_minus [3T,4T)  s = p_s net [4T,5T)  E = energy after step [5T,6T)
struct Layout {
  int T;
  int a(int k) const { return k; }
  int b(int k) const { return T + k; }
  int g(int k) const { return 2 * T + k; }
  int h(int k) const { return 3 * T + k; }
  int s(int k) const { return 4 * T + k; }
  int e(int k) const { return 5 * T + k; }
  int n() const { return 6 * T; }
  int m() const { return 3 * T; }
};

// -1 = discharge only (a fixed 0), +1 = charge only (b fixed 0), 0 = free
using Directions = std::vector<int>;

BoxQp build_qp(std::span<const double> forecast, double e0, const BatteryParams& bat,
               const CostParams& cost, const Directions& dirs) {
  const Layout L{static_cast<int>(forecast.size())};
  BoxQp qp;
  qp.q = Eigen::VectorXd::Zero(L.n());
  qp.c = Eigen::VectorXd::Zero(L.n());
  qp.lo = Eigen::VectorXd::Constant(L.n(), -kInf);
  qp.hi = Eigen::VectorXd::Constant(L.n(), kInf);
  qp.a = Eigen::MatrixXd::Zero(L.m(), L.n());
  qp.b = Eigen::VectorXd::Zero(L.m());

  const double dt2 = kDtHours * kDtHours;
  for (int k = 0; k < L.T; ++k) {
    qp.q[L.g(k)] = 2.0 * cost.cq_plus * dt2;
    qp.c[L.g(k)] = cost.cl_plus * kDtHours;
    qp.q[L.h(k)] = 2.0 * cost.cq_minus * dt2;
    qp.c[L.h(k)] = cost.cl_minus * kDtHours;
    qp.c[L.a(k)] = kSplitReg;
    qp.c[L.b(k)] = -kSplitReg;

    qp.lo[L.a(k)] = 0.0;
    qp.hi[L.a(k)] = (dirs[static_cast<std::size_t>(k)] < 0) ? 0.0 : bat.p_max;
    qp.lo[L.b(k)] = (dirs[static_cast<std::size_t>(k)] > 0) ? 0.0 : bat.p_min;
    qp.hi[L.b(k)] = 0.0;
    qp.lo[L.g(k)] = 0.0;
    qp.hi[L.g(k)] = std::max(0.0, forecast[static_cast<std::size_t>(k)] + bat.p_max);
    qp.lo[L.h(k)] = std::min(0.0, forecast[static_cast<std::size_t>(k)] + bat.p_min);
    qp.hi[L.h(k)] = 0.0;
    qp.lo[L.s(k)] = bat.p_min;
    qp.hi[L.s(k)] = bat.p_max;
    qp.lo[L.e(k)] = bat.e_min;
    qp.hi[L.e(k)] = bat.e_max;

    // grid balance: g + h - s = forecast
    qp.a(k, L.g(k)) = 1.0;
    qp.a(k, L.h(k)) = 1.0;
    qp.a(k, L.s(k)) = -1.0;
    qp.b[k] = forecast[static_cast<std::size_t>(k)];
    // battery split: a + b - s = 0
    qp.a(L.T + k, L.a(k)) = 1.0;
    qp.a(L.T + k, L.b(k)) = 1.0;
    qp.a(L.T + k, L.s(k)) = -1.0;
    // dynamics: E_k - E_{k-1} - dt((1-mu) a + (1+mu) b) = [e0 for k=0]
    qp.a(2 * L.T + k, L.e(k)) = 1.0;
    if (k > 0) qp.a(2 * L.T + k, L.e(k - 1)) = -1.0;
    qp.a(2 * L.T + k, L.a(k)) = -kDtHours * (1.0 - bat.mu);
    qp.a(2 * L.T + k, L.b(k)) = -kDtHours * (1.0 + bat.mu);
    qp.b[2 * L.T + k] = (k == 0) ? e0 : 0.0;
  }
  return qp;
}

DispatchSchedule extract(const BoxQpResult& res, std::span<const double> forecast, double e0,
                         const BatteryParams& bat, const CostParams& cost, double branch_tol) {
  const Layout L{static_cast<int>(forecast.size())};
  DispatchSchedule s;
  s.qp_iterations = res.iterations;
  s.p_s_plus.resize(L.T);
  s.p_s_minus.resize(L.T);
  s.p_s.resize(L.T);
  s.p_g.resize(L.T);
  s.p_g_plus.resize(L.T);
  s.p_g_minus.resize(L.T);
  s.e_s.resize(L.T + 1);
  s.e_s[0] = e0;

  BatteryState state{e0};
  for (int k = 0; k < L.T; ++k) {
    double a = std::max(0.0, res.x[L.a(k)]);
    double b = std::min(0.0, res.x[L.b(k)]);
    // residual simultaneity below the branch tolerance is folded into the
    // sign split of the net power so the second level can track it exactly
    if (std::min(a, -b) <= branch_tol) {
      double net = a + b;
      a = std::max(net, 0.0);
      b = std::min(net, 0.0);
    }
    s.p_s_plus[static_cast<std::size_t>(k)] = a;
    s.p_s_minus[static_cast<std::size_t>(k)] = b;
    double net = a + b;
    s.p_s[static_cast<std::size_t>(k)] = net;
    double pg = net + forecast[static_cast<std::size_t>(k)];
    s.p_g[static_cast<std::size_t>(k)] = pg;
    s.p_g_plus[static_cast<std::size_t>(k)] = std::max(pg, 0.0);
    s.p_g_minus[static_cast<std::size_t>(k)] = std::min(pg, 0.0);
    state.energy = state.energy +
                   kDtHours * ((a + b) - bat.mu * a + bat.mu * b);
    s.e_s[static_cast<std::size_t>(k) + 1] = state.energy;
    s.objective += valuation::ds_cost(s.p_g_plus[static_cast<std::size_t>(k)],
                                      s.p_g_minus[static_cast<std::size_t>(k)], cost);
  }
  return s;
}

std::vector<int> violated_steps(const BoxQpResult& res, int T, double tol) {
  const Layout L{T};
  std::vector<int> out;
  for (int k = 0; k < T; ++k) {
    double a = std::max(0.0, res.x[L.a(k)]);
    double b = std::min(0.0, res.x[L.b(k)]);
    if (std::min(a, -b) > tol) out.push_back(k);
  }
  return out;
}

// Simultaneous splits with equal net power leave the objective unchanged, so
// a relaxation optimum on that degenerate face can often be replaced by its
// sign-split twin. The collapse removes the energy burned by the overlap; it
// is only valid when the raised trajectory still fits under e_max.
bool try_complementary_repair(BoxQpResult& res, std::span<const double> forecast, double e0,
                              const BatteryParams& bat) {
  const Layout L{static_cast<int>(forecast.size())};
  Eigen::VectorXd x = res.x;
  double e = e0;
  for (int k = 0; k < L.T; ++k) {
    double net = x[L.a(k)] + x[L.b(k)];
    double a = std::max(net, 0.0), b = std::min(net, 0.0);
    e += kDtHours * ((a + b) - bat.mu * a + bat.mu * b);
    if (e > bat.e_max + 1e-12 || e < bat.e_min - 1e-12) return false;
    x[L.a(k)] = a;
    x[L.b(k)] = b;
    x[L.e(k)] = e;
  }
  res.x = std::move(x);
  return true;
}

struct BnbContext {
  std::span<const double> forecast;
  double e0;
  const BatteryParams* bat;
  const CostParams* cost;
  const SolveOptions* opts;
  double best_obj = kInf;
  BoxQpResult best;
  bool have_best = false;
  int nodes = 0;
};

void bnb(BnbContext& ctx, Directions& dirs) {
  if (ctx.nodes >= ctx.opts->max_nodes) return;
  ++ctx.nodes;
  BoxQp qp = build_qp(ctx.forecast, ctx.e0, *ctx.bat, *ctx.cost, dirs);
  BoxQpResult res = solve_box_qp(qp);
  if (!ctx.opts->force_full_enumeration && res.objective >= ctx.best_obj - 1e-9) return;

  if (!violated_steps(res, static_cast<int>(ctx.forecast.size()),
                      ctx.opts->complementarity_branch_tol)
           .empty())
    try_complementary_repair(res, ctx.forecast, ctx.e0, *ctx.bat);
  auto violated = violated_steps(res, static_cast<int>(ctx.forecast.size()),
                                 ctx.opts->complementarity_branch_tol);
  std::vector<int> open;
  for (int k : violated)
    if (dirs[static_cast<std::size_t>(k)] == 0) open.push_back(k);
  if (ctx.opts->force_full_enumeration) {
    open.clear();
    for (int k = 0; k < static_cast<int>(dirs.size()); ++k)
      if (dirs[static_cast<std::size_t>(k)] == 0) {
        open.push_back(k);
        break;
      }
  }

  if (open.empty()) {
    if (res.objective < ctx.best_obj) {
      ctx.best_obj = res.objective;
      ctx.best = res;
      ctx.have_best = true;
    }
    return;
  }
  int k = open.front();
  dirs[static_cast<std::size_t>(k)] = 1;  // charge branch first
  bnb(ctx, dirs);
  dirs[static_cast<std::size_t>(k)] = -1;
  bnb(ctx, dirs);
  dirs[static_cast<std::size_t>(k)] = 0;
}

}  // namespace

DispatchSchedule solve_day_ahead(std::span<const double> forecast, double e0,
                                 const BatteryParams& battery, const CostParams& cost,
                                 const SolveOptions& opts) {
  const int T = static_cast<int>(forecast.size());
  if (T == 0) throw std::invalid_argument("solve_day_ahead: empty forecast");
  for (double f : forecast)
    if (!std::isfinite(f)) throw std::invalid_argument("solve_day_ahead: non-finite forecast");
  if (e0 < battery.e_min - 1e-9 || e0 > battery.e_max + 1e-9)
    throw std::invalid_argument("solve_day_ahead: e0 outside energy bounds");
  e0 = std::clamp(e0, battery.e_min, battery.e_max);

  Directions dirs(static_cast<std::size_t>(T), 0);
  BoxQp qp = build_qp(forecast, e0, battery, cost, dirs);
  BoxQpResult relax = solve_box_qp(qp);
  if (!violated_steps(relax, T, opts.complementarity_branch_tol).empty())
    try_complementary_repair(relax, forecast, e0, battery);
  auto violated = violated_steps(relax, T, opts.complementarity_branch_tol);

  if (violated.empty() && !opts.force_full_enumeration)
    return extract(relax, forecast, e0, battery, cost, opts.complementarity_branch_tol);

  BnbContext ctx{forecast, e0, &battery, &cost, &opts};

  // rounding incumbent: force the larger split side on every violated step
  {
    const Layout L{T};
    Directions fixed = dirs;
    for (int k : violated)
      fixed[static_cast<std::size_t>(k)] = (relax.x[L.a(k)] >= -relax.x[L.b(k)]) ? 1 : -1;
    BoxQpResult inc = solve_box_qp(build_qp(forecast, e0, battery, cost, fixed));
    if (violated_steps(inc, T, opts.complementarity_branch_tol).empty()) {
      ctx.best_obj = inc.objective;
      ctx.best = inc;
      ctx.have_best = true;
    }
  }

  bnb(ctx, dirs);
  if (!ctx.have_best)
    throw std::runtime_error("solve_day_ahead: branch-and-bound found no feasible schedule");
  DispatchSchedule s =
      extract(ctx.best, forecast, e0, battery, cost, opts.complementarity_branch_tol);
  s.used_branch_and_bound = true;
  return s;
}

ScheduleCheck check_schedule(const DispatchSchedule& s, std::span<const double> forecast,
                             double e0, const BatteryParams& bat) {
  ScheduleCheck c;
  const std::size_t T = s.p_g.size();
  double e = e0;
  c.bounds = std::max(c.bounds, std::max(bat.e_min - e0, e0 - bat.e_max));
  for (std::size_t k = 0; k < T; ++k) {
    c.split_identity = std::max(c.split_identity,
                                std::abs(s.p_g[k] - (s.p_g_plus[k] + s.p_g_minus[k])));
    c.split_identity = std::max(c.split_identity,
                                std::abs(s.p_s[k] - (s.p_s_plus[k] + s.p_s_minus[k])));
    c.complementarity = std::max(c.complementarity, std::abs(s.p_s_plus[k] * s.p_s_minus[k]));
    c.grid_complement = std::max(c.grid_complement, std::abs(s.p_g_plus[k] * s.p_g_minus[k]));
    c.balance = std::max(c.balance, std::abs(s.p_g[k] - (s.p_s[k] + forecast[k])));
    e = e + kDtHours * ((s.p_s_plus[k] + s.p_s_minus[k]) - bat.mu * s.p_s_plus[k] +
                        bat.mu * s.p_s_minus[k]);
    c.dynamics = std::max(c.dynamics, std::abs(e - s.e_s[k + 1]));
    c.bounds = std::max({c.bounds, bat.e_min - s.e_s[k + 1], s.e_s[k + 1] - bat.e_max,
                         bat.p_min - s.p_s[k], s.p_s[k] - bat.p_max, -s.p_s_plus[k],
                         s.p_s_minus[k], -s.p_g_plus[k], s.p_g_minus[k]});
  }
  return c;
}

}  // namespace dff::dispatch
