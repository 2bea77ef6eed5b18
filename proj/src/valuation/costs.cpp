#include "dff/valuation/costs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dff::valuation {

double ds_cost(double p_g_plus, double p_g_minus, const CostParams& cost) {
  if (p_g_plus < 0.0 || p_g_minus > 0.0)
    throw std::domain_error("ds_cost: requires p_g_plus >= 0 and p_g_minus <= 0");
  const double ep = p_g_plus * kDtHours;
  const double em = p_g_minus * kDtHours;
  return cost.cq_plus * ep * ep + cost.cl_plus * ep + cost.cq_minus * em * em + cost.cl_minus * em;
}

double imbalance_cost(double delta_p_g, const CostParams& cost) {
  const double e = std::abs(delta_p_g * kDtHours);
  return cost.cq_delta * e * e + cost.cl_delta * e;
}

CostBreakdown total_cost(std::span<const double> ds_per_step,
                         std::span<const double> imb_per_step, double alpha) {
  CostBreakdown b;
  b.ds_per_step.assign(ds_per_step.begin(), ds_per_step.end());
  b.imb_per_step.assign(imb_per_step.begin(), imb_per_step.end());
  b.c_ds = std::accumulate(ds_per_step.begin(), ds_per_step.end(), 0.0);
  b.c_imb = std::accumulate(imb_per_step.begin(), imb_per_step.end(), 0.0);
  b.c_total = b.c_ds + alpha * b.c_imb;
  return b;
}

double average_daily_total_costs(const std::vector<double>& daily_totals) {
  if (daily_totals.empty())
    throw std::invalid_argument("average_daily_total_costs: empty outcome set");
  return mean(daily_totals);
}

namespace {
void check_lengths(std::span<const double> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size() || y.empty())
    throw std::invalid_argument("metric: length mismatch or empty input");
}
}  // namespace

double mae(std::span<const double> y, std::span<const double> y_hat) {
  check_lengths(y, y_hat);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - y_hat[i]);
  return s / static_cast<double>(y.size());
}

double mse(std::span<const double> y, std::span<const double> y_hat) {
  check_lengths(y, y_hat);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double d = y[i] - y_hat[i];
    s += d * d;
  }
  return s / static_cast<double>(y.size());
}

namespace {
std::vector<double> ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}
}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  auto ra = ranks(a);
  auto rb = ranks(b);
  double ma = mean(ra), mb = mean(rb);
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    double xa = ra[i] - ma, xb = rb[i] - mb;
    num += xa * xb;
    da += xa * xa;
    db += xb * xb;
  }
  if (da == 0.0 || db == 0.0) return 0.0;
  return num / std::sqrt(da * db);
}

double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean: empty input");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace dff::valuation
