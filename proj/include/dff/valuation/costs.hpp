#pragma once

#include <span>
#include <vector>

#include "dff/core/types.hpp"

namespace dff::valuation {

/// Daily cost split: c_total = c_ds + alpha * c_imb.
struct CostBreakdown {
  double c_ds = 0.0;
  double c_imb = 0.0;  // unweighted imbalance sum
  double c_total = 0.0;
  std::vector<double> ds_per_step;
  std::vector<double> imb_per_step;
};

/// Grid-exchange cost of one scheduled step. p_g_plus >= 0 (import), p_g_minus <= 0 (export);
/// the export linear term earns revenue, so the result may be negative.
double ds_cost(double p_g_plus, double p_g_minus, const CostParams& cost);

/// Deviation penalty for one step; symmetric in the sign of the deviation.
double imbalance_cost(double delta_p_g, const CostParams& cost);

CostBreakdown total_cost(std::span<const double> ds_per_step,
                         std::span<const double> imb_per_step, double alpha);

/// Mean daily total cost over all (day, building) pairs. Throws on an empty set.
double average_daily_total_costs(const std::vector<double>& daily_totals);

double mae(std::span<const double> y, std::span<const double> y_hat);
double mse(std::span<const double> y, std::span<const double> y_hat);

/// Spearman rank correlation; average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> v);
double sample_std(std::span<const double> v);  // n-1 denominator, 0 for n < 2

}  // namespace dff::valuation
