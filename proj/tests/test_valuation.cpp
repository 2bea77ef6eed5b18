#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dff/core/rng.hpp"
#include "dff/valuation/costs.hpp"

using namespace dff;
using namespace dff::valuation;

TEST_CASE("ds_cost matches hand evaluation with reference coefficients") {
  CostParams c;
  CHECK(ds_cost(0.0, 0.0, c) == doctest::Approx(0.0).epsilon(1e-12));
  // 0.05*4 + 0.3*2
  CHECK(ds_cost(2.0, 0.0, c) == doctest::Approx(0.8).epsilon(1e-12));
  // 0.05*4 - 0.15*2
  CHECK(ds_cost(0.0, -2.0, c) == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK_THROWS_AS(ds_cost(-1.0, 0.0, c), std::domain_error);
  CHECK_THROWS_AS(ds_cost(0.0, 1.0, c), std::domain_error);
}

TEST_CASE("imbalance_cost is symmetric") {
  CostParams c;
  CHECK(imbalance_cost(0.0, c) == 0.0);
  CHECK(imbalance_cost(2.0, c) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(imbalance_cost(-2.0, c) == doctest::Approx(0.8).epsilon(1e-12));
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    double d = rng.uniform(-8.0, 8.0);
    CHECK(imbalance_cost(d, c) == imbalance_cost(-d, c));
    CHECK(imbalance_cost(d, c) >= 0.0);
  }
}

TEST_CASE("total_cost applies the imbalance weight") {
  std::vector<double> ds = {1.0};
  std::vector<double> imb = {0.5};
  auto b = total_cost(ds, imb, 10.0);
  CHECK(b.c_total == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(b.c_total == doctest::Approx(b.c_ds + 10.0 * b.c_imb).epsilon(1e-12));
  auto b0 = total_cost(ds, std::vector<double>{0.0}, 10.0);
  CHECK(b0.c_total == b0.c_ds);
  auto ba = total_cost(ds, imb, 0.0);
  CHECK(ba.c_total == ba.c_ds);
}

TEST_CASE("ds_cost is convex in the split pair") {
  CostParams c;
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    double a1 = rng.uniform(0.0, 8.0), b1 = rng.uniform(-8.0, 0.0);
    double a2 = rng.uniform(0.0, 8.0), b2 = rng.uniform(-8.0, 0.0);
    double mid = ds_cost(0.5 * (a1 + a2), 0.5 * (b1 + b2), c);
    CHECK(mid <= 0.5 * ds_cost(a1, b1, c) + 0.5 * ds_cost(a2, b2, c) + 1e-12);
  }
}

TEST_CASE("average_daily_total_costs") {
  CHECK(average_daily_total_costs({6.0}) == 6.0);
  CHECK(average_daily_total_costs({4.0, 8.0}) == 6.0);
  CHECK_THROWS(average_daily_total_costs({}));
}

TEST_CASE("mae and mse formulas") {
  std::vector<double> y = {1.0, 2.0};
  std::vector<double> yh = {2.0, 4.0};
  CHECK(mae(y, yh) == doctest::Approx(1.5));
  CHECK(mse(y, yh) == doctest::Approx(2.5));
  CHECK(mae(y, y) == 0.0);
  CHECK(mse(y, y) == 0.0);

  // constant offset: MAE = |c|, MSE = c^2, and MSE == MAE^2 in this case
  std::vector<double> yc = {1.0, 5.0, -2.0, 0.5};
  std::vector<double> ych;
  for (double v : yc) ych.push_back(v + 0.7);
  CHECK(mae(yc, ych) == doctest::Approx(0.7));
  CHECK(mse(yc, ych) == doctest::Approx(0.49));
  CHECK(mse(yc, ych) == doctest::Approx(mae(yc, ych) * mae(yc, ych)));

  CHECK_THROWS(mae(y, std::vector<double>{1.0}));
}

TEST_CASE("spearman rank correlation") {
  std::vector<double> a = {1.0, 2.0, 3.0, 4.0};
  std::vector<double> up = {10.0, 20.0, 25.0, 40.0};
  std::vector<double> down = {4.0, 3.0, 2.0, 1.0};
  CHECK(spearman(a, up) == doctest::Approx(1.0));
  CHECK(spearman(a, down) == doctest::Approx(-1.0));
  CHECK(spearman(a, a) == doctest::Approx(1.0));
}
