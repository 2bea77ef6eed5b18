#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dff/core/config.hpp"
#include "dff/core/rng.hpp"
#include "dff/core/time.hpp"
#include "dff/core/types.hpp"

using namespace dff;

TEST_CASE("hour timestamps map to the uniform grid") {
  HourTime epoch = make_hour(2010, 7, 1);
  HourTime later = make_hour(2010, 7, 2, 12);
  CHECK((later - epoch).count() == 36);
  CHECK(format_hour(later) == "2010-07-02 12:00");
  CHECK(hour_of_day(later) == 12);
  CHECK(midnight_of(later) == make_hour(2010, 7, 2));

  auto p = parse_hour("2012-02-29 23:00");
  REQUIRE(p.has_value());
  CHECK(format_hour(*p) == "2012-02-29 23:00");
  CHECK(parse_hour("2011-02-29").has_value() == false);
  CHECK(parse_hour("1/7/2010").value() == epoch);
}

TEST_CASE("default battery and cost parameters match the reference table") {
  BatteryParams b;
  CHECK(b.p_min == -5.0);
  CHECK(b.p_max == 5.0);
  CHECK(b.e_min == 0.0);
  CHECK(b.e_max == 13.5);
  CHECK(b.mu == 0.05);
  CHECK(b.e_init == 6.75);
  CostParams c;
  CHECK(c.cq_plus == 0.05);
  CHECK(c.cl_plus == 0.3);
  CHECK(c.cq_minus == 0.05);
  CHECK(c.cl_minus == 0.15);
  CHECK(c.cq_delta == 0.05);
  CHECK(c.cl_delta == 0.3);
  CHECK(c.alpha == 10.0);
  HorizonSpec h;
  CHECK(h.context_hours == 168);
  CHECK(h.forecast_hours == 42);
  CHECK(h.anchor_hour == 12);
  CHECK(h.schedule_steps == 30);
  CHECK(h.schedule_start_offset == 12);
}

TEST_CASE("validate_config") {
  ExperimentConfig cfg;
  CHECK(validate_config(cfg).empty());

  SUBCASE("mu out of range is reported by name") {
    cfg.battery.mu = 1.2;
    auto v = validate_config(cfg);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("mu") != std::string::npos);
  }
  SUBCASE("horizon arithmetic violation") {
    cfg.horizon.schedule_start_offset = 12;
    cfg.horizon.schedule_steps = 40;
    cfg.horizon.forecast_hours = 42;
    auto v = validate_config(cfg);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("HorizonSpec") != std::string::npos);
  }
  SUBCASE("overlapping building sets") {
    cfg.splits.eval_buildings = id_range(40, 60);
    auto v = validate_config(cfg);
    CHECK(!v.empty());
  }
}

TEST_CASE("config round-trip is identity") {
  ExperimentConfig cfg;
  cfg.battery.mu = 0.07;
  cfg.cost.alpha = 12.5;
  cfg.splits.finetune_buildings = {1, 2, 3, 7, 9, 10, 11};
  cfg.run.seeds = {3, 1, 4};
  cfg.run.losses = {"surrogate", "mse"};
  cfg.training.lr = 3e-4;
  cfg.data.n_days = 99;

  std::string text = serialize_config(cfg);
  ExperimentConfig back = parse_config(text);
  CHECK(serialize_config(back) == text);
  CHECK(back.battery.mu == cfg.battery.mu);
  CHECK(back.splits.finetune_buildings == cfg.splits.finetune_buildings);
  CHECK(back.run.seeds == cfg.run.seeds);
  CHECK(back.training.lr == cfg.training.lr);

  CHECK_THROWS(parse_config("[battery]\nbogus_key = 1\n"));
}

TEST_CASE("id set formatting round-trips") {
  std::vector<int> ids = {1, 2, 3, 4, 9, 11, 12};
  CHECK(format_id_set(ids) == "1-4,9,11,12");
  CHECK(parse_id_set("1-4,9,11,12") == ids);
  CHECK(parse_id_set("5") == std::vector<int>{5});
}

TEST_CASE("rng determinism and stream independence") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng c = Rng(42).fork(1), d = Rng(42).fork(2);
  CHECK(c.next() != d.next());
  Rng n(7);
  double m = 0.0;
  for (int i = 0; i < 10000; ++i) m += n.normal();
  CHECK(std::abs(m / 10000.0) < 0.05);
}
