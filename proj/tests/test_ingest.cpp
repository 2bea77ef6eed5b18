#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "dff/core/rng.hpp"
#include "dff/ingest/ingest.hpp"

using namespace dff;
using namespace dff::ingest;

namespace {

RawRecord rec(int bid, Channel ch, HourTime hour, int half, double kwh) {
  RawRecord r;
  r.building_id = bid;
  r.channel = ch;
  r.hour = hour;
  r.half = half;
  r.value_kwh = kwh;
  return r;
}

}  // namespace

TEST_CASE("resample sums half-hour pairs and derives prosumption") {
  HourTime h0 = make_hour(2010, 7, 1);
  std::vector<RawRecord> rs = {
      rec(1, Channel::consumption, h0, 0, 0.4), rec(1, Channel::consumption, h0, 1, 0.6),
      rec(1, Channel::generation, h0, 0, 0.1), rec(1, Channel::generation, h0, 1, 0.1)};
  Dataset d = resample_hourly(rs);
  REQUIRE(d.buildings.size() == 1);
  CHECK(d.buildings[0].load[0] == doctest::Approx(1.0));
  CHECK(d.buildings[0].pv[0] == doctest::Approx(0.2));
  CHECK(d.buildings[0].prosumption[0] == doctest::Approx(0.8));
}

TEST_CASE("resample with zero generation equals load") {
  HourTime h0 = make_hour(2010, 7, 1);
  std::vector<RawRecord> rs;
  for (int h = 0; h < 24; ++h) {
    rs.push_back(rec(3, Channel::consumption, h0 + Hours{h}, 0, 0.2 + 0.01 * h));
    rs.push_back(rec(3, Channel::consumption, h0 + Hours{h}, 1, 0.3));
    rs.push_back(rec(3, Channel::generation, h0 + Hours{h}, 0, 0.0));
    rs.push_back(rec(3, Channel::generation, h0 + Hours{h}, 1, 0.0));
  }
  Dataset d = resample_hourly(rs);
  for (std::size_t i = 0; i < d.buildings[0].prosumption.size(); ++i)
    CHECK(d.buildings[0].prosumption[i] == d.buildings[0].load[i]);
}

TEST_CASE("resample errors") {
  HourTime h0 = make_hour(2010, 7, 1);
  SUBCASE("missing half-hour is a gap error") {
    std::vector<RawRecord> rs = {rec(1, Channel::consumption, h0, 0, 0.4)};
    CHECK_THROWS_WITH_AS(resample_hourly(rs),
                         doctest::Contains("missing half-hour for building 1"),
                         std::runtime_error);
  }
  SUBCASE("duplicate record is an ambiguity error") {
    std::vector<RawRecord> rs = {rec(1, Channel::consumption, h0, 0, 0.4),
                                 rec(1, Channel::consumption, h0, 0, 0.4),
                                 rec(1, Channel::consumption, h0, 1, 0.4)};
    CHECK_THROWS_WITH_AS(resample_hourly(rs), doctest::Contains("duplicate"), std::runtime_error);
  }
}

TEST_CASE("resampling conserves energy") {
  Rng rng(99);
  HourTime h0 = make_hour(2010, 7, 1);
  std::vector<RawRecord> rs;
  double raw_sum = 0.0;
  for (int h = 0; h < 48; ++h) {
    for (int half = 0; half < 2; ++half) {
      double v = rng.uniform(0.0, 1.5);
      raw_sum += v;
      rs.push_back(rec(1, Channel::consumption, h0 + Hours{h}, half, v));
    }
  }
  Dataset d = resample_hourly(rs);
  double hourly_sum = 0.0;
  for (double v : d.buildings[0].load) hourly_sum += v * kDtHours;
  CHECK(hourly_sum == doctest::Approx(raw_sum).epsilon(1e-9));
}

TEST_CASE("split partitions buildings per the paper layout") {
  Dataset d = generate_synthetic(300, 21, 3);
  SplitSpec spec = default_split_spec();
  // synthetic corpus is short; use its actual dates
  spec.train_range = {d.epoch, d.epoch + Hours{7 * 24}};
  spec.val_range = {d.epoch + Hours{7 * 24}, d.epoch + Hours{14 * 24}};
  spec.test_range = {d.epoch + Hours{14 * 24}, d.epoch + Hours{21 * 24}};
  auto p = split(d, spec);
  CHECK(p.finetune_train.size() == 50);
  CHECK(p.surrogate_val_train.size() == 50);
  CHECK(p.eval_train.size() == 200);
  CHECK(p.eval_test.size() == 200);
  for (const auto& v : p.eval_test) CHECK(v.building_id >= 101);

  SUBCASE("empty eval set yields empty partition without error") {
    spec.eval_buildings.clear();
    auto p2 = split(d, spec);
    CHECK(p2.eval_train.empty());
  }
  SUBCASE("overlapping id sets are a configuration error") {
    spec.eval_buildings = id_range(50, 120);
    CHECK_THROWS(split(d, spec));
  }
}

TEST_CASE("synthetic generator is deterministic and bounded") {
  Dataset a = generate_synthetic(5, 30, 7);
  Dataset b = generate_synthetic(5, 30, 7);
  REQUIRE(a.buildings.size() == 5);
  for (std::size_t i = 0; i < a.buildings.size(); ++i) {
    CHECK(a.buildings[i].prosumption == b.buildings[i].prosumption);
    for (double v : a.buildings[i].prosumption) {
      CHECK(v <= 10.0);
      CHECK(v >= -10.0);
    }
  }
  Dataset c = generate_synthetic(5, 30, 8);
  CHECK(a.buildings[0].prosumption != c.buildings[0].prosumption);

  CHECK_THROWS(generate_synthetic(5, 10, 7));
  CHECK_THROWS(generate_synthetic(0, 30, 7));
}

TEST_CASE("buildings without pv have nonnegative prosumption") {
  Dataset d = generate_synthetic(40, 20, 123);
  int zero_pv_seen = 0;
  for (const auto& b : d.buildings) {
    bool zero_pv = true;
    for (double v : b.pv)
      if (v != 0.0) zero_pv = false;
    if (!zero_pv) continue;
    ++zero_pv_seen;
    for (double v : b.prosumption) CHECK(v >= 0.0);
  }
  CHECK(zero_pv_seen > 0);
}

TEST_CASE("synthetic shapes match the real corpus dimensions") {
  Dataset d = generate_synthetic(300, 1096, 1);
  CHECK(d.buildings.size() == 300);
  CHECK(d.n_hours() == 1096 * 24);
}

TEST_CASE("canonical csv round-trip") {
  Dataset d = generate_synthetic(2, 14, 5);
  std::vector<SplitView> views;
  for (const auto& b : d.buildings)
    views.push_back({b.building_id, 0, static_cast<std::int64_t>(b.prosumption.size())});
  std::string path = "/tmp/dff_test_canonical.csv";
  write_canonical_csv(d, views, path);
  Dataset back = read_canonical_csv(path);
  REQUIRE(back.buildings.size() == d.buildings.size());
  CHECK(back.epoch == d.epoch);
  for (std::size_t i = 0; i < d.buildings.size(); ++i) {
    REQUIRE(back.buildings[i].prosumption.size() == d.buildings[i].prosumption.size());
    for (std::size_t t = 0; t < d.buildings[i].prosumption.size(); ++t)
      CHECK(back.buildings[i].prosumption[t] ==
            doctest::Approx(d.buildings[i].prosumption[t]).epsilon(1e-10));
  }
  std::remove(path.c_str());
}

TEST_CASE("long and wide raw layouts load") {
  const char* long_path = "/tmp/dff_test_long.csv";
  {
    std::ofstream f(long_path);
    f << "building_id,channel,timestamp,value\n";
    f << "1,consumption,2010-07-01 00:00,0.4\n";
    f << "1,consumption,2010-07-01 00:30,0.6\n";
    f << "1,generation,2010-07-01 00:00,0.1\n";
    f << "1,generation,2010-07-01 00:30,0.1\n";
  }
  auto rs = load_raw_csv(long_path);
  Dataset d = resample_hourly(rs);
  CHECK(d.buildings[0].prosumption[0] == doctest::Approx(0.8));
  std::remove(long_path);

  const char* wide_path = "/tmp/dff_test_wide.csv";
  {
    std::ofstream f(wide_path);
    f << "Customer,Generator Capacity,Postcode,Consumption Category,date";
    for (int i = 0; i < 48; ++i) f << ",t" << i;
    f << "\n";
    f << "7,3.0,2076,GC,1/7/2010";
    for (int i = 0; i < 48; ++i) f << "," << 0.5;
    f << "\n";
    f << "7,3.0,2076,GG,1/7/2010";
    for (int i = 0; i < 48; ++i) f << "," << 0.1;
    f << "\n";
  }
  auto rw = load_raw_csv(wide_path);
  CHECK(rw.size() == 96);
  Dataset dw = resample_hourly(rw);
  CHECK(dw.buildings[0].load[5] == doctest::Approx(1.0));
  CHECK(dw.buildings[0].pv[5] == doctest::Approx(0.2));
  CHECK(dw.buildings[0].prosumption[5] == doctest::Approx(0.8));
  std::remove(wide_path);
}
