#include "dff/ingest/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "dff/core/csv.hpp"
#include "dff/core/rng.hpp"

namespace dff::ingest {

namespace {

struct HalfPair {
  double kwh[2] = {0.0, 0.0};
  bool seen[2] = {false, false};
};

}  // namespace

Dataset resample_hourly(const std::vector<RawRecord>& records) {
  if (records.empty()) throw std::runtime_error("resample: no records");

  // (building, channel) -> hour -> half pair
  std::map<std::pair<int, int>, std::map<HourTime, HalfPair>> grid;
  HourTime lo = records.front().hour, hi = records.front().hour;
  for (const auto& r : records) {
    lo = std::min(lo, r.hour);
    hi = std::max(hi, r.hour);
    auto& cell = grid[{r.building_id, static_cast<int>(r.channel)}][r.hour];
    if (r.half < 0 || r.half > 1)
      throw std::runtime_error("resample: bad half index for building " +
                               std::to_string(r.building_id));
    if (cell.seen[r.half])
      throw std::runtime_error("resample: duplicate record for building " +
                               std::to_string(r.building_id) + " at " + format_hour(r.hour));
    cell.seen[r.half] = true;
    cell.kwh[r.half] = r.value_kwh;
  }

  Dataset out;
  out.epoch = lo;
  const std::int64_t n_hours = (hi - lo).count() + 1;

  std::map<int, BuildingSeries> by_building;
  for (const auto& [key, hours] : grid) {
    auto [bid, chan] = key;
    auto& bs = by_building[bid];
    bs.building_id = bid;
    if (bs.load.empty()) {
      bs.load.assign(static_cast<std::size_t>(n_hours), 0.0);
      bs.pv.assign(static_cast<std::size_t>(n_hours), 0.0);
    }
    auto& dst = (chan == static_cast<int>(Channel::consumption)) ? bs.load : bs.pv;
    for (const auto& [hour, cell] : hours) {
      if (!cell.seen[0] || !cell.seen[1])
        throw std::runtime_error("resample: missing half-hour for building " +
                                 std::to_string(bid) + " at " + format_hour(hour));
      dst[static_cast<std::size_t>((hour - lo).count())] = cell.kwh[0] + cell.kwh[1];
    }
  }

  for (auto& [bid, bs] : by_building) {
    bs.prosumption.resize(bs.load.size());
    for (std::size_t i = 0; i < bs.load.size(); ++i) {
      bs.prosumption[i] = bs.load[i] - bs.pv[i];
      if (!std::isfinite(bs.prosumption[i]))
        throw std::runtime_error("resample: non-finite value for building " + std::to_string(bid));
    }
    out.buildings.push_back(std::move(bs));
  }
  return out;
}

PartitionedDataset split(const Dataset& data, const SplitSpec& spec) {
  auto check_disjoint = [](const std::vector<int>& a, const std::vector<int>& b, const char* what) {
    for (int x : a)
      if (contains_id(b, x))
        throw std::runtime_error(std::string("split: building sets overlap (") + what + ", id " +
                                 std::to_string(x) + ")");
  };
  check_disjoint(spec.finetune_buildings, spec.surrogate_val_buildings, "finetune/surrogate_val");
  check_disjoint(spec.finetune_buildings, spec.eval_buildings, "finetune/eval");
  check_disjoint(spec.surrogate_val_buildings, spec.eval_buildings, "surrogate_val/eval");

  PartitionedDataset p;
  p.data = &data;
  auto add_views = [&](const std::vector<int>& ids, const DateRange& range,
                       std::vector<SplitView>& out) {
    for (int id : ids) {
      const BuildingSeries* b = data.find(id);
      if (!b) continue;
      std::int64_t lo = std::max<std::int64_t>(0, data.hour_index(range.begin));
      std::int64_t hi = std::min<std::int64_t>(static_cast<std::int64_t>(b->prosumption.size()),
                                               data.hour_index(range.end));
      if (lo < hi) out.push_back({id, lo, hi});
    }
  };
  add_views(spec.finetune_buildings, spec.train_range, p.finetune_train);
  add_views(spec.finetune_buildings, spec.val_range, p.finetune_val);
  add_views(spec.finetune_buildings, spec.test_range, p.finetune_test);
  add_views(spec.surrogate_val_buildings, spec.train_range, p.surrogate_val_train);
  add_views(spec.surrogate_val_buildings, spec.val_range, p.surrogate_val_val);
  add_views(spec.surrogate_val_buildings, spec.test_range, p.surrogate_val_test);
  add_views(spec.eval_buildings, spec.train_range, p.eval_train);
  add_views(spec.eval_buildings, spec.val_range, p.eval_val);
  add_views(spec.eval_buildings, spec.test_range, p.eval_test);
  return p;
}

Dataset generate_synthetic(int n_buildings, int n_days, std::uint64_t seed) {
  if (n_buildings < 1) throw std::invalid_argument("synthetic: n_buildings must be >= 1");
  if (n_days < 14)
    throw std::invalid_argument("synthetic: n_days must be >= 14 for context and weekly lags");

  Dataset out;
  out.epoch = make_hour(2010, 7, 1);
  const std::int64_t n_hours = static_cast<std::int64_t>(n_days) * 24;
  Rng root(seed);

  for (int b = 1; b <= n_buildings; ++b) {
    Rng rng = root.fork(static_cast<std::uint64_t>(b));
    const double base = rng.uniform(0.3, 0.8);
    const double day_amp = rng.uniform(0.3, 0.9);
    const double day_phase = rng.uniform(5.0, 9.0);   // morning ramp offset
    const double evening_amp = rng.uniform(0.4, 1.2);
    const double week_mod = rng.uniform(0.0, 0.35);
    const double pv_cap = (rng.uniform() < 0.2) ? 0.0 : rng.uniform(1.0, 4.0);
    const double ar_rho = 0.8;
    const double ar_sigma = rng.uniform(0.15, 0.35);

    BuildingSeries bs;
    bs.building_id = b;
    bs.load.resize(static_cast<std::size_t>(n_hours));
    bs.pv.resize(static_cast<std::size_t>(n_hours));
    bs.prosumption.resize(static_cast<std::size_t>(n_hours));

    double noise = 0.0;
    for (std::int64_t t = 0; t < n_hours; ++t) {
      const double h = static_cast<double>(t % 24);
      const std::int64_t day = t / 24;
      const double dow = static_cast<double>(day % 7);
      const double daily =
          day_amp * std::max(0.0, std::sin((h - day_phase) * 0.261799387799149436)) +
          evening_amp * std::exp(-(h - 19.0) * (h - 19.0) / 6.0);
      const double weekly = 1.0 + week_mod * std::sin(dow * 0.8975979010256552 + 0.7);
      noise = ar_rho * noise + rng.normal(0.0, ar_sigma);
      double load = (base + daily) * weekly + noise;
      load = std::clamp(load, 0.0, 10.0);
      const double bell = std::exp(-(h - 13.0) * (h - 13.0) / 12.5);
      const double pv = (h > 5.5 && h < 20.5) ? pv_cap * bell : 0.0;
      double pros = std::clamp(load - pv, -10.0, 10.0);

      bs.load[static_cast<std::size_t>(t)] = load;
      bs.pv[static_cast<std::size_t>(t)] = pv;
      bs.prosumption[static_cast<std::size_t>(t)] = pros;
    }
    out.buildings.push_back(std::move(bs));
  }
  return out;
}

namespace {

std::vector<RawRecord> load_long_csv(const CsvTable& t) {
  int c_id = t.column("building_id");
  int c_ch = t.column("channel");
  int c_ts = t.column("timestamp");
  int c_v = t.column("value");
  std::vector<RawRecord> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    RawRecord r;
    r.building_id = std::stoi(row[static_cast<std::size_t>(c_id)]);
    const std::string& ch = row[static_cast<std::size_t>(c_ch)];
    if (ch == "consumption")
      r.channel = Channel::consumption;
    else if (ch == "generation")
      r.channel = Channel::generation;
    else
      throw std::runtime_error("ingest: unknown channel '" + ch + "'");
    const std::string& ts = row[static_cast<std::size_t>(c_ts)];
    // timestamp may carry :30 for the second half-hour
    auto colon = ts.rfind(':');
    std::string minute = colon == std::string::npos ? "00" : ts.substr(colon + 1);
    std::string hour_part = ts;
    if (minute == "30") {
      r.half = 1;
      hour_part = ts.substr(0, colon) + ":00";
    }
    auto h = parse_hour(hour_part);
    if (!h) throw std::runtime_error("ingest: bad timestamp '" + ts + "'");
    r.hour = *h;
    r.value_kwh = std::stod(row[static_cast<std::size_t>(c_v)]);
    if (r.value_kwh < 0.0)
      throw std::runtime_error("ingest: negative raw value for building " +
                               std::to_string(r.building_id));
    out.push_back(r);
  }
  return out;
}

std::vector<RawRecord> load_wide_csv(const CsvTable& t) {
  int c_id = t.column("Customer");
  int c_cat = t.column("Consumption Category");
  int c_date = t.column("date");
  if (c_date < 0) c_date = t.column("Date");
  // first half-hour column: the one right after the date
  int first_slot = c_date + 1;
  if (static_cast<int>(t.header.size()) < first_slot + 48)
    throw std::runtime_error("ingest: wide layout needs 48 half-hour columns");

  std::vector<RawRecord> out;
  for (const auto& row : t.rows) {
    const std::string& cat = row[static_cast<std::size_t>(c_cat)];
    Channel ch;
    if (cat == "GC" || cat == "CL")
      ch = Channel::consumption;
    else if (cat == "GG")
      ch = Channel::generation;
    else
      throw std::runtime_error("ingest: unknown consumption category '" + cat + "'");
    auto day = parse_hour(row[static_cast<std::size_t>(c_date)]);
    if (!day) throw std::runtime_error("ingest: bad date '" + row[static_cast<std::size_t>(c_date)] + "'");
    int bid = std::stoi(row[static_cast<std::size_t>(c_id)]);
    for (int slot = 0; slot < 48; ++slot) {
      const std::string& cell = row[static_cast<std::size_t>(first_slot + slot)];
      RawRecord r;
      r.building_id = bid;
      r.channel = ch;
      r.hour = *day + Hours{slot / 2};
      r.half = slot % 2;
      r.value_kwh = cell.empty() ? 0.0 : std::stod(cell);
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace

std::vector<RawRecord> load_raw_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  if (t.column("building_id") >= 0 && t.column("channel") >= 0 && t.column("timestamp") >= 0 &&
      t.column("value") >= 0)
    return load_long_csv(t);
  if (t.column("Customer") >= 0 && t.column("Consumption Category") >= 0)
    return load_wide_csv(t);
  throw std::runtime_error("ingest: unrecognized CSV layout in " + path);
}

void write_canonical_csv(const Dataset& data, const std::vector<SplitView>& views,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("ingest: cannot write " + path);
  out << "building_id,timestamp,prosumption_kW\n";
  for (const auto& v : views) {
    const BuildingSeries* b = data.find(v.building_id);
    if (!b) continue;
    for (std::int64_t i = v.begin_index; i < v.end_index; ++i) {
      out << v.building_id << ',' << format_hour(data.time_at(i)) << ','
          << csv_num(b->prosumption[static_cast<std::size_t>(i)], 12) << '\n';
    }
  }
}

Dataset read_canonical_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  int c_id = t.column("building_id");
  int c_ts = t.column("timestamp");
  int c_p = t.column("prosumption_kW");
  if (c_id < 0 || c_ts < 0 || c_p < 0)
    throw std::runtime_error("ingest: not a canonical file: " + path);

  std::map<int, std::map<HourTime, double>> series;
  HourTime lo{};
  bool first = true;
  for (const auto& row : t.rows) {
    auto h = parse_hour(row[static_cast<std::size_t>(c_ts)]);
    if (!h) throw std::runtime_error("ingest: bad timestamp in " + path);
    if (first || *h < lo) lo = *h;
    first = false;
    series[std::stoi(row[static_cast<std::size_t>(c_id)])][*h] =
        std::stod(row[static_cast<std::size_t>(c_p)]);
  }
  Dataset d;
  d.epoch = lo;
  for (auto& [bid, vals] : series) {
    BuildingSeries bs;
    bs.building_id = bid;
    std::int64_t n = (vals.rbegin()->first - lo).count() + 1;
    bs.prosumption.assign(static_cast<std::size_t>(n), 0.0);
    for (auto& [h, v] : vals) bs.prosumption[static_cast<std::size_t>((h - lo).count())] = v;
    d.buildings.push_back(std::move(bs));
  }
  return d;
}

}  // namespace dff::ingest
