#include "dff/core/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dff {

namespace {

std::string fmt_num(double v) {
  if (v == static_cast<std::int64_t>(v) && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
    return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += v[i];
  }
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_num(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad numeric value for '" + key + "': " + v);
  }
}

HourTime to_date(const std::string& key, const std::string& v) {
  auto t = parse_hour(v);
  if (!t) throw std::runtime_error("config: bad date for '" + key + "': " + v);
  return *t;
}

}  // namespace

std::string format_id_set(const std::vector<int>& ids) {
  // compress consecutive runs as lo-hi
  std::string out;
  std::size_t i = 0;
  while (i < ids.size()) {
    std::size_t j = i;
    while (j + 1 < ids.size() && ids[j + 1] == ids[j] + 1) ++j;
    if (!out.empty()) out += ",";
    if (j > i + 1)
      out += std::to_string(ids[i]) + "-" + std::to_string(ids[j]);
    else if (j == i + 1)
      out += std::to_string(ids[i]) + "," + std::to_string(ids[j]);
    else
      out += std::to_string(ids[i]);
    i = j + 1;
  }
  return out;
}

std::vector<int> parse_id_set(const std::string& text) {
  std::vector<int> out;
  for (const auto& tok : split_list(text)) {
    auto dash = tok.find('-', 1);
    if (dash != std::string::npos) {
      int lo = std::stoi(tok.substr(0, dash));
      int hi = std::stoi(tok.substr(dash + 1));
      for (int v = lo; v <= hi; ++v) out.push_back(v);
    } else if (!tok.empty()) {
      out.push_back(std::stoi(tok));
    }
  }
  return out;
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "[battery]\n";
  o << "p_min = " << fmt_num(c.battery.p_min) << "\n";
  o << "p_max = " << fmt_num(c.battery.p_max) << "\n";
  o << "e_min = " << fmt_num(c.battery.e_min) << "\n";
  o << "e_max = " << fmt_num(c.battery.e_max) << "\n";
  o << "mu = " << fmt_num(c.battery.mu) << "\n";
  o << "e_init = " << fmt_num(c.battery.e_init) << "\n";
  o << "\n[cost]\n";
  o << "cq_plus = " << fmt_num(c.cost.cq_plus) << "\n";
  o << "cl_plus = " << fmt_num(c.cost.cl_plus) << "\n";
  o << "cq_minus = " << fmt_num(c.cost.cq_minus) << "\n";
  o << "cl_minus = " << fmt_num(c.cost.cl_minus) << "\n";
  o << "cq_delta = " << fmt_num(c.cost.cq_delta) << "\n";
  o << "cl_delta = " << fmt_num(c.cost.cl_delta) << "\n";
  o << "alpha = " << fmt_num(c.cost.alpha) << "\n";
  o << "\n[horizon]\n";
  o << "context_hours = " << c.horizon.context_hours << "\n";
  o << "forecast_hours = " << c.horizon.forecast_hours << "\n";
  o << "anchor_hour = " << c.horizon.anchor_hour << "\n";
  o << "schedule_steps = " << c.horizon.schedule_steps << "\n";
  o << "schedule_start_offset = " << c.horizon.schedule_start_offset << "\n";
  o << "\n[splits]\n";
  o << "train_start = " << format_date(c.splits.train_range.begin) << "\n";
  o << "train_end = " << format_date(c.splits.train_range.end) << "\n";
  o << "val_start = " << format_date(c.splits.val_range.begin) << "\n";
  o << "val_end = " << format_date(c.splits.val_range.end) << "\n";
  o << "test_start = " << format_date(c.splits.test_range.begin) << "\n";
  o << "test_end = " << format_date(c.splits.test_range.end) << "\n";
  o << "finetune_buildings = " << format_id_set(c.splits.finetune_buildings) << "\n";
  o << "surrogate_val_buildings = " << format_id_set(c.splits.surrogate_val_buildings) << "\n";
  o << "eval_buildings = " << format_id_set(c.splits.eval_buildings) << "\n";
  o << "\n[model]\n";
  o << "patch_size = " << c.model.patch_size << "\n";
  o << "d_model = " << c.model.d_model << "\n";
  o << "n_heads = " << c.model.n_heads << "\n";
  o << "n_layers = " << c.model.n_layers << "\n";
  o << "\n[peft]\n";
  o << "rank = " << c.peft.rank << "\n";
  o << "alpha = " << fmt_num(c.peft.alpha) << "\n";
  o << "dropout = " << fmt_num(c.peft.dropout) << "\n";
  o << "targets = " << join(c.peft.targets) << "\n";
  o << "\n[surrogate]\n";
  o << "hidden1 = " << c.surrogate.hidden1 << "\n";
  o << "hidden2 = " << c.surrogate.hidden2 << "\n";
  o << "ensemble_size = " << c.surrogate.ensemble_size << "\n";
  o << "\n[training]\n";
  o << "lr = " << fmt_num(c.training.lr) << "\n";
  o << "batch_size = " << c.training.batch_size << "\n";
  o << "epochs = " << c.training.epochs << "\n";
  o << "weight_decay = " << fmt_num(c.training.weight_decay) << "\n";
  o << "pretrain_epochs = " << c.training.pretrain_epochs << "\n";
  o << "pretrain_lr = " << fmt_num(c.training.pretrain_lr) << "\n";
  o << "surrogate_max_epochs = " << c.training.surrogate_max_epochs << "\n";
  o << "surrogate_patience = " << c.training.surrogate_patience << "\n";
  o << "surrogate_lr = " << fmt_num(c.training.surrogate_lr) << "\n";
  o << "surrogate_batch = " << c.training.surrogate_batch << "\n";
  o << "n_augment = " << c.training.n_augment << "\n";
  o << "base_seed = " << c.training.base_seed << "\n";
  o << "\n[data]\n";
  o << "mode = " << c.data.mode << "\n";
  o << "path = " << c.data.path << "\n";
  o << "n_buildings = " << c.data.n_buildings << "\n";
  o << "n_days = " << c.data.n_days << "\n";
  o << "seed = " << c.data.seed << "\n";
  o << "\n[run]\n";
  o << "losses = " << join(c.run.losses) << "\n";
  o << "pefts = " << join(c.run.pefts) << "\n";
  o << "modes = " << join(c.run.modes) << "\n";
  o << "seeds = " << join_ints(c.run.seeds) << "\n";
  o << "threads = " << c.run.threads << "\n";
  o << "trace = " << (c.run.trace ? "true" : "false") << "\n";
  return o.str();
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"battery.p_min", [](auto& c, auto& k, auto& v) { c.battery.p_min = to_num(k, v); }},
      {"battery.p_max", [](auto& c, auto& k, auto& v) { c.battery.p_max = to_num(k, v); }},
      {"battery.e_min", [](auto& c, auto& k, auto& v) { c.battery.e_min = to_num(k, v); }},
      {"battery.e_max", [](auto& c, auto& k, auto& v) { c.battery.e_max = to_num(k, v); }},
      {"battery.mu", [](auto& c, auto& k, auto& v) { c.battery.mu = to_num(k, v); }},
      {"battery.e_init", [](auto& c, auto& k, auto& v) { c.battery.e_init = to_num(k, v); }},
      {"cost.cq_plus", [](auto& c, auto& k, auto& v) { c.cost.cq_plus = to_num(k, v); }},
      {"cost.cl_plus", [](auto& c, auto& k, auto& v) { c.cost.cl_plus = to_num(k, v); }},
      {"cost.cq_minus", [](auto& c, auto& k, auto& v) { c.cost.cq_minus = to_num(k, v); }},
      {"cost.cl_minus", [](auto& c, auto& k, auto& v) { c.cost.cl_minus = to_num(k, v); }},
      {"cost.cq_delta", [](auto& c, auto& k, auto& v) { c.cost.cq_delta = to_num(k, v); }},
      {"cost.cl_delta", [](auto& c, auto& k, auto& v) { c.cost.cl_delta = to_num(k, v); }},
      {"cost.alpha", [](auto& c, auto& k, auto& v) { c.cost.alpha = to_num(k, v); }},
      {"horizon.context_hours", [](auto& c, auto& k, auto& v) { c.horizon.context_hours = (int)to_num(k, v); }},
      {"horizon.forecast_hours", [](auto& c, auto& k, auto& v) { c.horizon.forecast_hours = (int)to_num(k, v); }},
      {"horizon.anchor_hour", [](auto& c, auto& k, auto& v) { c.horizon.anchor_hour = (int)to_num(k, v); }},
      {"horizon.schedule_steps", [](auto& c, auto& k, auto& v) { c.horizon.schedule_steps = (int)to_num(k, v); }},
      {"horizon.schedule_start_offset", [](auto& c, auto& k, auto& v) { c.horizon.schedule_start_offset = (int)to_num(k, v); }},
      {"splits.train_start", [](auto& c, auto& k, auto& v) { c.splits.train_range.begin = to_date(k, v); }},
      {"splits.train_end", [](auto& c, auto& k, auto& v) { c.splits.train_range.end = to_date(k, v); }},
      {"splits.val_start", [](auto& c, auto& k, auto& v) { c.splits.val_range.begin = to_date(k, v); }},
      {"splits.val_end", [](auto& c, auto& k, auto& v) { c.splits.val_range.end = to_date(k, v); }},
      {"splits.test_start", [](auto& c, auto& k, auto& v) { c.splits.test_range.begin = to_date(k, v); }},
      {"splits.test_end", [](auto& c, auto& k, auto& v) { c.splits.test_range.end = to_date(k, v); }},
      {"splits.finetune_buildings", [](auto& c, auto&, auto& v) { c.splits.finetune_buildings = parse_id_set(v); }},
      {"splits.surrogate_val_buildings", [](auto& c, auto&, auto& v) { c.splits.surrogate_val_buildings = parse_id_set(v); }},
      {"splits.eval_buildings", [](auto& c, auto&, auto& v) { c.splits.eval_buildings = parse_id_set(v); }},
      {"model.patch_size", [](auto& c, auto& k, auto& v) { c.model.patch_size = (int)to_num(k, v); }},
      {"model.d_model", [](auto& c, auto& k, auto& v) { c.model.d_model = (int)to_num(k, v); }},
      {"model.n_heads", [](auto& c, auto& k, auto& v) { c.model.n_heads = (int)to_num(k, v); }},
      {"model.n_layers", [](auto& c, auto& k, auto& v) { c.model.n_layers = (int)to_num(k, v); }},
      {"peft.rank", [](auto& c, auto& k, auto& v) { c.peft.rank = (int)to_num(k, v); }},
      {"peft.alpha", [](auto& c, auto& k, auto& v) { c.peft.alpha = to_num(k, v); }},
      {"peft.dropout", [](auto& c, auto& k, auto& v) { c.peft.dropout = to_num(k, v); }},
      {"peft.targets", [](auto& c, auto&, auto& v) { c.peft.targets = split_list(v); }},
      {"surrogate.hidden1", [](auto& c, auto& k, auto& v) { c.surrogate.hidden1 = (int)to_num(k, v); }},
      {"surrogate.hidden2", [](auto& c, auto& k, auto& v) { c.surrogate.hidden2 = (int)to_num(k, v); }},
      {"surrogate.ensemble_size", [](auto& c, auto& k, auto& v) { c.surrogate.ensemble_size = (int)to_num(k, v); }},
      {"training.lr", [](auto& c, auto& k, auto& v) { c.training.lr = to_num(k, v); }},
      {"training.batch_size", [](auto& c, auto& k, auto& v) { c.training.batch_size = (int)to_num(k, v); }},
      {"training.epochs", [](auto& c, auto& k, auto& v) { c.training.epochs = (int)to_num(k, v); }},
      {"training.weight_decay", [](auto& c, auto& k, auto& v) { c.training.weight_decay = to_num(k, v); }},
      {"training.pretrain_epochs", [](auto& c, auto& k, auto& v) { c.training.pretrain_epochs = (int)to_num(k, v); }},
      {"training.pretrain_lr", [](auto& c, auto& k, auto& v) { c.training.pretrain_lr = to_num(k, v); }},
      {"training.surrogate_max_epochs", [](auto& c, auto& k, auto& v) { c.training.surrogate_max_epochs = (int)to_num(k, v); }},
      {"training.surrogate_patience", [](auto& c, auto& k, auto& v) { c.training.surrogate_patience = (int)to_num(k, v); }},
      {"training.surrogate_lr", [](auto& c, auto& k, auto& v) { c.training.surrogate_lr = to_num(k, v); }},
      {"training.surrogate_batch", [](auto& c, auto& k, auto& v) { c.training.surrogate_batch = (int)to_num(k, v); }},
      {"training.n_augment", [](auto& c, auto& k, auto& v) { c.training.n_augment = (int)to_num(k, v); }},
      {"training.base_seed", [](auto& c, auto& k, auto& v) { c.training.base_seed = (std::uint64_t)to_num(k, v); }},
      {"data.mode", [](auto& c, auto&, auto& v) { c.data.mode = v; }},
      {"data.path", [](auto& c, auto&, auto& v) { c.data.path = v; }},
      {"data.n_buildings", [](auto& c, auto& k, auto& v) { c.data.n_buildings = (int)to_num(k, v); }},
      {"data.n_days", [](auto& c, auto& k, auto& v) { c.data.n_days = (int)to_num(k, v); }},
      {"data.seed", [](auto& c, auto& k, auto& v) { c.data.seed = (std::uint64_t)to_num(k, v); }},
      {"run.losses", [](auto& c, auto&, auto& v) { c.run.losses = split_list(v); }},
      {"run.pefts", [](auto& c, auto&, auto& v) { c.run.pefts = split_list(v); }},
      {"run.modes", [](auto& c, auto&, auto& v) { c.run.modes = split_list(v); }},
      {"run.seeds", [](auto& c, auto&, auto& v) {
         c.run.seeds.clear();
         for (auto& t : split_list(v)) c.run.seeds.push_back(std::stoi(t));
       }},
      {"run.threads", [](auto& c, auto& k, auto& v) { c.run.threads = (int)to_num(k, v); }},
      {"run.trace", [](auto& c, auto& k, auto& v) {
         if (v == "true" || v == "1") c.run.trace = true;
         else if (v == "false" || v == "0") c.run.trace = false;
         else throw std::runtime_error("config: bad boolean for '" + k + "': " + v);
       }},
  };

  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(lineno) + ": expected key = value");
    std::string key = section + "." + trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end())
      throw std::runtime_error("config: unknown key '" + key + "' (line " + std::to_string(lineno) + ")");
    it->second(c, key, value);
  }
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void save_config_file(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write " + path);
  out << serialize_config(cfg);
}

namespace {

bool overlaps(const std::vector<int>& a, const std::vector<int>& b) {
  for (int x : a)
    if (contains_id(b, x)) return true;
  return false;
}

}  // namespace

std::vector<std::string> validate_config(const ExperimentConfig& c) {
  std::vector<std::string> v;
  const auto& b = c.battery;
  if (!(b.p_min < 0.0)) v.push_back("battery.p_min: must be negative");
  if (!(b.p_max > 0.0)) v.push_back("battery.p_max: must be positive");
  if (!(b.e_min <= b.e_init && b.e_init <= b.e_max))
    v.push_back("battery.e_init: must satisfy e_min <= e_init <= e_max");
  if (!(b.e_min <= b.e_max)) v.push_back("battery.e_min: must not exceed e_max");
  if (!(b.mu >= 0.0 && b.mu < 1.0)) v.push_back("battery.mu: must be in [0, 1)");

  auto nonneg = [&](double x, const char* name) {
    if (!(x >= 0.0)) v.push_back(std::string("cost.") + name + ": must be >= 0");
  };
  nonneg(c.cost.cq_plus, "cq_plus");
  nonneg(c.cost.cl_plus, "cl_plus");
  nonneg(c.cost.cq_minus, "cq_minus");
  nonneg(c.cost.cl_minus, "cl_minus");
  nonneg(c.cost.cq_delta, "cq_delta");
  nonneg(c.cost.cl_delta, "cl_delta");
  nonneg(c.cost.alpha, "alpha");

  const auto& h = c.horizon;
  if (h.context_hours <= 0) v.push_back("horizon.context_hours: must be positive");
  if (h.forecast_hours <= 0) v.push_back("horizon.forecast_hours: must be positive");
  if (h.anchor_hour < 0 || h.anchor_hour > 23) v.push_back("horizon.anchor_hour: must be in 0..23");
  if (h.schedule_start_offset + h.schedule_steps > h.forecast_hours)
    v.push_back("horizon: schedule_start_offset + schedule_steps must not exceed forecast_hours (HorizonSpec)");
  if (c.model.patch_size <= 0 || h.context_hours % c.model.patch_size != 0)
    v.push_back("model.patch_size: must divide horizon.context_hours");

  const auto& s = c.splits;
  if (s.train_range.empty()) v.push_back("splits.train_range: empty or reversed");
  if (s.val_range.empty()) v.push_back("splits.val_range: empty or reversed");
  if (s.test_range.empty()) v.push_back("splits.test_range: empty or reversed");
  if (!(s.train_range.end <= s.val_range.begin && s.val_range.end <= s.test_range.begin))
    v.push_back("splits: date ranges must be ordered train < val < test without overlap");
  if (overlaps(s.finetune_buildings, s.surrogate_val_buildings) ||
      overlaps(s.finetune_buildings, s.eval_buildings) ||
      overlaps(s.surrogate_val_buildings, s.eval_buildings))
    v.push_back("splits: building id sets must be pairwise disjoint");

  if (c.peft.rank < 1) v.push_back("peft.rank: must be >= 1");
  if (c.peft.dropout < 0.0 || c.peft.dropout >= 1.0) v.push_back("peft.dropout: must be in [0, 1)");
  if (c.model.d_model % c.model.n_heads != 0) v.push_back("model.n_heads: must divide d_model");
  if (c.peft.rank >= c.model.d_model) v.push_back("peft.rank: must be < min weight dimension");

  if (c.training.batch_size < 1) v.push_back("training.batch_size: must be >= 1");
  if (c.training.epochs < 0) v.push_back("training.epochs: must be >= 0");
  if (!(c.training.lr > 0.0)) v.push_back("training.lr: must be > 0");
  if (c.data.mode != "synthetic" && c.data.mode != "csv")
    v.push_back("data.mode: must be 'synthetic' or 'csv'");
  if (c.data.mode == "csv" && c.data.path.empty()) v.push_back("data.path: required for csv mode");
  if (c.data.mode == "synthetic" && c.data.n_buildings < 1)
    v.push_back("data.n_buildings: must be >= 1");
  if (c.data.mode == "synthetic" && c.data.n_days < 14)
    v.push_back("data.n_days: must be >= 14");
  for (const auto& l : c.run.losses)
    if (l != "surrogate" && l != "mse" && l != "mae") v.push_back("run.losses: unknown loss '" + l + "'");
  for (const auto& p : c.run.pefts)
    if (p != "lora" && p != "dora") v.push_back("run.pefts: unknown method '" + p + "'");
  for (const auto& m : c.run.modes)
    if (m != "global" && m != "local") v.push_back("run.modes: unknown mode '" + m + "'");
  if (c.run.seeds.empty()) v.push_back("run.seeds: at least one seed required");
  return v;
}

}  // namespace dff
