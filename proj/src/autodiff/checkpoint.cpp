#include "dff/autodiff/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace dff::autodiff {

namespace {
constexpr char kMagic[9] = "DFFCKPT1";
}

const NamedTensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  nlohmann::json header;
  header["version"] = ckpt.version;
  header["kind"] = ckpt.kind;
  if (ckpt.adapter_spec) {
    header["adapter"] = {{"method", to_string(ckpt.adapter_spec->method)},
                         {"rank", ckpt.adapter_spec->rank},
                         {"alpha", ckpt.adapter_spec->alpha},
                         {"dropout", ckpt.adapter_spec->dropout},
                         {"targets", ckpt.adapter_spec->target_modules}};
  }
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& t : ckpt.tensors)
    tensors.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
  header["tensors"] = tensors;
  header["meta"] = ckpt.meta;
  std::string hs = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out.write(kMagic, 8);
  std::uint32_t len = static_cast<std::uint32_t>(hs.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto& t : ckpt.tensors) {
    if (t.data.size() != static_cast<std::size_t>(t.rows) * t.cols)
      throw std::runtime_error("checkpoint: tensor '" + t.name + "' has inconsistent shape");
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != std::string(kMagic, 8))
    throw std::runtime_error("checkpoint: bad magic in " + path);
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string hs(len, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error("checkpoint: truncated header in " + path);
  nlohmann::json header = nlohmann::json::parse(hs);

  Checkpoint c;
  c.version = header.at("version").get<int>();
  c.kind = header.at("kind").get<std::string>();
  if (header.contains("adapter")) {
    AdapterSpec spec;
    spec.method = peft_from_string(header["adapter"].at("method").get<std::string>());
    spec.rank = header["adapter"].at("rank").get<int>();
    spec.alpha = header["adapter"].at("alpha").get<double>();
    spec.dropout = header["adapter"].at("dropout").get<double>();
    spec.target_modules = header["adapter"].at("targets").get<std::vector<std::string>>();
    c.adapter_spec = spec;
  }
  if (header.contains("meta"))
    c.meta = header["meta"].get<std::map<std::string, std::string>>();
  for (const auto& jt : header.at("tensors")) {
    NamedTensor t;
    t.name = jt.at("name").get<std::string>();
    t.rows = jt.at("rows").get<int>();
    t.cols = jt.at("cols").get<int>();
    t.data.resize(static_cast<std::size_t>(t.rows) * t.cols);
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated tensor data in " + path);
    c.tensors.push_back(std::move(t));
  }
  return c;
}

}  // namespace dff::autodiff
