#include "dep/serialize.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace dep {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::uint32_t kTnsrVersion = 1;

void put_u32(std::ofstream& f, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& f, const fs::path& path, std::size_t offset) {
  unsigned char b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  if (f.gcount() != 4)
    throw FormatError("TNSR: truncated file at offset " + std::to_string(offset) + " in " +
                      path.string());
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::string param_file_name(std::size_t i, const std::string& name) {
  std::string sane = name;
  for (char& c : sane)
    if (c == '/' || c == '\\') c = '_';
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03zu_", i);
  return buf + sane + ".tnsr";
}

}  // namespace

void save_tnsr(const fs::path& path, const Tensor& t) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("TNSR: cannot open " + path.string() + " for writing");
  f.write("TNSR", 4);
  put_u32(f, kTnsrVersion);
  put_u32(f, static_cast<std::uint32_t>(t.rank()));
  for (Index d : t.shape()) put_u32(f, static_cast<std::uint32_t>(d));
  // doubles are IEEE-754 little-endian on every target this builds on
  f.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * 8));
  if (!f) throw FormatError("TNSR: write failed for " + path.string());
}

Tensor load_tnsr(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("TNSR: cannot open " + path.string());
  char magic[4];
  f.read(magic, 4);
  if (f.gcount() != 4 || std::memcmp(magic, "TNSR", 4) != 0)
    throw FormatError("TNSR: bad magic at offset 0 in " + path.string());
  const std::uint32_t version = get_u32(f, path, 4);
  if (version != kTnsrVersion)
    throw FormatError("TNSR: unsupported version " + std::to_string(version) + " at offset 4 in " +
                      path.string());
  const std::uint32_t rank = get_u32(f, path, 8);
  if (rank > 8) throw FormatError("TNSR: implausible rank " + std::to_string(rank) + " at offset 8");
  Shape shape;
  std::size_t offset = 12;
  for (std::uint32_t i = 0; i < rank; ++i, offset += 4) {
    const std::uint32_t d = get_u32(f, path, offset);
    if (d == 0) throw FormatError("TNSR: zero dimension at offset " + std::to_string(offset));
    shape.push_back(static_cast<Index>(d));
  }
  Tensor t(shape);
  f.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * 8));
  if (f.gcount() != static_cast<std::streamsize>(t.size() * 8))
    throw FormatError("TNSR: truncated payload at offset " + std::to_string(offset) + ", expected " +
                      std::to_string(t.size() * 8) + " bytes in " + path.string());
  return t;
}

Tensor load_external_features(const fs::path& path) {
  Tensor t = load_tnsr(path);
  if (t.rank() != 4)
    throw FormatError("external features: expected rank 4, got rank " + std::to_string(t.rank()) +
                      " in " + path.string());
  if (!t.all_finite()) throw FormatError("external features: non-finite values in " + path.string());
  return t;
}

void save_checkpoint(const fs::path& dir, const std::vector<Parameter*>& params,
                     const std::map<std::string, Tensor>& velocities, const CheckpointMeta& meta) {
  fs::create_directories(dir / "params");
  ordered_json manifest;
  manifest["format"] = "dep-checkpoint-v1";
  manifest["config_hash"] = meta.config_hash;
  manifest["epoch"] = meta.epoch;
  manifest["seed"] = meta.seed;
  manifest["variant"] = meta.variant;
  manifest["channel_mean"] = meta.stats.mean;
  manifest["channel_std"] = meta.stats.stddev;
  manifest["classes"] = meta.classes;
  manifest["config"] = meta.config_text;
  ordered_json plist = ordered_json::array();
  std::size_t idx = 0;
  for (const Parameter* p : params) {
    const std::string file = param_file_name(idx++, p->name);
    save_tnsr(dir / "params" / file, p->value);
    plist.push_back({{"name", p->name}, {"file", file}, {"group", p->group}});
  }
  manifest["params"] = std::move(plist);
  ordered_json vlist = ordered_json::array();
  for (const auto& [name, vel] : velocities) {
    const std::string file = param_file_name(idx++, "vel_" + name);
    save_tnsr(dir / "params" / file, vel);
    vlist.push_back({{"name", name}, {"file", file}});
  }
  manifest["velocities"] = std::move(vlist);
  std::ofstream f(dir / "manifest.json");
  if (!f) throw FormatError("checkpoint: cannot write manifest under " + dir.string());
  f << manifest.dump(2) << "\n";
}

namespace {

ordered_json read_manifest(const fs::path& dir) {
  std::ifstream f(dir / "manifest.json");
  if (!f) throw FormatError("checkpoint: missing manifest.json under " + dir.string());
  ordered_json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint: bad manifest.json: " + std::string(e.what()));
  }
  if (j.value("format", "") != "dep-checkpoint-v1")
    throw FormatError("checkpoint: unknown format in " + dir.string());
  return j;
}

}  // namespace

CheckpointMeta load_checkpoint_meta(const fs::path& dir) {
  const ordered_json j = read_manifest(dir);
  CheckpointMeta meta;
  meta.config_text = j.at("config").get<std::string>();
  meta.config_hash = j.at("config_hash").get<std::string>();
  meta.epoch = j.at("epoch").get<int>();
  meta.seed = j.at("seed").get<std::uint64_t>();
  meta.variant = j.at("variant").get<std::string>();
  meta.stats.mean = j.at("channel_mean").get<std::array<double, 3>>();
  meta.stats.stddev = j.at("channel_std").get<std::array<double, 3>>();
  meta.classes = j.at("classes").get<std::vector<std::string>>();
  return meta;
}

void load_checkpoint_params(const fs::path& dir, const std::vector<Parameter*>& params,
                            std::map<std::string, Tensor>* velocities) {
  const ordered_json j = read_manifest(dir);
  std::map<std::string, std::string> files;
  for (const auto& p : j.at("params")) files[p.at("name").get<std::string>()] = p.at("file").get<std::string>();
  for (Parameter* p : params) {
    auto it = files.find(p->name);
    if (it == files.end()) throw DataError("checkpoint: missing parameter '" + p->name + "'");
    Tensor t = load_tnsr(dir / "params" / it->second);
    if (!t.same_shape(p->value))
      throw DimensionError("checkpoint: parameter '" + p->name + "' has shape " + shape_str(t.shape()) +
                           ", expected " + shape_str(p->value.shape()));
    p->value = std::move(t);
  }
  if (velocities != nullptr) {
    velocities->clear();
    for (const auto& v : j.at("velocities"))
      (*velocities)[v.at("name").get<std::string>()] =
          load_tnsr(dir / "params" / v.at("file").get<std::string>());
  }
}

}  // namespace dep
