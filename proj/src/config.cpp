#include "dep/config.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace dep {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
  return d;
}

long long parse_ll(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long i = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
  return i;
}

int parse_int(const std::string& key, const std::string& v) {
  return static_cast<int>(parse_ll(key, v));
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const unsigned long long i = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config: key '" + key + "' expects an unsigned integer, got '" + v + "'");
  return i;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("config: key '" + key + "' expects true or false, got '" + v + "'");
}

template <class T>
std::vector<T> parse_list(const std::string& key, std::string v) {
  v = trim(v);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') throw ConfigError("config: unterminated list for key '" + key + "'");
    v = v.substr(1, v.size() - 2);
  }
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(static_cast<T>(parse_ll(key, item)));
  }
  if (out.empty()) throw ConfigError("config: key '" + key + "' expects a non-empty list");
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <class T>
std::string fmt_list(const std::vector<T>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s + "]";
}

}  // namespace

PipelineConfig PipelineConfig::defaults() {
  PipelineConfig c;
  // Desk-scale defaults: 6-class synthetic set at 64x64 through the mini
  // backbone. The paper-scale schedule stays available through config keys.
  c.train.batch = 32;
  c.train.epochs = 15;
  c.train.decay_period = 10;
  c.train.scales = {64};
  c.train.crop = 64;
  c.train.input = 64;
  return c;
}

void PipelineConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  const std::string s = strip_quotes(v);

  if (key == "pipeline.seed") { seed = parse_u64(key, v); return; }

  if (key == "dataset.root") { dataset_root = s; return; }
  if (key == "dataset.per_class") { dataset_per_class = parse_int(key, v); return; }
  if (key == "dataset.size") { dataset_size = parse_int(key, v); return; }
  if (key == "dataset.noise") { dataset_noise = parse_double(key, v); return; }

  if (key == "backbone.preset") {
    if (s == "mini") backbone = BackboneConfig::mini();
    else if (s == "paper18") backbone = BackboneConfig::paper18();
    else if (s == "identity") backbone = BackboneConfig::identity(3);
    else throw ConfigError("config: backbone.preset must be mini, paper18 or identity");
    backbone_preset = s;
    return;
  }
  if (key == "backbone.widths") {
    auto w = parse_list<long long>(key, v);
    backbone.widths.assign(w.begin(), w.end());
    return;
  }
  if (key == "backbone.blocks") { backbone.blocks = parse_list<int>(key, v); return; }
  if (key == "backbone.strides") { backbone.strides = parse_list<int>(key, v); return; }
  if (key == "backbone.stem_channels") { backbone.stem_channels = parse_int(key, v); return; }
  if (key == "backbone.stem_kernel") { backbone.stem_kernel = parse_int(key, v); return; }
  if (key == "backbone.stem_stride") { backbone.stem_stride = parse_int(key, v); return; }
  if (key == "backbone.stem_pool") { backbone.stem_pool = parse_bool(key, v); return; }
  if (key == "backbone.in_channels") { backbone.in_channels = parse_int(key, v); return; }

  if (key == "head.variant") { head.variant = head_variant_from_string(s); return; }
  if (key == "head.codewords") { head.codewords = parse_int(key, v); return; }
  if (key == "head.reduce_enc") { head.reduce_enc = parse_int(key, v); return; }
  if (key == "head.reduce_pool") { head.reduce_pool = parse_int(key, v); return; }
  if (key == "head.fc2_out") { head.fc2_out = parse_int(key, v); return; }
  if (key == "head.enc_codewords") { head.enc_codewords = parse_int(key, v); return; }
  if (key == "head.enc_channels") { head.enc_channels = parse_int(key, v); return; }

  if (key == "train.lr") { train.lr = parse_double(key, v); return; }
  if (key == "train.momentum") { train.momentum = parse_double(key, v); return; }
  if (key == "train.batch") { train.batch = parse_int(key, v); return; }
  if (key == "train.decay") { train.decay = parse_double(key, v); return; }
  if (key == "train.decay_period") { train.decay_period = parse_int(key, v); return; }
  if (key == "train.epochs") { train.epochs = parse_int(key, v); return; }
  if (key == "train.new_layer_mult") { train.new_layer_mult = parse_double(key, v); return; }
  if (key == "train.scales") { train.scales = parse_list<int>(key, v); return; }
  if (key == "train.crop") { train.crop = parse_int(key, v); return; }
  if (key == "train.input") { train.input = parse_int(key, v); return; }
  if (key == "train.eval_scale") { train.eval_scale = parse_int(key, v); return; }
  if (key == "train.resize_mode") {
    if (s == "square") train.resize_mode = ResizeMode::Square;
    else if (s == "short_edge") train.resize_mode = ResizeMode::ShortEdge;
    else throw ConfigError("config: train.resize_mode must be square or short_edge");
    return;
  }
  if (key == "train.eval_every") { train.eval_every = parse_int(key, v); return; }
  if (key == "train.save_every") { train.save_every = parse_int(key, v); return; }

  if (key == "tsne.perplexity") { tsne.perplexity = parse_double(key, v); return; }
  if (key == "tsne.pca_dims") { tsne.pca_dims = parse_int(key, v); return; }
  if (key == "tsne.iters") { tsne.iters = parse_int(key, v); return; }
  if (key == "tsne.exaggeration") { tsne.exaggeration = parse_double(key, v); return; }
  if (key == "tsne.exagg_iters") { tsne.exagg_iters = parse_int(key, v); return; }
  if (key == "tsne.lr") { tsne.lr = parse_double(key, v); return; }
  if (key == "tsne.momentum_start") { tsne.momentum_start = parse_double(key, v); return; }
  if (key == "tsne.momentum_final") { tsne.momentum_final = parse_double(key, v); return; }
  if (key == "tsne.momentum_switch") { tsne.momentum_switch = parse_int(key, v); return; }
  if (key == "tsne.train_subset") { tsne_train_subset = parse_int(key, v); return; }

  if (key == "regressor.hidden") {
    auto h = parse_list<long long>(key, v);
    regressor.hidden.assign(h.begin(), h.end());
    return;
  }
  if (key == "regressor.batch") { regressor.batch = parse_int(key, v); return; }
  if (key == "regressor.lr") { regressor.lr = parse_double(key, v); return; }
  if (key == "regressor.momentum") { regressor.momentum = parse_double(key, v); return; }
  if (key == "regressor.decay") { regressor.decay = parse_double(key, v); return; }
  if (key == "regressor.decay_period") { regressor.decay_period = parse_int(key, v); return; }
  if (key == "regressor.epochs") { regressor.epochs = parse_int(key, v); return; }

  throw ConfigError("config: unknown key '" + key + "'");
}

void PipelineConfig::apply_file_text(const std::string& text) {
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: bad section header at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    set(key, trim(line.substr(eq + 1)));
  }
}

void PipelineConfig::apply_override(const std::string& kv) {
  const std::size_t eq = kv.find('=');
  if (eq == std::string::npos)
    throw ConfigError("config: override must look like key=value, got '" + kv + "'");
  set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
}

std::string PipelineConfig::canonical() const {
  std::string out;
  auto put = [&out](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  put("backbone.blocks", fmt_list(backbone.blocks));
  put("backbone.in_channels", std::to_string(backbone.in_channels));
  put("backbone.preset", backbone_preset);
  put("backbone.stem_channels", std::to_string(backbone.stem_channels));
  put("backbone.stem_kernel", std::to_string(backbone.stem_kernel));
  put("backbone.stem_pool", backbone.stem_pool ? "true" : "false");
  put("backbone.stem_stride", std::to_string(backbone.stem_stride));
  put("backbone.strides", fmt_list(backbone.strides));
  put("backbone.widths", fmt_list(backbone.widths));
  put("dataset.noise", fmt_double(dataset_noise));
  put("dataset.per_class", std::to_string(dataset_per_class));
  put("dataset.root", dataset_root);
  put("dataset.size", std::to_string(dataset_size));
  put("head.codewords", std::to_string(head.codewords));
  put("head.enc_channels", std::to_string(head.enc_channels));
  put("head.enc_codewords", std::to_string(head.enc_codewords));
  put("head.fc2_out", std::to_string(head.fc2_out));
  put("head.reduce_enc", std::to_string(head.reduce_enc));
  put("head.reduce_pool", std::to_string(head.reduce_pool));
  put("head.variant", to_string(head.variant));
  put("pipeline.seed", std::to_string(seed));
  put("regressor.batch", std::to_string(regressor.batch));
  put("regressor.decay", fmt_double(regressor.decay));
  put("regressor.decay_period", std::to_string(regressor.decay_period));
  put("regressor.epochs", std::to_string(regressor.epochs));
  put("regressor.hidden", fmt_list(regressor.hidden));
  put("regressor.lr", fmt_double(regressor.lr));
  put("regressor.momentum", fmt_double(regressor.momentum));
  put("train.batch", std::to_string(train.batch));
  put("train.crop", std::to_string(train.crop));
  put("train.decay", fmt_double(train.decay));
  put("train.decay_period", std::to_string(train.decay_period));
  put("train.epochs", std::to_string(train.epochs));
  put("train.eval_every", std::to_string(train.eval_every));
  put("train.eval_scale", std::to_string(train.eval_scale));
  put("train.input", std::to_string(train.input));
  put("train.lr", fmt_double(train.lr));
  put("train.momentum", fmt_double(train.momentum));
  put("train.new_layer_mult", fmt_double(train.new_layer_mult));
  put("train.resize_mode", train.resize_mode == ResizeMode::Square ? "square" : "short_edge");
  put("train.save_every", std::to_string(train.save_every));
  put("train.scales", fmt_list(train.scales));
  put("tsne.exagg_iters", std::to_string(tsne.exagg_iters));
  put("tsne.exaggeration", fmt_double(tsne.exaggeration));
  put("tsne.iters", std::to_string(tsne.iters));
  put("tsne.lr", fmt_double(tsne.lr));
  put("tsne.momentum_final", fmt_double(tsne.momentum_final));
  put("tsne.momentum_start", fmt_double(tsne.momentum_start));
  put("tsne.momentum_switch", std::to_string(tsne.momentum_switch));
  put("tsne.pca_dims", std::to_string(tsne.pca_dims));
  put("tsne.perplexity", fmt_double(tsne.perplexity));
  put("tsne.train_subset", std::to_string(tsne_train_subset));
  return out;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::string PipelineConfig::hash() const { return fnv1a_hex(canonical()); }

}  // namespace dep
