#include "msa/config.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "msa/errors.hpp"

namespace msa {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config: key '" + key + "' expects an unsigned integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: key '" + key + "' expects true/false, got '" + v + "'");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunConfig RunConfig::parse_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value', got '" +
                        line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
    }
    if (key == "operator") cfg.operator_kind = val;
    else if (key == "sigma") cfg.sigma = parse_double(key, val);
    else if (key == "lambda") cfg.lambda = parse_double(key, val);
    else if (key == "rho") cfg.rho = parse_double(key, val);
    else if (key == "mask_keep") cfg.mask_keep = parse_double(key, val);
    else if (key == "blur_sigma") cfg.blur_sigma = parse_double(key, val);
    else if (key == "blur_size") cfg.blur_size = parse_int(key, val);
    else if (key == "layers") cfg.layers = parse_int(key, val);
    else if (key == "channels") cfg.channels = parse_int(key, val);
    else if (key == "T") cfg.T = parse_int(key, val);
    else if (key == "tau") cfg.tau = parse_double(key, val);
    else if (key == "eta") cfg.eta = parse_double(key, val);
    else if (key == "K") cfg.K = parse_int(key, val);
    else if (key == "variant") cfg.variant = val;
    else if (key == "paper_literal_signs") cfg.paper_literal_signs = parse_bool(key, val);
    else if (key == "drift_probe") cfg.drift_probe = parse_bool(key, val);
    else if (key == "train_count") cfg.train_count = parse_int(key, val);
    else if (key == "test_count") cfg.test_count = parse_int(key, val);
    else if (key == "height") cfg.height = parse_int(key, val);
    else if (key == "width") cfg.width = parse_int(key, val);
    else if (key == "shapes") cfg.shapes = parse_int(key, val);
    else if (key == "seed") cfg.seed = parse_u64(key, val);
    else if (key == "output_dir") cfg.output_dir = val;
    else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

// Canonical form of the keys that determine the numerical artifact; the
// output directory is deliberately excluded so runs into different
// directories digest identically.
std::string RunConfig::canonical_text() const {
  std::string out;
  auto kv = [&out](const char* k, const std::string& v) {
    out += k;
    out += " = ";
    out += v;
    out += "\n";
  };
  kv("K", std::to_string(K));
  kv("T", std::to_string(T));
  kv("blur_sigma", format_double(blur_sigma));
  kv("blur_size", std::to_string(blur_size));
  kv("channels", std::to_string(channels));
  kv("drift_probe", drift_probe ? "true" : "false");
  kv("eta", format_double(eta));
  kv("height", std::to_string(height));
  kv("lambda", format_double(lambda));
  kv("layers", std::to_string(layers));
  kv("mask_keep", format_double(mask_keep));
  kv("operator", operator_kind);
  kv("paper_literal_signs", paper_literal_signs ? "true" : "false");
  kv("rho", format_double(rho));
  kv("seed", std::to_string(seed));
  kv("shapes", std::to_string(shapes));
  kv("sigma", format_double(sigma));
  kv("tau", format_double(tau));
  kv("test_count", std::to_string(test_count));
  kv("train_count", std::to_string(train_count));
  kv("variant", variant);
  kv("width", std::to_string(width));
  return out;
}

std::uint64_t RunConfig::digest() const {
  // FNV-1a 64 over the canonical text
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : canonical_text()) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

SolverConfig RunConfig::solver() const {
  SolverConfig s;
  s.T = T;
  s.tau = tau;
  s.eta = eta;
  s.K = K;
  s.variant = parse_variant(variant);
  s.paper_literal_signs = paper_literal_signs;
  s.seed = seed;
  return s;
}

void RunConfig::validate() const {
  if (operator_kind != "identity" && operator_kind != "blur" && operator_kind != "mask") {
    throw ConfigError("config: operator must be identity|blur|mask, got '" + operator_kind + "'");
  }
  if (sigma < 0.0) throw ConfigError("config: sigma must be >= 0");
  if (!(lambda > 0.0)) throw ConfigError("config: lambda must be > 0");
  if (rho < 0.0) throw ConfigError("config: rho must be >= 0");
  if (!(mask_keep > 0.0 && mask_keep <= 1.0)) throw ConfigError("config: mask_keep must be in (0,1]");
  if (blur_size < 1 || blur_size % 2 == 0) throw ConfigError("config: blur_size must be odd and >= 1");
  if (!(blur_sigma > 0.0)) throw ConfigError("config: blur_sigma must be > 0");
  if (layers < 2) throw ConfigError("config: layers must be >= 2");
  if (channels < 1) throw ConfigError("config: channels must be >= 1");
  if (T < 0) throw ConfigError("config: T must be >= 0");
  if (!(tau > 0.0)) throw ConfigError("config: tau must be > 0");
  if (eta < 0.0) throw ConfigError("config: eta must be >= 0");
  if (K < 1) throw ConfigError("config: K must be >= 1");
  parse_variant(variant);
  if (train_count < 1) throw ConfigError("config: train_count must be >= 1");
  if (test_count < 0) throw ConfigError("config: test_count must be >= 0");
  if (height < 8 || width < 8) throw ConfigError("config: height and width must be >= 8");
  if (shapes < 0) throw ConfigError("config: shapes must be >= 0");
  if (output_dir.empty()) throw ConfigError("config: output_dir must not be empty");
}

}  // namespace msa
