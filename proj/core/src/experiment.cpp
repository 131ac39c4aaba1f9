#include "fracsob/experiment.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "fracsob/error.hpp"
#include "pipelines.hpp"

#ifndef FRACSOB_VERSION
#define FRACSOB_VERSION "unknown"
#endif

namespace fracsob {

using ordered_json = nlohmann::ordered_json;

namespace {

struct KindName {
  ExperimentKind kind;
  const char* name;
  const char* verb;
};

constexpr KindName kKinds[] = {
    {ExperimentKind::WhitneyAudit, "whitney-audit", "audit-whitney"},
    {ExperimentKind::ExtensionBound, "extension-bound", "extend-bound"},
    {ExperimentKind::HardySweep, "hardy-sweep", "hardy-sweep"},
    {ExperimentKind::InterpolationEquivalence, "interpolation-equivalence", "interp-equiv"},
    {ExperimentKind::EllipticSuite, "elliptic-suite", "elliptic-suite"},
    {ExperimentKind::CigarCheck, "cigar-check", "cigar-check"},
};

[[noreturn]] void config_error(const std::string& detail) {
  throw Error(ErrorCode::ConfigError, "cli", "run_experiment", detail);
}

std::vector<double> number_list(const nlohmann::json& v, const std::string& key) {
  std::vector<double> out;
  if (v.is_number()) {
    out.push_back(v.get<double>());
  } else if (v.is_array()) {
    for (const auto& x : v) {
      if (!x.is_number()) config_error("'" + key + "' must hold numbers");
      out.push_back(x.get<double>());
    }
  } else {
    config_error("'" + key + "' must be a number or an array of numbers");
  }
  return out;
}

}  // namespace

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (const auto& k : kKinds)
    if (name == k.name || name == k.verb) return k.kind;
  config_error("unknown experiment '" + name + "'");
}

std::string experiment_kind_name(ExperimentKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.name;
  return "unknown";
}

double ExperimentConfig::budget(const std::string& key, double fallback) const {
  const auto it = budgets.find(key);
  return it == budgets.end() ? fallback : it->second;
}

std::vector<std::pair<double, double>> ExperimentConfig::pairs() const {
  if (!sp_pairs.empty()) return sp_pairs;
  std::vector<std::pair<double, double>> out;
  for (double s : s_list)
    for (double p : p_list) out.emplace_back(s, p);
  return out;
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  switch (kind) {
    case ExperimentKind::WhitneyAudit:
      c.depth = 12;
      break;
    case ExperimentKind::ExtensionBound:
      c.depth = 12;
      c.s_list = {0.3, 0.5, 0.7};
      c.p_list = {1.5, 2.0, 3.0};
      c.h_list = {1.0 / 64, 1.0 / 128};
      break;
    case ExperimentKind::HardySweep:
      c.sp_pairs = {{0.3, 2.0}, {0.2, 3.0}, {0.75, 2.0}, {0.5, 3.0}};
      c.h_list = {1.0 / 32, 1.0 / 64, 1.0 / 128};
      break;
    case ExperimentKind::InterpolationEquivalence:
      c.s_list = {0.3, 0.5, 0.7};
      c.p_list = {2.0};
      c.h_list = {1.0 / 32, 1.0 / 64};
      break;
    case ExperimentKind::EllipticSuite:
      c.s_list = {0.3, 0.5, 0.7};
      c.p_list = {2.0, 1.5, 3.0};
      c.h_list = {1.0 / 64, 1.0 / 32};
      break;
    case ExperimentKind::CigarCheck:
      c.depth = 10;
      break;
  }
  return c;
}

void validate_config(const ExperimentConfig& c) {
  if (c.fixture.empty()) config_error("no fixture given");
  if (!std::filesystem::exists(c.fixture))
    throw Error(ErrorCode::IoError, "cli", "run_experiment", "fixture not found: " + c.fixture);
  for (double s : c.s_list)
    if (!(s > 0.0 && s <= 1.0)) config_error("s values must lie in (0, 1]");
  for (double p : c.p_list)
    if (!(p >= 1.0) || !std::isfinite(p)) config_error("p values must lie in [1, inf)");
  for (const auto& [s, p] : c.sp_pairs)
    if (!(s > 0.0 && s <= 1.0) || !(p >= 1.0) || !std::isfinite(p)) config_error("(s, p) pair out of range");
  for (double h : c.h_list)
    if (!(h > 0.0)) config_error("h values must be positive");
  if (c.depth < 1 || c.depth > 20) config_error("depth must lie in [1, 20]");
  if (c.family_count < 1) config_error("count must be at least 1");
  if (c.seeds.empty()) config_error("at least one seed is required");
  if (c.gap < 0.0) config_error("gap must be nonnegative");
}

ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("config must be a JSON object");
  if (!j.contains("experiment") || !j["experiment"].is_string()) config_error("missing 'experiment'");
  ExperimentConfig c = default_config(parse_experiment_kind(j["experiment"].get<std::string>()));
  for (const auto& [key, v] : j.items()) {
    if (key == "experiment") continue;
    if (key == "fixture") {
      if (!v.is_string()) config_error("'fixture' must be a string");
      c.fixture = v.get<std::string>();
    } else if (key == "s") {
      c.s_list = number_list(v, key);
    } else if (key == "p") {
      c.p_list = number_list(v, key);
    } else if (key == "h") {
      c.h_list = number_list(v, key);
    } else if (key == "pairs") {
      if (!v.is_array()) config_error("'pairs' must be an array of [s, p]");
      c.sp_pairs.clear();
      for (const auto& pr : v) {
        const auto xs = number_list(pr, key);
        if (xs.size() != 2) config_error("'pairs' entries must be [s, p]");
        c.sp_pairs.emplace_back(xs[0], xs[1]);
      }
    } else if (key == "depth") {
      if (!v.is_number_integer()) config_error("'depth' must be an integer");
      c.depth = v.get<int>();
    } else if (key == "seed" || key == "seeds") {
      c.seeds.clear();
      for (double s : number_list(v, key)) {
        if (s < 0.0 || s != std::floor(s)) config_error("seeds must be nonnegative integers");
        c.seeds.push_back(static_cast<std::uint64_t>(s));
      }
    } else if (key == "count") {
      if (!v.is_number_integer()) config_error("'count' must be an integer");
      c.family_count = v.get<int>();
    } else if (key == "gap") {
      if (!v.is_number()) config_error("'gap' must be a number");
      c.gap = v.get<double>();
    } else if (key == "coefficient") {
      if (!v.is_string()) config_error("'coefficient' must be a string");
      c.coefficient = v.get<std::string>();
    } else if (key == "budgets") {
      if (!v.is_object()) config_error("'budgets' must be an object");
      for (const auto& [bk, bv] : v.items()) {
        if (!bv.is_number()) config_error("budget '" + bk + "' must be a number");
        c.budgets[bk] = bv.get<double>();
      }
    } else if (key == "out_dir") {
      if (!v.is_string()) config_error("'out_dir' must be a string");
      c.out_dir = v.get<std::string>();
    } else {
      config_error("unknown config key '" + key + "'");
    }
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cli", "run_experiment", "cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

ordered_json config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["experiment"] = experiment_kind_name(c.experiment);
  j["fixture"] = c.fixture;
  j["s"] = c.s_list;
  j["p"] = c.p_list;
  j["h"] = c.h_list;
  ordered_json pairs = ordered_json::array();
  for (const auto& [s, p] : c.sp_pairs) pairs.push_back({s, p});
  j["pairs"] = pairs;
  j["depth"] = c.depth;
  j["seeds"] = c.seeds;
  j["count"] = c.family_count;
  j["gap"] = c.gap;
  j["coefficient"] = c.coefficient;
  ordered_json b = ordered_json::object();
  for (const auto& [k, v] : c.budgets) b[k] = v;
  j["budgets"] = b;
  j["out_dir"] = c.out_dir;
  return j;
}

}  // namespace

std::string config_json(const ExperimentConfig& config) { return config_to_json(config).dump(2); }

bool ResultBundle::pass() const {
  for (const auto& item : summary)
    if (!item.pass) return false;
  return true;
}

const Table* ResultBundle::table(const std::string& name) const {
  for (const auto& t : tables)
    if (t.name == name) return &t;
  return nullptr;
}

std::string ResultBundle::summary_json() const {
  ordered_json j;
  j["experiment"] = experiment_kind_name(config.experiment);
  j["fixture"] = std::filesystem::path(config.fixture).filename().string();
  j["pass"] = pass();
  ordered_json items = ordered_json::array();
  for (const auto& it : summary) {
    ordered_json o;
    o["criterion"] = it.criterion;
    o["name"] = it.name;
    o["pass"] = it.pass;
    o["detail"] = it.detail;
    items.push_back(o);
  }
  j["items"] = items;
  return j.dump(2) + "\n";
}

std::string ResultBundle::manifest_json() const {
  ordered_json j;
  j["version"] = version_string();
  j["config"] = config_to_json(config);
  j["wall_seconds"] = wall_seconds;
  ordered_json ts = ordered_json::array();
  std::string digest_input;
  for (const auto& t : tables) {
    const std::string h = sha256_hex(t.csv);
    ts.push_back({{"name", t.name}, {"bytes", t.csv.size()}, {"sha256", h}});
    digest_input += t.name + ":" + h + "\n";
  }
  j["tables"] = ts;
  j["tables_sha256"] = sha256_hex(digest_input);
  return j.dump(2) + "\n";
}

ResultBundle run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  const auto start = std::chrono::steady_clock::now();
  ResultBundle b;
  b.config = config;
  switch (config.experiment) {
    case ExperimentKind::WhitneyAudit:
      detail::run_whitney_audit(config, b);
      break;
    case ExperimentKind::ExtensionBound:
      detail::run_extension_bound(config, b);
      break;
    case ExperimentKind::HardySweep:
      detail::run_hardy_sweep(config, b);
      break;
    case ExperimentKind::InterpolationEquivalence:
      detail::run_interpolation_equivalence(config, b);
      break;
    case ExperimentKind::EllipticSuite:
      detail::run_elliptic_suite(config, b);
      break;
    case ExperimentKind::CigarCheck:
      detail::run_cigar_check(config, b);
      break;
  }
  b.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return b;
}

void write_bundle(const ResultBundle& bundle) {
  namespace fs = std::filesystem;
  const fs::path dir = bundle.config.out_dir.empty() ? fs::path(".") : fs::path(bundle.config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cli", "write_bundle", "cannot create " + dir.string());
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "cli", "write_bundle", "cannot write " + (dir / name).string());
  };
  for (const auto& t : bundle.tables) put(t.name, t.csv);
  put("summary.json", bundle.summary_json());
  put("manifest.json", bundle.manifest_json());
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::IoError, "cli", "write_bundle", "SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

const char* version_string() { return FRACSOB_VERSION; }

}  // namespace fracsob
