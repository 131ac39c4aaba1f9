#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fracsob {

enum class ExperimentKind { WhitneyAudit, ExtensionBound, HardySweep, InterpolationEquivalence, EllipticSuite, CigarCheck };

// Accepts the canonical names and the CLI verbs. Throws ConfigError.
ExperimentKind parse_experiment_kind(const std::string& name);
std::string experiment_kind_name(ExperimentKind kind);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::WhitneyAudit;
  std::string fixture;
  std::vector<double> s_list;
  std::vector<double> p_list;
  std::vector<double> h_list;
  // Explicit (s, p) pairs; when empty the product s_list x p_list is used.
  std::vector<std::pair<double, double>> sp_pairs;
  int depth = 12;
  std::vector<std::uint64_t> seeds{1};
  int family_count = 50;
  // Distance kept between bump supports and D; 0 means 4 * max(h_list).
  double gap = 0.0;
  std::string coefficient = "identity";
  std::map<std::string, double> budgets;
  std::string out_dir;

  double budget(const std::string& key, double fallback) const;
  std::vector<std::pair<double, double>> pairs() const;
};

// Defaults for each experiment, used by the CLI before applying flags.
ExperimentConfig default_config(ExperimentKind kind);

// Reads the JSON form. Unknown experiment names and out-of-range lists throw ConfigError;
// a missing fixture file throws IoError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_json(const ExperimentConfig& config);
void validate_config(const ExperimentConfig& config);

struct SummaryItem {
  int criterion = 0;  // acceptance item number, 0 for exploratory output
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Table {
  std::string name;  // file name inside the bundle
  std::string csv;
};

struct ResultBundle {
  ExperimentConfig config;
  std::vector<Table> tables;
  std::vector<SummaryItem> summary;
  double wall_seconds = 0.0;

  bool pass() const;
  const Table* table(const std::string& name) const;
  std::string summary_json() const;
  // Config echo, code version, wall clock, per-table SHA-256 and a digest over all tables.
  std::string manifest_json() const;
};

ResultBundle run_experiment(const ExperimentConfig& config);
// Writes tables, summary.json and manifest.json into config.out_dir. Throws IoError.
void write_bundle(const ResultBundle& bundle);

std::string sha256_hex(const std::string& data);
const char* version_string();

}  // namespace fracsob
