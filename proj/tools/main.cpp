#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "fracsob/error.hpp"
#include "fracsob/experiment.hpp"
#include "fracsob/runtime.hpp"

namespace {

using fracsob::ErrorCode;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInternal = 3;

// Accepts decimals and simple fractions such as 1/64.
double parse_number(const std::string& text) {
  const auto slash = text.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const double v = std::stod(text, &used);
      if (used == text.size()) return v;
    } else {
      const std::string a = text.substr(0, slash), b = text.substr(slash + 1);
      std::size_t ua = 0, ub = 0;
      const double num = std::stod(a, &ua), den = std::stod(b, &ub);
      if (ua == a.size() && ub == b.size() && den != 0.0) return num / den;
    }
  } catch (const std::exception&) {
  }
  throw fracsob::Error(ErrorCode::ConfigError, "cli", "parse_arguments", "not a number: '" + text + "'");
}

std::vector<double> parse_numbers(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& s : items) out.push_back(parse_number(s));
  return out;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::IoError:
    case ErrorCode::MalformedSpec:
    case ErrorCode::InvalidGeometry:
    case ErrorCode::DisconnectedDomain:
      return kExitConfig;
    default:
      return kExitInternal;
  }
}

struct Flags {
  std::string config;
  std::string fixture;
  std::vector<std::string> s, p, h;
  int depth = -1;
  std::vector<std::uint64_t> seeds;
  int count = -1;
  std::string out;
};

void add_flags(CLI::App* cmd, Flags& f) {
  // --h is a grid spacing here, so help is only reachable as --help.
  cmd->set_help_flag("--help", "print this help message and exit");
  cmd->add_option("--config", f.config, "JSON experiment config; flags override its fields");
  cmd->add_option("--fixture", f.fixture, "domain-spec JSON file");
  cmd->add_option("--s", f.s, "smoothness values")->delimiter(',');
  cmd->add_option("--p", f.p, "integrability values")->delimiter(',');
  cmd->add_option("--h", f.h, "grid spacings, e.g. 1/64,1/128")->delimiter(',');
  cmd->add_option("--depth", f.depth, "maximum dyadic level");
  cmd->add_option("--seed", f.seeds, "family seed(s)")->delimiter(',');
  cmd->add_option("--count", f.count, "family size");
  cmd->add_option("--out", f.out, "bundle directory");
}

fracsob::ExperimentConfig build_config(const std::string& verb, const Flags& f) {
  fracsob::ExperimentConfig c;
  if (!f.config.empty()) {
    c = fracsob::load_config(f.config);
    if (verb != "run" && c.experiment != fracsob::parse_experiment_kind(verb))
      throw fracsob::Error(ErrorCode::ConfigError, "cli", "parse_arguments",
                           "config experiment does not match the verb " + verb);
  } else if (verb == "run") {
    throw fracsob::Error(ErrorCode::ConfigError, "cli", "parse_arguments", "run needs --config");
  } else {
    c = fracsob::default_config(fracsob::parse_experiment_kind(verb));
  }
  if (!f.fixture.empty()) c.fixture = f.fixture;
  if (!f.s.empty()) c.s_list = parse_numbers(f.s);
  if (!f.p.empty()) c.p_list = parse_numbers(f.p);
  if (!f.s.empty() || !f.p.empty()) c.sp_pairs.clear();
  if (!f.h.empty()) c.h_list = parse_numbers(f.h);
  if (f.depth >= 0) c.depth = f.depth;
  if (!f.seeds.empty()) c.seeds = f.seeds;
  if (f.count >= 0) c.family_count = f.count;
  if (!f.out.empty()) c.out_dir = f.out;
  if (c.out_dir.empty()) c.out_dir = "fracsob-out/" + fracsob::experiment_kind_name(c.experiment);
  fracsob::validate_config(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  fracsob::pin_blas_kernels(argv);

  CLI::App app{"Fractional Sobolev extension and interpolation experiments"};
  app.set_help_flag("--help", "print this help message and exit");
  app.require_subcommand(1);
  const std::vector<std::string> verbs{"audit-whitney", "extend-bound", "hardy-sweep", "interp-equiv",
                                       "elliptic-suite", "cigar-check", "run"};
  std::vector<Flags> flags(verbs.size());
  std::vector<CLI::App*> cmds;
  for (std::size_t i = 0; i < verbs.size(); ++i) {
    auto* cmd = app.add_subcommand(verbs[i], verbs[i] == "run" ? "run the experiment named in --config"
                                                                : "run the " + verbs[i] + " experiment");
    add_flags(cmd, flags[i]);
    cmds.push_back(cmd);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitConfig;
  }

  try {
    std::size_t which = 0;
    for (std::size_t i = 0; i < cmds.size(); ++i)
      if (cmds[i]->parsed()) which = i;
    const fracsob::ExperimentConfig config = build_config(verbs[which], flags[which]);
    const fracsob::ResultBundle bundle = fracsob::run_experiment(config);
    fracsob::write_bundle(bundle);
    for (const auto& item : bundle.summary) {
      std::cout << (item.pass ? "PASS" : "FAIL") << "  ";
      if (item.criterion > 0) std::cout << "[" << item.criterion << "] ";
      std::cout << item.name << ": " << item.detail << "\n";
    }
    std::cout << "bundle written to " << config.out_dir << " (" << bundle.wall_seconds << " s)\n";
    return bundle.pass() ? kExitPass : kExitFail;
  } catch (const fracsob::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
