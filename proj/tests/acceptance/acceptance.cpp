// Runs every acceptance experiment at its contracted resolution and prints one line per criterion.
//
// Exit status is 0 when the failing criteria are exactly the ones passed to --known-red, so a
// criterion that starts passing, or a new failure, both turn the run red.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fracsob/error.hpp"
#include "fracsob/experiment.hpp"
#include "fracsob/runtime.hpp"

namespace {

using fracsob::ExperimentConfig;
using fracsob::ExperimentKind;
using fracsob::ResultBundle;

struct Criterion {
  bool pass = true;
  bool seen = false;
  std::vector<std::string> details;

  void add(bool ok, const std::string& detail) {
    pass = pass && ok;
    seen = true;
    details.push_back(detail);
  }
};

struct Run {
  std::string label;
  ExperimentConfig config;
};

ExperimentConfig make(ExperimentKind kind, const std::string& fixture_dir, const std::string& fixture) {
  ExperimentConfig c = fracsob::default_config(kind);
  c.fixture = fixture_dir + "/" + fixture + ".json";
  return c;
}

ResultBundle run_with_threads(const ExperimentConfig& c, const std::string& threads) {
  setenv("FRACSOB_THREADS", threads.c_str(), 1);
  return fracsob::run_experiment(c);
}

std::string tables_mismatch(const ResultBundle& a, const ResultBundle& b) {
  if (a.tables.size() != b.tables.size()) return "table count differs";
  for (std::size_t i = 0; i < a.tables.size(); ++i)
    if (a.tables[i].name != b.tables[i].name || a.tables[i].csv != b.tables[i].csv) return a.tables[i].name;
  if (a.summary_json() != b.summary_json()) return "summary.json";
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  fracsob::pin_blas_kernels(argv);

  CLI::App app{"fracsob acceptance run"};
  std::string fixture_dir = FRACSOB_FIXTURE_DIR;
  std::vector<int> known_red;
  std::string threads_a = "1", threads_b = "3";
  app.add_option("--fixtures", fixture_dir, "directory holding the fixture JSON files");
  app.add_option("--known-red", known_red, "criteria expected to fail; the run is green only if exactly these fail")
      ->delimiter(',');
  app.add_option("--threads", threads_a, "FRACSOB_THREADS for the first run of each bundle");
  app.add_option("--rerun-threads", threads_b, "FRACSOB_THREADS for the determinism rerun");
  CLI11_PARSE(app, argc, argv);

  std::vector<Run> runs;
  for (const char* f : {"half_plane", "square_bottom_d", "square_dirichlet", "lshape", "slit_square"})
    runs.push_back({std::string("audit-whitney ") + f, make(ExperimentKind::WhitneyAudit, fixture_dir, f)});
  runs.push_back({"extend-bound small_square_bottom_d",
                  make(ExperimentKind::ExtensionBound, fixture_dir, "small_square_bottom_d")});
  runs.push_back({"hardy-sweep square_bottom_d", make(ExperimentKind::HardySweep, fixture_dir, "square_bottom_d")});
  runs.push_back({"interp-equiv square_bottom_d",
                  make(ExperimentKind::InterpolationEquivalence, fixture_dir, "square_bottom_d")});
  {
    ExperimentConfig c = make(ExperimentKind::EllipticSuite, fixture_dir, "square_bottom_d");
    c.budgets["mixed_square_oracle"] = 1.0;
    runs.push_back({"elliptic-suite square_bottom_d", c});
  }

  std::map<int, Criterion> crit;
  for (const Run& r : runs) {
    std::cout << "running " << r.label << std::flush;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const ResultBundle first = run_with_threads(r.config, threads_a);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const ResultBundle second = run_with_threads(r.config, threads_b);
      std::cout << " (" << secs << " s)\n";
      for (const auto& item : first.summary) {
        if (item.criterion <= 0) continue;
        crit[item.criterion].add(item.pass, r.label + ": " + item.detail);
      }
      if (r.config.experiment == ExperimentKind::WhitneyAudit) {
        std::ostringstream d;
        d << r.label << ": " << secs << " s (limit 10 s)";
        crit[1].add(secs < 10.0, d.str());
      }
      const std::string diff = tables_mismatch(first, second);
      crit[10].add(diff.empty(), r.label + ": " + (diff.empty() ? "identical at FRACSOB_THREADS " + threads_a + " and " +
                                                                       threads_b
                                                                 : "differs in " + diff));
    } catch (const fracsob::Error& e) {
      std::cout << " error\n";
      crit[0].add(false, r.label + ": " + e.what());
    }
  }

  std::cout << "\n";
  std::set<int> failed;
  for (int n = 1; n <= 10; ++n) {
    Criterion& c = crit[n];
    if (!c.seen) c.add(false, "no experiment reported this criterion");
    if (!c.pass) failed.insert(n);
    std::cout << (c.pass ? "PASS" : "FAIL") << "  [" << n << "]\n";
    for (const auto& d : c.details) std::cout << "        " << d << "\n";
  }
  if (crit.count(0)) {
    failed.insert(0);
    for (const auto& d : crit[0].details) std::cout << "ERROR " << d << "\n";
  }

  const std::set<int> expected(known_red.begin(), known_red.end());
  std::cout << "\n" << (10 - static_cast<int>(failed.size() - failed.count(0))) << "/10 criteria pass";
  if (!expected.empty()) {
    std::cout << "; known red:";
    for (int n : expected) std::cout << " " << n;
  }
  std::cout << "\n";
  if (failed != expected) {
    std::cout << "failing criteria differ from the known-red list\n";
    return 1;
  }
  return 0;
}
