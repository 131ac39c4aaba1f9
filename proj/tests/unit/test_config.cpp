#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "fracsob/experiment.hpp"
#include "fracsob/family.hpp"
#include "support.hpp"

namespace fracsob {
namespace {

using test::fixture;
using test::fixture_path;

TEST(Grid, SpecValidation) {
  const GridSpec g = GridSpec::make({{-1, -1}, {2, 2}}, 1.0 / 16);
  EXPECT_EQ(g.n, 48);
  EXPECT_EQ(g.index(3, 2), 2u * 48 + 3);
  EXPECT_DOUBLE_EQ(g.center(0, 0).x, -1 + 1.0 / 32);
  EXPECT_FRACSOB_ERROR(GridSpec::make({{-1, -1}, {2, 2}}, 0.0), InvalidParameters);
  EXPECT_FRACSOB_ERROR(GridSpec::make({{-1, -1}, {2, 2}}, 0.7), InvalidParameters);
  EXPECT_FRACSOB_ERROR(GridSpec::make({{-1, -1}, {2, 3}}, 0.5), InvalidParameters);
}

TEST(Grid, CellClassesOnMixedSquare) {
  const DomainModel d = fixture("square_bottom_d");
  const GridSpec g = GridSpec::make(d.window(), 1.0 / 8);
  const auto mask = classify_cells(d, g);
  std::size_t interior = 0, d_collar = 0;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    const Vec2 c = g.center(k);
    const bool inside = c.x > 0 && c.x < 1 && c.y > 0 && c.y < 1;
    EXPECT_EQ(mask[k] == CellMask::Interior, inside) << k;
    if (mask[k] == CellMask::Interior) ++interior;
    if (mask[k] == CellMask::DCollar) {
      ++d_collar;
      EXPECT_LT(c.y, 0.0);
    }
  }
  EXPECT_EQ(interior, 64u);
  EXPECT_GT(d_collar, 0u);
}

TEST(Grid, WriteReadRoundTrip) {
  const DomainModel d = fixture("lshape");
  const GridFunction f = sample_on_omega(d, 1.0 / 8, [](Vec2 x) { return std::sin(7 * x.x) / 3.0 + x.y; });
  std::stringstream buf;
  write_grid(buf, f);
  const GridFunction g = read_grid(buf);
  EXPECT_TRUE(g.spec == f.spec);
  EXPECT_EQ(g.values, f.values);
  EXPECT_EQ(g.mask, f.mask);

  std::stringstream bad("fracsob-grid 2\n");
  EXPECT_FRACSOB_ERROR(read_grid(bad), MalformedSpec);
  std::stringstream truncated("fracsob-grid 1\nwindow 0 0 1 1\nh 0.5\nn 2\nvalues\n1 2 3\n");
  EXPECT_FRACSOB_ERROR(read_grid(truncated), MalformedSpec);
}

TEST(Family, RepeatableAndSeedDependent) {
  const DomainModel d = fixture("square_bottom_d");
  const auto a = generate_family(FamilyKind::Bumps, 6, 11, d, 1.0 / 16);
  const auto b = generate_family(FamilyKind::Bumps, 6, 11, d, 1.0 / 16);
  const auto c = generate_family(FamilyKind::Bumps, 6, 12, d, 1.0 / 16);
  ASSERT_EQ(a.size(), 6u);
  for (std::size_t m = 0; m < a.size(); ++m) EXPECT_EQ(a[m].values, b[m].values);
  EXPECT_NE(a[0].values, c[0].values);
  EXPECT_EQ(parse_family_kind(family_kind_name(FamilyKind::PolynomialTimesCutoff)), FamilyKind::PolynomialTimesCutoff);
}

TEST(Family, BumpsStayAwayFromD) {
  const DomainModel d = fixture("square_bottom_d");
  const double h = 1.0 / 32;
  for (const FamilyMember& m : describe_family(FamilyKind::BumpsAwayFromD, 20, 4, d, 4 * h))
    for (const BumpTerm& b : m.bumps) EXPECT_GE(b.center.y - b.radius, 4 * h - 1e-12);
  for (const GridFunction& f : generate_family(FamilyKind::BumpsAwayFromD, 20, 4, d, h))
    for (std::size_t k = 0; k < f.values.size(); ++k)
      if (f.values[k] != 0.0) EXPECT_GE(f.spec.center(k).y, 4 * h - 0.5 * h);
}

// Ten members sampled on the grid are linearly independent.
TEST(Family, GramMatrixHasFullRank) {
  const DomainModel d = fixture("square_bottom_d");
  for (FamilyKind kind : {FamilyKind::Bumps, FamilyKind::PolynomialTimesCutoff}) {
    const auto fam = generate_family(kind, 10, 2, d, 1.0 / 32);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(fam[0].values.size()), 10);
    for (int j = 0; j < 10; ++j)
      for (std::size_t k = 0; k < fam[0].values.size(); ++k)
        m(static_cast<Eigen::Index>(k), j) = fam[static_cast<std::size_t>(j)].values[k];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    EXPECT_GT(sv[9], 1e-8 * sv[0]) << family_kind_name(kind);
  }
}

TEST(Config, ParsesAndRejects) {
  const std::string fx = fixture_path("square_bottom_d.json");
  const ExperimentConfig c = parse_config(R"({"experiment": "hardy-sweep", "fixture": ")" + fx +
                                          R"(", "h": [0.03125], "seeds": [3, 4], "budgets": {"lip": 2}})");
  EXPECT_EQ(c.experiment, ExperimentKind::HardySweep);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 4}));
  EXPECT_DOUBLE_EQ(c.budget("lip", 0.0), 2.0);
  EXPECT_DOUBLE_EQ(c.budget("other", 7.0), 7.0);
  const ExperimentConfig again = parse_config(config_json(c));
  EXPECT_EQ(config_json(again), config_json(c));

  EXPECT_FRACSOB_ERROR(parse_config(R"({"experiment": "frobnicate", "fixture": ")" + fx + "\"}"), ConfigError);
  EXPECT_FRACSOB_ERROR(parse_config(R"({"experiment": "hardy-sweep", "fixture": ")" + fx + R"(", "colour": 1})"),
                       ConfigError);
  EXPECT_FRACSOB_ERROR(parse_config(R"({"experiment": "hardy-sweep", "fixture": ")" + fx + R"(", "s": [1.5]})"),
                       ConfigError);
  EXPECT_FRACSOB_ERROR(parse_config(R"({"experiment": "hardy-sweep", "fixture": "/nonexistent/x.json"})"), IoError);
  EXPECT_FRACSOB_ERROR(parse_config("[1, 2"), ConfigError);
  EXPECT_FRACSOB_ERROR(load_config("/nonexistent/config.json"), IoError);
}

TEST(Hash, KnownDigests) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Experiment, WhitneyAuditTablesIgnoreThreadCount) {
  ExperimentConfig c = default_config(ExperimentKind::WhitneyAudit);
  c.fixture = fixture_path("lshape.json");
  c.depth = 8;
  const char* saved = std::getenv("FRACSOB_THREADS");
  const std::string restore = saved ? saved : "";
  setenv("FRACSOB_THREADS", "1", 1);
  const ResultBundle one = run_experiment(c);
  setenv("FRACSOB_THREADS", "3", 1);
  const ResultBundle three = run_experiment(c);
  if (saved) setenv("FRACSOB_THREADS", restore.c_str(), 1);
  else unsetenv("FRACSOB_THREADS");

  ASSERT_EQ(one.tables.size(), three.tables.size());
  ASSERT_FALSE(one.tables.empty());
  for (std::size_t i = 0; i < one.tables.size(); ++i) {
    EXPECT_EQ(one.tables[i].name, three.tables[i].name);
    EXPECT_EQ(one.tables[i].csv, three.tables[i].csv) << one.tables[i].name;
  }
  EXPECT_EQ(one.summary_json(), three.summary_json());
}

}  // namespace
}  // namespace fracsob
