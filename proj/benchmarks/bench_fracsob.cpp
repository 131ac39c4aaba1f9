#include <benchmark/benchmark.h>

#include <memory>
#include <string>

#include "fracsob/elliptic.hpp"
#include "fracsob/family.hpp"
#include "fracsob/interpolation.hpp"
#include "fracsob/norms.hpp"
#include "fracsob/runtime.hpp"
#include "fracsob/whitney.hpp"

namespace {

using namespace fracsob;

DomainModel fixture(const std::string& name) {
  return load_domain_file(std::string(FRACSOB_FIXTURE_DIR) + "/" + name + ".json");
}

void BM_WhitneyDecompose(benchmark::State& state) {
  const DomainModel d = fixture("lshape");
  const ClosedSet f = ClosedSet::gamma_closure(d);
  const int depth = static_cast<int>(state.range(0));
  std::size_t cubes = 0;
  for (auto _ : state) {
    const WhitneyDecomposition dec = whitney_decompose(f, d.window(), depth);
    cubes = dec.cubes().size();
    benchmark::DoNotOptimize(cubes);
  }
  state.counters["cubes"] = static_cast<double>(cubes);
}
BENCHMARK(BM_WhitneyDecompose)->DenseRange(8, 12, 2)->Unit(benchmark::kMillisecond);

void BM_GagliardoBatch(benchmark::State& state) {
  const DomainModel d = fixture("square_bottom_d");
  const double h = 1.0 / static_cast<double>(state.range(0));
  const GridFunction f = generate_family(FamilyKind::Bumps, 1, 1, d, h).front();
  const std::vector<SeminormRequest> req{{0.3, 1.5}, {0.5, 2.0}, {0.7, 3.0}};
  for (auto _ : state) benchmark::DoNotOptimize(gagliardo_batch(f, req));
}
BENCHMARK(BM_GagliardoBatch)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SpectralDecompose(benchmark::State& state) {
  const DomainModel d = fixture("square_bottom_d");
  const double h = 1.0 / static_cast<double>(state.range(0));
  auto op = std::make_shared<const OperatorMatrix>(assemble_dirichlet_form(d, CoefficientField::identity(), h));
  for (auto _ : state) benchmark::DoNotOptimize(spectral_decompose(op).values[0]);
  state.counters["dimension"] = op->dimension;
}
BENCHMARK(BM_SpectralDecompose)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_KProfile(benchmark::State& state) {
  const DomainModel d = fixture("square_bottom_d");
  const double h = 1.0 / 32;
  auto op = std::make_shared<const OperatorMatrix>(assemble_dirichlet_form(d, CoefficientField::identity(), h));
  const KSolver solver(std::make_shared<const Spectrum>(spectral_decompose(op)));
  const GridFunction f = generate_family(FamilyKind::Bumps, 1, 1, d, h).front();
  const double p = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solver.profile(f, p, 8).k_values.back());
}
BENCHMARK(BM_KProfile)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  fracsob::pin_blas_kernels(argv);
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
