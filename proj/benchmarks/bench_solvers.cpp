#include <benchmark/benchmark.h>

#include <cmath>

#include "micromotion/floquet.hpp"
#include "micromotion/numerov.hpp"
#include "micromotion/propagator.hpp"
#include "micromotion/single_ion.hpp"
#include "micromotion/units.hpp"

using namespace micromotion;

namespace {

DimensionlessModel trap_model() {
    DimensionlessModel m;
    m.omega = 12.7;
    m.gamma = 1.0 / std::sqrt(2.0);
    m.q = 2.0 * std::sqrt(2.0) / m.omega;
    return m;
}

void BM_NumerovBasis(benchmark::State& state) {
    DimensionlessModel m = trap_model();
    m.R = 2.0;
    m.phase = 1.0;
    NumericsConfig num;
    num.energy_min = -200.0;
    num.energy_max = double(state.range(0));
    num.x_max = 15.0;
    num.r_min_target = 0.5;
    for (auto _ : state) benchmark::DoNotOptimize(solve_unperturbed(m, num));
}
BENCHMARK(BM_NumerovBasis)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_FloquetDiagonalize(benchmark::State& state) {
    const int ne = int(state.range(0)), nf = int(state.range(1));
    const UnperturbedBasis b = harmonic_basis(ne);
    const DimensionlessModel m = trap_model();
    const Eigen::MatrixXd F = atom_ion_floquet_matrix(atom_ion_drive(b, m, 1.0), m.omega, nf);
    for (auto _ : state) benchmark::DoNotOptimize(diagonalize_floquet(F, {ne, nf}, m.omega));
}
BENCHMARK(BM_FloquetDiagonalize)->Args({20, 5})->Args({40, 10})->Args({60, 10})->Unit(benchmark::kMillisecond);

void BM_PropagatorPeriod(benchmark::State& state) {
    const UnperturbedBasis b = harmonic_basis(int(state.range(0)));
    const PeriodicHamiltonian H = micromotion_hamiltonian(b, trap_model(), 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(propagate_one_period(H));
}
BENCHMARK(BM_PropagatorPeriod)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_TwoLevelScan(benchmark::State& state) {
    TwoLevelModel m;
    for (auto _ : state)
        for (int i = 0; i < 200; ++i) {
            m.omega0 = 0.5 + i / 199.0;
            benchmark::DoNotOptimize(two_level_quasienergies(m, 20, 0.5));
        }
}
BENCHMARK(BM_TwoLevelScan)->Unit(benchmark::kMillisecond);

void BM_Mathieu(benchmark::State& state) {
    const double q = 2.0 * std::sqrt(2.0) / 12.7;
    for (auto _ : state) benchmark::DoNotOptimize(mathieu_floquet(0.0, q, 12.7));
}
BENCHMARK(BM_Mathieu);

}  // namespace
BENCHMARK_MAIN();
