#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <random>

#include "mrp/ccd.hpp"
#include "mrp/dlm.hpp"
#include "mrp/estimators.hpp"
#include "mrp/oracle.hpp"

namespace {

mrp::MrpProblem random_problem(int k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd r(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) r(i, j) = gauss(rng);
    Eigen::MatrixXd m = (r + r.transpose()) / 2.0;
    m.diagonal().array() += mrp::nearest_psd_gap(m) + 0.1;
    mrp::MrpProblem p;
    for (int i = 0; i < k; ++i) p.support.push_back(i);
    p.base_matrix = p.m_matrix = m;
    return p;
}

void BM_CcdSolve(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    auto problem = random_problem(k, 42);
    mrp::CcdConfig cfg;
    for (auto _ : state) {
        auto r = mrp::solve(problem, cfg);
        benchmark::DoNotOptimize(r.objective);
    }
}
BENCHMARK(BM_CcdSolve)->Arg(10)->Arg(50)->Arg(200);

void BM_BruteForceOracle(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    auto problem = random_problem(k, 7);
    for (auto _ : state) {
        auto r = mrp::oracle::brute_force_l1_min(problem.m_matrix);
        benchmark::DoNotOptimize(r.objective);
    }
}
BENCHMARK(BM_BruteForceOracle)->Arg(3)->Arg(5)->Arg(6);

void BM_DlmGraphObserve(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    mrp::oracle::SyntheticSpec spec;
    spec.kind = mrp::oracle::GeneratorKind::CointegratedBasket;
    spec.dimension = n;
    spec.length = 200;
    spec.seed = 3;
    auto panel = mrp::oracle::gen_synthetic(spec);
    mrp::DlmGraphConfig cfg;
    for (auto _ : state) {
        mrp::DlmGraphModel model(n, cfg);
        for (Eigen::Index t = cfg.features.horizon_m + 1; t < panel.size(); ++t)
            model.observe(panel, t);
        benchmark::DoNotOptimize(model.observations());
    }
}
BENCHMARK(BM_DlmGraphObserve)->Arg(10)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
