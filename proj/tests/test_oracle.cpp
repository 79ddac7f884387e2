#include <doctest.h>

#include <cmath>
#include <random>

#include "mrp/ccd.hpp"
#include "mrp/errors.hpp"
#include "mrp/estimators.hpp"
#include "mrp/oracle.hpp"
#include "test_util.hpp"

using namespace mrp;
using oracle::brute_force_l1_min;
using oracle::gen_synthetic;
using oracle::GeneratorKind;
using oracle::SyntheticSpec;

namespace {

MrpProblem problem_from(const Eigen::MatrixXd& m) {
    MrpProblem p;
    for (Eigen::Index i = 0; i < m.rows(); ++i) p.support.push_back(i);
    p.base_matrix = m;
    p.m_matrix = m;
    return p;
}

}  // namespace

TEST_CASE("brute force: 2x2 instance has the antisymmetric minimizer") {
    Eigen::MatrixXd m(2, 2);
    m << 2.0, 1.0, 1.0, 2.0;
    auto r = brute_force_l1_min(m);
    CHECK(r.objective == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::abs(r.x(0)) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(std::abs(r.x(1)) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(r.x(0) * r.x(1) < 0);
}

TEST_CASE("brute force: identity spreads mass equally") {
    auto r = brute_force_l1_min(Eigen::MatrixXd::Identity(3, 3));
    CHECK(r.objective == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(r.x(i)) == doctest::Approx(1.0 / 3.0).epsilon(1e-5));
}

TEST_CASE("brute force: diagonal instance matches the harmonic-weight minimum") {
    // min x^2 + 4 y^2 on |x|+|y| = 1 sits at |x| = 0.8, |y| = 0.2 with value
    // 0.8 = 1/(1/1 + 1/4): weights proportional to the inverse diagonal.
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = 4.0;
    auto r = brute_force_l1_min(m);
    CHECK(r.objective == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(std::abs(r.x(0)) == doctest::Approx(0.8).epsilon(1e-5));
    CHECK(std::abs(r.x(1)) == doctest::Approx(0.2).epsilon(1e-4));
}

TEST_CASE("brute force: objective non-increasing in resolution") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::MatrixXd m = testutil::random_spd(3, rng);
        const double a = brute_force_l1_min(m, 1.0 / 50.0).objective;
        const double b = brute_force_l1_min(m, 1.0 / 100.0).objective;
        const double c = brute_force_l1_min(m, 1.0 / 200.0).objective;
        CHECK(b <= a + 1e-12);
        CHECK(c <= b + 1e-12);
    }
}

TEST_CASE("brute force: dimension limits") {
    CHECK_THROWS_AS(brute_force_l1_min(Eigen::MatrixXd::Identity(7, 7)), ConfigError);
    CHECK_NOTHROW(brute_force_l1_min(Eigen::MatrixXd::Identity(6, 6)));
}

TEST_CASE("gen_synthetic: noiseless ou path is constant at exp(mu)") {
    SyntheticSpec spec;
    spec.kind = GeneratorKind::Ou;
    spec.dimension = 2;
    spec.length = 50;
    spec.mu = 1.5;
    spec.sigma = 0.0;
    spec.intrabar_sigma = 0.0;
    PricePanel p = gen_synthetic(spec);
    CHECK((p.close.array() - std::exp(1.5)).abs().maxCoeff() < 1e-12);
    CHECK((p.high - p.close).norm() == doctest::Approx(0.0));
}

TEST_CASE("gen_synthetic: identical seeds give identical panels") {
    SyntheticSpec spec;
    spec.kind = GeneratorKind::Var1;
    spec.dimension = 3;
    spec.length = 200;
    spec.seed = 9;
    PricePanel a = gen_synthetic(spec);
    PricePanel b = gen_synthetic(spec);
    CHECK((a.close - b.close).norm() == 0.0);
    CHECK((a.high - b.high).norm() == 0.0);
    CHECK(a.timestamps == b.timestamps);

    spec.seed = 10;
    PricePanel c = gen_synthetic(spec);
    CHECK((a.close - c.close).norm() > 0.0);
}

TEST_CASE("gen_synthetic: panels satisfy the price-panel invariants") {
    for (auto kind :
         {GeneratorKind::Ou, GeneratorKind::Var1, GeneratorKind::CointegratedBasket}) {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            SyntheticSpec spec;
            spec.kind = kind;
            spec.dimension = 4;
            spec.length = 300;
            spec.seed = seed;
            PricePanel p = gen_synthetic(spec);
            CHECK_NOTHROW(p.validate());
        }
    }
}

TEST_CASE("gen_synthetic: invalid parameters rejected") {
    SyntheticSpec spec;
    spec.kind = GeneratorKind::Ou;
    spec.rho = 1.5;
    CHECK_THROWS_AS(gen_synthetic(spec), ConfigError);

    SyntheticSpec var_spec;
    var_spec.kind = GeneratorKind::Var1;
    var_spec.dimension = 2;
    var_spec.a = 1.2 * Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(gen_synthetic(var_spec), ConfigError);
}

TEST_CASE("gen_synthetic: cointegrated basket has a bounded combination") {
    SyntheticSpec spec;
    spec.kind = GeneratorKind::CointegratedBasket;
    spec.dimension = 3;
    spec.length = 10000;
    spec.seed = 4;
    spec.trend_sigma = 0.02;
    spec.idio_rho = 0.9;
    spec.idio_sigma = 0.02;
    PricePanel p = gen_synthetic(spec);

    // All-ones loadings: the pairwise difference annihilates the common
    // trend, while a single asset keeps the random walk.
    Eigen::MatrixXd logp = p.close.array().log();
    Eigen::VectorXd spread = logp.col(0) - logp.col(1);
    Eigen::VectorXd level = logp.col(0);

    auto var_of = [](const Eigen::VectorXd& v) {
        return (v.array() - v.mean()).square().sum() / v.size();
    };
    // Lag-100 over lag-1 increment variance: ~100x for a random walk,
    // bounded by (1 - rho^100)/(1 - rho) ~ 10 for the stationary spread.
    auto increment_ratio = [&](const Eigen::VectorXd& v) {
        const Eigen::Index n1 = v.size() - 1, n100 = v.size() - 100;
        Eigen::VectorXd d1 = v.tail(n1) - v.head(n1);
        Eigen::VectorXd d100 = v.tail(n100) - v.head(n100);
        return var_of(d100) / var_of(d1);
    };
    const double spread_ratio = increment_ratio(spread);
    const double level_ratio = increment_ratio(level);
    CHECK(var_of(spread) < 10.0 * spec.idio_sigma * spec.idio_sigma / (1 - 0.81));
    CHECK(spread_ratio < 20.0);
    CHECK(level_ratio > 20.0);
    CHECK(level_ratio > 2.5 * spread_ratio);
}

TEST_CASE("optimality_gap: symmetric fallback case has zero gap") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(4, 4);
    MrpProblem p = problem_from(m);
    SolveResult s = solve(p, CcdConfig{});
    CHECK(s.x.fallback_equal_weight);
    auto gap = oracle::optimality_gap(p, s.x);
    CHECK(gap.gap == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(gap.brute_objective == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("optimality_gap: documented 2x2 gap of one third") {
    Eigen::MatrixXd m(2, 2);
    m << 2.0, 1.0, 1.0, 2.0;
    MrpProblem p = problem_from(m);
    SolveResult s = solve(p, CcdConfig{});
    auto gap = oracle::optimality_gap(p, s.x);
    CHECK(gap.ccd_objective == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
    CHECK(gap.brute_objective == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(gap.gap == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("optimality_gap: oracle soundness on random instances") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 2 + trial % 5;
        Eigen::MatrixXd m = testutil::random_symmetric(k, rng);
        m.diagonal().array() += nearest_psd_gap(m) + 0.1;
        MrpProblem p = problem_from(m);
        SolveResult s = solve(p, CcdConfig{});
        auto gap = oracle::optimality_gap(p, s.x);
        CHECK(gap.gap >= -1e-9);
    }
}
