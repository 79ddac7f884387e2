#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "mrp/errors.hpp"
#include "mrp/trading.hpp"

using namespace mrp;

namespace {

// Independent quantile reference: bisection on the erfc-based normal CDF.
double quantile_by_bisection(double p) {
    auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    double lo = -10, hi = 10;
    for (int i = 0; i < 200; ++i) {
        const double mid = (lo + hi) / 2;
        (cdf(mid) < p ? lo : hi) = mid;
    }
    return (lo + hi) / 2;
}

OuParams manual_params(double mu, double rho, double sigma) {
    OuParams p;
    p.mu = mu;
    p.rho = rho;
    p.sigma = sigma;
    p.stat_sd = std::sqrt(sigma * sigma / (1.0 - rho * rho));
    p.admissible = true;
    return p;
}

Eigen::VectorXd simulate_ar1(double rho, double mu, double sigma, int T, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::VectorXd p(T);
    p(0) = mu;
    for (int t = 1; t < T; ++t) p(t) = mu + rho * (p(t - 1) - mu) + sigma * g(rng);
    return p;
}

}  // namespace

TEST_CASE("normal_quantile: matches the bisection oracle") {
    for (double p : {0.975, 0.5, 0.01, 0.99999, 1e-7, 0.3}) {
        CHECK(normal_quantile(p) == doctest::Approx(quantile_by_bisection(p)).epsilon(1e-10));
    }
    CHECK(normal_quantile(0.975) == doctest::Approx(1.95996).epsilon(1e-5));
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
    CHECK_THROWS_AS(normal_quantile(0.0), ConfigError);
    CHECK_THROWS_AS(normal_quantile(1.0), ConfigError);
}

TEST_CASE("fit_ou: exact noise-free recursion") {
    Eigen::VectorXd p(20);
    p(0) = 0.0;
    for (int t = 1; t < 20; ++t) p(t) = 0.5 * p(t - 1) + 2.0;
    OuParams fit = fit_ou(p);
    CHECK(fit.rho == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(fit.mu == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(fit.sigma == doctest::Approx(0.0));
    // sigma = 0 means no usable noise scale: strategies must stay flat.
    CHECK_FALSE(fit.admissible);
    CHECK(jy_weight(fit, 3.0).weight == doctest::Approx(0.0));
}

TEST_CASE("fit_ou: constant series is a no-fit") {
    Eigen::VectorXd p = Eigen::VectorXd::Constant(30, 7.0);
    OuParams fit = fit_ou(p);
    CHECK_FALSE(fit.admissible);
}

TEST_CASE("fit_ou: random walk window is a no-fit") {
    Eigen::VectorXd p(50);
    for (int t = 0; t < 50; ++t) p(t) = t;  // slope exactly 1
    OuParams fit = fit_ou(p);
    CHECK_FALSE(fit.admissible);
}

TEST_CASE("fit_ou: short window rejected") {
    Eigen::VectorXd p = Eigen::VectorXd::LinSpaced(4, 0.0, 1.0);
    CHECK_THROWS_AS(fit_ou(p), DataError);
}

TEST_CASE("fit_ou: Monte-Carlo estimates within three standard errors") {
    const double rho = 0.8, mu = 10.0, sigma = 1.0;
    const int T = 5000;
    const int n_seeds = 200;
    int rho_ok = 0, mu_ok = 0, sigma_ok = 0;
    const double statvar = sigma * sigma / (1 - rho * rho);
    const double se_rho = std::sqrt((1 - rho * rho) / T);
    const double se_mu = std::sqrt(statvar * (1 + rho) / ((1 - rho) * T));
    const double se_sigma = sigma / std::sqrt(2.0 * T);
    for (std::uint64_t seed = 0; seed < n_seeds; ++seed) {
        OuParams fit = fit_ou(simulate_ar1(rho, mu, sigma, T, seed));
        REQUIRE(fit.admissible);
        if (std::abs(fit.rho - rho) < 3 * se_rho) ++rho_ok;
        if (std::abs(fit.mu - mu) < 3 * se_mu) ++mu_ok;
        if (std::abs(fit.sigma - sigma) < 3 * se_sigma) ++sigma_ok;
    }
    CHECK(rho_ok >= 198);
    CHECK(mu_ok >= 198);
    CHECK(sigma_ok >= 198);
}

TEST_CASE("fit_ou: continuous-rate stationary scale") {
    OuParams d = manual_params(0.0, 0.9, 1.0);
    Eigen::VectorXd p = simulate_ar1(0.9, 0.0, 1.0, 500, 1);
    OuParams discrete = fit_ou(p, false);
    OuParams continuous = fit_ou(p, true);
    CHECK(discrete.stat_sd ==
          doctest::Approx(std::sqrt(discrete.sigma * discrete.sigma /
                                    (1 - discrete.rho * discrete.rho))));
    CHECK(continuous.stat_sd ==
          doctest::Approx(std::sqrt(continuous.sigma * continuous.sigma /
                                    (2.0 * -std::log(continuous.rho)))));
    (void)d;
}

TEST_CASE("jy_weight: direct formula evaluations") {
    OuParams p = manual_params(10.0, 0.5, 1.0);
    CHECK(jy_weight(p, 10.0).weight == doctest::Approx(0.0));
    CHECK(jy_weight(p, 8.0).weight == doctest::Approx(1.0));
    CHECK(jy_weight(p, 12.0).weight < 0);
}

TEST_CASE("jy_weight: odd around the mean") {
    OuParams p = manual_params(5.0, 0.7, 0.8);
    for (double d : {0.1, 1.0, 3.7})
        CHECK(jy_weight(p, 5.0 + d).weight == doctest::Approx(-jy_weight(p, 5.0 - d).weight));
}

TEST_CASE("ou_weight: band width and entry/exit state machine") {
    OuParams p = manual_params(0.0, 0.9, std::sqrt(1.0 - 0.81));  // stat_sd = 1
    CHECK(p.stat_sd == doctest::Approx(1.0));
    StrategySignal flat;

    StrategySignal inside = ou_weight(p, 0.3, 0.05, flat);
    CHECK(inside.weight == doctest::Approx(0.0));
    CHECK(inside.alpha_band == doctest::Approx(1.95996).epsilon(1e-5));
    CHECK(inside.regime == Regime::H2);

    StrategySignal low = ou_weight(p, -2.5, 0.05, flat);
    CHECK(low.weight == doctest::Approx(1.0));
    CHECK(low.regime == Regime::H1);

    // Held long while still below the band, flattened on re-entry.
    CHECK(ou_weight(p, -2.1, 0.05, low).weight == doctest::Approx(1.0));
    CHECK(ou_weight(p, -0.5, 0.05, low).weight == doctest::Approx(0.0));

    // A long position is never flipped directly to short.
    CHECK(ou_weight(p, 3.0, 0.05, low).weight == doctest::Approx(0.0));

    StrategySignal high = ou_weight(p, 2.5, 0.05, flat);
    CHECK(high.weight == doctest::Approx(-1.0));
    CHECK(high.regime == Regime::H3);
    CHECK(ou_weight(p, 2.2, 0.05, high).weight == doctest::Approx(-1.0));
    CHECK(ou_weight(p, 0.0, 0.05, high).weight == doctest::Approx(0.0));
    CHECK(ou_weight(p, -3.0, 0.05, high).weight == doctest::Approx(0.0));
}

TEST_CASE("ou_weight: inadmissible fit flattens any prior position") {
    OuParams nofit;
    StrategySignal prior;
    prior.weight = 1.0;
    CHECK(ou_weight(nofit, -5.0, 0.05, prior).weight == doctest::Approx(0.0));
}

TEST_CASE("ou_weight: emits only -1, 0, +1 and never reverses") {
    OuParams p = manual_params(0.0, 0.8, 0.5);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    StrategySignal prior;
    for (int t = 0; t < 2000; ++t) {
        StrategySignal s = ou_weight(p, 3.0 * g(rng), 0.05, prior);
        CHECK((s.weight == -1.0 || s.weight == 0.0 || s.weight == 1.0));
        CHECK(std::abs(s.weight - prior.weight) <= 1.0);  // no +1 -> -1 jump
        prior = s;
    }
}

TEST_CASE("ou_weight: alpha decreases as epsilon grows") {
    OuParams p = manual_params(0.0, 0.9, 1.0);
    StrategySignal flat;
    double last = std::numeric_limits<double>::infinity();
    for (double eps : {0.01, 0.05, 0.2, 0.5, 0.9}) {
        const double alpha = ou_weight(p, 0.0, eps, flat).alpha_band;
        CHECK(alpha < last);
        last = alpha;
    }
}

TEST_CASE("mixed_weight: band-edge behavior") {
    OuParams p = manual_params(0.0, 0.9, std::sqrt(1.0 - 0.81));  // stat_sd = 1
    const double alpha = normal_quantile(0.975) * p.stat_sd;
    const double k = p.rho / (p.sigma * p.sigma);

    CHECK(mixed_weight(p, -alpha, 0.05).weight == doctest::Approx(0.0));
    CHECK(mixed_weight(p, 0.0, 0.05).weight == doctest::Approx(0.0));
    const double delta = 0.3;
    CHECK(mixed_weight(p, -alpha - delta, 0.05).weight == doctest::Approx(k * delta));
    CHECK(mixed_weight(p, alpha + delta, 0.05).weight == doctest::Approx(-k * delta));
}

TEST_CASE("mixed_weight: continuity and sign agreement with jy") {
    OuParams p = manual_params(1.0, 0.7, 0.6);
    const double alpha = normal_quantile(0.975) * p.stat_sd;
    // Continuity across each band edge.
    for (double edge : {1.0 - alpha, 1.0 + alpha}) {
        const double below = mixed_weight(p, edge - 1e-9, 0.05).weight;
        const double above = mixed_weight(p, edge + 1e-9, 0.05).weight;
        CHECK(std::abs(below - above) < 1e-6);
    }
    // Outside the band the sign matches the JY rule.
    for (double x : {1.0 - alpha - 0.5, 1.0 - alpha - 2.0, 1.0 + alpha + 0.5, 1.0 + alpha + 2.0}) {
        const double mw = mixed_weight(p, x, 0.05).weight;
        const double jw = jy_weight(p, x).weight;
        CHECK(mw * jw > 0);
    }
}

TEST_CASE("strategy weights: epsilon domain validated") {
    OuParams p = manual_params(0.0, 0.9, 1.0);
    StrategySignal flat;
    CHECK_THROWS_AS(ou_weight(p, 0.0, 0.0, flat), ConfigError);
    CHECK_THROWS_AS(mixed_weight(p, 0.0, 1.0), ConfigError);
}
