#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "mrp/ccd.hpp"
#include "mrp/panel.hpp"

namespace mrp::oracle {

struct BruteForceResult {
    Eigen::VectorXd x;
    double objective = 0;
};

// Reference minimizer of x' M x over the L1 sphere, k <= 6. Enumerates the
// stationary points of every signed simplex face (exact up to linear-solve
// precision) together with a signed-simplex grid at the requested
// resolution, then polishes by projected coordinate refinement.
BruteForceResult brute_force_l1_min(const Eigen::MatrixXd& m, double resolution = 1.0 / 200.0);

enum class GeneratorKind { Var1, Ou, CointegratedBasket };

struct SyntheticSpec {
    GeneratorKind kind = GeneratorKind::Ou;
    int dimension = 1;
    long length = 1000;
    std::uint64_t seed = 0;

    // var1: spectral radius of a < 1; empty a defaults to 0.9 * I.
    Eigen::MatrixXd a;
    double noise_sigma = 0.02;

    // ou (per-asset independent paths in log space)
    double rho = 0.9;
    double mu = 0.0;
    double sigma = 0.02;

    // cointegrated-basket: common random-walk factor plus per-asset
    // stationary AR(1) idiosyncrasies. Any weight vector orthogonal to the
    // loadings is a mean-reverting combination.
    double trend_sigma = 0.02;
    double idio_rho = 0.9;
    double idio_sigma = 0.02;
    Eigen::VectorXd loadings;  // empty defaults to all-ones

    double intrabar_sigma = 0.002;  // OHLC fabrication noise scale
};

PricePanel gen_synthetic(const SyntheticSpec& spec);

struct GapReport {
    double gap = 0;  // (ccd - brute) / |brute|
    double ccd_objective = 0;
    double brute_objective = 0;
    Eigen::VectorXd ccd_x;
    Eigen::VectorXd brute_x;
};

GapReport optimality_gap(const MrpProblem& problem, const WeightVector& ccd_solution);

}  // namespace mrp::oracle
