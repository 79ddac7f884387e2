#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mrp/mrp_problem.hpp"

namespace mrp {

// Portfolio weights over a support set. After any solve the L1 norm is 1
// (within 1e-10). The overall sign follows deterministically from the
// starting point; x and -x describe the same portfolio direction.
struct WeightVector {
    Eigen::VectorXd weights;
    std::vector<Eigen::Index> support;
    double l1_norm = 0;
    bool fallback_equal_weight = false;
};

struct CcdConfig {
    double tol = 1e-8;
    int max_sweeps = 10000;
    double beta0 = 1e-5;
    double beta_step_small = 1e-5;
    double beta_step_large = 1e-1;
    int beta_max_small_steps = 10;
    double beta_cap = 10.0;
    double lambda1 = 0.0;  // optional L1 penalty; 0 disables
    Eigen::VectorXd init;  // empty selects equal weights
};

// One in-place cyclical sweep of x_i <- -sum_{j!=i} m_ij x_j / m_ii, with the
// numerator soft-thresholded at lambda1 when lambda1 > 0. Returns the
// unnormalized vector.
Eigen::VectorXd sweep(Eigen::VectorXd x, const Eigen::MatrixXd& m, double lambda1);

struct SolveResult {
    WeightVector x;
    int sweeps = 0;
    double objective = 0;  // x' M x at the returned point
};

// Iterates sweep + L1 renormalization until the iterates agree modulo sign
// within tol. A sweep that collapses to the zero vector (diagonal-dominant
// degenerate M) falls back to equal weights with the flag set.
SolveResult solve(const MrpProblem& problem, const CcdConfig& cfg);

struct EscalationStep {
    double beta = 0;
    double objective = 0;
    int sweeps = 0;
};

struct EscalationResult {
    WeightVector x;
    double final_beta = 0;
    double objective = 0;
    std::vector<EscalationStep> path;
};

// Solves at beta0; while the objective is nonpositive (or the sweep map
// fails to settle, which the added ridge cures), raises beta by the small
// step (at most beta_max_small_steps times), then by the large step,
// re-solving each time. Errors once beta exceeds beta_cap.
EscalationResult solve_with_escalation(const MrpProblem& problem, const CcdConfig& cfg);

void dump_escalation(const EscalationResult& r, const std::string& path);

// Elastic-net minimum-variance CCD (budget normalization sum w_i = 1):
//   w_i = ST(gamma - z_i, beta*alpha) / (2 (sigma_ii + beta (1 - alpha))),
//   z_i = 2 sum_{j != i} w_j sigma_ij,
// with gamma re-solved each loop so the budget holds.
Eigen::VectorXd ccd_min_variance(const Eigen::MatrixXd& sigma, double beta, double alpha,
                                 double tol = 1e-10, int max_sweeps = 100000);

}  // namespace mrp
