#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mrp/dlm.hpp"
#include "mrp/estimators.hpp"

namespace mrp {

enum class ProblemKind { PA, PC };

std::string to_string(ProblemKind kind);

// Symmetric objective matrix M = (D - Sigma_tilde + beta*I) restricted to a
// support subset. For PA the predicted covariance is D = A Sigma_prev A';
// for PC it is the model-implied Sigma.
struct MrpProblem {
    ProblemKind kind = ProblemKind::PC;
    double beta = 0;
    std::vector<Eigen::Index> support;
    Eigen::MatrixXd m_matrix;       // (D - Sigma_tilde + beta I)|support, symmetrized
    Eigen::MatrixXd base_matrix;    // (D - Sigma_tilde)|support, for beta escalation
};

MrpProblem build_problem(ProblemKind kind, const VarCoefficients& a,
                         const Eigen::MatrixXd& sigma_model,
                         const Eigen::MatrixXd& sigma_tilde_prev,
                         const Eigen::MatrixXd& sigma_tilde, double beta,
                         const std::vector<Eigen::Index>& support);

void dump_problem(const MrpProblem& p, const std::string& path);

struct Predictability {
    double nu = 0;
    double numerator = 0;    // x' D x
    double denominator = 0;  // x' Sigma_tilde x
};

Predictability predictability(const Eigen::VectorXd& x, const Eigen::MatrixXd& d,
                              const Eigen::MatrixXd& sigma_tilde);

// Greedy densest-subgraph selection on w_ij = |Gamma_ij| + |Gamma_ji|:
// seed with the node of maximal weighted degree, then repeatedly add the
// asset with maximal total weight to the current subset. Ties break to the
// lower index; Gamma = 0 falls back to the first k indices.
std::vector<Eigen::Index> select_support(const ParentGraph& graph, int k);

struct GeneralizedEigPair {
    double eigenvalue = 0;
    Eigen::VectorXd eigenvector;  // L2-normalized, largest-magnitude entry positive
};

// Smallest generalized eigenpair of (D, Sigma_tilde).
GeneralizedEigPair generalized_eig_smallest(const Eigen::MatrixXd& d,
                                            const Eigen::MatrixXd& sigma_tilde);

}  // namespace mrp
