#include "mrp/estimators.hpp"

#include <cmath>

#include "mrp/errors.hpp"

namespace mrp {

EwmaCovariance::EwmaCovariance(Eigen::Index dim, double lambda)
    : lambda_(lambda),
      mean_(Eigen::VectorXd::Zero(dim)),
      sigma_(Eigen::MatrixXd::Zero(dim, dim)) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("ewma lambda must lie in (0,1)");
}

void EwmaCovariance::update(const Eigen::VectorXd& s) {
    if (s.size() != mean_.size()) throw DataError("ewma update dimension mismatch");
    if (!s.allFinite()) throw DataError("non-finite input to ewma update");
    if (count_ == 0) {
        mean_ = s;  // seed; a single point carries no dispersion
    } else {
        mean_ = lambda_ * mean_ + (1.0 - lambda_) * s;
        const Eigen::VectorXd d = s - mean_;
        sigma_ = lambda_ * sigma_ + (1.0 - lambda_) * (d * d.transpose());
        sigma_ = ((sigma_ + sigma_.transpose()) / 2.0).eval();
    }
    ++count_;
}

Eigen::MatrixXd EwmaCovariance::correlation() const {
    const auto n = sigma_.rows();
    Eigen::MatrixXd corr = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double denom = std::sqrt(sigma_(i, i) * sigma_(j, j));
            corr(i, j) = denom > 0 ? sigma_(i, j) / denom : (i == j ? 1.0 : 0.0);
        }
    return corr;
}

VarCoefficients fit_var1(const Eigen::MatrixXd& window, double ridge) {
    const auto T = window.rows();
    const auto N = window.cols();
    if (ridge < 0) throw ConfigError("ridge must be nonnegative");
    if (T < 2) throw DataError("VAR(1) fit needs at least two observations");
    if (ridge == 0 && T < N + 1)
        throw DataError("window too short for unregularized VAR(1) fit");

    // Normal equations: A (X'X + ridge I) = Y'X with X = lags, Y = leads.
    const Eigen::MatrixXd X = window.topRows(T - 1);
    const Eigen::MatrixXd Y = window.bottomRows(T - 1);
    Eigen::MatrixXd gram = X.transpose() * X;
    gram.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    const double max_pivot = ldlt.vectorD().maxCoeff();
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !(max_pivot > 0) ||
        ldlt.vectorD().minCoeff() <= 1e-13 * max_pivot)
        throw SolverError("singular normal equations in VAR(1) fit");
    VarCoefficients out;
    out.a_matrix = ldlt.solve(X.transpose() * Y).transpose();
    if (!out.a_matrix.allFinite()) throw SolverError("singular normal equations in VAR(1) fit");
    out.ridge = ridge;
    out.window = T;
    return out;
}

double nearest_psd_gap(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw DataError("nearest_psd_gap: matrix not square");
    if (!m.isApprox(m.transpose(), 1e-10)) throw DataError("nearest_psd_gap: matrix not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return std::max(0.0, -es.eigenvalues().minCoeff());
}

}  // namespace mrp
