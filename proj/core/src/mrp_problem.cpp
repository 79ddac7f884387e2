#include "mrp/mrp_problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "mrp/csv.hpp"
#include "mrp/errors.hpp"

namespace mrp {

std::string to_string(ProblemKind kind) { return kind == ProblemKind::PA ? "PA" : "PC"; }

namespace {

Eigen::MatrixXd restrict_to(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& support) {
    const auto k = static_cast<Eigen::Index>(support.size());
    Eigen::MatrixXd out(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) out(i, j) = m(support[i], support[j]);
    return out;
}

}  // namespace

MrpProblem build_problem(ProblemKind kind, const VarCoefficients& a,
                         const Eigen::MatrixXd& sigma_model,
                         const Eigen::MatrixXd& sigma_tilde_prev,
                         const Eigen::MatrixXd& sigma_tilde, double beta,
                         const std::vector<Eigen::Index>& support) {
    if (beta < 0) throw ConfigError("beta must be nonnegative");
    const auto n = sigma_tilde.rows();
    if (sigma_tilde.cols() != n) throw DataError("sigma_tilde not square");
    std::set<Eigen::Index> seen;
    for (auto idx : support) {
        if (idx < 0 || idx >= n) throw DataError("support index out of range");
        if (!seen.insert(idx).second) throw DataError("duplicate support index");
    }
    if (support.empty()) throw DataError("empty support");

    Eigen::MatrixXd d;
    if (kind == ProblemKind::PA) {
        if (a.a_matrix.rows() != n || sigma_tilde_prev.rows() != n)
            throw DataError("PA inputs dimension mismatch");
        d = a.a_matrix * sigma_tilde_prev * a.a_matrix.transpose();
    } else {
        if (sigma_model.rows() != n || sigma_model.cols() != n)
            throw DataError("PC inputs dimension mismatch");
        d = sigma_model;
    }

    MrpProblem p;
    p.kind = kind;
    p.beta = beta;
    p.support = support;
    Eigen::MatrixXd base = restrict_to(d - sigma_tilde, support);
    p.base_matrix = (base + base.transpose()) / 2.0;
    p.m_matrix = p.base_matrix;
    p.m_matrix.diagonal().array() += beta;
    return p;
}

void dump_problem(const MrpProblem& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "kind," << to_string(p.kind) << "\nbeta," << csv::format_double(p.beta) << "\nsupport";
    for (auto idx : p.support) out << ',' << idx;
    out << "\n";
    for (Eigen::Index i = 0; i < p.m_matrix.rows(); ++i) {
        for (Eigen::Index j = 0; j < p.m_matrix.cols(); ++j) {
            if (j) out << ',';
            out << csv::format_double(p.m_matrix(i, j));
        }
        out << '\n';
    }
}

Predictability predictability(const Eigen::VectorXd& x, const Eigen::MatrixXd& d,
                              const Eigen::MatrixXd& sigma_tilde) {
    Predictability p;
    p.numerator = x.dot(d * x);
    p.denominator = x.dot(sigma_tilde * x);
    if (p.denominator <= 0) throw SolverError("predictability: zero portfolio variance");
    p.nu = p.numerator / p.denominator;
    return p;
}

std::vector<Eigen::Index> select_support(const ParentGraph& graph, int k) {
    const auto n = graph.gamma.rows();
    if (k < 2 || k > n) throw ConfigError("support size k out of range");

    Eigen::MatrixXd w = graph.gamma.cwiseAbs() + graph.gamma.cwiseAbs().transpose();
    w.diagonal().setZero();

    if (w.maxCoeff() == 0) {
        std::vector<Eigen::Index> out(k);
        for (int i = 0; i < k; ++i) out[i] = i;
        return out;
    }

    // Seed: maximal weighted degree; ties to the lower index.
    Eigen::Index seed = 0;
    double best = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double deg = w.row(i).sum();
        if (deg > best) {
            best = deg;
            seed = i;
        }
    }

    std::vector<Eigen::Index> chosen{seed};
    std::vector<bool> in(n, false);
    in[seed] = true;
    while (static_cast<int>(chosen.size()) < k) {
        Eigen::Index arg = -1;
        double best_w = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (in[i]) continue;
            double total = 0;
            for (auto c : chosen) total += w(i, c);
            if (total > best_w) {
                best_w = total;
                arg = i;
            }
        }
        chosen.push_back(arg);
        in[arg] = true;
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

GeneralizedEigPair generalized_eig_smallest(const Eigen::MatrixXd& d,
                                            const Eigen::MatrixXd& sigma_tilde) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma_tilde);
    if (llt.info() != Eigen::Success)
        throw SolverError("generalized_eig: sigma_tilde not positive definite");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(d, sigma_tilde);
    if (es.info() != Eigen::Success) throw SolverError("generalized_eig: solver failed");

    GeneralizedEigPair out;
    out.eigenvalue = es.eigenvalues()(0);
    Eigen::VectorXd v = es.eigenvectors().col(0);
    v.normalize();
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0) v = -v;
    out.eigenvector = v;
    return out;
}

}  // namespace mrp
