#include "mrp/oracle.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "mrp/errors.hpp"

namespace mrp::oracle {

namespace {

double quad(const Eigen::MatrixXd& m, const Eigen::VectorXd& x) { return x.dot(m * x); }

// Stationary points of x'Mx on every signed face of the L1 sphere: fix a
// support subset and sign pattern, solve 2 Q y = nu * 1 on the simplex.
void enumerate_faces(const Eigen::MatrixXd& m, Eigen::VectorXd& best_x, double& best_obj) {
    const int k = static_cast<int>(m.rows());
    for (unsigned subset = 1; subset < (1u << k); ++subset) {
        std::vector<int> idx;
        for (int i = 0; i < k; ++i)
            if (subset & (1u << i)) idx.push_back(i);
        const int s = static_cast<int>(idx.size());
        // First support coordinate positive; the objective is sign-symmetric.
        for (unsigned signs = 0; signs < (1u << (s - 1)); ++signs) {
            Eigen::VectorXd sv(s);
            sv(0) = 1.0;
            for (int i = 1; i < s; ++i) sv(i) = (signs & (1u << (i - 1))) ? -1.0 : 1.0;
            Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(s + 1, s + 1);
            for (int i = 0; i < s; ++i)
                for (int j = 0; j < s; ++j)
                    kkt(i, j) = 2.0 * sv(i) * sv(j) * m(idx[i], idx[j]);
            kkt.col(s).head(s).setConstant(-1.0);
            kkt.row(s).head(s).setConstant(1.0);
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + 1);
            rhs(s) = 1.0;
            Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
            if (!lu.isInvertible()) continue;
            const Eigen::VectorXd sol = lu.solve(rhs);
            bool feasible = true;
            for (int i = 0; i < s; ++i)
                if (sol(i) < -1e-12) feasible = false;
            if (!feasible) continue;
            Eigen::VectorXd x = Eigen::VectorXd::Zero(k);
            for (int i = 0; i < s; ++i) x(idx[i]) = sv(i) * std::max(sol(i), 0.0);
            const double n1 = x.lpNorm<1>();
            if (n1 <= 0) continue;
            x /= n1;
            const double obj = quad(m, x);
            if (obj < best_obj) {
                best_obj = obj;
                best_x = x;
            }
        }
    }
}

void enumerate_grid(const Eigen::MatrixXd& m, int divisions, Eigen::VectorXd& best_x,
                    double& best_obj) {
    const int k = static_cast<int>(m.rows());
    std::vector<int> parts(k, 0);
    Eigen::VectorXd x(k);
    // Recursive composition of `divisions` into k nonnegative parts.
    auto recurse = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == k - 1) {
            parts[pos] = remaining;
            for (unsigned signs = 0; signs < (1u << (k - 1)); ++signs) {
                for (int i = 0; i < k; ++i) {
                    const double mag = static_cast<double>(parts[i]) / divisions;
                    const bool neg = i > 0 && (signs & (1u << (i - 1)));
                    x(i) = neg ? -mag : mag;
                }
                const double obj = quad(m, x);
                if (obj < best_obj) {
                    best_obj = obj;
                    best_x = x;
                }
            }
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            parts[pos] = v;
            self(self, pos + 1, remaining - v);
        }
    };
    recurse(recurse, 0, divisions);
}

// Local polish on the L1 sphere: transfer magnitude between coordinate
// pairs at shrinking step sizes, allowing sign flips through zero.
void polish(const Eigen::MatrixXd& m, Eigen::VectorXd& x, double& obj, double start_step,
            double end_step) {
    const int k = static_cast<int>(m.rows());
    for (double step = start_step; step >= end_step; step /= 2.0) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) {
                    if (i == j) continue;
                    for (double si : {1.0, -1.0}) {
                        // Grow |x_i| toward sign si by step, shrink |x_j|.
                        if (std::abs(x(j)) < step) continue;
                        Eigen::VectorXd y = x;
                        y(i) += si * step;
                        y(j) -= (y(j) > 0 ? step : -step);
                        const double n1 = y.lpNorm<1>();
                        if (std::abs(n1 - 1.0) > 1e-9) y /= n1;
                        const double o = quad(m, y);
                        if (o < obj - 1e-15) {
                            obj = o;
                            x = y;
                            improved = true;
                        }
                    }
                }
        }
    }
}

}  // namespace

BruteForceResult brute_force_l1_min(const Eigen::MatrixXd& m, double resolution) {
    const int k = static_cast<int>(m.rows());
    if (k < 1 || k > 6) throw ConfigError("brute_force_l1_min: k must lie in [1,6]");
    if (m.cols() != k) throw DataError("brute_force_l1_min: matrix not square");
    if (!(resolution > 0 && resolution <= 1)) throw ConfigError("invalid grid resolution");

    BruteForceResult best;
    best.x = Eigen::VectorXd::Zero(k);
    best.x(0) = 1.0;
    best.objective = quad(m, best.x);

    enumerate_faces(m, best.x, best.objective);

    // Cap the grid so the enumeration stays within a fixed point budget.
    int divisions = static_cast<int>(std::lround(1.0 / resolution));
    auto grid_points = [&](int n) {
        double c = 1;
        for (int i = 1; i < k; ++i) c = c * (n + i) / i;
        return c * (1 << (k - 1));
    };
    while (divisions > 1 && grid_points(divisions) > 2e6) --divisions;
    enumerate_grid(m, divisions, best.x, best.objective);

    polish(m, best.x, best.objective, 1.0 / divisions, 1e-4);
    return best;
}

PricePanel gen_synthetic(const SyntheticSpec& spec) {
    if (spec.dimension < 1) throw ConfigError("gen_synthetic: dimension must be positive");
    if (spec.length < 1) throw ConfigError("gen_synthetic: length must be positive");
    const int n = spec.dimension;
    const long T = spec.length;

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Eigen::MatrixXd log_close(T, n);
    switch (spec.kind) {
        case GeneratorKind::Var1: {
            Eigen::MatrixXd a = spec.a.size() ? spec.a : 0.9 * Eigen::MatrixXd::Identity(n, n);
            if (a.rows() != n || a.cols() != n) throw ConfigError("gen_synthetic: bad A dimension");
            const double radius =
                Eigen::EigenSolver<Eigen::MatrixXd>(a, false).eigenvalues().cwiseAbs().maxCoeff();
            if (radius >= 1.0)
                throw ConfigError("gen_synthetic: VAR(1) spectral radius " +
                                  std::to_string(radius) + " not < 1");
            Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
            for (long t = 0; t < T; ++t) {
                Eigen::VectorXd eps(n);
                for (int j = 0; j < n; ++j) eps(j) = spec.noise_sigma * gauss(rng);
                y = a * y + eps;
                log_close.row(t) = (y.array() + spec.mu).matrix().transpose();
            }
            break;
        }
        case GeneratorKind::Ou: {
            if (!(std::abs(spec.rho) < 1)) throw ConfigError("gen_synthetic: |rho| must be < 1");
            if (spec.sigma < 0) throw ConfigError("gen_synthetic: sigma must be nonnegative");
            Eigen::VectorXd y = Eigen::VectorXd::Constant(n, spec.mu);
            for (long t = 0; t < T; ++t) {
                for (int j = 0; j < n; ++j)
                    y(j) = spec.mu + spec.rho * (y(j) - spec.mu) + spec.sigma * gauss(rng);
                log_close.row(t) = y.transpose();
            }
            break;
        }
        case GeneratorKind::CointegratedBasket: {
            if (!(std::abs(spec.idio_rho) < 1))
                throw ConfigError("gen_synthetic: |idio_rho| must be < 1");
            Eigen::VectorXd loadings =
                spec.loadings.size() ? spec.loadings : Eigen::VectorXd::Ones(n);
            if (loadings.size() != n) throw ConfigError("gen_synthetic: bad loadings dimension");
            double common = 0;
            Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
            for (long t = 0; t < T; ++t) {
                common += spec.trend_sigma * gauss(rng);
                for (int j = 0; j < n; ++j)
                    z(j) = spec.idio_rho * z(j) + spec.idio_sigma * gauss(rng);
                log_close.row(t) =
                    (loadings.array() * common + z.array() + spec.mu).matrix().transpose();
            }
            break;
        }
    }

    PricePanel p;
    for (int j = 0; j < n; ++j) p.assets.push_back("A" + std::to_string(j));
    p.timestamps.reserve(T);
    char buf[32];
    for (long t = 0; t < T; ++t) {
        std::snprintf(buf, sizeof(buf), "t%08ld", t);
        p.timestamps.push_back(buf);
    }
    p.close = log_close.array().exp();
    p.open.resize(T, n);
    p.high.resize(T, n);
    p.low.resize(T, n);
    for (long t = 0; t < T; ++t)
        for (int j = 0; j < n; ++j) {
            p.open(t, j) = t == 0 ? p.close(0, j) : p.close(t - 1, j);
            const double body_hi = std::max(p.open(t, j), p.close(t, j));
            const double body_lo = std::min(p.open(t, j), p.close(t, j));
            const double u = std::abs(spec.intrabar_sigma * gauss(rng));
            const double v = std::abs(spec.intrabar_sigma * gauss(rng));
            p.high(t, j) = body_hi * std::exp(u);
            p.low(t, j) = body_lo * std::exp(-v);
        }
    return p;
}

GapReport optimality_gap(const MrpProblem& problem, const WeightVector& ccd_solution) {
    if (problem.support.size() > 6)
        throw ConfigError("optimality_gap: support larger than 6");
    GapReport r;
    BruteForceResult bf = brute_force_l1_min(problem.m_matrix);
    r.brute_objective = bf.objective;
    r.brute_x = bf.x;
    r.ccd_x = ccd_solution.weights;
    r.ccd_objective = ccd_solution.weights.dot(problem.m_matrix * ccd_solution.weights);
    const double denom = std::abs(bf.objective);
    r.gap = denom > 0 ? (r.ccd_objective - bf.objective) / denom
                      : r.ccd_objective - bf.objective;
    return r;
}

}  // namespace mrp::oracle
