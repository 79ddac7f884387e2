#include "mrp/ccd.hpp"

#include <cmath>
#include <fstream>

#include "mrp/csv.hpp"
#include "mrp/errors.hpp"

namespace mrp {

namespace {

double soft_threshold(double x, double y) {
    const double shrunk = std::abs(x) - y;
    return shrunk > 0 ? (x > 0 ? shrunk : -shrunk) : 0.0;
}

}  // namespace

Eigen::VectorXd sweep(Eigen::VectorXd x, const Eigen::MatrixXd& m, double lambda1) {
    const auto k = x.size();
    for (Eigen::Index i = 0; i < k; ++i) {
        if (!(m(i, i) > 0))
            throw SolverError("sweep: nonpositive diagonal at index " + std::to_string(i));
        double cross = m.row(i).dot(x) - m(i, i) * x(i);
        if (lambda1 > 0) {
            x(i) = -soft_threshold(2.0 * cross, lambda1) / (2.0 * m(i, i));
        } else {
            x(i) = -cross / m(i, i);
        }
    }
    return x;
}

SolveResult solve(const MrpProblem& problem, const CcdConfig& cfg) {
    const Eigen::MatrixXd& m = problem.m_matrix;
    const auto k = m.rows();
    Eigen::VectorXd x;
    if (cfg.init.size() == k) {
        x = cfg.init;
        const double n1 = x.lpNorm<1>();
        if (n1 > 0) x /= n1;
    }
    if (x.size() != k) x = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));

    SolveResult res;
    bool converged = false;
    for (res.sweeps = 1; res.sweeps <= cfg.max_sweeps; ++res.sweeps) {
        Eigen::VectorXd next = sweep(x, m, cfg.lambda1);
        const double n1 = next.lpNorm<1>();
        if (n1 == 0) {
            // Diagonal-dominant degenerate M: no cross-asset signal.
            x = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
            res.x.fallback_equal_weight = true;
            converged = true;
            break;
        }
        next /= n1;
        const double delta =
            std::min((next - x).lpNorm<Eigen::Infinity>(), (next + x).lpNorm<Eigen::Infinity>());
        x = next;
        if (delta <= cfg.tol) {
            converged = true;
            break;
        }
    }

    if (!converged && cfg.lambda1 == 0) {
        // With no L1 shrinkage the unnormalized sweep is the linear
        // Gauss-Seidel map x' = -(D+L)^{-1} U x, so iterating it is a power
        // iteration whose fixed directions are exactly the real eigenvectors
        // of that map. When the dominant eigenvalue is a complex pair the
        // iteration rotates forever; recover the fixed points directly and
        // take the one with the smallest objective.
        Eigen::MatrixXd u = m.triangularView<Eigen::StrictlyUpper>();
        Eigen::MatrixXd g = -m.triangularView<Eigen::Lower>().solve(u);
        Eigen::EigenSolver<Eigen::MatrixXd> es(g);
        if (es.info() == Eigen::Success) {
            double best_obj = 0;
            Eigen::VectorXd best;
            const double lam_scale = es.eigenvalues().cwiseAbs().maxCoeff();
            int real_candidates = 0;
            for (Eigen::Index i = 0; i < k; ++i) {
                const std::complex<double> lam = es.eigenvalues()(i);
                if (std::abs(lam.imag()) > 1e-9 * (1.0 + std::abs(lam))) continue;
                if (std::abs(lam.real()) <= 1e-12 * lam_scale) continue;  // kernel direction
                ++real_candidates;
                Eigen::VectorXcd vc = es.eigenvectors().col(i);
                Eigen::Index imax = 0;
                vc.cwiseAbs().maxCoeff(&imax);
                if (std::abs(vc(imax)) == 0) continue;
                vc /= vc(imax);  // rotate the arbitrary complex phase away
                Eigen::VectorXd v = vc.real();
                if (vc.imag().lpNorm<Eigen::Infinity>() > 1e-8) continue;
                const double n1 = v.lpNorm<1>();
                if (!(n1 > 0)) continue;
                v /= n1;
                // Certify it really is a sweep fixed point at working precision.
                Eigen::VectorXd again = sweep(v, m, 0.0);
                const double an = again.lpNorm<1>();
                if (!(an > 0)) continue;
                again /= an;
                if (std::min((again - v).lpNorm<Eigen::Infinity>(),
                             (again + v).lpNorm<Eigen::Infinity>()) > 10.0 * cfg.tol)
                    continue;
                const double obj = v.dot(m * v);
                if (best.size() == 0 || obj < best_obj) {
                    best_obj = obj;
                    best = v;
                }
            }
            if (best.size() == k) {
                x = best;
                converged = true;
            } else if (real_candidates == 0) {
                // Only complex rotation planes and kernel directions: the
                // sweep map has no nonzero fixed direction to converge to.
                // Degenerate in the same sense as a diagonal M.
                x = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
                res.x.fallback_equal_weight = true;
                converged = true;
            }
        }
    }
    if (!converged)
        throw SolverError("ccd solve: max_sweeps exceeded (" + std::to_string(cfg.max_sweeps) + ")");

    // x and -x describe the same portfolio direction; the deterministic
    // start makes the returned sign reproducible, so no flip is applied.
    res.x.weights = x;
    res.x.support = problem.support;
    res.x.l1_norm = x.lpNorm<1>();
    res.objective = x.dot(m * x);
    return res;
}

EscalationResult solve_with_escalation(const MrpProblem& problem, const CcdConfig& cfg) {
    MrpProblem p = problem;
    double beta = cfg.beta0;
    CcdConfig local = cfg;
    EscalationResult out;
    int small_steps = 0;
    bool small_phase = true;

    while (true) {
        if (beta > cfg.beta_cap) {
            std::string msg = "beta escalation exceeded cap " + std::to_string(cfg.beta_cap) + ";";
            for (const auto& s : out.path)
                msg += " (beta=" + std::to_string(s.beta) + ", obj=" + std::to_string(s.objective) + ")";
            throw SolverError(msg);
        }
        p.beta = beta;
        p.m_matrix = p.base_matrix;
        p.m_matrix.diagonal().array() += beta;
        const double min_diag = p.m_matrix.diagonal().minCoeff();
        if (min_diag <= 0) {
            // The sweep needs a positive diagonal; a nonpositive one cannot
            // yield a positive objective either, so escalate straight away.
            out.path.push_back({beta, min_diag, 0});
            if (small_phase && small_steps < cfg.beta_max_small_steps) {
                beta += cfg.beta_step_small;
                ++small_steps;
            } else {
                small_phase = false;
                beta += cfg.beta_step_large;
            }
            continue;
        }
        bool converged = true;
        SolveResult r;
        try {
            r = solve(p, local);
        } catch (const SolverError&) {
            // The sweep map can cycle while the restricted objective is
            // still indefinite; more beta restores contraction, so treat
            // non-convergence exactly like a nonpositive objective.
            converged = false;
        }
        if (converged) {
            out.path.push_back({beta, r.objective, r.sweeps});
            if (r.objective > 0) {
                out.x = r.x;
                out.final_beta = beta;
                out.objective = r.objective;
                return out;
            }
            local.init = r.x.weights;  // warm start the re-solve
        } else {
            out.path.push_back({beta, 0.0, local.max_sweeps});
            local.init.resize(0);
        }
        if (small_phase && small_steps < cfg.beta_max_small_steps) {
            beta += cfg.beta_step_small;
            ++small_steps;
        } else {
            small_phase = false;
            beta += cfg.beta_step_large;
        }
    }
}

void dump_escalation(const EscalationResult& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "beta,objective,sweeps\n";
    for (const auto& s : r.path)
        out << csv::format_double(s.beta) << ',' << csv::format_double(s.objective) << ','
            << s.sweeps << '\n';
}

Eigen::VectorXd ccd_min_variance(const Eigen::MatrixXd& sigma, double beta, double alpha,
                                 double tol, int max_sweeps) {
    const auto n = sigma.rows();
    if (Eigen::LLT<Eigen::MatrixXd>(sigma).info() != Eigen::Success)
        throw SolverError("ccd_min_variance: sigma not positive definite");
    if (alpha < 0 || alpha > 1) throw ConfigError("alpha must lie in [0,1]");

    const double thr = beta * alpha;
    Eigen::VectorXd denom = 2.0 * (sigma.diagonal().array() + beta * (1.0 - alpha));
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));

    auto z_at = [&](Eigen::Index i) { return 2.0 * (sigma.row(i).dot(w) - sigma(i, i) * w(i)); };

    auto budget_at = [&](double gamma) {
        double s = 0;
        for (Eigen::Index i = 0; i < n; ++i) s += soft_threshold(gamma - z_at(i), thr) / denom(i);
        return s;
    };

    for (int it = 0; it < max_sweeps; ++it) {
        // Lagrange multiplier by bisection so the budget holds for the
        // current z, then one cyclical sweep at that multiplier.
        double lo = 0, hi = 0;
        while (budget_at(lo) > 1) lo = 2 * lo - 1;
        while (budget_at(hi) < 1) hi = 2 * hi + 1;
        for (int b = 0; b < 200; ++b) {
            const double mid = (lo + hi) / 2;
            (budget_at(mid) < 1 ? lo : hi) = mid;
        }
        const double gamma = (lo + hi) / 2;

        Eigen::VectorXd prev = w;
        for (Eigen::Index i = 0; i < n; ++i)
            w(i) = soft_threshold(gamma - z_at(i), thr) / denom(i);
        if ((w - prev).lpNorm<Eigen::Infinity>() <= tol) break;
    }
    const double s = w.sum();
    if (s != 0) w /= s;
    return w;
}

}  // namespace mrp
