#include "mrp/dlm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mrp/errors.hpp"

namespace mrp {

DlmState DlmState::diffuse(int n_exog, const DlmConfig& cfg) {
    DlmState s;
    const int dim = FeatureVector::kDim + n_exog;
    s.theta_mean = Eigen::VectorXd::Zero(dim);
    s.theta_cov_scalefree = cfg.prior_scale * Eigen::MatrixXd::Identity(dim, dim);
    s.nig_shape = cfg.prior_shape;
    s.nig_rate = cfg.prior_rate;
    s.discount_state = cfg.discount_state;
    s.discount_vol = cfg.discount_vol;
    return s;
}

void DlmState::add_coefficient(double prior_var) {
    const int n = dim();
    theta_mean.conservativeResize(n + 1);
    theta_mean(n) = 0.0;
    theta_cov_scalefree.conservativeResize(n + 1, n + 1);
    theta_cov_scalefree.row(n).setZero();
    theta_cov_scalefree.col(n).setZero();
    theta_cov_scalefree(n, n) = prior_var;
}

void DlmState::remove_coefficient(int idx) {
    const int n = dim();
    Eigen::VectorXd m(n - 1);
    Eigen::MatrixXd c(n - 1, n - 1);
    for (int i = 0, ii = 0; i < n; ++i) {
        if (i == idx) continue;
        m(ii) = theta_mean(i);
        for (int j = 0, jj = 0; j < n; ++j) {
            if (j == idx) continue;
            c(ii, jj) = theta_cov_scalefree(i, j);
            ++jj;
        }
        ++ii;
    }
    theta_mean = std::move(m);
    theta_cov_scalefree = std::move(c);
}

std::pair<double, double> DlmState::coefficient_marginal(int idx) const {
    const double var = (nig_rate / nig_shape) * theta_cov_scalefree(idx, idx);
    return {theta_mean(idx), std::sqrt(std::max(var, 0.0))};
}

Forecast dlm_step(DlmState& state, const Eigen::VectorXd& f, double y) {
    if (f.size() != state.theta_mean.size()) throw DataError("dlm_step: regressor dimension mismatch");
    if (!f.allFinite() || !std::isfinite(y)) throw DataError("dlm_step: non-finite input");

    // Evolution: G = I, W implied by the state discount; volatility
    // discounting decays the information in the NIG pair.
    state.theta_cov_scalefree /= state.discount_state;
    state.nig_shape *= state.discount_vol;
    state.nig_rate *= state.discount_vol;

    // Regressor directions that receive no excitation grow like
    // discount^{-t}; unchecked they reach magnitudes where cancellation can
    // turn the predictive variance negative. Cap the spectrum well above
    // any informative scale but inside safe floating-point territory.
    constexpr double kCovCap = 1e8;
    if (state.theta_cov_scalefree.diagonal().maxCoeff() > kCovCap) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(state.theta_cov_scalefree);
        const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0).cwiseMin(kCovCap);
        state.theta_cov_scalefree =
            es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
    }

    const Eigen::VectorXd cf = state.theta_cov_scalefree * f;
    // q >= 1 holds exactly for any PSD covariance; the floor only absorbs
    // rounding noise.
    const double q = std::max(f.dot(cf) + 1.0, 1.0);
    const double e = y - f.dot(state.theta_mean);

    Forecast fc;
    fc.mean = f.dot(state.theta_mean);
    fc.scale2 = (state.nig_rate / state.nig_shape) * q;
    fc.dof = 2.0 * state.nig_shape;

    const Eigen::VectorXd gain = cf / q;
    state.theta_mean += gain * e;
    state.theta_cov_scalefree -= gain * gain.transpose() * q;
    state.theta_cov_scalefree =
        ((state.theta_cov_scalefree + state.theta_cov_scalefree.transpose()) / 2.0).eval();
    state.nig_shape += 0.5;
    state.nig_rate += e * e / (2.0 * q);
    return fc;
}

ParentGraph ParentGraph::empty(int n_assets, int max_parents_) {
    ParentGraph g;
    g.sp.resize(n_assets);
    g.probation.resize(n_assets);
    g.gamma = Eigen::MatrixXd::Zero(n_assets, n_assets);
    g.lambda_diag = Eigen::VectorXd::Ones(n_assets);
    g.max_parents = max_parents_;
    return g;
}

std::vector<int> ParentGraph::exog_list(int j) const {
    std::vector<int> out = sp[j];
    for (const auto& p : probation[j]) out.push_back(p.parent);
    return out;
}

std::vector<int> propose_parents(const Eigen::MatrixXd& corr, int j, const ParentGraph& graph,
                                 int n_candidates) {
    std::vector<int> taken = graph.exog_list(j);
    std::vector<std::pair<double, int>> ranked;
    for (int i = 0; i < corr.rows(); ++i) {
        if (i == j) continue;
        if (std::find(taken.begin(), taken.end(), i) != taken.end()) continue;
        const double c = std::abs(corr(i, j));
        if (c > 0) ranked.emplace_back(c, i);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(ranked.size()) && i < n_candidates; ++i)
        out.push_back(ranked[i].second);
    return out;
}

namespace {

double snr_of(const DlmState& state, int idx) {
    auto [mean, sd] = state.coefficient_marginal(idx);
    if (sd <= 0) return mean == 0 ? 0 : std::numeric_limits<double>::infinity();
    return std::abs(mean) / sd;
}

// Moves coefficient `from` to position `to` (from > to), shifting the block
// in between one slot up.
void move_coefficient(DlmState& state, int from, int to) {
    if (from == to) return;
    const int n = state.dim();
    std::vector<int> perm;
    perm.reserve(n);
    for (int i = 0; i < to; ++i) perm.push_back(i);
    perm.push_back(from);
    for (int i = to; i < n; ++i)
        if (i != from) perm.push_back(i);
    Eigen::VectorXd m(n);
    Eigen::MatrixXd c(n, n);
    for (int i = 0; i < n; ++i) {
        m(i) = state.theta_mean(perm[i]);
        for (int j = 0; j < n; ++j) c(i, j) = state.theta_cov_scalefree(perm[i], perm[j]);
    }
    state.theta_mean = std::move(m);
    state.theta_cov_scalefree = std::move(c);
}

}  // namespace

void review_parents(DlmState& state, ParentGraph& graph, int j, double snr_threshold, long now,
                    long probation_len) {
    constexpr int kEndo = FeatureVector::kDim;
    auto& sp = graph.sp[j];
    auto& probation = graph.probation[j];

    std::size_t p = 0;
    while (p < probation.size()) {
        if (now - probation[p].entered < probation_len) {
            ++p;
            continue;
        }
        const int idx = kEndo + static_cast<int>(sp.size() + p);
        const double snr = snr_of(state, idx);
        if (snr >= snr_threshold) {
            if (static_cast<int>(sp.size()) == graph.max_parents) {
                // Evict the incumbent with lowest SNR; ties break to the
                // lower asset index.
                int worst = 0;
                double worst_snr = snr_of(state, kEndo);
                for (int i = 1; i < static_cast<int>(sp.size()); ++i) {
                    const double s = snr_of(state, kEndo + i);
                    if (s < worst_snr || (s == worst_snr && sp[i] < sp[worst])) {
                        worst_snr = s;
                        worst = i;
                    }
                }
                state.remove_coefficient(kEndo + worst);
                sp.erase(sp.begin() + worst);
            }
            const int cur = kEndo + static_cast<int>(sp.size() + p);
            move_coefficient(state, cur, kEndo + static_cast<int>(sp.size()));
            sp.push_back(probation[p].parent);
            probation.erase(probation.begin() + p);
        } else {
            state.remove_coefficient(idx);
            probation.erase(probation.begin() + p);
        }
    }

    graph.gamma.row(j).setZero();
    for (std::size_t i = 0; i < sp.size(); ++i)
        graph.gamma(j, sp[i]) = state.theta_mean(kEndo + static_cast<int>(i));
    graph.lambda_diag(j) = state.nig_shape / state.nig_rate;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> assemble(const ParentGraph& graph) {
    const auto n = graph.gamma.rows();
    if ((graph.lambda_diag.array() <= 0).any())
        throw SolverError("assemble: nonpositive precision entry");
    const Eigen::MatrixXd img = Eigen::MatrixXd::Identity(n, n) - graph.gamma;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(img);
    if (!lu.isInvertible()) {
        const double rho = Eigen::EigenSolver<Eigen::MatrixXd>(graph.gamma, false)
                               .eigenvalues()
                               .cwiseAbs()
                               .maxCoeff();
        throw SolverError("assemble: I - Gamma singular (spectral radius of Gamma = " +
                          std::to_string(rho) + ")");
    }
    Eigen::MatrixXd omega = img.transpose() * graph.lambda_diag.asDiagonal() * img;
    omega = ((omega + omega.transpose()) / 2.0).eval();
    Eigen::MatrixXd sigma = omega.ldlt().solve(Eigen::MatrixXd::Identity(n, n));
    sigma = ((sigma + sigma.transpose()) / 2.0).eval();
    return {omega, sigma};
}

DlmGraphModel::DlmGraphModel(int n_assets, const DlmGraphConfig& cfg)
    : cfg_(cfg),
      graph_(ParentGraph::empty(n_assets, cfg.max_parents)),
      corr_(n_assets, cfg.corr_lambda) {
    states_.reserve(n_assets);
    for (int j = 0; j < n_assets; ++j) states_.push_back(DlmState::diffuse(0, cfg.dlm));
}

void DlmGraphModel::observe(const PricePanel& panel, Eigen::Index t) {
    if (t <= cfg_.features.horizon_m)
        throw DataError("DlmGraphModel::observe: t too early for lagged features");
    const auto N = panel.n_assets();
    const Eigen::VectorXd r_d =
        (panel.close.row(t).array().log() - panel.close.row(t - 1).array().log())
            .matrix()
            .transpose();
    corr_.update(r_d);

    for (int j = 0; j < N; ++j) {
        const auto exog = graph_.exog_list(j);
        Eigen::VectorXd f(FeatureVector::kDim + exog.size());
        f.head(FeatureVector::kDim) = features(panel, j, t - 1, cfg_.features).to_vector();
        for (std::size_t i = 0; i < exog.size(); ++i)
            f(FeatureVector::kDim + static_cast<Eigen::Index>(i)) = r_d(exog[i]);
        dlm_step(states_[j], f, std::log(panel.close(t, j)));
    }
    ++observations_;

    if (observations_ % cfg_.review_cadence == 0) {
        const Eigen::MatrixXd corr = corr_.correlation();
        for (int j = 0; j < N; ++j)
            review_parents(states_[j], graph_, j, cfg_.snr_threshold, observations_,
                           cfg_.probation_len);
        for (int j = 0; j < N; ++j) {
            for (int c : propose_parents(corr, j, graph_, cfg_.n_candidates)) {
                graph_.probation[j].push_back({c, observations_});
                states_[j].add_coefficient(cfg_.candidate_prior_scale);
            }
        }
    }
}

Eigen::MatrixXd DlmGraphModel::diagonal_var_coefficients() const {
    const auto n = static_cast<Eigen::Index>(states_.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    // Index 1 of the endogenous block is the daily averaged log price, which
    // at horizon 1 is exactly the lag-1 log price.
    for (Eigen::Index j = 0; j < n; ++j) a(j, j) = states_[j].theta_mean(1);
    return a;
}

}  // namespace mrp
