#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "mrp/estimators.hpp"
#include "mrp/panel.hpp"

namespace mrp {

struct DlmConfig {
    double discount_state = 0.98;  // state evolution discount (G = I)
    double discount_vol = 0.97;    // volatility discounting of the NIG pair
    double prior_scale = 1.0;      // diffuse prior variance per coefficient
    double prior_shape = 1.0;
    double prior_rate = 1.0;
};

// Conjugate Normal-Inverse-Gamma dynamic regression state for one asset.
// theta | lambda ~ N(theta_mean, theta_cov_scalefree / lambda),
// lambda ~ Gamma(nig_shape, nig_rate).
struct DlmState {
    Eigen::VectorXd theta_mean;
    Eigen::MatrixXd theta_cov_scalefree;
    double nig_shape = 1.0;
    double nig_rate = 1.0;
    double discount_state = 1.0;
    double discount_vol = 1.0;

    static DlmState diffuse(int n_exog, const DlmConfig& cfg = {});

    int dim() const { return static_cast<int>(theta_mean.size()); }

    // Grows the state with one new trailing coefficient at prior (0, prior_var).
    void add_coefficient(double prior_var);
    void remove_coefficient(int idx);

    // Posterior t-marginal of coefficient idx: (mean, sd).
    std::pair<double, double> coefficient_marginal(int idx) const;
};

struct Forecast {
    double mean = 0;    // prior-predictive mean f' theta
    double scale2 = 0;  // squared scale of the predictive t distribution
    double dof = 0;
};

// One conjugate update. The returned forecast is the prior predictive,
// evaluated before the observation is absorbed. Discount factors inflate the
// state covariance and decay the NIG pair ahead of the update.
Forecast dlm_step(DlmState& state, const Eigen::VectorXd& f, double y);

struct ProbationEntry {
    int parent = -1;
    long entered = 0;  // observation count at entry
};

// Per-asset parent sets with plug-in coefficient matrix Gamma and precision
// diagonal Lambda. Row j of gamma holds asset j's parent coefficients.
struct ParentGraph {
    std::vector<std::vector<int>> sp;
    Eigen::MatrixXd gamma;
    Eigen::VectorXd lambda_diag;
    std::vector<std::vector<ProbationEntry>> probation;
    int max_parents = 10;

    static ParentGraph empty(int n_assets, int max_parents);

    // Exogenous regressor order for asset j: confirmed parents then probation.
    std::vector<int> exog_list(int j) const;
};

// Candidates with highest |correlation| to j, excluding j itself, sp(j) and
// current probation. Zero-correlation assets are not proposed; ties break to
// the lower asset index.
std::vector<int> propose_parents(const Eigen::MatrixXd& corr, int j, const ParentGraph& graph,
                                 int n_candidates);

// Judges probation entries of asset j whose age (now - entered) is at least
// probation_len: kept iff SNR = |coef mean| / coef sd >= snr_threshold, with
// eviction of the lowest-SNR incumbent when sp(j) is full. Rejected or
// evicted coefficients are removed from the DLM state. Refreshes gamma row j
// and lambda_diag[j] from the posterior.
void review_parents(DlmState& state, ParentGraph& graph, int j, double snr_threshold,
                    long now = 0, long probation_len = 0);

// Omega = (I - Gamma)' Lambda (I - Gamma), Sigma = Omega^{-1}.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> assemble(const ParentGraph& graph);

struct DlmGraphConfig {
    FeatureConfig features;
    DlmConfig dlm;
    int max_parents = 10;
    int n_candidates = 2;      // proposals per asset per review
    long probation_len = 10;   // update cycles before a candidate is judged
    int review_cadence = 10;   // time steps between parent reviews
    double snr_threshold = 1.0;
    // Scale-free prior variance for a freshly proposed parent coefficient.
    // The NIG covariance factor is measured in units of the observation
    // variance, so a weakly informative prior on an O(1) coefficient over a
    // return-sized regressor needs to be large in these units.
    double candidate_prior_scale = 1e3;
    double corr_lambda = 0.9;  // EWMA decay for the ranking correlations
};

// Orchestrates one DLM per asset over a panel: endogenous features lagged by
// one step, simultaneous parent returns, sequential parent selection at the
// review cadence. Per-asset updates are independent between reviews; reviews
// are a synchronization barrier.
class DlmGraphModel {
public:
    DlmGraphModel(int n_assets, const DlmGraphConfig& cfg = {});

    // Absorbs time t of the panel. Requires t > horizon_m (the lagged
    // features need index t-1 >= horizon_m).
    void observe(const PricePanel& panel, Eigen::Index t);

    long observations() const { return observations_; }
    const ParentGraph& graph() const { return graph_; }
    const DlmState& state(int j) const { return states_[j]; }
    const Eigen::MatrixXd correlation() const { return corr_.correlation(); }

    std::pair<Eigen::MatrixXd, Eigen::MatrixXd> assemble() const { return mrp::assemble(graph_); }

    // Diagonal TVAR(1) surrogate: each asset's own lag-1 log-price
    // coefficient (the daily averaged-price regressor), off-diagonals zero.
    Eigen::MatrixXd diagonal_var_coefficients() const;

private:
    void refresh_row(int j);

    DlmGraphConfig cfg_;
    std::vector<DlmState> states_;
    ParentGraph graph_;
    EwmaCovariance corr_;
    long observations_ = 0;
};

}  // namespace mrp
