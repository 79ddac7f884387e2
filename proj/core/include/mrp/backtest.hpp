#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mrp/ccd.hpp"
#include "mrp/dlm.hpp"
#include "mrp/mrp_problem.hpp"
#include "mrp/panel.hpp"
#include "mrp/trading.hpp"

namespace mrp {

enum class Strategy { JY, OU, Mixed };
std::string to_string(Strategy s);

struct BacktestConfig {
    std::vector<ProblemKind> kinds{ProblemKind::PA, ProblemKind::PC};
    std::vector<double> betas_pa{1e-3, 1e-4, 1e-5, 1e-6};
    std::vector<double> betas_pc{1e-3, 1e-4, 1e-5, 1e-6};
    double lambda_pa = 0.98;
    double lambda_pc = 0.85;
    int k = 50;  // support size
    int t_tr = 50;
    std::vector<Strategy> strategies{Strategy::JY, Strategy::OU, Strategy::Mixed};
    double epsilon = 0.05;
    int rebalance_cadence = 10;  // support refresh, tied to parent review
    DlmGraphConfig graph;
    CcdConfig ccd;
    int var_window = 100;
    double var_ridge_scale = 1e-6;  // ridge = scale * mean diagonal of the gram
    bool use_dlm_var = false;       // diagonal DLM surrogate for A in PA
    bool log_price_portfolio = true;
    int burn_in = 0;  // 0 selects max(T_tr, probation + cadence, horizon_m + 2)

    void validate(Eigen::Index n_assets, Eigen::Index length) const;
};

struct StrategyTrack {
    Strategy strategy = Strategy::JY;
    std::vector<double> weight;  // investment weight decided at each step
    std::vector<double> pnl;     // booked at the next step; last entry 0
    std::vector<double> equity;  // cumulative pnl up to and including step t
};

struct BacktestRun {
    ProblemKind kind = ProblemKind::PC;
    double beta = 0;
    std::vector<std::vector<Eigen::Index>> support_history;  // per step
    std::vector<Eigen::VectorXd> weights_history;            // full-universe, per step
    std::vector<double> p_entry;  // x_t' s_t
    std::vector<double> p_exit;   // x_t' s_{t+1}; last entry equals p_entry
    std::vector<StrategyTrack> tracks;
    // diagnostics
    long escalation_steps = 0;
    long fallback_count = 0;
    long nofit_count = 0;
};

struct BacktestReport {
    std::vector<std::string> timestamps;  // evaluation period
    std::vector<BacktestRun> runs;
    std::vector<StrategyTrack> averaged;  // equal-weight mean across runs
};

BacktestReport run(const PricePanel& panel, const BacktestConfig& cfg);

// Verifies equity_t = sum_{u<t} weight_u * (p_exit_u - p_entry_u) to 1e-10
// for every run and strategy. On failure returns false and, when given,
// reports the first violating step index.
bool pnl_identity_check(const BacktestReport& report, Eigen::Index* first_violation = nullptr);

// equity.csv, weights.csv, supports.csv, diagnostics.csv, plotdata.csv
void write_report(const BacktestReport& report, const std::vector<std::string>& assets,
                  const std::string& dir);

}  // namespace mrp
