#include "mrp/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "mrp/csv.hpp"
#include "mrp/errors.hpp"
#include "mrp/estimators.hpp"

namespace mrp {

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::JY: return "jy";
        case Strategy::OU: return "ou";
        case Strategy::Mixed: return "mixed";
    }
    return "?";
}

void BacktestConfig::validate(Eigen::Index n_assets, Eigen::Index length) const {
    if (betas_pa.empty() && betas_pc.empty()) throw ConfigError("beta grid must be nonempty");
    for (auto kind : kinds)
        if ((kind == ProblemKind::PA ? betas_pa : betas_pc).empty())
            throw ConfigError("beta grid for " + to_string(kind) + " must be nonempty");
    if (kinds.empty()) throw ConfigError("problem kind list must be nonempty");
    if (strategies.empty()) throw ConfigError("strategy list must be nonempty");
    if (k < 2 || k > n_assets) throw ConfigError("support size k out of range");
    if (t_tr < 5) throw ConfigError("T_tr must be at least 5");
    if (t_tr >= length) throw ConfigError("T_tr longer than the panel");
    if (!(epsilon > 0 && epsilon < 1)) throw ConfigError("epsilon must lie in (0,1)");
    if (rebalance_cadence < 1) throw ConfigError("rebalance cadence must be positive");
    if (!(lambda_pa > 0 && lambda_pa < 1 && lambda_pc > 0 && lambda_pc < 1))
        throw ConfigError("ewma lambdas must lie in (0,1)");
    const Eigen::Index burn = burn_in > 0
                                  ? burn_in
                                  : std::max<Eigen::Index>(
                                        {t_tr, graph.features.horizon_m + 2,
                                         static_cast<Eigen::Index>(graph.probation_len) +
                                             rebalance_cadence});
    if (burn + 2 >= length) throw ConfigError("panel too short for burn-in plus evaluation");
}

namespace {

double portfolio_value(const Eigen::VectorXd& s, const Eigen::VectorXd& w,
                       const std::vector<Eigen::Index>& support) {
    double p = 0;
    for (std::size_t i = 0; i < support.size(); ++i) p += w(static_cast<Eigen::Index>(i)) * s(support[i]);
    return p;
}

}  // namespace

BacktestReport run(const PricePanel& panel, const BacktestConfig& cfg) {
    const auto N = panel.n_assets();
    const auto T = panel.size();
    cfg.validate(N, T);

    DlmGraphConfig gcfg = cfg.graph;
    gcfg.review_cadence = cfg.rebalance_cadence;  // support refresh tied to parent review

    const Eigen::Index burn_in =
        cfg.burn_in > 0 ? cfg.burn_in
                        : std::max<Eigen::Index>({cfg.t_tr, gcfg.features.horizon_m + 2,
                                                  static_cast<Eigen::Index>(gcfg.probation_len) +
                                                      cfg.rebalance_cadence});

    // Log-price matrix (or raw prices behind the flag).
    Eigen::MatrixXd s_mat =
        cfg.log_price_portfolio ? panel.close.array().log().matrix() : panel.close;

    DlmGraphModel model(static_cast<int>(N), gcfg);
    EwmaCovariance ewma_pa(N, cfg.lambda_pa);
    EwmaCovariance ewma_pc(N, cfg.lambda_pc);

    BacktestReport report;
    for (auto kind : cfg.kinds)
        for (double beta : (kind == ProblemKind::PA ? cfg.betas_pa : cfg.betas_pc)) {
            BacktestRun r;
            r.kind = kind;
            r.beta = beta;
            for (auto st : cfg.strategies) {
                StrategyTrack tr;
                tr.strategy = st;
                r.tracks.push_back(tr);
            }
            report.runs.push_back(std::move(r));
        }

    struct RunState {
        WeightVector x;
        bool has_x = false;
        StrategySignal ou_prior;
        std::vector<double> pending_w;  // per strategy, decided last step
        Eigen::VectorXd pending_s_weights;
        std::vector<Eigen::Index> pending_support;
        double pending_p = 0;
        bool pending = false;
        std::vector<double> equity;  // running, per strategy
    };
    std::vector<RunState> states(report.runs.size());
    for (auto& st : states) st.equity.assign(cfg.strategies.size(), 0.0);

    Eigen::MatrixXd sigma_pa_prev;

    for (Eigen::Index t = 0; t < T; ++t) {
        const Eigen::VectorXd s_log = panel.log_close_at(t);
        const Eigen::VectorXd s_t = s_mat.row(t).transpose();

        sigma_pa_prev = ewma_pa.sigma_tilde();
        ewma_pa.update(s_log);
        ewma_pc.update(s_log);
        if (t > gcfg.features.horizon_m) model.observe(panel, t);
        if (t < burn_in) continue;

        // Book PnL for positions entered at the previous step.
        for (std::size_t ri = 0; ri < report.runs.size(); ++ri) {
            auto& run = report.runs[ri];
            auto& st = states[ri];
            if (st.pending) {
                const double p_next =
                    portfolio_value(s_t, st.pending_s_weights, st.pending_support);
                run.p_exit.push_back(p_next);
                for (std::size_t si = 0; si < cfg.strategies.size(); ++si) {
                    const double pnl = st.pending_w[si] * (p_next - st.pending_p);
                    run.tracks[si].pnl.push_back(pnl);
                    st.equity[si] += pnl;
                }
            }
        }

        const bool refresh = ((t - burn_in) % cfg.rebalance_cadence == 0);
        if (refresh) {
            const auto support = select_support(model.graph(), cfg.k);
            const auto [omega, sigma_model] = model.assemble();
            (void)omega;
            VarCoefficients a;
            if (cfg.use_dlm_var) {
                a.a_matrix = model.diagonal_var_coefficients();
            } else {
                const Eigen::Index w0 = std::max<Eigen::Index>(t + 1 - cfg.var_window, 0);
                const Eigen::MatrixXd window = s_mat.middleRows(w0, t + 1 - w0);
                const double scale =
                    (window.transpose() * window).diagonal().mean() / window.rows();
                a = fit_var1(window, cfg.var_ridge_scale * std::max(scale, 1e-12));
            }
            for (std::size_t ri = 0; ri < report.runs.size(); ++ri) {
                auto& run = report.runs[ri];
                auto& st = states[ri];
                MrpProblem problem =
                    build_problem(run.kind, a, sigma_model, sigma_pa_prev,
                                  run.kind == ProblemKind::PA ? ewma_pa.sigma_tilde()
                                                              : ewma_pc.sigma_tilde(),
                                  run.beta, support);
                CcdConfig ccd = cfg.ccd;
                ccd.beta0 = run.beta;
                if (st.has_x && st.x.support == support) ccd.init = st.x.weights;
                EscalationResult esc = solve_with_escalation(problem, ccd);
                run.escalation_steps += static_cast<long>(esc.path.size()) - 1;
                if (esc.x.fallback_equal_weight) ++run.fallback_count;
                st.x = esc.x;
                st.has_x = true;
            }
        }

        report.timestamps.push_back(panel.timestamps[t]);

        for (std::size_t ri = 0; ri < report.runs.size(); ++ri) {
            auto& run = report.runs[ri];
            auto& st = states[ri];
            const auto& support = st.x.support;
            const double p_now = portfolio_value(s_t, st.x.weights, support);

            // Trailing portfolio values under the current weights.
            Eigen::VectorXd trail(cfg.t_tr);
            for (int u = 0; u < cfg.t_tr; ++u)
                trail(u) = portfolio_value(s_mat.row(t - cfg.t_tr + 1 + u).transpose(),
                                           st.x.weights, support);
            const OuParams ou = fit_ou(trail);
            if (!ou.admissible) ++run.nofit_count;

            st.pending_w.assign(cfg.strategies.size(), 0.0);
            for (std::size_t si = 0; si < cfg.strategies.size(); ++si) {
                StrategySignal sig;
                switch (cfg.strategies[si]) {
                    case Strategy::JY: sig = jy_weight(ou, p_now); break;
                    case Strategy::OU:
                        sig = ou_weight(ou, p_now, cfg.epsilon, st.ou_prior);
                        st.ou_prior = sig;
                        break;
                    case Strategy::Mixed: sig = mixed_weight(ou, p_now, cfg.epsilon); break;
                }
                st.pending_w[si] = sig.weight;
                run.tracks[si].weight.push_back(sig.weight);
                run.tracks[si].equity.push_back(st.equity[si]);
            }
            st.pending_s_weights = st.x.weights;
            st.pending_support = support;
            st.pending_p = p_now;
            st.pending = true;

            run.p_entry.push_back(p_now);
            run.support_history.push_back(support);
            Eigen::VectorXd full = Eigen::VectorXd::Zero(N);
            for (std::size_t i = 0; i < support.size(); ++i)
                full(support[i]) = st.x.weights(static_cast<Eigen::Index>(i));
            run.weights_history.push_back(std::move(full));
        }
    }

    // The final position is never booked: close the records flat.
    for (auto& run : report.runs) {
        if (run.p_entry.size() > run.p_exit.size()) run.p_exit.push_back(run.p_entry.back());
        for (auto& tr : run.tracks)
            if (tr.weight.size() > tr.pnl.size()) tr.pnl.push_back(0.0);
    }

    // Equal-weight average of the member equity curves.
    const auto E = report.timestamps.size();
    for (std::size_t si = 0; si < cfg.strategies.size(); ++si) {
        StrategyTrack avg;
        avg.strategy = cfg.strategies[si];
        avg.equity.assign(E, 0.0);
        for (const auto& run : report.runs)
            for (std::size_t e = 0; e < E; ++e) avg.equity[e] += run.tracks[si].equity[e];
        for (auto& v : avg.equity) v /= static_cast<double>(report.runs.size());
        report.averaged.push_back(std::move(avg));
    }
    return report;
}

bool pnl_identity_check(const BacktestReport& report, Eigen::Index* first_violation) {
    for (const auto& run : report.runs)
        for (const auto& tr : run.tracks) {
            double acc = 0;
            for (std::size_t t = 0; t < tr.equity.size(); ++t) {
                if (std::abs(tr.equity[t] - acc) > 1e-10) {
                    if (first_violation) *first_violation = static_cast<Eigen::Index>(t);
                    return false;
                }
                if (t < tr.weight.size())
                    acc += tr.weight[t] * (run.p_exit[t] - run.p_entry[t]);
            }
        }
    return true;
}

void write_report(const BacktestReport& report, const std::vector<std::string>& assets,
                  const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    auto run_label = [](const BacktestRun& r) {
        return to_string(r.kind) + "_beta" + csv::format_double(r.beta);
    };

    {
        std::ofstream out(dir + "/equity.csv");
        out << "date";
        for (const auto& run : report.runs)
            for (const auto& tr : run.tracks) out << ',' << run_label(run) << '_' << to_string(tr.strategy);
        for (const auto& tr : report.averaged) out << ",avg_" << to_string(tr.strategy);
        out << '\n';
        for (std::size_t t = 0; t < report.timestamps.size(); ++t) {
            out << report.timestamps[t];
            for (const auto& run : report.runs)
                for (const auto& tr : run.tracks) out << ',' << csv::format_double(tr.equity[t]);
            for (const auto& tr : report.averaged) out << ',' << csv::format_double(tr.equity[t]);
            out << '\n';
        }
    }
    {
        std::ofstream out(dir + "/weights.csv");
        out << "date,run,asset,weight\n";
        for (const auto& run : report.runs)
            for (std::size_t t = 0; t < report.timestamps.size(); ++t) {
                const auto& w = run.weights_history[t];
                for (Eigen::Index j = 0; j < w.size(); ++j)
                    if (w(j) != 0)
                        out << report.timestamps[t] << ',' << run_label(run) << ','
                            << assets[j] << ',' << csv::format_double(w(j)) << '\n';
            }
    }
    {
        std::ofstream out(dir + "/supports.csv");
        out << "date,run,support\n";
        for (const auto& run : report.runs)
            for (std::size_t t = 0; t < report.timestamps.size(); ++t) {
                out << report.timestamps[t] << ',' << run_label(run) << ',';
                const auto& s = run.support_history[t];
                for (std::size_t i = 0; i < s.size(); ++i) out << (i ? ";" : "") << s[i];
                out << '\n';
            }
    }
    {
        std::ofstream out(dir + "/diagnostics.csv");
        out << "run,escalation_steps,fallback_count,nofit_count\n";
        for (const auto& run : report.runs)
            out << run_label(run) << ',' << run.escalation_steps << ',' << run.fallback_count
                << ',' << run.nofit_count << '\n';
    }
    {
        std::ofstream out(dir + "/plotdata.csv");
        out << "date";
        for (const auto& tr : report.averaged) out << ",avg_" << to_string(tr.strategy);
        out << '\n';
        for (std::size_t t = 0; t < report.timestamps.size(); ++t) {
            out << report.timestamps[t];
            for (const auto& tr : report.averaged) out << ',' << csv::format_double(tr.equity[t]);
            out << '\n';
        }
    }
}

}  // namespace mrp
