// Command-line front end: synthetic data generation, ingestion, one-shot
// solves, rolling backtests and the optimality-gap audit.

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "mrp/backtest.hpp"
#include "mrp/ccd.hpp"
#include "mrp/csv.hpp"
#include "mrp/errors.hpp"
#include "mrp/estimators.hpp"
#include "mrp/oracle.hpp"
#include "mrp/profiles.hpp"

namespace fs = std::filesystem;
using namespace mrp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitSolver = 4;

struct GlobalOpts {
    std::string config;
    std::string out_dir;
    std::string profile;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

RunConfig resolve_config(const GlobalOpts& g) {
    RunConfig cfg;
    if (!g.config.empty()) {
        cfg = load_config(g.config);
    } else if (!g.profile.empty()) {
        cfg = profile_defaults(g.profile);
    }
    if (!g.profile.empty() && !g.config.empty()) {
        // --profile changes the defaults a config file is applied on top of,
        // so combining both requires the profile inside the file.
        throw ConfigError("pass the profile inside the config file, not both flags");
    }
    if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
    if (g.seed_set) cfg.seed = g.seed;
    return cfg;
}

void echo_config(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    std::ofstream out(cfg.out_dir + "/config.json");
    out << serialize_config(cfg);
}

PricePanel load_input_panel(const RunConfig& cfg) {
    if (cfg.data_path.empty()) throw ConfigError("no data path configured");
    PricePanel panel = load_panel(cfg.data_path, cfg.layout);
    if (cfg.stride > 1) panel = resample(panel, cfg.stride);
    return panel;
}

int cmd_synth(const GlobalOpts& g, const std::string& kind, int n, long len, double rho,
              double mu, double sigma, const std::string& out_file) {
    oracle::SyntheticSpec spec;
    if (kind == "ou")
        spec.kind = oracle::GeneratorKind::Ou;
    else if (kind == "var1")
        spec.kind = oracle::GeneratorKind::Var1;
    else if (kind == "cointegrated-basket")
        spec.kind = oracle::GeneratorKind::CointegratedBasket;
    else
        throw ConfigError("unknown generator kind: " + kind);
    spec.dimension = n;
    spec.length = len;
    spec.seed = g.seed;
    spec.rho = rho;
    spec.idio_rho = rho;
    spec.mu = mu;
    spec.sigma = sigma;
    spec.idio_sigma = sigma;
    PricePanel panel = oracle::gen_synthetic(spec);
    const std::string dir = g.out_dir.empty() ? "." : g.out_dir;
    fs::create_directories(dir);
    const std::string path = dir + "/" + (out_file.empty() ? "synthetic.csv" : out_file);
    save_panel(panel, path);
    std::cout << "wrote " << path << " (" << panel.size() << " x " << panel.n_assets() << ")\n";
    return kExitOk;
}

int cmd_ingest(const GlobalOpts& g) {
    RunConfig cfg = resolve_config(g);
    PricePanel panel = load_input_panel(cfg);
    fs::create_directories(cfg.out_dir);
    echo_config(cfg);
    save_panel(panel, cfg.out_dir + "/panel.csv");
    std::cout << "wrote " << cfg.out_dir << "/panel.csv (" << panel.size() << " x "
              << panel.n_assets() << ")\n";
    return kExitOk;
}

int cmd_solve(const GlobalOpts& g, const std::string& as_of) {
    RunConfig cfg = resolve_config(g);
    PricePanel panel = load_input_panel(cfg);
    const auto& bt = cfg.backtest;
    bt.validate(panel.n_assets(), panel.size());

    Eigen::Index t_end = panel.size() - 1;
    if (!as_of.empty()) {
        t_end = -1;
        for (Eigen::Index t = 0; t < panel.size(); ++t)
            if (panel.timestamps[t] <= as_of) t_end = t;
        if (t_end < 0) throw DataError("as-of date precedes the panel: " + as_of);
    }

    DlmGraphConfig gcfg = bt.graph;
    gcfg.review_cadence = bt.rebalance_cadence;
    DlmGraphModel model(static_cast<int>(panel.n_assets()), gcfg);
    EwmaCovariance ewma_pa(panel.n_assets(), bt.lambda_pa);
    EwmaCovariance ewma_pc(panel.n_assets(), bt.lambda_pc);
    Eigen::MatrixXd sigma_pa_prev;
    for (Eigen::Index t = 0; t <= t_end; ++t) {
        sigma_pa_prev = ewma_pa.sigma_tilde();
        const Eigen::VectorXd s = panel.log_close_at(t);
        ewma_pa.update(s);
        ewma_pc.update(s);
        if (t > gcfg.features.horizon_m) model.observe(panel, t);
    }

    const auto support = select_support(model.graph(), bt.k);
    const auto [omega, sigma_model] = model.assemble();
    (void)omega;
    Eigen::MatrixXd logp = panel.close.topRows(t_end + 1).array().log();
    const Eigen::Index w0 = std::max<Eigen::Index>(t_end + 1 - bt.var_window, 0);
    const Eigen::MatrixXd window = logp.middleRows(w0, t_end + 1 - w0);
    const double scale = (window.transpose() * window).diagonal().mean() / window.rows();
    VarCoefficients a = bt.use_dlm_var
                            ? VarCoefficients{model.diagonal_var_coefficients(), 0, 0}
                            : fit_var1(window, bt.var_ridge_scale * std::max(scale, 1e-12));

    fs::create_directories(cfg.out_dir);
    echo_config(cfg);
    std::ofstream wout(cfg.out_dir + "/weights.csv");
    wout << "run,asset,weight\n";
    std::ofstream dout(cfg.out_dir + "/diagnostics.csv");
    dout << "run,final_beta,objective,escalation_steps,l1_norm,fallback\n";
    for (auto kind : bt.kinds)
        for (double beta : (kind == ProblemKind::PA ? bt.betas_pa : bt.betas_pc)) {
            MrpProblem problem = build_problem(
                kind, a, sigma_model, sigma_pa_prev,
                kind == ProblemKind::PA ? ewma_pa.sigma_tilde() : ewma_pc.sigma_tilde(), beta,
                support);
            CcdConfig ccd = bt.ccd;
            ccd.beta0 = beta;
            EscalationResult r = solve_with_escalation(problem, ccd);
            const std::string label = to_string(kind) + "_beta" + csv::format_double(beta);
            for (std::size_t i = 0; i < support.size(); ++i)
                wout << label << ',' << panel.assets[support[i]] << ','
                     << csv::format_double(r.x.weights(static_cast<Eigen::Index>(i))) << '\n';
            dout << label << ',' << csv::format_double(r.final_beta) << ','
                 << csv::format_double(r.objective) << ',' << r.path.size() - 1 << ','
                 << csv::format_double(r.x.weights.lpNorm<1>()) << ','
                 << (r.x.fallback_equal_weight ? 1 : 0) << '\n';
        }
    std::cout << "wrote " << cfg.out_dir << "/weights.csv\n";
    return kExitOk;
}

int cmd_backtest(const GlobalOpts& g) {
    RunConfig cfg = resolve_config(g);
    PricePanel panel = load_input_panel(cfg);
    cfg.backtest.validate(panel.n_assets(), panel.size());
    BacktestReport report = run(panel, cfg.backtest);
    echo_config(cfg);
    write_report(report, panel.assets, cfg.out_dir);
    if (!pnl_identity_check(report)) throw SolverError("pnl identity violated in report");
    std::cout << "wrote report to " << cfg.out_dir << " (" << report.timestamps.size()
              << " evaluation steps)\n";
    return kExitOk;
}

int cmd_oracle_gap(const GlobalOpts& g, int instances, int k) {
    if (k < 2 || k > 6) throw ConfigError("oracle-gap requires 2 <= k <= 6");
    const std::string dir = g.out_dir.empty() ? "." : g.out_dir;
    fs::create_directories(dir);
    std::ofstream out(dir + "/gap_report.csv");
    out << "instance,gap,ccd_objective,brute_objective\n";
    std::mt19937_64 rng(g.seed);
    std::normal_distribution<double> gauss;
    for (int i = 0; i < instances; ++i) {
        Eigen::MatrixXd r(k, k);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) r(a, b) = gauss(rng);
        Eigen::MatrixXd m = (r + r.transpose()) / 2.0;
        m.diagonal().array() += nearest_psd_gap(m) + 0.1;

        MrpProblem problem;
        problem.beta = 0;
        for (int a = 0; a < k; ++a) problem.support.push_back(a);
        problem.base_matrix = problem.m_matrix = m;
        SolveResult s = solve(problem, CcdConfig{});
        oracle::GapReport gap = oracle::optimality_gap(problem, s.x);
        out << i << ',' << csv::format_double(gap.gap) << ','
            << csv::format_double(gap.ccd_objective) << ','
            << csv::format_double(gap.brute_objective) << '\n';
    }
    std::cout << "wrote " << dir << "/gap_report.csv\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse mean-reverting portfolios by cyclical coordinate descent"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config, "JSON run configuration");
    app.add_option("--out-dir", g.out_dir, "Output directory");
    app.add_option("--profile", g.profile, "Dataset profile: equities|fx|etf|custom");
    auto* seed_opt = app.add_option("--seed", g.seed, "RNG seed");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic OHLCV panel");
    std::string synth_kind = "ou", synth_out;
    int synth_n = 1;
    long synth_len = 1000;
    double synth_rho = 0.9, synth_mu = 0.0, synth_sigma = 0.02;
    synth->add_option("--kind", synth_kind, "ou|var1|cointegrated-basket");
    synth->add_option("--n", synth_n, "Number of assets");
    synth->add_option("--len", synth_len, "Number of time points");
    synth->add_option("--rho", synth_rho, "AR(1) coefficient");
    synth->add_option("--mu", synth_mu, "Long-term mean (log price)");
    synth->add_option("--sigma", synth_sigma, "Innovation scale");
    synth->add_option("--out", synth_out, "Output file name");

    auto* ingest = app.add_subcommand("ingest", "Load, align and resample a panel");
    auto* solve_cmd = app.add_subcommand("solve", "Solve the MRP grid at a date");
    std::string as_of;
    solve_cmd->add_option("--as-of", as_of, "Solve as of this date (default: last)");
    auto* backtest_cmd = app.add_subcommand("backtest", "Rolling backtest from a config");
    auto* gap = app.add_subcommand("oracle-gap", "Optimality-gap audit vs the brute-force oracle");
    int gap_instances = 100, gap_k = 5;
    gap->add_option("--instances", gap_instances, "Number of random instances");
    gap->add_option("--k", gap_k, "Instance size (<= 6)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }
    g.seed_set = seed_opt->count() > 0;

    try {
        if (synth->parsed())
            return cmd_synth(g, synth_kind, synth_n, synth_len, synth_rho, synth_mu, synth_sigma,
                             synth_out);
        if (ingest->parsed()) return cmd_ingest(g);
        if (solve_cmd->parsed()) return cmd_solve(g, as_of);
        if (backtest_cmd->parsed()) return cmd_backtest(g);
        if (gap->parsed()) return cmd_oracle_gap(g, gap_instances, gap_k);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kExitSolver;
    }
    return kExitConfig;
}
