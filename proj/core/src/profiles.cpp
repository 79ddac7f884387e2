#include "mrp/profiles.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "mrp/errors.hpp"

namespace mrp {

using nlohmann::json;

RunConfig profile_defaults(const std::string& name) {
    RunConfig cfg;
    cfg.profile = name;
    auto& bt = cfg.backtest;
    if (name == "equities") {
        bt.k = 50;
        bt.lambda_pa = 0.98;
        bt.lambda_pc = 0.85;
        bt.t_tr = 50;
        bt.betas_pa = bt.betas_pc = {1e-3, 1e-4, 1e-5, 1e-6};
        bt.graph.max_parents = 10;
        cfg.stride = 5;
    } else if (name == "fx") {
        bt.k = 10;
        bt.lambda_pa = bt.lambda_pc = 0.8;
        bt.t_tr = 10;
        bt.betas_pa = {1e-1, 1e-2, 1e-3};
        bt.betas_pc = {1e-2, 1e-4, 1e-5};
        bt.graph.max_parents = 5;
        cfg.stride = 5;
    } else if (name == "etf") {
        bt.k = 20;
        bt.lambda_pa = 0.85;
        bt.lambda_pc = 0.98;
        bt.t_tr = 10;
        bt.betas_pa = {1e-5, 1e-6};
        bt.betas_pc = {1e-3, 1e-4};
        bt.graph.max_parents = 10;
        cfg.stride = 5;
    } else if (name != "custom") {
        throw ConfigError("unknown profile: " + name);
    }
    return cfg;
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown config key '" + it.key() + "' in " + where);
}

std::vector<ProblemKind> parse_kinds(const json& arr) {
    std::vector<ProblemKind> out;
    for (const auto& v : arr) {
        const std::string s = v.get<std::string>();
        if (s == "PA")
            out.push_back(ProblemKind::PA);
        else if (s == "PC")
            out.push_back(ProblemKind::PC);
        else
            throw ConfigError("unknown problem kind: " + s);
    }
    return out;
}

std::vector<Strategy> parse_strategies(const json& arr) {
    std::vector<Strategy> out;
    for (const auto& v : arr) {
        const std::string s = v.get<std::string>();
        if (s == "jy")
            out.push_back(Strategy::JY);
        else if (s == "ou")
            out.push_back(Strategy::OU);
        else if (s == "mixed")
            out.push_back(Strategy::Mixed);
        else
            throw ConfigError("unknown strategy: " + s);
    }
    return out;
}

}  // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }

    reject_unknown(j, {"profile", "data", "stride", "seed", "out_dir", "backtest"}, "top level");

    RunConfig cfg = profile_defaults(j.value("profile", std::string("custom")));
    try {
        if (j.contains("data")) {
            const auto& d = j["data"];
            reject_unknown(d,
                           {"path", "layout", "date_col", "asset_col", "open_col", "high_col",
                            "low_col", "close_col", "volume_col", "wide_sep"},
                           "data");
            cfg.data_path = d.value("path", std::string());
            const std::string shape = d.value("layout", std::string("long"));
            if (shape == "long")
                cfg.layout.shape = CsvShape::Long;
            else if (shape == "wide")
                cfg.layout.shape = CsvShape::Wide;
            else
                throw ConfigError("unknown csv layout: " + shape);
            cfg.layout.date_col = d.value("date_col", cfg.layout.date_col);
            cfg.layout.asset_col = d.value("asset_col", cfg.layout.asset_col);
            cfg.layout.open_col = d.value("open_col", cfg.layout.open_col);
            cfg.layout.high_col = d.value("high_col", cfg.layout.high_col);
            cfg.layout.low_col = d.value("low_col", cfg.layout.low_col);
            cfg.layout.close_col = d.value("close_col", cfg.layout.close_col);
            cfg.layout.volume_col = d.value("volume_col", cfg.layout.volume_col);
            cfg.layout.wide_sep = d.value("wide_sep", cfg.layout.wide_sep);
        }
        cfg.stride = j.value("stride", cfg.stride);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.out_dir = j.value("out_dir", cfg.out_dir);

        if (j.contains("backtest")) {
            const auto& b = j["backtest"];
            reject_unknown(b,
                           {"kinds", "betas_pa", "betas_pc", "lambda_pa", "lambda_pc", "k",
                            "t_tr", "strategies", "epsilon", "rebalance_cadence", "var_window",
                            "var_ridge_scale", "use_dlm_var", "log_price_portfolio", "burn_in",
                            "max_parents", "probation_len", "snr_threshold", "n_candidates",
                            "corr_lambda", "discount_state", "discount_vol", "ccd_tol",
                            "ccd_max_sweeps", "lambda1"},
                           "backtest");
            auto& bt = cfg.backtest;
            if (b.contains("kinds")) bt.kinds = parse_kinds(b["kinds"]);
            if (b.contains("betas_pa")) bt.betas_pa = b["betas_pa"].get<std::vector<double>>();
            if (b.contains("betas_pc")) bt.betas_pc = b["betas_pc"].get<std::vector<double>>();
            bt.lambda_pa = b.value("lambda_pa", bt.lambda_pa);
            bt.lambda_pc = b.value("lambda_pc", bt.lambda_pc);
            bt.k = b.value("k", bt.k);
            bt.t_tr = b.value("t_tr", bt.t_tr);
            if (b.contains("strategies")) bt.strategies = parse_strategies(b["strategies"]);
            bt.epsilon = b.value("epsilon", bt.epsilon);
            bt.rebalance_cadence = b.value("rebalance_cadence", bt.rebalance_cadence);
            bt.var_window = b.value("var_window", bt.var_window);
            bt.var_ridge_scale = b.value("var_ridge_scale", bt.var_ridge_scale);
            bt.use_dlm_var = b.value("use_dlm_var", bt.use_dlm_var);
            bt.log_price_portfolio = b.value("log_price_portfolio", bt.log_price_portfolio);
            bt.burn_in = b.value("burn_in", bt.burn_in);
            bt.graph.max_parents = b.value("max_parents", bt.graph.max_parents);
            bt.graph.probation_len = b.value("probation_len", bt.graph.probation_len);
            bt.graph.snr_threshold = b.value("snr_threshold", bt.graph.snr_threshold);
            bt.graph.n_candidates = b.value("n_candidates", bt.graph.n_candidates);
            bt.graph.corr_lambda = b.value("corr_lambda", bt.graph.corr_lambda);
            bt.graph.dlm.discount_state = b.value("discount_state", bt.graph.dlm.discount_state);
            bt.graph.dlm.discount_vol = b.value("discount_vol", bt.graph.dlm.discount_vol);
            bt.ccd.tol = b.value("ccd_tol", bt.ccd.tol);
            bt.ccd.max_sweeps = b.value("ccd_max_sweeps", bt.ccd.max_sweeps);
            bt.ccd.lambda1 = b.value("lambda1", bt.ccd.lambda1);
        }
    } catch (const json::exception& e) {
        throw ConfigError("config type error in " + path + ": " + e.what());
    }
    return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
    json j;
    j["profile"] = "custom";  // resolved values below are self-contained
    j["stride"] = cfg.stride;
    j["seed"] = cfg.seed;
    j["out_dir"] = cfg.out_dir;
    json d;
    d["path"] = cfg.data_path;
    d["layout"] = cfg.layout.shape == CsvShape::Long ? "long" : "wide";
    d["date_col"] = cfg.layout.date_col;
    d["asset_col"] = cfg.layout.asset_col;
    d["open_col"] = cfg.layout.open_col;
    d["high_col"] = cfg.layout.high_col;
    d["low_col"] = cfg.layout.low_col;
    d["close_col"] = cfg.layout.close_col;
    d["volume_col"] = cfg.layout.volume_col;
    d["wide_sep"] = cfg.layout.wide_sep;
    j["data"] = d;
    const auto& bt = cfg.backtest;
    json b;
    b["kinds"] = json::array();
    for (auto kind : bt.kinds) b["kinds"].push_back(to_string(kind));
    b["betas_pa"] = bt.betas_pa;
    b["betas_pc"] = bt.betas_pc;
    b["lambda_pa"] = bt.lambda_pa;
    b["lambda_pc"] = bt.lambda_pc;
    b["k"] = bt.k;
    b["t_tr"] = bt.t_tr;
    b["strategies"] = json::array();
    for (auto s : bt.strategies) b["strategies"].push_back(to_string(s));
    b["epsilon"] = bt.epsilon;
    b["rebalance_cadence"] = bt.rebalance_cadence;
    b["var_window"] = bt.var_window;
    b["var_ridge_scale"] = bt.var_ridge_scale;
    b["use_dlm_var"] = bt.use_dlm_var;
    b["log_price_portfolio"] = bt.log_price_portfolio;
    b["burn_in"] = bt.burn_in;
    b["max_parents"] = bt.graph.max_parents;
    b["probation_len"] = bt.graph.probation_len;
    b["snr_threshold"] = bt.graph.snr_threshold;
    b["n_candidates"] = bt.graph.n_candidates;
    b["corr_lambda"] = bt.graph.corr_lambda;
    b["discount_state"] = bt.graph.dlm.discount_state;
    b["discount_vol"] = bt.graph.dlm.discount_vol;
    b["ccd_tol"] = bt.ccd.tol;
    b["ccd_max_sweeps"] = bt.ccd.max_sweeps;
    b["lambda1"] = bt.ccd.lambda1;
    j["backtest"] = b;
    return j.dump(2) + "\n";
}

}  // namespace mrp
