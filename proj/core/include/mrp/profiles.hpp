#pragma once

#include <cstdint>
#include <string>

#include "mrp/backtest.hpp"
#include "mrp/panel.hpp"

namespace mrp {

// Declarative run configuration. Dataset profiles bundle the default
// parameters per asset class; any field can be overridden from the config
// file. Unknown keys are rejected.
struct RunConfig {
    std::string profile = "custom";
    std::string data_path;
    CsvLayout layout;
    int stride = 1;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    BacktestConfig backtest;
};

// equities | fx | etf | custom
RunConfig profile_defaults(const std::string& name);

RunConfig load_config(const std::string& path);

// Fully-resolved echo; re-loading it reproduces the same RunConfig.
std::string serialize_config(const RunConfig& cfg);

}  // namespace mrp
