#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "mrp/csv.hpp"
#include "mrp/panel.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(MRP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string scratch(const std::string& name) {
    auto dir = testutil::temp_dir("cli") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

}  // namespace

TEST_CASE("cli: synth is deterministic for a fixed seed") {
    const std::string dir_a = scratch("synth_a");
    const std::string dir_b = scratch("synth_b");
    CHECK(run_cli("--seed 7 --out-dir " + dir_a + " synth --kind ou --n 1 --len 1000") == 0);
    CHECK(run_cli("--seed 7 --out-dir " + dir_b + " synth --kind ou --n 1 --len 1000") == 0);
    const std::string a = testutil::read_file(dir_a + "/synthetic.csv");
    CHECK(!a.empty());
    CHECK(a == testutil::read_file(dir_b + "/synthetic.csv"));

    mrp::PricePanel p = mrp::load_panel(dir_a + "/synthetic.csv");
    CHECK(p.size() == 1000);
    CHECK(p.n_assets() == 1);
}

TEST_CASE("cli: synth shapes and validation") {
    const std::string dir = scratch("synth_shape");
    CHECK(run_cli("--out-dir " + dir + " synth --kind cointegrated-basket --n 4 --len 300") == 0);
    mrp::PricePanel p = mrp::load_panel(dir + "/synthetic.csv");
    CHECK(p.n_assets() == 4);

    // Invalid rho: config-style failure, exit code 2.
    CHECK(run_cli("--out-dir " + dir + " synth --kind ou --n 1 --len 100 --rho 1.5") == 2);
    // Unknown generator kind.
    CHECK(run_cli("--out-dir " + dir + " synth --kind brownian") == 2);
}

TEST_CASE("cli: error taxonomy distinguishes config and data failures") {
    const std::string dir = scratch("errors");
    const std::string cfg = testutil::write_file(
        "cli", "missing_data.json",
        R"({"data": {"path": "/nonexistent/panel.csv"}, "backtest": {"k": 3, "t_tr": 20}})");
    // Missing data file: data error, exit 3 (distinct from solver exit 4).
    CHECK(run_cli("--config " + cfg + " --out-dir " + dir + " solve") == 3);
    // No data path at all: config error, exit 2.
    const std::string empty_cfg = testutil::write_file("cli", "no_data.json", "{}");
    CHECK(run_cli("--config " + empty_cfg + " --out-dir " + dir + " solve") == 2);
    // Both --profile and --config: config error.
    CHECK(run_cli("--config " + empty_cfg + " --profile fx --out-dir " + dir + " solve") == 2);
}

TEST_CASE("cli: solve writes normalized weights and echoes the config") {
    const std::string data_dir = scratch("solve_data");
    REQUIRE(run_cli("--seed 3 --out-dir " + data_dir +
                    " synth --kind cointegrated-basket --n 4 --len 300") == 0);
    const std::string cfg = testutil::write_file(
        "cli", "solve.json",
        "{\"data\": {\"path\": \"" + data_dir + "/synthetic.csv\"},"
        " \"backtest\": {\"k\": 4, \"t_tr\": 20, \"kinds\": [\"PC\"],"
        " \"betas_pc\": [0.001]}}");
    const std::string out = scratch("solve_out");
    REQUIRE(run_cli("--config " + cfg + " --out-dir " + out + " solve") == 0);

    CHECK(fs::exists(out + "/config.json"));
    mrp::csv::Table weights = mrp::csv::read_table(out + "/weights.csv");
    REQUIRE(weights.rows.size() == 4);
    double l1 = 0;
    const int wc = weights.column("weight");
    REQUIRE(wc >= 0);
    for (const auto& row : weights.rows) l1 += std::abs(std::stod(row[wc]));
    CHECK(l1 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("cli: backtest runs are byte-identical and produce all curves") {
    const std::string data_dir = scratch("bt_data");
    REQUIRE(run_cli("--seed 11 --out-dir " + data_dir +
                    " synth --kind cointegrated-basket --n 4 --len 300") == 0);
    const std::string cfg = testutil::write_file(
        "cli", "bt.json",
        "{\"data\": {\"path\": \"" + data_dir + "/synthetic.csv\"},"
        " \"backtest\": {\"k\": 3, \"t_tr\": 20, \"betas_pa\": [0.001],"
        " \"betas_pc\": [0.001]}}");
    const std::string out_a = scratch("bt_a");
    const std::string out_b = scratch("bt_b");
    REQUIRE(run_cli("--config " + cfg + " --out-dir " + out_a + " backtest") == 0);
    REQUIRE(run_cli("--config " + cfg + " --out-dir " + out_b + " backtest") == 0);

    for (const char* f :
         {"equity.csv", "weights.csv", "supports.csv", "diagnostics.csv", "plotdata.csv"}) {
        const std::string body = testutil::read_file(out_a + "/" + std::string(f));
        CHECK(!body.empty());
        CHECK(body == testutil::read_file(out_b + "/" + std::string(f)));
    }
    // Three averaged strategy curves in the plot data.
    mrp::csv::Table plot = mrp::csv::read_table(out_a + "/plotdata.csv");
    CHECK(plot.header.size() == 4);  // date + jy + ou + mixed

    // T_tr longer than the panel fails validation before any compute.
    const std::string bad = testutil::write_file(
        "cli", "bt_bad.json",
        "{\"data\": {\"path\": \"" + data_dir + "/synthetic.csv\"},"
        " \"backtest\": {\"k\": 3, \"t_tr\": 5000}}");
    CHECK(run_cli("--config " + bad + " --out-dir " + scratch("bt_bad") + " backtest") == 2);
}

TEST_CASE("cli: ingest resamples through the configured stride") {
    const std::string data_dir = scratch("ingest_data");
    REQUIRE(run_cli("--seed 2 --out-dir " + data_dir + " synth --kind ou --n 2 --len 100") == 0);
    const std::string cfg = testutil::write_file(
        "cli", "ingest.json",
        "{\"data\": {\"path\": \"" + data_dir + "/synthetic.csv\"}, \"stride\": 5}");
    const std::string out = scratch("ingest_out");
    REQUIRE(run_cli("--config " + cfg + " --out-dir " + out + " ingest") == 0);
    mrp::PricePanel p = mrp::load_panel(out + "/panel.csv");
    CHECK(p.size() == 20);
    CHECK(p.n_assets() == 2);
}

TEST_CASE("cli: oracle-gap audit emits the gap distribution") {
    const std::string out = scratch("gap_out");
    REQUIRE(run_cli("--seed 5 --out-dir " + out + " oracle-gap --instances 20 --k 4") == 0);
    mrp::csv::Table t = mrp::csv::read_table(out + "/gap_report.csv");
    REQUIRE(t.rows.size() == 20);
    const int gc = t.column("gap");
    REQUIRE(gc >= 0);
    for (const auto& row : t.rows) CHECK(std::stod(row[gc]) >= -1e-9);
    CHECK(run_cli("--out-dir " + out + " oracle-gap --k 9") == 2);
}
