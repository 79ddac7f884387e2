#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace mrp {

// Time-aligned OHLCV panel. Rows are timestamps (strictly increasing ISO
// dates), columns are assets. Immutable after construction; safe to share
// across parallel readers.
struct PricePanel {
    std::vector<std::string> assets;
    std::vector<std::string> timestamps;
    Eigen::MatrixXd open, high, low, close;
    Eigen::MatrixXd volume;  // empty when the source had no volume column

    Eigen::Index size() const { return close.rows(); }
    Eigen::Index n_assets() const { return close.cols(); }

    Eigen::VectorXd log_close_at(Eigen::Index t) const {
        return close.row(t).array().log().matrix().transpose();
    }

    // Checks positivity, OHLC ordering and timestamp monotonicity.
    // Throws DataError naming the first offending cell.
    void validate() const;
};

enum class CsvShape { Long, Wide };

// Column names are declared, never inferred. For the wide shape, per-asset
// groups are named "<asset><sep><field>" with field one of
// open/high/low/close/volume.
struct CsvLayout {
    CsvShape shape = CsvShape::Long;
    std::string date_col = "date";
    std::string asset_col = "asset";
    std::string open_col = "open";
    std::string high_col = "high";
    std::string low_col = "low";
    std::string close_col = "close";
    std::string volume_col = "volume";  // optional; empty string disables
    std::string wide_sep = "_";
};

// Loads and aligns a panel to the intersection of the assets' histories.
// Rows violating the OHLC ordering are rejected with their file row index;
// duplicate (date, asset) keys are an error.
PricePanel load_panel(const std::string& path, const CsvLayout& layout = {});

// Writes the long-shape schema: date,asset,open,high,low,close[,volume].
void save_panel(const PricePanel& panel, const std::string& path);

// Keeps one observation per block of `stride` timestamps: open = block-first
// open, close = block-last close, high = block max, low = block min,
// volume = block sum. A trailing partial block is dropped.
PricePanel resample(const PricePanel& panel, int stride);

struct FeatureVector {
    double one = 1.0;
    double as_d = 0, as_w = 0, as_m = 0;   // averaged log price per horizon
    double r_d = 0, r_w = 0, r_m = 0;      // log-close returns per horizon
    double r_low = 0, ch = 0, cohl = 0;    // intraday features
    double r_d_plus = 0, r_d_minus = 0;
    double r_w_plus = 0, r_w_minus = 0;
    double r_m_plus = 0, r_m_minus = 0;

    static constexpr int kDim = 16;
    Eigen::VectorXd to_vector() const;
};

struct FeatureConfig {
    int horizon_d = 1;
    int horizon_w = 5;
    int horizon_m = 21;
    double ew_coeff = 0.98;        // weighting of the averaged prices
    bool exponential_avg = true;   // false selects a simple mean
};

// Endogenous regressor vector for one asset at time t. Uses only data at
// indices <= t. Requires t >= horizon_m. Degenerate bars (high == low) give
// ch = -0.5 and cohl = 0.
FeatureVector features(const PricePanel& panel, Eigen::Index asset, Eigen::Index t,
                       const FeatureConfig& cfg = {});

}  // namespace mrp
