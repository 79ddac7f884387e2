#include "mrp/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "mrp/csv.hpp"
#include "mrp/errors.hpp"

namespace mrp {

namespace {

struct Bar {
    double open, high, low, close, volume;
    bool has_volume;
};

void check_bar(const Bar& b, const std::string& where) {
    if (!(b.open > 0 && b.high > 0 && b.low > 0 && b.close > 0))
        throw DataError("non-positive price at " + where);
    if (b.low > std::min(b.open, b.close) + 1e-12 ||
        b.high < std::max(b.open, b.close) - 1e-12)
        throw DataError("OHLC ordering violated at " + where);
    if (b.has_volume && b.volume < 0)
        throw DataError("negative volume at " + where);
}

double parse_num(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        if (!std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError("cannot parse number '" + s + "' at " + where);
    }
}

}  // namespace

void PricePanel::validate() const {
    const auto T = size();
    const auto N = n_assets();
    for (Eigen::Index t = 1; t < T; ++t)
        if (!(timestamps[t - 1] < timestamps[t]))
            throw DataError("timestamps not strictly increasing at index " + std::to_string(t));
    for (Eigen::Index t = 0; t < T; ++t)
        for (Eigen::Index j = 0; j < N; ++j) {
            Bar b{open(t, j), high(t, j), low(t, j), close(t, j),
                  volume.size() ? volume(t, j) : 0.0, volume.size() > 0};
            check_bar(b, "(" + timestamps[t] + ", " + assets[j] + ")");
        }
}

PricePanel load_panel(const std::string& path, const CsvLayout& layout) {
    csv::Table table = csv::read_table(path);

    // (date, asset) -> bar, with duplicates rejected
    std::map<std::string, std::map<std::string, Bar>> by_asset;  // asset -> date -> bar
    std::set<std::string> all_dates;

    auto insert_bar = [&](const std::string& asset, const std::string& date, const Bar& bar,
                          std::size_t file_row) {
        const std::string where = "row " + std::to_string(file_row) + " (" + date + ", " + asset + ")";
        check_bar(bar, where);
        auto [it, inserted] = by_asset[asset].emplace(date, bar);
        (void)it;
        if (!inserted) throw DataError("duplicate key at " + where);
        all_dates.insert(date);
    };

    if (layout.shape == CsvShape::Long) {
        const int c_date = table.column(layout.date_col);
        const int c_asset = table.column(layout.asset_col);
        const int c_open = table.column(layout.open_col);
        const int c_high = table.column(layout.high_col);
        const int c_low = table.column(layout.low_col);
        const int c_close = table.column(layout.close_col);
        const int c_vol = layout.volume_col.empty() ? -1 : table.column(layout.volume_col);
        if (c_date < 0 || c_asset < 0 || c_open < 0 || c_high < 0 || c_low < 0 || c_close < 0)
            throw DataError("missing declared column in " + path);
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const auto& r = table.rows[i];
            const std::string where = "row " + std::to_string(i + 2);
            Bar b{parse_num(r[c_open], where), parse_num(r[c_high], where),
                  parse_num(r[c_low], where), parse_num(r[c_close], where),
                  c_vol >= 0 ? parse_num(r[c_vol], where) : 0.0, c_vol >= 0};
            insert_bar(r[c_asset], r[c_date], b, i + 2);
        }
    } else {
        const int c_date = table.column(layout.date_col);
        if (c_date < 0) throw DataError("missing date column in " + path);
        // Discover asset groups from "<asset><sep>close" columns.
        std::vector<std::string> assets;
        const std::string close_suffix = layout.wide_sep + layout.close_col;
        for (const auto& h : table.header)
            if (h.size() > close_suffix.size() &&
                h.compare(h.size() - close_suffix.size(), close_suffix.size(), close_suffix) == 0)
                assets.push_back(h.substr(0, h.size() - close_suffix.size()));
        if (assets.empty()) throw DataError("no asset column groups found in " + path);
        for (const auto& a : assets) {
            const int co = table.column(a + layout.wide_sep + layout.open_col);
            const int ch = table.column(a + layout.wide_sep + layout.high_col);
            const int cl = table.column(a + layout.wide_sep + layout.low_col);
            const int cc = table.column(a + layout.wide_sep + layout.close_col);
            const int cv = layout.volume_col.empty()
                               ? -1
                               : table.column(a + layout.wide_sep + layout.volume_col);
            if (co < 0 || ch < 0 || cl < 0 || cc < 0)
                throw DataError("incomplete column group for asset " + a + " in " + path);
            for (std::size_t i = 0; i < table.rows.size(); ++i) {
                const auto& r = table.rows[i];
                const std::string where = "row " + std::to_string(i + 2);
                if (r[cc].empty()) continue;  // asset not yet listed at this date
                Bar b{parse_num(r[co], where), parse_num(r[ch], where), parse_num(r[cl], where),
                      parse_num(r[cc], where), cv >= 0 ? parse_num(r[cv], where) : 0.0, cv >= 0};
                insert_bar(a, r[c_date], b, i + 2);
            }
        }
    }

    if (by_asset.empty()) throw DataError("no observations in " + path);

    // Intersection of the assets' histories.
    std::vector<std::string> dates;
    for (const auto& d : all_dates) {
        bool everywhere = true;
        for (const auto& [asset, bars] : by_asset)
            if (!bars.count(d)) {
                everywhere = false;
                break;
            }
        if (everywhere) dates.push_back(d);
    }
    if (dates.empty()) throw DataError("assets share no common dates in " + path);

    PricePanel p;
    bool has_volume = false;
    for (const auto& [asset, bars] : by_asset) {
        p.assets.push_back(asset);
        has_volume = has_volume || bars.begin()->second.has_volume;
    }
    p.timestamps = dates;
    const auto T = static_cast<Eigen::Index>(dates.size());
    const auto N = static_cast<Eigen::Index>(p.assets.size());
    p.open.resize(T, N);
    p.high.resize(T, N);
    p.low.resize(T, N);
    p.close.resize(T, N);
    if (has_volume) p.volume.resize(T, N);
    for (Eigen::Index j = 0; j < N; ++j) {
        const auto& bars = by_asset[p.assets[j]];
        for (Eigen::Index t = 0; t < T; ++t) {
            const Bar& b = bars.at(dates[t]);
            p.open(t, j) = b.open;
            p.high(t, j) = b.high;
            p.low(t, j) = b.low;
            p.close(t, j) = b.close;
            if (has_volume) p.volume(t, j) = b.volume;
        }
    }
    return p;
}

void save_panel(const PricePanel& panel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    const bool has_volume = panel.volume.size() > 0;
    out << "date,asset,open,high,low,close";
    if (has_volume) out << ",volume";
    out << '\n';
    for (Eigen::Index t = 0; t < panel.size(); ++t)
        for (Eigen::Index j = 0; j < panel.n_assets(); ++j) {
            out << panel.timestamps[t] << ',' << panel.assets[j] << ','
                << csv::format_double(panel.open(t, j)) << ','
                << csv::format_double(panel.high(t, j)) << ','
                << csv::format_double(panel.low(t, j)) << ','
                << csv::format_double(panel.close(t, j));
            if (has_volume) out << ',' << csv::format_double(panel.volume(t, j));
            out << '\n';
        }
}

PricePanel resample(const PricePanel& panel, int stride) {
    if (stride < 1) throw DataError("stride must be >= 1");
    if (stride > panel.size())
        throw DataError("stride " + std::to_string(stride) + " exceeds series length " +
                        std::to_string(panel.size()));
    if (stride == 1) return panel;

    const auto blocks = panel.size() / stride;
    const auto N = panel.n_assets();
    const bool has_volume = panel.volume.size() > 0;
    PricePanel out;
    out.assets = panel.assets;
    out.open.resize(blocks, N);
    out.high.resize(blocks, N);
    out.low.resize(blocks, N);
    out.close.resize(blocks, N);
    if (has_volume) out.volume.resize(blocks, N);
    for (Eigen::Index b = 0; b < blocks; ++b) {
        const Eigen::Index first = b * stride;
        const Eigen::Index last = first + stride - 1;
        out.timestamps.push_back(panel.timestamps[last]);
        for (Eigen::Index j = 0; j < N; ++j) {
            out.open(b, j) = panel.open(first, j);
            out.close(b, j) = panel.close(last, j);
            out.high(b, j) = panel.high.col(j).segment(first, stride).maxCoeff();
            out.low(b, j) = panel.low.col(j).segment(first, stride).minCoeff();
            if (has_volume) out.volume(b, j) = panel.volume.col(j).segment(first, stride).sum();
        }
    }
    return out;
}

Eigen::VectorXd FeatureVector::to_vector() const {
    Eigen::VectorXd v(kDim);
    v << one, as_d, as_w, as_m, r_d, r_w, r_m, r_low, ch, cohl, r_d_plus, r_d_minus, r_w_plus,
        r_w_minus, r_m_plus, r_m_minus;
    return v;
}

namespace {

// Weighted average of log close over the `horizon` points ending at t.
double averaged_log_price(const PricePanel& panel, Eigen::Index asset, Eigen::Index t,
                          int horizon, const FeatureConfig& cfg) {
    double num = 0, den = 0, w = 1;
    for (int i = 0; i < horizon; ++i) {
        num += w * std::log(panel.close(t - i, asset));
        den += w;
        if (cfg.exponential_avg) w *= cfg.ew_coeff;
    }
    return num / den;
}

}  // namespace

FeatureVector features(const PricePanel& panel, Eigen::Index asset, Eigen::Index t,
                       const FeatureConfig& cfg) {
    if (t < cfg.horizon_m)
        throw DataError("t=" + std::to_string(t) + " too early for monthly horizon " +
                        std::to_string(cfg.horizon_m));
    FeatureVector f;
    f.as_d = averaged_log_price(panel, asset, t, cfg.horizon_d, cfg);
    f.as_w = averaged_log_price(panel, asset, t, cfg.horizon_w, cfg);
    f.as_m = averaged_log_price(panel, asset, t, cfg.horizon_m, cfg);
    const double lc = std::log(panel.close(t, asset));
    f.r_d = lc - std::log(panel.close(t - cfg.horizon_d, asset));
    f.r_w = lc - std::log(panel.close(t - cfg.horizon_w, asset));
    f.r_m = lc - std::log(panel.close(t - cfg.horizon_m, asset));
    f.r_low = std::log(panel.low(t, asset)) - std::log(panel.low(t - 1, asset));
    const double range = panel.high(t, asset) - panel.low(t, asset);
    if (range > 0) {
        f.ch = (panel.high(t, asset) - panel.close(t, asset)) / range - 0.5;
        f.cohl = (panel.close(t, asset) - panel.open(t, asset)) / range;
    } else {
        // Flat bar carries no intraday signal.
        f.ch = -0.5;
        f.cohl = 0.0;
    }
    f.r_d_plus = std::max(f.r_d, 0.0);
    f.r_d_minus = std::min(f.r_d, 0.0);
    f.r_w_plus = std::max(f.r_w, 0.0);
    f.r_w_minus = std::min(f.r_w, 0.0);
    f.r_m_plus = std::max(f.r_m, 0.0);
    f.r_m_minus = std::min(f.r_m, 0.0);
    return f;
}

}  // namespace mrp
