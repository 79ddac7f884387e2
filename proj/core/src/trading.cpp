#include "mrp/trading.hpp"

#include <cmath>

#include "mrp/errors.hpp"

namespace mrp {

// Wichura (1988), algorithm AS 241, PPND16.
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("normal_quantile: p must lie in (0,1)");
    const double q = p - 0.5;
    double r;
    if (std::abs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    r = q < 0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0 ? -val : val;
}

OuParams fit_ou(const Eigen::VectorXd& series, bool continuous_rate) {
    const auto T = series.size();
    if (T < 5) throw DataError("fit_ou: window shorter than 5 points");
    OuParams out;
    out.window = T;
    out.continuous_rate = continuous_rate;

    const auto n = T - 1;
    const Eigen::VectorXd x = series.head(n);
    const Eigen::VectorXd y = series.tail(n);
    const double mx = x.mean();
    const double my = y.mean();
    const double sxx = (x.array() - mx).square().sum();
    if (sxx <= 1e-14 * static_cast<double>(n)) return out;  // constant regressor: no-fit

    const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
    const double rho = sxy / sxx;
    const double c = my - rho * mx;
    if (rho >= 1.0 - 1e-6 || rho <= -1.0 + 1e-6) return out;  // non-mean-reverting window

    out.rho = rho;
    out.mu = c / (1.0 - rho);
    const Eigen::VectorXd resid = y.array() - c - rho * x.array();
    out.sigma = std::sqrt(resid.squaredNorm() / static_cast<double>(n));
    if (continuous_rate) {
        if (rho <= 0) return out;
        out.stat_sd = std::sqrt(out.sigma * out.sigma / (2.0 * -std::log(rho)));
    } else {
        out.stat_sd = std::sqrt(out.sigma * out.sigma / (1.0 - rho * rho));
    }
    out.admissible = out.sigma > 0 && out.stat_sd > 0;
    return out;
}

StrategySignal jy_weight(const OuParams& params, double p) {
    StrategySignal s;
    if (!params.admissible || params.sigma == 0) return s;
    s.weight = (params.mu - p) * params.rho / (params.sigma * params.sigma);
    s.regime = p < params.mu ? Regime::H1 : (p > params.mu ? Regime::H3 : Regime::H2);
    return s;
}

StrategySignal ou_weight(const OuParams& params, double p, double epsilon,
                         const StrategySignal& prior) {
    if (!(epsilon > 0 && epsilon < 1)) throw ConfigError("ou_weight: epsilon must lie in (0,1)");
    StrategySignal s;
    if (!params.admissible) return s;  // flatten on an inadmissible fit
    s.alpha_band = normal_quantile(1.0 - epsilon / 2.0) * params.stat_sd;
    const double lo = params.mu - s.alpha_band;
    const double hi = params.mu + s.alpha_band;
    s.regime = p < lo ? Regime::H1 : (p > hi ? Regime::H3 : Regime::H2);
    // An open position is held while the value stays beyond its entry band
    // edge and flattened otherwise; a position is never reversed without
    // passing through zero.
    if (prior.weight > 0) {
        s.weight = p < lo ? 1.0 : 0.0;
    } else if (prior.weight < 0) {
        s.weight = p > hi ? -1.0 : 0.0;
    } else {
        s.weight = p < lo ? 1.0 : (p > hi ? -1.0 : 0.0);
    }
    return s;
}

StrategySignal mixed_weight(const OuParams& params, double p, double epsilon) {
    if (!(epsilon > 0 && epsilon < 1)) throw ConfigError("mixed_weight: epsilon must lie in (0,1)");
    StrategySignal s;
    if (!params.admissible || params.sigma == 0) return s;
    s.alpha_band = normal_quantile(1.0 - epsilon / 2.0) * params.stat_sd;
    const double lo = params.mu - s.alpha_band;
    const double hi = params.mu + s.alpha_band;
    const double k = params.rho / (params.sigma * params.sigma);
    if (p < lo) {
        s.regime = Regime::H1;
        s.weight = k * (lo - p);
    } else if (p > hi) {
        s.regime = Regime::H3;
        s.weight = k * (hi - p);
    } else {
        s.regime = Regime::H2;
        s.weight = 0.0;
    }
    return s;
}

}  // namespace mrp
