#pragma once

#include <Eigen/Dense>

namespace mrp {

// Standard normal quantile (Wichura's PPND16), accurate to ~1e-15.
double normal_quantile(double p);

// AR(1) fit of a portfolio value series: P_t = c + rho * P_{t-1} + sigma*eps.
// admissible == false means the window carried no usable mean reversion and
// every strategy stays flat.
struct OuParams {
    double mu = 0;
    double rho = 0;
    double sigma = 0;
    double stat_sd = 0;
    Eigen::Index window = 0;
    bool admissible = false;
    bool continuous_rate = false;  // stat_sd = sqrt(sigma^2 / (2*(-ln rho)))
};

OuParams fit_ou(const Eigen::VectorXd& series, bool continuous_rate = false);

enum class Regime { H1, H2, H3 };

struct StrategySignal {
    double weight = 0;
    Regime regime = Regime::H2;
    double alpha_band = 0;
};

// Linear sizing w = (mu - p) * rho / sigma^2.
StrategySignal jy_weight(const OuParams& params, double p);

// Band entry at mu +/- alpha with alpha = q(1 - eps/2) * stat_sd; weight is
// in {-1, 0, +1}. Positions are held until the value re-enters the band,
// then flattened (never reversed directly).
StrategySignal ou_weight(const OuParams& params, double p, double epsilon,
                         const StrategySignal& prior);

// Zero inside the band; outside, the JY-style linear weight measured from
// the nearer band edge. Continuous in p everywhere.
StrategySignal mixed_weight(const OuParams& params, double p, double epsilon);

}  // namespace mrp
