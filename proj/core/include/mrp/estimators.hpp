#pragma once

#include <Eigen/Dense>

namespace mrp {

// Streaming exponentially weighted covariance of log-price vectors.
// The first observation seeds the mean; afterwards
//   mean  <- lambda*mean + (1-lambda)*s
//   sigma <- lambda*sigma + (1-lambda)*(s-mean)(s-mean)^T   (updated mean)
// Updates are strictly sequential per stream.
class EwmaCovariance {
public:
    EwmaCovariance(Eigen::Index dim, double lambda);

    void update(const Eigen::VectorXd& s);

    double lambda() const { return lambda_; }
    long count() const { return count_; }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& sigma_tilde() const { return sigma_; }

    // Correlation derived from sigma_tilde; zero where a diagonal vanishes.
    Eigen::MatrixXd correlation() const;

private:
    double lambda_;
    long count_ = 0;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd sigma_;
};

struct VarCoefficients {
    Eigen::MatrixXd a_matrix;
    double ridge = 0;
    Eigen::Index window = 0;
};

// Ridge least-squares VAR(1) fit over a (T x N) log-price window:
//   A = argmin sum_t ||s_t - A s_{t-1}||^2 + ridge * ||A||_F^2
VarCoefficients fit_var1(const Eigen::MatrixXd& window, double ridge);

// Smallest delta such that m + delta*I is PSD, i.e. max(0, -lambda_min(m)).
double nearest_psd_gap(const Eigen::MatrixXd& m);

}  // namespace mrp
