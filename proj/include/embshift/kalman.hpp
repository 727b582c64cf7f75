#pragma once

#include <Eigen/Dense>
#include <vector>

namespace embshift {

// Linear-Gaussian state-space model:
//   x_{t+1} = A x_t + b + N(0, Q)
//   z_t     = C x_t + d + N(0, R)
struct KalmanModel {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::MatrixXd Q;
    Eigen::MatrixXd C;
    Eigen::VectorXd d;
    Eigen::MatrixXd R;
    Eigen::VectorXd initial_mean;
    Eigen::MatrixXd initial_cov;

    // Scalar-observation constant-velocity model: state (position, velocity),
    // A = [[1,1],[0,1]], C = [1,0].
    static KalmanModel constant_velocity(double q, double r,
                                         double position0 = 0.0,
                                         double velocity0 = 0.0,
                                         double prior_var = 1.0);

    // Throws ConfigError on inconsistent shapes or non-PSD covariances.
    void validate() const;
};

struct FilterResult {
    std::vector<Eigen::VectorXd> means;           // P(x_t | z_{0..t})
    std::vector<Eigen::MatrixXd> covs;
    std::vector<Eigen::VectorXd> predicted_means; // P(x_t | z_{0..t-1})
    std::vector<Eigen::MatrixXd> predicted_covs;
    double log_likelihood = 0.0;
};

struct SmoothResult {
    std::vector<Eigen::VectorXd> means;           // P(x_t | z_{0..T-1})
    std::vector<Eigen::MatrixXd> covs;
    std::vector<Eigen::MatrixXd> lag_one_covs;    // Cov(x_t, x_{t-1} | z), t >= 1
    double log_likelihood = 0.0;
};

// Forward recursion. Throws NumericalError naming the step if an innovation
// covariance stops being positive definite.
FilterResult kalman_filter(const std::vector<Eigen::VectorXd> &observations,
                           const KalmanModel &model);

// RTS backward pass, including the lag-one covariance recursion the EM
// M-step needs.
SmoothResult kalman_smooth(const std::vector<Eigen::VectorXd> &observations,
                           const KalmanModel &model);

// EM over Q, R, initial mean and covariance; A, C, b, d stay fixed. The
// log-likelihood trace is appended to *loglik_trace when given. Throws
// NumericalError if the likelihood decreases by more than 1e-9.
KalmanModel fit_em(const std::vector<Eigen::VectorXd> &observations,
                   const KalmanModel &initial, int max_iters, double tol,
                   std::vector<double> *loglik_trace = nullptr);

}  // namespace embshift
