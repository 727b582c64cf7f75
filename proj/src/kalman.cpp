#include "embshift/kalman.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "embshift/errors.hpp"

namespace embshift {

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd &m) {
    return 0.5 * (m + m.transpose());
}

void check_psd(const Eigen::MatrixXd &m, const char *name) {
    if (m.rows() != m.cols()) throw ConfigError(std::string(name) + " is not square");
    if (!m.isApprox(m.transpose(), 1e-9))
        throw ConfigError(std::string(name) + " is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.eigenvalues().minCoeff() < -1e-9)
        throw ConfigError(std::string(name) + " is not positive semi-definite");
}

}  // namespace

KalmanModel KalmanModel::constant_velocity(double q, double r, double position0,
                                           double velocity0, double prior_var) {
    KalmanModel m;
    m.A.resize(2, 2);
    m.A << 1, 1, 0, 1;
    m.b = Eigen::VectorXd::Zero(2);
    m.Q = q * Eigen::MatrixXd::Identity(2, 2);
    m.C.resize(1, 2);
    m.C << 1, 0;
    m.d = Eigen::VectorXd::Zero(1);
    m.R = r * Eigen::MatrixXd::Identity(1, 1);
    m.initial_mean.resize(2);
    m.initial_mean << position0, velocity0;
    m.initial_cov = prior_var * Eigen::MatrixXd::Identity(2, 2);
    return m;
}

void KalmanModel::validate() const {
    const auto n = A.rows();
    const auto p = C.rows();
    if (A.cols() != n || b.size() != n || Q.rows() != n || Q.cols() != n ||
        C.cols() != n || d.size() != p || R.rows() != p || R.cols() != p ||
        initial_mean.size() != n || initial_cov.rows() != n ||
        initial_cov.cols() != n)
        throw ConfigError("KalmanModel: inconsistent dimensions");
    check_psd(Q, "Q");
    check_psd(R, "R");
    check_psd(initial_cov, "initial_cov");
}

FilterResult kalman_filter(const std::vector<Eigen::VectorXd> &observations,
                           const KalmanModel &model) {
    model.validate();
    if (observations.empty()) throw DataError("kalman_filter: no observations");
    for (const auto &z : observations)
        if (!z.allFinite()) throw DataError("kalman_filter: non-finite observation");

    const std::size_t T = observations.size();
    FilterResult out;
    out.means.reserve(T);
    out.covs.reserve(T);
    out.predicted_means.reserve(T);
    out.predicted_covs.reserve(T);

    Eigen::VectorXd mean_pred = model.initial_mean;
    Eigen::MatrixXd cov_pred = model.initial_cov;
    for (std::size_t t = 0; t < T; ++t) {
        if (t > 0) {
            mean_pred = model.A * out.means[t - 1] + model.b;
            cov_pred = symmetrize(model.A * out.covs[t - 1] * model.A.transpose() +
                                  model.Q);
        }
        out.predicted_means.push_back(mean_pred);
        out.predicted_covs.push_back(cov_pred);

        Eigen::VectorXd innovation =
            observations[t] - model.C * mean_pred - model.d;
        Eigen::MatrixXd S =
            symmetrize(model.C * cov_pred * model.C.transpose() + model.R);
        Eigen::LLT<Eigen::MatrixXd> llt(S);
        if (llt.info() != Eigen::Success)
            throw NumericalError(
                "kalman_filter: innovation covariance not positive definite at "
                "step " +
                std::to_string(t));
        Eigen::MatrixXd gain =
            cov_pred * model.C.transpose() * llt.solve(
                Eigen::MatrixXd::Identity(S.rows(), S.cols()));
        out.means.push_back(mean_pred + gain * innovation);
        Eigen::MatrixXd I = Eigen::MatrixXd::Identity(cov_pred.rows(), cov_pred.cols());
        // Joseph form keeps the covariance PSD under roundoff.
        Eigen::MatrixXd IKC = I - gain * model.C;
        out.covs.push_back(symmetrize(IKC * cov_pred * IKC.transpose() +
                                      gain * model.R * gain.transpose()));

        double log_det = 0;
        for (Eigen::Index i = 0; i < S.rows(); ++i)
            log_det += 2.0 * std::log(llt.matrixL()(i, i));
        out.log_likelihood +=
            -0.5 * (static_cast<double>(S.rows()) * std::log(2.0 * std::numbers::pi) +
                    log_det + innovation.dot(llt.solve(innovation)));
    }
    return out;
}

SmoothResult kalman_smooth(const std::vector<Eigen::VectorXd> &observations,
                           const KalmanModel &model) {
    FilterResult f = kalman_filter(observations, model);
    const std::size_t T = observations.size();

    SmoothResult out;
    out.log_likelihood = f.log_likelihood;
    out.means.resize(T);
    out.covs.resize(T);
    out.lag_one_covs.resize(T);  // index t holds Cov(x_t, x_{t-1} | z), t >= 1
    out.means[T - 1] = f.means[T - 1];
    out.covs[T - 1] = f.covs[T - 1];

    std::vector<Eigen::MatrixXd> smoother_gain(T);
    for (std::size_t t = T - 1; t-- > 0;) {
        Eigen::LDLT<Eigen::MatrixXd> pred(f.predicted_covs[t + 1]);
        Eigen::MatrixXd J =
            pred.solve(model.A * f.covs[t].transpose()).transpose();
        smoother_gain[t] = J;
        out.means[t] = f.means[t] + J * (out.means[t + 1] - f.predicted_means[t + 1]);
        out.covs[t] = symmetrize(
            f.covs[t] +
            J * (out.covs[t + 1] - f.predicted_covs[t + 1]) * J.transpose());
    }

    if (T >= 2) {
        // Shumway-Stoffer lag-one recursion seeded at the last step.
        Eigen::MatrixXd I =
            Eigen::MatrixXd::Identity(model.A.rows(), model.A.cols());
        Eigen::LLT<Eigen::MatrixXd> lltS(
            symmetrize(model.C * f.predicted_covs[T - 1] * model.C.transpose() +
                       model.R));
        Eigen::MatrixXd gain_last =
            f.predicted_covs[T - 1] * model.C.transpose() *
            lltS.solve(Eigen::MatrixXd::Identity(model.R.rows(), model.R.cols()));
        out.lag_one_covs[T - 1] =
            (I - gain_last * model.C) * model.A * f.covs[T - 2];
        for (std::size_t t = T - 1; t-- > 1;) {
            out.lag_one_covs[t] =
                f.covs[t] * smoother_gain[t - 1].transpose() +
                smoother_gain[t] *
                    (out.lag_one_covs[t + 1] - model.A * f.covs[t]) *
                    smoother_gain[t - 1].transpose();
        }
    }
    return out;
}

KalmanModel fit_em(const std::vector<Eigen::VectorXd> &observations,
                   const KalmanModel &initial, int max_iters, double tol,
                   std::vector<double> *loglik_trace) {
    KalmanModel model = initial;
    model.validate();
    if (static_cast<int>(observations.size()) < 2 && max_iters > 0)
        throw DataError("fit_em: need >= 2 observations");

    const std::size_t T = observations.size();
    double prev_llk = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iters; ++iter) {
        SmoothResult s = kalman_smooth(observations, model);
        if (loglik_trace) loglik_trace->push_back(s.log_likelihood);
        if (s.log_likelihood < prev_llk - 1e-9)
            throw NumericalError("fit_em: log-likelihood decreased at iteration " +
                                 std::to_string(iter) + " (" +
                                 std::to_string(prev_llk) + " -> " +
                                 std::to_string(s.log_likelihood) + ")");
        if (iter > 0 &&
            std::abs(s.log_likelihood - prev_llk) <
                tol * (1.0 + std::abs(prev_llk)))
            break;
        prev_llk = s.log_likelihood;

        // M-step with A, C, b, d fixed.
        Eigen::MatrixXd Q_new = Eigen::MatrixXd::Zero(model.Q.rows(), model.Q.cols());
        for (std::size_t t = 1; t < T; ++t) {
            Eigen::VectorXd e = s.means[t] - model.A * s.means[t - 1] - model.b;
            Q_new += e * e.transpose() + s.covs[t] -
                     s.lag_one_covs[t] * model.A.transpose() -
                     model.A * s.lag_one_covs[t].transpose() +
                     model.A * s.covs[t - 1] * model.A.transpose();
        }
        if (T > 1) model.Q = symmetrize(Q_new / static_cast<double>(T - 1));

        Eigen::MatrixXd R_new = Eigen::MatrixXd::Zero(model.R.rows(), model.R.cols());
        for (std::size_t t = 0; t < T; ++t) {
            Eigen::VectorXd r = observations[t] - model.C * s.means[t] - model.d;
            R_new += r * r.transpose() +
                     model.C * s.covs[t] * model.C.transpose();
        }
        model.R = symmetrize(R_new / static_cast<double>(T));

        model.initial_mean = s.means[0];
        model.initial_cov = symmetrize(s.covs[0]);

        // Tiny diagonal floor keeps the next filter pass invertible on
        // degenerate (e.g. constant) series.
        model.Q += 1e-12 * Eigen::MatrixXd::Identity(model.Q.rows(), model.Q.cols());
        model.R += 1e-12 * Eigen::MatrixXd::Identity(model.R.rows(), model.R.cols());
        model.initial_cov +=
            1e-12 * Eigen::MatrixXd::Identity(model.initial_cov.rows(),
                                              model.initial_cov.cols());
    }
    return model;
}

}  // namespace embshift
