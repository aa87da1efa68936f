#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>

#include <Eigen/Dense>

#include "gridmtd/grid_model.hpp"

namespace gridmtd {

/// i.i.d. Gaussian measurement noise, covariance sigma^2 I. The estimator
/// weights are the reciprocal variances.
class NoiseModel {
  public:
    explicit NoiseModel(double sigma);

    double sigma() const { return sigma_; }
    double variance() const { return sigma_ * sigma_; }
    double weight() const { return 1.0 / variance(); }

  private:
    double sigma_;
};

struct DetectorConfig {
    double false_alarm = 0.05;
    double tau = 0.0;
};

/// Row count above which the estimator factors the sparse Jacobian
/// instead of a dense copy.
inline constexpr std::size_t kDenseRowLimit = 2000;

/// WLS estimator bound to one Jacobian. Factors W^{1/2} H once by an
/// orthogonal decomposition; estimate() and residual() are then const and
/// safe to call from many threads.
class WlsEstimator {
  public:
    WlsEstimator(const JacobianModel& jac, const NoiseModel& noise, std::size_t dense_row_limit = kDenseRowLimit);
    ~WlsEstimator();
    WlsEstimator(WlsEstimator&&) noexcept;
    WlsEstimator& operator=(WlsEstimator&&) noexcept;

    Eigen::VectorXd estimate(const Eigen::VectorXd& y) const;

    /// ||y - H x_hat||^2
    double residual(const Eigen::VectorXd& y) const;

    /// The gain K with x_hat = K y (dense route only).
    const Eigen::MatrixXd& gain() const;

    bool is_dense() const { return dense_; }
    std::size_t measurement_count() const { return rows_; }
    std::size_t state_count() const { return cols_; }

  private:
    struct SparseSolver;

    bool dense_ = true;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    double sqrt_weight_ = 1.0;
    Eigen::MatrixXd H_;
    Eigen::MatrixXd K_;
    SparseMatrix H_sparse_;
    std::unique_ptr<SparseSolver> sparse_;
};

/// y = H x + z, z ~ N(0, sigma^2 I) drawn from Rng(seed, Stream::noise).
Eigen::VectorXd sample_measurements(const JacobianModel& jac, const Eigen::VectorXd& x, const NoiseModel& noise,
                                    std::uint64_t seed);

Eigen::VectorXd wls_estimate(const JacobianModel& jac, const NoiseModel& noise, const Eigen::VectorXd& y);
double residual(const JacobianModel& jac, const NoiseModel& noise, const Eigen::VectorXd& y);

/// tau = sigma^2 * chi2 quantile at (1 - false_alarm) with m - n degrees of freedom.
DetectorConfig detection_threshold(const NoiseModel& noise, std::size_t m, std::size_t n, double false_alarm);

/// Declares an abnormality only on strict exceedance: r == tau is normal.
inline bool detect(double r, const DetectorConfig& cfg) { return r > cfg.tau; }

}  // namespace gridmtd
