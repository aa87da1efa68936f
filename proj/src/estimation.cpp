#include "gridmtd/estimation.hpp"

#include <cmath>
#include <string>

#include <Eigen/OrderingMethods>
#include <Eigen/QR>
#include <Eigen/SparseQR>

#include "gridmtd/chi_square.hpp"
#include "gridmtd/rng.hpp"

namespace gridmtd {

NoiseModel::NoiseModel(double sigma) : sigma_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("noise sigma must be positive and finite");
}

struct WlsEstimator::SparseSolver {
    Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr;
};

WlsEstimator::WlsEstimator(const JacobianModel& jac, const NoiseModel& noise, std::size_t dense_row_limit)
    : rows_(static_cast<std::size_t>(jac.H.rows())),
      cols_(static_cast<std::size_t>(jac.H.cols())),
      sqrt_weight_(std::sqrt(noise.weight())) {
    if (rows_ <= cols_) throw ValidationError("estimator needs more measurements than states");
    dense_ = rows_ <= dense_row_limit;

    if (dense_) {
        H_ = jac.dense_H();
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sqrt_weight_ * H_);
        if (static_cast<std::size_t>(qr.rank()) < cols_)
            throw std::runtime_error("Jacobian is rank deficient: rank " + std::to_string(qr.rank()) + " < " +
                                     std::to_string(cols_));
        const Eigen::MatrixXd weighted_identity =
            sqrt_weight_ * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(rows_));
        K_ = qr.solve(weighted_identity);
        return;
    }

    H_sparse_ = jac.H;
    sparse_ = std::make_unique<SparseSolver>();
    Eigen::SparseMatrix<double> weighted = sqrt_weight_ * Eigen::SparseMatrix<double>(jac.H);
    weighted.makeCompressed();
    sparse_->qr.compute(weighted);
    if (sparse_->qr.info() != Eigen::Success) throw std::runtime_error("sparse QR factorization failed");
    if (static_cast<std::size_t>(sparse_->qr.rank()) < cols_)
        throw std::runtime_error("Jacobian is rank deficient: rank " + std::to_string(sparse_->qr.rank()) + " < " +
                                 std::to_string(cols_));
}

WlsEstimator::~WlsEstimator() = default;
WlsEstimator::WlsEstimator(WlsEstimator&&) noexcept = default;
WlsEstimator& WlsEstimator::operator=(WlsEstimator&&) noexcept = default;

Eigen::VectorXd WlsEstimator::estimate(const Eigen::VectorXd& y) const {
    if (static_cast<std::size_t>(y.size()) != rows_)
        throw ValidationError("measurement vector has " + std::to_string(y.size()) + " entries, expected " +
                              std::to_string(rows_));
    if (dense_) return K_ * y;
    const Eigen::VectorXd weighted = sqrt_weight_ * y;
    return sparse_->qr.solve(weighted);
}

double WlsEstimator::residual(const Eigen::VectorXd& y) const {
    const Eigen::VectorXd x_hat = estimate(y);
    if (dense_) return (y - H_ * x_hat).squaredNorm();
    return (y - H_sparse_ * x_hat).squaredNorm();
}

const Eigen::MatrixXd& WlsEstimator::gain() const {
    if (!dense_) throw std::logic_error("gain matrix is only materialized on the dense route");
    return K_;
}

Eigen::VectorXd sample_measurements(const JacobianModel& jac, const Eigen::VectorXd& x, const NoiseModel& noise,
                                    std::uint64_t seed) {
    if (static_cast<std::size_t>(x.size()) != jac.state_count())
        throw ValidationError("state vector has " + std::to_string(x.size()) + " entries, expected " +
                              std::to_string(jac.state_count()));
    Eigen::VectorXd y = jac.H * x;
    Rng rng(seed, Stream::noise);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += noise.sigma() * rng.normal();
    return y;
}

Eigen::VectorXd wls_estimate(const JacobianModel& jac, const NoiseModel& noise, const Eigen::VectorXd& y) {
    return WlsEstimator(jac, noise).estimate(y);
}

double residual(const JacobianModel& jac, const NoiseModel& noise, const Eigen::VectorXd& y) {
    return WlsEstimator(jac, noise).residual(y);
}

DetectorConfig detection_threshold(const NoiseModel& noise, std::size_t m, std::size_t n, double false_alarm) {
    if (m <= n) throw ValidationError("detector needs more measurements than states");
    if (!(false_alarm > 0.0 && false_alarm < 1.0)) throw ValidationError("false alarm rate must lie in (0, 1)");
    return {false_alarm, noise.variance() * chi_square_quantile(1.0 - false_alarm, static_cast<double>(m - n))};
}

}  // namespace gridmtd
