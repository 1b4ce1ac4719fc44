#include "knnorder/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace knnorder {

GaussianSpec::GaussianSpec(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : mean_(std::move(mean)), cov_(std::move(covariance)) {
  const auto d = mean_.size();
  if (d < 1) throw std::invalid_argument("GaussianSpec: dimension must be >= 1");
  if (cov_.rows() != d || cov_.cols() != d)
    throw std::invalid_argument("GaussianSpec: covariance shape does not match mean");
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("GaussianSpec: covariance is not symmetric");

  Eigen::LLT<Eigen::MatrixXd> llt(cov_);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("GaussianSpec: covariance is not positive definite");
  chol_ = llt.matrixL();
  precision_ = llt.solve(Eigen::MatrixXd::Identity(d, d));

  double log_det = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) log_det += 2.0 * std::log(chol_(j, j));
  norm_const_ = std::exp(-0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + log_det));

  diagonal_ = true;
  for (Eigen::Index i = 0; i < d && diagonal_; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      if (i != j && cov_(i, j) != 0.0) {
        diagonal_ = false;
        break;
      }
}

void GaussianSpec::check_dim(std::span<const double> z) const {
  if (static_cast<Eigen::Index>(z.size()) != mean_.size())
    throw std::invalid_argument("GaussianSpec: point dimension mismatch");
}

double GaussianSpec::value(std::span<const double> z) const {
  check_dim(z);
  Eigen::Map<const Eigen::VectorXd> zv(z.data(), z.size());
  const Eigen::VectorXd q = zv - mean_;
  return norm_const_ * std::exp(-0.5 * q.dot(precision_ * q));
}

GaussianSpec::Eval GaussianSpec::eval(std::span<const double> z) const {
  check_dim(z);
  Eigen::Map<const Eigen::VectorXd> zv(z.data(), z.size());
  const Eigen::VectorXd q = zv - mean_;
  const Eigen::VectorXd pq = precision_ * q;
  const double v = norm_const_ * std::exp(-0.5 * q.dot(pq));
  Eval out;
  out.value = v;
  out.gradient = -v * pq;
  out.hessian = v * (pq * pq.transpose() - precision_);
  return out;
}

}  // namespace knnorder
