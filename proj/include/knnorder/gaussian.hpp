#pragma once

#include <Eigen/Dense>
#include <span>

namespace knnorder {

/// A d-variate normal density with exact analytic value, gradient and Hessian.
///
/// Construction Cholesky-factorizes the covariance and fails fast on
/// asymmetric or non-SPD input; nothing is regularized.
class GaussianSpec {
 public:
  GaussianSpec(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }

  /// Lower-triangular Cholesky factor L with covariance = L * L^T.
  const Eigen::MatrixXd& cholesky_factor() const { return chol_; }

  bool has_diagonal_covariance() const { return diagonal_; }

  double value(std::span<const double> z) const;

  struct Eval {
    double value;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
  };

  /// Density value with exact first and second derivatives at z.
  Eval eval(std::span<const double> z) const;

 private:
  void check_dim(std::span<const double> z) const;

  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd precision_;  // covariance^{-1}
  Eigen::MatrixXd chol_;
  double norm_const_ = 0.0;  // (2*pi)^{-d/2} det(cov)^{-1/2}
  bool diagonal_ = false;
};

}  // namespace knnorder
