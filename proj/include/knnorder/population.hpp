#pragma once

#include <Eigen/Dense>
#include <span>

#include "knnorder/gaussian.hpp"

namespace knnorder {

/// The two class-conditional densities together with their sampling
/// intensities. Everything downstream (sampling, risk, boundary geometry)
/// reads the population through this type.
class PopulationPair {
 public:
  PopulationPair(GaussianSpec f, GaussianSpec g, double mu, double nu);

  int dim() const { return f_.dim(); }
  const GaussianSpec& f() const { return f_; }
  const GaussianSpec& g() const { return g_; }
  double mu() const { return mu_; }
  double nu() const { return nu_; }

  /// Prior probability of the X population, mu / (mu + nu); strictly in (0,1).
  double prior_p() const { return mu_ / (mu_ + nu_); }

  /// Probability that a training point observed at z carries the X mark.
  double posterior_psi(std::span<const double> z) const;

  struct RhoEval {
    double value;
    Eigen::VectorXd gradient;
    Eigen::VectorXd second_diag;  // d^2 rho / dz_j^2, per coordinate
  };

  /// Large-sample limit of the posterior, p*f / (p*f + (1-p)*g), with exact
  /// first derivatives and per-coordinate second derivatives.
  RhoEval limit_rho(std::span<const double> z) const;

  struct LambdaEval {
    double value;
    Eigen::VectorXd gradient;
  };

  /// The prior-weighted density p/(1-p) * f + g.
  LambdaEval weighted_lambda(std::span<const double> z) const;

  /// The sampling density of training points, (mu*f + nu*g) / (mu + nu).
  double mixture_density(std::span<const double> z) const;

 private:
  GaussianSpec f_;
  GaussianSpec g_;
  double mu_;
  double nu_;
};

}  // namespace knnorder
