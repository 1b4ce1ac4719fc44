#include "knnorder/population.hpp"

#include <stdexcept>

namespace knnorder {

PopulationPair::PopulationPair(GaussianSpec f, GaussianSpec g, double mu, double nu)
    : f_(std::move(f)), g_(std::move(g)), mu_(mu), nu_(nu) {
  if (f_.dim() != g_.dim())
    throw std::invalid_argument("PopulationPair: densities have different dimensions");
  if (!(mu_ > 0.0) || !(nu_ > 0.0))
    throw std::invalid_argument("PopulationPair: intensities must be positive");
}

double PopulationPair::posterior_psi(std::span<const double> z) const {
  const double uf = mu_ * f_.value(z);
  const double vg = nu_ * g_.value(z);
  return uf / (uf + vg);
}

PopulationPair::RhoEval PopulationPair::limit_rho(std::span<const double> z) const {
  const double p = prior_p();
  const auto fe = f_.eval(z);
  const auto ge = g_.eval(z);

  // rho = u / s with u = p*f, s = p*f + (1-p)*g; quotient rule throughout.
  const double u = p * fe.value;
  const double s = u + (1.0 - p) * ge.value;
  const Eigen::VectorXd du = p * fe.gradient;
  const Eigen::VectorXd ds = du + (1.0 - p) * ge.gradient;

  RhoEval out;
  out.value = u / s;
  out.gradient = du / s - (u / (s * s)) * ds;

  const int d = dim();
  out.second_diag.resize(d);
  for (int j = 0; j < d; ++j) {
    const double ujj = p * fe.hessian(j, j);
    const double sjj = ujj + (1.0 - p) * ge.hessian(j, j);
    out.second_diag[j] = ujj / s - 2.0 * du[j] * ds[j] / (s * s) -
                         u * sjj / (s * s) + 2.0 * u * ds[j] * ds[j] / (s * s * s);
  }
  return out;
}

PopulationPair::LambdaEval PopulationPair::weighted_lambda(std::span<const double> z) const {
  const double p = prior_p();
  const double w = p / (1.0 - p);
  const auto fe = f_.eval(z);
  const auto ge = g_.eval(z);
  LambdaEval out;
  out.value = w * fe.value + ge.value;
  out.gradient = w * fe.gradient + ge.gradient;
  return out;
}

double PopulationPair::mixture_density(std::span<const double> z) const {
  return (mu_ * f_.value(z) + nu_ * g_.value(z)) / (mu_ + nu_);
}

}  // namespace knnorder
