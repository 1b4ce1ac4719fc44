#pragma once

#include <Eigen/Dense>
#include <vector>

#include "knnorder/population.hpp"
#include "knnorder/types.hpp"

namespace knnorder {

/// Content of the unit d-ball, pi^{d/2} / Gamma(1 + d/2).
double unit_ball_content(int d);

/// Integral of ||v||^2 over the unit d-ball (the second-moment factor of the
/// curvature coefficient), a_d * d / (d + 2).
double unit_ball_second_moment(int d);

/// Local geometry of the decision boundary at a point z0 with rho(z0) = 1/2.
struct LocalGeometry {
  double h = 0.0;            // common value of p*f and (1-p)*g on the boundary
  Eigen::VectorXd rho_dot;   // gradient of rho
  double psi1 = 0.0;         // ||rho_dot||^{-1} (p f' - (1-p) g')^T rho_dot
  double a = 0.0;            // || p f' - (1-p) g' ||
  double alpha = 0.0;        // curvature coefficient of the regret expansion
};

/// Requires |rho(z0) - 1/2| <= 1e-6; throws if the crossing is tangential
/// (||rho_dot|| below 1e-8).
LocalGeometry local_geometry(const PopulationPair& pair, std::span<const double> z0);

struct BoundaryNode {
  std::vector<double> z;
  double weight = 0.0;  // quadrature measure in d-1 dimensions
  LocalGeometry geom;
};

struct BoundarySet {
  int dim = 0;
  std::vector<BoundaryNode> nodes;
};

/// Discretized rho = 1/2 locus inside the region. d = 1: bisection roots of a
/// resolution-point sign scan, weight 1 each. d = 2: marching-squares contour
/// on a resolution^2 lattice, nodes at Newton-refined segment midpoints,
/// weights the segment lengths. Throws if the boundary misses the region.
BoundarySet find_boundary(const PopulationPair& pair, const Region& region, int resolution);

struct ExpansionReport {
  double C1 = 0.0;
  double C2 = 0.0;
  double a_d = 0.0;
  bool degenerate = false;  // C2 vanishes; the k_opt formula is undefined
};

/// C1 = 1/2 integral_S h/||rho_dot||, C2 = 2 integral_S (h/||rho_dot||) alpha^2.
ExpansionReport expansion_constants(const BoundarySet& boundary);

/// Leading regret terms C1/k + C2 (k/nu)^{4/d}.
double regret_expansion(const ExpansionReport& report, int k, double nu, int d);

/// Stationary point of the expansion, round((d C1 nu^{4/d} / (4 C2))^{d/(d+4)});
/// throws std::domain_error when the report is degenerate.
int theoretical_kopt(const ExpansionReport& report, double nu, int d);

}  // namespace knnorder
