#include "knnorder/theory.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace knnorder {

namespace {

constexpr double kRhoTolerance = 1e-6;
constexpr double kGradientFloor = 1e-8;

/// Newton projection of z onto the rho = 1/2 locus along the rho gradient.
bool refine_onto_boundary(const PopulationPair& pair, std::vector<double>& z) {
  for (int it = 0; it < 30; ++it) {
    const auto rho = pair.limit_rho(z);
    const double resid = rho.value - 0.5;
    if (std::abs(resid) < 1e-12) return true;
    const double g2 = rho.gradient.squaredNorm();
    if (g2 < kGradientFloor * kGradientFloor) return false;
    for (int j = 0; j < static_cast<int>(z.size()); ++j)
      z[j] -= resid * rho.gradient[j] / g2;
  }
  return false;
}

void scan_1d(const PopulationPair& pair, const Region& region, int resolution,
             BoundarySet& out) {
  const double lo = region.lower[0], hi = region.upper[0];
  const double step = (hi - lo) / (resolution - 1);
  auto value = [&](double z) {
    const double zv[] = {z};
    return pair.limit_rho(zv).value - 0.5;
  };

  double prev = value(lo);
  for (int i = 1; i < resolution; ++i) {
    const double z1 = lo + step * i;
    const double cur = value(z1);
    const double z0 = z1 - step;
    if (prev == 0.0) {
      out.nodes.push_back({{z0}, 1.0, {}});
    } else if (prev * cur < 0.0) {
      double a = z0, b = z1, fa = prev;
      while (b - a > 1e-10) {
        const double mid = 0.5 * (a + b);
        const double fm = value(mid);
        if (fa * fm <= 0.0)
          b = mid;
        else {
          a = mid;
          fa = fm;
        }
      }
      out.nodes.push_back({{0.5 * (a + b)}, 1.0, {}});
    }
    prev = cur;
  }
  if (prev == 0.0) out.nodes.push_back({{hi}, 1.0, {}});
}

void march_2d(const PopulationPair& pair, const Region& region, int resolution,
              BoundarySet& out) {
  const int n = resolution;
  const double sx = (region.upper[0] - region.lower[0]) / (n - 1);
  const double sy = (region.upper[1] - region.lower[1]) / (n - 1);

  std::vector<double> field(static_cast<std::size_t>(n) * n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const double zv[] = {region.lower[0] + sx * ix, region.lower[1] + sy * iy};
      field[static_cast<std::size_t>(iy) * n + ix] = pair.limit_rho(zv).value - 0.5;
    }

  auto edge_cross = [](double x0, double y0, double v0, double x1, double y1, double v1,
                       double* px, double* py) {
    const double t = v0 / (v0 - v1);
    *px = x0 + t * (x1 - x0);
    *py = y0 + t * (y1 - y0);
  };

  auto add_segment = [&](double x0, double y0, double x1, double y1) {
    const double len = std::hypot(x1 - x0, y1 - y0);
    if (len == 0.0) return;
    std::vector<double> mid{0.5 * (x0 + x1), 0.5 * (y0 + y1)};
    if (!refine_onto_boundary(pair, mid)) return;
    out.nodes.push_back({std::move(mid), len, {}});
  };

  for (int iy = 0; iy + 1 < n; ++iy)
    for (int ix = 0; ix + 1 < n; ++ix) {
      const double x0 = region.lower[0] + sx * ix, x1 = x0 + sx;
      const double y0 = region.lower[1] + sy * iy, y1 = y0 + sy;
      const double v00 = field[static_cast<std::size_t>(iy) * n + ix];        // (x0, y0)
      const double v10 = field[static_cast<std::size_t>(iy) * n + ix + 1];    // (x1, y0)
      const double v01 = field[(static_cast<std::size_t>(iy) + 1) * n + ix];  // (x0, y1)
      const double v11 = field[(static_cast<std::size_t>(iy) + 1) * n + ix + 1];

      const bool p00 = v00 >= 0.0, p10 = v10 >= 0.0, p01 = v01 >= 0.0, p11 = v11 >= 0.0;
      if (p00 == p10 && p00 == p01 && p00 == p11) continue;

      double bx = 0, by = 0, tx = 0, ty = 0, lx = 0, ly = 0, rx = 0, ry = 0;
      const bool bottom = p00 != p10;
      const bool top = p01 != p11;
      const bool left = p00 != p01;
      const bool right = p10 != p11;
      if (bottom) edge_cross(x0, y0, v00, x1, y0, v10, &bx, &by);
      if (top) edge_cross(x0, y1, v01, x1, y1, v11, &tx, &ty);
      if (left) edge_cross(x0, y0, v00, x0, y1, v01, &lx, &ly);
      if (right) edge_cross(x1, y0, v10, x1, y1, v11, &rx, &ry);

      if (bottom && top && left && right) {
        // Diagonal saddle: the sign at the cell center decides which corner
        // pairs the contour separates.
        const double czv[] = {0.5 * (x0 + x1), 0.5 * (y0 + y1)};
        const bool center_pos = pair.limit_rho(czv).value >= 0.5;
        if (center_pos == p00) {
          add_segment(bx, by, rx, ry);  // isolate the (x1, y0) corner
          add_segment(tx, ty, lx, ly);  // isolate the (x0, y1) corner
        } else {
          add_segment(bx, by, lx, ly);
          add_segment(tx, ty, rx, ry);
        }
        continue;
      }

      // Exactly two edges cross otherwise; join them.
      double ex[2], ey[2];
      int found = 0;
      if (bottom) { ex[found] = bx; ey[found++] = by; }
      if (top) { ex[found] = tx; ey[found++] = ty; }
      if (left && found < 2) { ex[found] = lx; ey[found++] = ly; }
      if (right && found < 2) { ex[found] = rx; ey[found++] = ry; }
      if (found == 2) add_segment(ex[0], ey[0], ex[1], ey[1]);
    }
}

}  // namespace

double unit_ball_content(int d) {
  if (d < 1) throw std::invalid_argument("unit_ball_content: d must be >= 1");
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(1.0 + 0.5 * d);
}

double unit_ball_second_moment(int d) {
  return unit_ball_content(d) * d / (d + 2.0);
}

LocalGeometry local_geometry(const PopulationPair& pair, std::span<const double> z0) {
  const auto rho = pair.limit_rho(z0);
  if (std::abs(rho.value - 0.5) > kRhoTolerance)
    throw std::invalid_argument("local_geometry: point is not on the decision boundary");

  const double grad_norm = rho.gradient.norm();
  if (grad_norm < kGradientFloor)
    throw std::runtime_error("local_geometry: tangential crossing, rho gradient vanishes");

  const int d = pair.dim();
  const double p = pair.prior_p();
  const auto fe = pair.f().eval(z0);
  const auto ge = pair.g().eval(z0);
  const auto lam = pair.weighted_lambda(z0);

  LocalGeometry geom;
  geom.h = p * fe.value;
  geom.rho_dot = rho.gradient;

  const Eigen::VectorXd weighted_slope = p * fe.gradient - (1.0 - p) * ge.gradient;
  geom.psi1 = weighted_slope.dot(rho.gradient) / grad_norm;
  geom.a = weighted_slope.norm();

  // Curvature coefficient in the ball-integral form; the second-moment factor
  // times d^{-1} collapses to the printed d/(d+2) prefactor.
  double curvature_sum = 0.0;
  for (int j = 0; j < d; ++j)
    curvature_sum += rho.gradient[j] * lam.gradient[j] + 0.5 * rho.second_diag[j] * lam.value;
  const double a_d = unit_ball_content(d);
  geom.alpha = std::pow(a_d * lam.value, -1.0 - 2.0 / d) / d * curvature_sum *
               unit_ball_second_moment(d);
  return geom;
}

BoundarySet find_boundary(const PopulationPair& pair, const Region& region, int resolution) {
  const int d = pair.dim();
  if (d != region.dim())
    throw std::invalid_argument("find_boundary: region dimension does not match pair");
  if (d > 2)
    throw std::invalid_argument("find_boundary: boundary extraction supports d in {1, 2}");
  if (resolution < 3) throw std::invalid_argument("find_boundary: resolution must be >= 3");

  BoundarySet out;
  out.dim = d;
  if (d == 1)
    scan_1d(pair, region, resolution, out);
  else
    march_2d(pair, region, resolution, out);

  if (out.nodes.empty())
    throw std::runtime_error("find_boundary: no decision boundary inside the region");

  for (auto& node : out.nodes) node.geom = local_geometry(pair, node.z);
  return out;
}

ExpansionReport expansion_constants(const BoundarySet& boundary) {
  if (boundary.nodes.empty())
    throw std::invalid_argument("expansion_constants: boundary has no nodes");
  ExpansionReport report;
  report.a_d = unit_ball_content(boundary.dim);
  for (const auto& node : boundary.nodes) {
    const double density = node.geom.h / node.geom.rho_dot.norm();
    report.C1 += 0.5 * node.weight * density;
    report.C2 += 2.0 * node.weight * density * node.geom.alpha * node.geom.alpha;
  }
  report.degenerate = report.C2 < 1e-10 * std::max(report.C1, 1.0);
  return report;
}

double regret_expansion(const ExpansionReport& report, int k, double nu, int d) {
  if (k < 1) throw std::invalid_argument("regret_expansion: k must be >= 1");
  if (!(nu > 0.0)) throw std::invalid_argument("regret_expansion: nu must be > 0");
  return report.C1 / k + report.C2 * std::pow(static_cast<double>(k) / nu, 4.0 / d);
}

int theoretical_kopt(const ExpansionReport& report, double nu, int d) {
  if (!(nu > 0.0)) throw std::invalid_argument("theoretical_kopt: nu must be > 0");
  if (report.degenerate)
    throw std::domain_error(
        "theoretical_kopt: expansion-degenerate (C2 = 0, the curvature term vanishes)");
  const double stationary =
      std::pow(d * report.C1 * std::pow(nu, 4.0 / d) / (4.0 * report.C2),
               static_cast<double>(d) / (d + 4.0));
  return static_cast<int>(std::max<long>(1, std::lround(stationary)));
}

}  // namespace knnorder
