#include "knnorder/quadrature.hpp"

#include <stdexcept>

namespace knnorder {

QuadratureGrid make_simpson_grid(const Region& region, int n_nodes) {
  if (region.dim() != 1) throw std::invalid_argument("make_simpson_grid: region must be 1-d");
  if (n_nodes < 3 || n_nodes % 2 == 0)
    throw std::invalid_argument("make_simpson_grid: n_nodes must be odd and >= 3");

  const double a = region.lower[0], b = region.upper[0];
  const int n_intervals = n_nodes - 1;
  const double h = (b - a) / n_intervals;

  QuadratureGrid grid;
  grid.dim = 1;
  grid.nodes.resize(n_nodes);
  grid.weights.resize(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    grid.nodes[i] = a + h * i;
    double c = (i == 0 || i == n_nodes - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    grid.weights[i] = c * h / 3.0;
  }
  return grid;
}

QuadratureGrid make_midpoint_grid(const Region& region, int nodes_per_axis) {
  if (nodes_per_axis < 1)
    throw std::invalid_argument("make_midpoint_grid: nodes_per_axis must be >= 1");
  const int d = region.dim();

  std::size_t total = 1;
  for (int j = 0; j < d; ++j) total *= static_cast<std::size_t>(nodes_per_axis);

  double cell_volume = 1.0;
  std::vector<double> step(d);
  for (int j = 0; j < d; ++j) {
    step[j] = (region.upper[j] - region.lower[j]) / nodes_per_axis;
    cell_volume *= step[j];
  }

  QuadratureGrid grid;
  grid.dim = d;
  grid.nodes.resize(total * d);
  grid.weights.assign(total, cell_volume);

  std::vector<int> idx(d, 0);
  for (std::size_t i = 0; i < total; ++i) {
    for (int j = 0; j < d; ++j)
      grid.nodes[i * d + j] = region.lower[j] + step[j] * (idx[j] + 0.5);
    for (int j = d - 1; j >= 0; --j) {
      if (++idx[j] < nodes_per_axis) break;
      idx[j] = 0;
    }
  }
  return grid;
}

QuadratureGrid make_grid(const Region& region, int resolution) {
  switch (region.dim()) {
    case 1:
      return make_simpson_grid(region, resolution % 2 == 0 ? resolution + 1 : resolution);
    case 2:
      return make_midpoint_grid(region, resolution);
    default:
      throw std::invalid_argument(
          "make_grid: grid quadrature supports d <= 2; use Monte Carlo test points above");
  }
}

}  // namespace knnorder
