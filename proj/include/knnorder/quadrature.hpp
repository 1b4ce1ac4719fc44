#pragma once

#include <vector>

#include "knnorder/types.hpp"

namespace knnorder {

/// Nodes and weights for integrating over a Region. For the grid rules below
/// the weights sum to the region volume.
struct QuadratureGrid {
  int dim = 0;
  std::vector<double> nodes;    // m x dim, row-major
  std::vector<double> weights;  // m

  std::size_t size() const { return weights.size(); }
  std::span<const double> node(std::size_t i) const {
    return {nodes.data() + i * dim, static_cast<std::size_t>(dim)};
  }
};

/// Composite Simpson rule on a 1-d region; n_nodes must be odd and >= 3.
QuadratureGrid make_simpson_grid(const Region& region, int n_nodes);

/// Tensor-product midpoint rule with nodes_per_axis cells along each axis.
QuadratureGrid make_midpoint_grid(const Region& region, int nodes_per_axis);

/// Default rule per dimension: Simpson for d = 1, tensor midpoint for d = 2.
/// resolution is the per-axis node count.
QuadratureGrid make_grid(const Region& region, int resolution);

}  // namespace knnorder
