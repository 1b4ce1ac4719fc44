#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "knnorder/sampling.hpp"
#include "knnorder/types.hpp"

namespace knnorder {

enum class IndexKind : std::uint8_t { BruteForce, KdTree };

/// Exact k-nearest-neighbor index over a fixed point set (multiset semantics,
/// duplicates retrievable). Both backends order results by
/// (squared distance, original insertion index) ascending, so they agree
/// exactly even under distance ties.
class NeighborIndex {
 public:
  /// points: n x dim row-major, n >= 1.
  NeighborIndex(std::span<const double> points, int dim, IndexKind kind);

  static NeighborIndex build(const PointCloud& cloud, IndexKind kind) {
    return NeighborIndex(cloud.coords, cloud.dim, kind);
  }
  static NeighborIndex build(const TrainingSet& ts, IndexKind kind) {
    return NeighborIndex(ts.points, ts.dim, kind);
  }

  std::size_t size() const { return n_; }
  int dim() const { return dim_; }
  IndexKind kind() const { return kind_; }

  /// Indices of the k nearest points to z, ordered by (distance, index).
  /// Throws std::out_of_range unless 1 <= k <= size().
  std::vector<int> k_nearest(std::span<const double> z, int k) const;

  /// Allocation-free variant; out is cleared and filled with k indices.
  void k_nearest(std::span<const double> z, int k, std::vector<int>& out) const;

 private:
  struct KdNode {
    int split_dim = -1;   // -1 marks a leaf
    double split_val = 0;
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range into order_
  };

  void build_kd(int begin, int end, int node);
  void query_kd(int node, std::span<const double> z,
                std::vector<std::pair<double, int>>& heap, std::size_t k) const;

  std::span<const double> stored_point(int original_index) const {
    return {points_.data() + static_cast<std::size_t>(original_index) * dim_,
            static_cast<std::size_t>(dim_)};
  }

  int dim_ = 0;
  std::size_t n_ = 0;
  IndexKind kind_ = IndexKind::BruteForce;
  std::vector<double> points_;  // original order, row-major
  std::vector<int> order_;      // kd leaf permutation (original indices)
  std::vector<KdNode> nodes_;
};

/// The k-NN rule: X iff at least k/2 of the k nearest training points carry
/// the X label (an exact half split goes to X).
Label classify_knn(const TrainingSet& training, const NeighborIndex& index,
                   std::span<const double> z, int k);

}  // namespace knnorder
