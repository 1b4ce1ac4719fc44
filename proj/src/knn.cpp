#include "knnorder/knn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace knnorder {

namespace {

constexpr int kLeafSize = 16;

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    s += diff * diff;
  }
  return s;
}

}  // namespace

NeighborIndex::NeighborIndex(std::span<const double> points, int dim, IndexKind kind)
    : dim_(dim), kind_(kind), points_(points.begin(), points.end()) {
  if (dim < 1) throw std::invalid_argument("NeighborIndex: dim must be >= 1");
  if (points.empty()) throw std::invalid_argument("NeighborIndex: empty point set");
  if (points.size() % static_cast<std::size_t>(dim) != 0)
    throw std::invalid_argument("NeighborIndex: point data not a multiple of dim");
  n_ = points.size() / dim;

  if (kind_ == IndexKind::KdTree) {
    order_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) order_[i] = static_cast<int>(i);
    nodes_.reserve(2 * n_ / kLeafSize + 2);
    nodes_.emplace_back();
    build_kd(0, static_cast<int>(n_), 0);
  }
}

void NeighborIndex::build_kd(int begin, int end, int node) {
  if (end - begin <= kLeafSize) {
    nodes_[node].begin = begin;
    nodes_[node].end = end;
    return;
  }

  // Split on the coordinate with the widest spread in this subset.
  int split_dim = 0;
  double best_spread = -1.0;
  for (int jd = 0; jd < dim_; ++jd) {
    double lo = stored_point(order_[begin])[jd], hi = lo;
    for (int i = begin + 1; i < end; ++i) {
      const double v = stored_point(order_[i])[jd];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      split_dim = jd;
    }
  }

  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double va = stored_point(a)[split_dim];
                     const double vb = stored_point(b)[split_dim];
                     return va < vb || (va == vb && a < b);
                   });

  nodes_[node].split_dim = split_dim;
  nodes_[node].split_val = stored_point(order_[mid])[split_dim];

  const int left = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  nodes_.emplace_back();
  nodes_[node].left = left;
  nodes_[node].right = left + 1;
  build_kd(begin, mid, left);
  build_kd(mid, end, left + 1);
}

void NeighborIndex::query_kd(int node, std::span<const double> z,
                             std::vector<std::pair<double, int>>& heap,
                             std::size_t k) const {
  const KdNode& nd = nodes_[node];
  if (nd.split_dim < 0) {
    for (int i = nd.begin; i < nd.end; ++i) {
      const int idx = order_[i];
      const std::pair<double, int> cand{squared_distance(z, stored_point(idx)), idx};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }

  const double diff = z[nd.split_dim] - nd.split_val;
  const int near = diff < 0.0 ? nd.left : nd.right;
  const int far = diff < 0.0 ? nd.right : nd.left;
  query_kd(near, z, heap, k);
  // Visit the far side unless every point there is strictly worse than the
  // current k-th best; on exact plane-distance ties a smaller original index
  // could still win, so only a strict inequality prunes.
  if (heap.size() < k || diff * diff <= heap.front().first)
    query_kd(far, z, heap, k);
}

std::vector<int> NeighborIndex::k_nearest(std::span<const double> z, int k) const {
  std::vector<int> out;
  k_nearest(z, k, out);
  return out;
}

void NeighborIndex::k_nearest(std::span<const double> z, int k, std::vector<int>& out) const {
  if (static_cast<int>(z.size()) != dim_)
    throw std::invalid_argument("k_nearest: query dimension mismatch");
  if (k < 1 || static_cast<std::size_t>(k) > n_)
    throw std::out_of_range("k_nearest: k must be in [1, size()]");
  out.clear();

  if (kind_ == IndexKind::BruteForce) {
    std::vector<std::pair<double, int>> all(n_);
    for (std::size_t i = 0; i < n_; ++i)
      all[i] = {squared_distance(z, stored_point(static_cast<int>(i))), static_cast<int>(i)};
    std::partial_sort(all.begin(), all.begin() + k, all.end());
    out.reserve(k);
    for (int i = 0; i < k; ++i) out.push_back(all[i].second);
    return;
  }

  std::vector<std::pair<double, int>> heap;
  heap.reserve(k);
  query_kd(0, z, heap, static_cast<std::size_t>(k));
  std::sort_heap(heap.begin(), heap.end());
  out.reserve(k);
  for (const auto& [d2, idx] : heap) out.push_back(idx);
}

Label classify_knn(const TrainingSet& training, const NeighborIndex& index,
                   std::span<const double> z, int k) {
  if (training.size() == 0) throw std::invalid_argument("classify_knn: empty training set");
  if (training.size() != index.size())
    throw std::invalid_argument("classify_knn: index does not match training set");
  if (k < 1 || static_cast<std::size_t>(k) > training.size())
    throw std::out_of_range("classify_knn: k must be in [1, |training|]");

  std::vector<int> nn = index.k_nearest(z, k);
  int x_count = 0;
  for (int idx : nn)
    if (training.labels[static_cast<std::size_t>(idx)] == Label::X) ++x_count;
  return 2 * x_count >= k ? Label::X : Label::Y;
}

}  // namespace knnorder
