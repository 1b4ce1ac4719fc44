#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "knnorder/knn.hpp"
#include "knnorder/rng.hpp"

using namespace knnorder;

namespace {

// Exhaustive oracle: sort every point by (squared distance, index).
std::vector<int> oracle_k_nearest(std::span<const double> points, int dim,
                                  std::span<const double> z, int k) {
  const std::size_t n = points.size() / dim;
  std::vector<std::pair<double, int>> all(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (int j = 0; j < dim; ++j) {
      const double diff = points[i * dim + j] - z[j];
      s += diff * diff;
    }
    all[i] = {s, static_cast<int>(i)};
  }
  std::sort(all.begin(), all.end());
  std::vector<int> out(k);
  for (int i = 0; i < k; ++i) out[i] = all[i].second;
  return out;
}

TrainingSet make_training(int dim, std::vector<double> pts, std::vector<Label> labels) {
  TrainingSet ts;
  ts.dim = dim;
  ts.points = std::move(pts);
  ts.labels = std::move(labels);
  return ts;
}

}  // namespace

TEST_CASE("index construction edge cases") {
  const double single[] = {0.5, 0.5};
  const NeighborIndex idx(single, 2, IndexKind::KdTree);
  CHECK(idx.size() == 1);
  CHECK(idx.k_nearest(std::vector<double>{0.0, 0.0}, 1) == std::vector<int>{0});

  CHECK_THROWS_AS(NeighborIndex({}, 1, IndexKind::BruteForce), std::invalid_argument);
  const double ragged[] = {0.0, 1.0, 2.0};
  CHECK_THROWS_AS(NeighborIndex(ragged, 2, IndexKind::KdTree), std::invalid_argument);

  // Duplicate points: both copies retrievable.
  const double dups[] = {1.0, 1.0, 3.0};
  const NeighborIndex di(dups, 1, IndexKind::KdTree);
  const auto nn = di.k_nearest(std::vector<double>{1.0}, 2);
  CHECK(nn == std::vector<int>{0, 1});
}

TEST_CASE("k_nearest ordering and tie breaking") {
  const double line[] = {0.0, 1.0, 2.0};
  const NeighborIndex idx(line, 1, IndexKind::BruteForce);
  CHECK(idx.k_nearest(std::vector<double>{0.9}, 2) == std::vector<int>{1, 0});

  // Equidistant pair: the smaller original index wins.
  const double pts[] = {9.0, 8.0, 7.0, -1.0, 6.0, 5.0, 4.0, 1.0};
  for (IndexKind kind : {IndexKind::BruteForce, IndexKind::KdTree}) {
    const NeighborIndex ti(pts, 1, kind);
    CHECK(ti.k_nearest(std::vector<double>{0.0}, 1) == std::vector<int>{3});
  }

  CHECK_THROWS_AS(idx.k_nearest(std::vector<double>{0.0}, 0), std::out_of_range);
  CHECK_THROWS_AS(idx.k_nearest(std::vector<double>{0.0}, 4), std::out_of_range);
}

TEST_CASE("kd-tree matches brute force and the sort oracle exactly") {
  RngStream rng(314, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int dims[] = {1, 2, 16};
    const int d = dims[rng.next_below(3)];
    const std::size_t n = 1 + rng.next_below(400);
    std::vector<double> pts(n * d);
    // Quantized coordinates generate genuine distance ties.
    for (auto& v : pts) v = std::floor(8.0 * rng.next_unit()) / 4.0;
    std::vector<double> z(d);
    for (auto& v : z) v = 2.0 * rng.next_unit();
    const int k = 1 + static_cast<int>(rng.next_below(n));

    const NeighborIndex kd(pts, d, IndexKind::KdTree);
    const NeighborIndex bf(pts, d, IndexKind::BruteForce);
    const auto expect = oracle_k_nearest(pts, d, z, k);
    REQUIRE(kd.k_nearest(z, k) == expect);
    REQUIRE(bf.k_nearest(z, k) == expect);
  }
}

TEST_CASE("classification rule and half-split convention") {
  const auto ts = make_training(1, {0.0, 1.0}, {Label::X, Label::Y});
  const NeighborIndex idx = NeighborIndex::build(ts, IndexKind::BruteForce);
  const std::vector<double> z{0.2};
  CHECK(classify_knn(ts, idx, z, 1) == Label::X);
  CHECK(classify_knn(ts, idx, z, 2) == Label::X);  // exact half split goes to X

  // k = |training| counts everything: majority decides regardless of z.
  const auto maj = make_training(1, {0.0, 1.0, 2.0}, {Label::Y, Label::Y, Label::X});
  const NeighborIndex mi = NeighborIndex::build(maj, IndexKind::KdTree);
  for (double q : {-5.0, 0.1, 7.0}) {
    CHECK(classify_knn(maj, mi, std::vector<double>{q}, 3) == Label::Y);
  }

  CHECK_THROWS_AS(classify_knn(ts, idx, z, 3), std::out_of_range);
}

TEST_CASE("classification is invariant under rigid translation") {
  RngStream rng(2718, 0);
  const int d = 2;
  const std::size_t n = 60;
  std::vector<double> pts(n * d);
  std::vector<Label> labels(n);
  for (auto& v : pts) v = 4.0 * rng.next_unit() - 2.0;
  for (auto& l : labels) l = rng.next_unit() < 0.5 ? Label::X : Label::Y;
  const auto ts = make_training(d, pts, labels);
  const NeighborIndex idx = NeighborIndex::build(ts, IndexKind::KdTree);

  const double shift[] = {13.5, -7.25};
  std::vector<double> shifted(pts);
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) shifted[i * d + j] += shift[j];
  const auto ts2 = make_training(d, shifted, labels);
  const NeighborIndex idx2 = NeighborIndex::build(ts2, IndexKind::KdTree);

  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> z{4.0 * rng.next_unit() - 2.0, 4.0 * rng.next_unit() - 2.0};
    std::vector<double> z2{z[0] + shift[0], z[1] + shift[1]};
    const int k = 1 + static_cast<int>(rng.next_below(n));
    CHECK(classify_knn(ts, idx, z, k) == classify_knn(ts2, idx2, z2, k));
  }
}

TEST_CASE("1-nn classifies each distinct training point to its own label") {
  RngStream rng(1618, 4);
  const std::size_t n = 50;
  std::vector<double> pts;
  std::vector<Label> labels;
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back(static_cast<double>(i) + 0.3 * rng.next_unit());
    labels.push_back(rng.next_unit() < 0.5 ? Label::X : Label::Y);
  }
  const auto ts = make_training(1, pts, labels);
  const NeighborIndex idx = NeighborIndex::build(ts, IndexKind::KdTree);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(classify_knn(ts, idx, ts.point(i), 1) == ts.labels[i]);
}

TEST_CASE("all k agree with a direct-count oracle on small fixtures") {
  RngStream rng(5050, 1);
  for (int fixture = 0; fixture < 50; ++fixture) {
    const std::size_t n = 2 + rng.next_below(7);  // sizes up to 8
    std::vector<double> pts(n);
    std::vector<Label> labels(n);
    for (auto& v : pts) v = std::floor(10.0 * rng.next_unit()) / 2.0;
    for (auto& l : labels) l = rng.next_unit() < 0.5 ? Label::X : Label::Y;
    const auto ts = make_training(1, pts, labels);
    const NeighborIndex idx = NeighborIndex::build(ts, IndexKind::BruteForce);

    const std::vector<double> z{5.0 * rng.next_unit()};
    const auto order = oracle_k_nearest(pts, 1, z, static_cast<int>(n));
    int x_seen = 0;
    for (std::size_t k = 1; k <= n; ++k) {
      if (labels[order[k - 1]] == Label::X) ++x_seen;
      const Label expect = 2 * x_seen >= static_cast<int>(k) ? Label::X : Label::Y;
      REQUIRE(classify_knn(ts, idx, z, static_cast<int>(k)) == expect);
    }
  }
}
