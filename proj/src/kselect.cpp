#include "knnorder/kselect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "knnorder/knn.hpp"
#include "knnorder/parallel.hpp"

namespace knnorder {

namespace {

constexpr int kMaxRedraws = 10000;

void check_sizes_input(int M, int N, double r) {
  if (M < 1 || N < 1)
    throw std::invalid_argument("resample sizes: both original samples must be nonempty");
  if (!(r > 0.0) || !(r < 1.0))
    throw std::invalid_argument("resample sizes: r must lie in (0, 1)");
}

bool degenerate(const ResampleSizes& s) {
  return s.m1_star == 0 || s.n1_star == 0 || s.test_size() == 0;
}

int binomial_draw(int n, double p, RngStream& rng) {
  int hits = 0;
  for (int i = 0; i < n; ++i)
    if (rng.next_unit() < p) ++hits;
  return hits;
}

/// With-replacement resample of `count` points from cloud, appended to a
/// pooled training buffer or returned as test points.
void resample_into(const PointCloud& cloud, int count, RngStream& rng,
                   std::vector<double>& coords, std::span<const int> allowed = {}) {
  for (int i = 0; i < count; ++i) {
    const std::size_t pick =
        allowed.empty() ? rng.next_below(cloud.size())
                        : static_cast<std::size_t>(allowed[rng.next_below(allowed.size())]);
    const auto p = cloud.point(pick);
    coords.insert(coords.end(), p.begin(), p.end());
  }
}

}  // namespace

ResampleSizes resample_sizes_poisson(int M, int N, double r, RngStream& rng) {
  check_sizes_input(M, N, r);
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    ResampleSizes s;
    s.m_star = static_cast<int>(rng.next_poisson(static_cast<double>(M)));
    s.n_star = static_cast<int>(rng.next_poisson(static_cast<double>(N)));
    s.m1_star = static_cast<int>(std::floor(r * s.m_star));
    s.n1_star = static_cast<int>(std::floor(r * s.n_star));
    if (!degenerate(s)) return s;
  }
  throw std::runtime_error("resample_sizes_poisson: degenerate sizes after bounded retries");
}

ResampleSizes resample_sizes_binomial(int M, int N, double r, RngStream& rng) {
  check_sizes_input(M, N, r);
  const int total = M + N;
  const double p = static_cast<double>(M) / total;
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    ResampleSizes s;
    s.m_star = binomial_draw(total, p, rng);
    s.n_star = total - s.m_star;
    s.m1_star = static_cast<int>(std::floor(r * s.m_star));
    s.n1_star = static_cast<int>(std::floor(r * s.n_star));
    if (!degenerate(s)) return s;
  }
  throw std::runtime_error("resample_sizes_binomial: degenerate sizes after bounded retries");
}

std::vector<CurvePoint> bootstrap_error_curve(const PointCloud& xs, const PointCloud& ys,
                                              const BootstrapPlan& plan, SampleModel model,
                                              std::uint64_t seed, int workers) {
  if (xs.size() == 0 || ys.size() == 0)
    throw std::invalid_argument("bootstrap_error_curve: both samples must be nonempty");
  if (xs.dim != ys.dim)
    throw std::invalid_argument("bootstrap_error_curve: sample dimensions differ");
  if (plan.B < 1) throw std::invalid_argument("bootstrap_error_curve: B must be >= 1");
  if (!plan.k_grid.empty() && !std::is_sorted(plan.k_grid.begin(), plan.k_grid.end()))
    throw std::invalid_argument("bootstrap_error_curve: k grid must be sorted");

  const int M = static_cast<int>(xs.size());
  const int N = static_cast<int>(ys.size());
  const int d = xs.dim;

  // Sizes first: the default k grid depends on the smallest training resample.
  std::vector<ResampleSizes> sizes(plan.B);
  std::vector<RngStream> streams;
  streams.reserve(plan.B);
  int min_training = 0;
  for (int b = 0; b < plan.B; ++b) {
    RngStream rng = split_stream(seed, static_cast<std::uint64_t>(b));
    sizes[b] = model == SampleModel::Poisson ? resample_sizes_poisson(M, N, plan.r, rng)
                                             : resample_sizes_binomial(M, N, plan.r, rng);
    min_training = b == 0 ? sizes[b].training_size()
                          : std::min(min_training, sizes[b].training_size());
    streams.push_back(rng);
  }

  std::vector<int> k_grid = plan.k_grid;
  if (k_grid.empty()) {
    const int k_max = std::min(512, static_cast<int>(std::ceil(0.8 * min_training)));
    for (int k = 1; k <= std::max(1, k_max); ++k) k_grid.push_back(k);
  }
  const std::size_t n_k = k_grid.size();

  std::vector<std::vector<double>> misclassified(plan.B, std::vector<double>(n_k, 0.0));
  std::vector<double> test_counts(plan.B, 0.0);

  parallel_for(static_cast<std::size_t>(plan.B), workers, [&](std::size_t b) {
    RngStream rng = streams[b];
    const ResampleSizes& s = sizes[b];

    std::vector<double> train_coords;
    train_coords.reserve(static_cast<std::size_t>(s.training_size()) * d);
    std::vector<int> train_x_picks, train_y_picks;
    if (plan.disjoint_test) {
      // Remember the chosen indices so the test pool can exclude them.
      train_x_picks.reserve(s.m1_star);
      for (int i = 0; i < s.m1_star; ++i)
        train_x_picks.push_back(static_cast<int>(rng.next_below(xs.size())));
      train_y_picks.reserve(s.n1_star);
      for (int i = 0; i < s.n1_star; ++i)
        train_y_picks.push_back(static_cast<int>(rng.next_below(ys.size())));
      for (int idx : train_x_picks) {
        const auto p = xs.point(idx);
        train_coords.insert(train_coords.end(), p.begin(), p.end());
      }
      for (int idx : train_y_picks) {
        const auto p = ys.point(idx);
        train_coords.insert(train_coords.end(), p.begin(), p.end());
      }
    } else {
      resample_into(xs, s.m1_star, rng, train_coords);
      resample_into(ys, s.n1_star, rng, train_coords);
    }

    TrainingSet pool;
    pool.dim = d;
    pool.points = std::move(train_coords);
    pool.labels.assign(static_cast<std::size_t>(s.m1_star), Label::X);
    pool.labels.insert(pool.labels.end(), static_cast<std::size_t>(s.n1_star), Label::Y);

    auto out_of_bag = [](std::size_t n, const std::vector<int>& picks) {
      std::vector<char> used(n, 0);
      for (int idx : picks) used[idx] = 1;
      std::vector<int> rest;
      for (std::size_t i = 0; i < n; ++i)
        if (!used[i]) rest.push_back(static_cast<int>(i));
      return rest;
    };

    std::vector<double> test_coords;
    std::vector<Label> test_labels;
    if (plan.disjoint_test) {
      const auto x_rest = out_of_bag(xs.size(), train_x_picks);
      const auto y_rest = out_of_bag(ys.size(), train_y_picks);
      // Fall back to the full sample if a class was fully consumed.
      resample_into(xs, s.m_star - s.m1_star, rng, test_coords,
                    x_rest.empty() ? std::span<const int>{} : std::span<const int>(x_rest));
      resample_into(ys, s.n_star - s.n1_star, rng, test_coords,
                    y_rest.empty() ? std::span<const int>{} : std::span<const int>(y_rest));
    } else {
      resample_into(xs, s.m_star - s.m1_star, rng, test_coords);
      resample_into(ys, s.n_star - s.n1_star, rng, test_coords);
    }
    test_labels.assign(static_cast<std::size_t>(s.m_star - s.m1_star), Label::X);
    test_labels.insert(test_labels.end(), static_cast<std::size_t>(s.n_star - s.n1_star),
                       Label::Y);

    const int pool_size = static_cast<int>(pool.size());
    const int k_cap = std::min(k_grid.back(), pool_size);
    const NeighborIndex index = NeighborIndex::build(pool, IndexKind::KdTree);

    std::vector<int> nn;
    std::vector<int> x_prefix(static_cast<std::size_t>(k_cap) + 1, 0);
    const std::size_t n_test = test_labels.size();
    for (std::size_t i = 0; i < n_test; ++i) {
      const std::span<const double> z{test_coords.data() + i * d,
                                      static_cast<std::size_t>(d)};
      index.k_nearest(z, k_cap, nn);
      for (int j = 0; j < k_cap; ++j)
        x_prefix[j + 1] = x_prefix[j] + (pool.labels[nn[j]] == Label::X ? 1 : 0);
      for (std::size_t t = 0; t < n_k; ++t) {
        const int k_eff = std::min(k_grid[t], pool_size);
        const Label predicted = 2 * x_prefix[k_eff] >= k_eff ? Label::X : Label::Y;
        if (predicted != test_labels[i]) misclassified[b][t] += 1.0;
      }
    }
    test_counts[b] = static_cast<double>(n_test);
  });

  std::vector<CurvePoint> curve(n_k);
  for (std::size_t t = 0; t < n_k; ++t) {
    double acc = 0.0;
    for (int b = 0; b < plan.B; ++b) acc += misclassified[b][t] / test_counts[b];
    curve[t] = {k_grid[t], acc / plan.B};
  }
  return curve;
}

int select_k(std::span<const CurvePoint> curve) {
  if (curve.empty()) throw std::invalid_argument("select_k: empty curve");
  std::size_t best = 0;
  for (std::size_t t = 1; t < curve.size(); ++t)
    if (curve[t].mean_error < curve[best].mean_error ||
        (curve[t].mean_error == curve[best].mean_error && curve[t].k < curve[best].k))
      best = t;
  return curve[best].k;
}

int rescale_k(int k_hat, double r, int d, int T) {
  if (k_hat < 1) throw std::invalid_argument("rescale_k: k_hat must be >= 1");
  if (!(r > 0.0) || r > 1.0) throw std::invalid_argument("rescale_k: r must lie in (0, 1]");
  if (d < 1) throw std::invalid_argument("rescale_k: d must be >= 1");
  if (T < 2) throw std::invalid_argument("rescale_k: T must be >= 2");
  const double exponent = -4.0 / (d + 4.0);
  const double scaled = std::pow(r, exponent) * k_hat;
  const long rounded = std::lround(scaled);
  return static_cast<int>(std::clamp<long>(rounded, 1, T - 1));
}

SelectionResult select_neighbor_order(const PointCloud& xs, const PointCloud& ys,
                                      const BootstrapPlan& plan, SampleModel model,
                                      std::uint64_t seed, int workers) {
  SelectionResult result;
  result.curve = bootstrap_error_curve(xs, ys, plan, model, seed, workers);
  result.k_hat = select_k(result.curve);
  result.k_tilde = rescale_k(result.k_hat, plan.r, xs.dim,
                             static_cast<int>(xs.size() + ys.size()));
  return result;
}

}  // namespace knnorder
