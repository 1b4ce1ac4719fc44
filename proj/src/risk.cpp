#include "knnorder/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "knnorder/knn.hpp"
#include "knnorder/parallel.hpp"

namespace knnorder {

namespace {

constexpr int kMaxRedraws = 1000;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// P(Z in region) for a Gaussian; analytic for diagonal covariance, otherwise
/// estimated from unconditioned draws.
double region_mass(const GaussianSpec& spec, const Region& region, RngStream& rng) {
  const int d = spec.dim();
  if (spec.has_diagonal_covariance()) {
    double mass = 1.0;
    for (int j = 0; j < d; ++j) {
      const double m = spec.mean()[j];
      const double s = std::sqrt(spec.covariance()(j, j));
      mass *= normal_cdf((region.upper[j] - m) / s) - normal_cdf((region.lower[j] - m) / s);
    }
    return mass;
  }
  const int n = 200000;
  int inside = 0;
  std::vector<double> z;
  for (int i = 0; i < n; ++i) {
    z.clear();
    sample_gaussian(spec, rng, z);
    if (region.contains(z)) ++inside;
  }
  return static_cast<double>(inside) / n;
}

TrainingSet draw_nonempty(const PopulationPair& pair, SampleModel model, RngStream& rng) {
  if (model == SampleModel::Binomial) {
    const int T = std::max(1, static_cast<int>(std::llround(pair.mu() + pair.nu())));
    return draw_binomial_training(pair, T, rng);
  }
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    TrainingSet ts = draw_poisson_training(pair, rng);
    if (ts.size() > 0) return ts;
  }
  throw std::runtime_error("replicate draw: training set empty after bounded retries");
}

}  // namespace

ErrorEstimate ErrorEstimate::from(double err, int n_replicates, int k) {
  ErrorEstimate e;
  e.err = err;
  e.n_replicates = n_replicates;
  e.k = k;
  e.se = std::sqrt(err * (1.0 - err) / n_replicates);
  return e;
}

Label bayes_classify(const PopulationPair& pair, std::span<const double> z) {
  return pair.posterior_psi(z) >= 0.5 ? Label::X : Label::Y;
}

double bayes_risk(const PopulationPair& pair, const Region& region, const QuadratureGrid& grid) {
  if (grid.dim != region.dim())
    throw std::invalid_argument("bayes_risk: grid dimension does not match region");
  const double mu = pair.mu(), nu = pair.nu();
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto z = grid.node(i);
    acc += grid.weights[i] * std::min(mu * pair.f().value(z), nu * pair.g().value(z));
  }
  return acc / (mu + nu);
}

ErrNodes ErrNodes::from_grid(const PopulationPair& pair, const QuadratureGrid& grid) {
  ErrNodes out;
  out.dim = grid.dim;
  out.nodes = grid.nodes;
  const std::size_t m = grid.size();
  out.wf.resize(m);
  out.wg.resize(m);
  const double pf = pair.prior_p();
  const double pg = 1.0 - pf;
  for (std::size_t i = 0; i < m; ++i) {
    const auto z = grid.node(i);
    out.wf[i] = grid.weights[i] * pair.f().value(z) * pf;
    out.wg[i] = grid.weights[i] * pair.g().value(z) * pg;
    out.wf_total += out.wf[i];
  }
  return out;
}

ErrNodes ErrNodes::from_mc(const PopulationPair& pair, const Region& region,
                           int points_per_class, RngStream& rng) {
  if (points_per_class < 1)
    throw std::invalid_argument("ErrNodes::from_mc: points_per_class must be >= 1");
  ErrNodes out;
  out.dim = pair.dim();
  const double mass_f = region_mass(pair.f(), region, rng);
  const double mass_g = region_mass(pair.g(), region, rng);
  if (mass_f <= 0.0 || mass_g <= 0.0)
    throw std::runtime_error("ErrNodes::from_mc: region carries no class mass");

  const double wf_each = pair.prior_p() * mass_f / points_per_class;
  const double wg_each = (1.0 - pair.prior_p()) * mass_g / points_per_class;

  std::vector<double> z;
  for (int cls = 0; cls < 2; ++cls) {
    const GaussianSpec& spec = cls == 0 ? pair.f() : pair.g();
    for (int i = 0; i < points_per_class; ++i) {
      // Truncation by rejection.
      for (;;) {
        z.clear();
        sample_gaussian(spec, rng, z);
        if (region.contains(z)) break;
      }
      out.nodes.insert(out.nodes.end(), z.begin(), z.end());
      out.wf.push_back(cls == 0 ? wf_each : 0.0);
      out.wg.push_back(cls == 0 ? 0.0 : wg_each);
    }
  }
  out.wf_total = pair.prior_p() * mass_f;
  return out;
}

std::vector<double> training_set_contribution(const TrainingSet& ts, const ErrNodes& nodes,
                                              std::span<const int> ks) {
  if (ts.size() == 0)
    throw std::invalid_argument("training_set_contribution: empty training set");
  const int n = static_cast<int>(ts.size());
  int k_cap = 0;
  for (int k : ks) {
    if (k < 1) throw std::invalid_argument("training_set_contribution: k must be >= 1");
    k_cap = std::max(k_cap, std::min(k, n));
  }

  const NeighborIndex index = NeighborIndex::build(ts, IndexKind::KdTree);
  std::vector<double> contrib(ks.size(), 0.0);
  std::vector<int> nn;
  std::vector<int> x_prefix(static_cast<std::size_t>(k_cap) + 1, 0);

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    index.k_nearest(nodes.node(i), k_cap, nn);
    for (int j = 0; j < k_cap; ++j)
      x_prefix[j + 1] = x_prefix[j] + (ts.labels[nn[j]] == Label::X ? 1 : 0);
    const double delta = nodes.wg[i] - nodes.wf[i];
    for (std::size_t t = 0; t < ks.size(); ++t) {
      const int k_eff = std::min(ks[t], n);
      if (2 * x_prefix[k_eff] >= k_eff) contrib[t] += delta;
    }
  }
  return contrib;
}

std::vector<std::vector<double>> replicate_contributions(const PopulationPair& pair,
                                                         const ErrNodes& nodes,
                                                         std::span<const int> ks, int n_sets,
                                                         std::uint64_t seed, int workers,
                                                         std::uint64_t stream_base,
                                                         SampleModel model) {
  if (n_sets < 1) throw std::invalid_argument("replicate_contributions: n_sets must be >= 1");
  std::vector<std::vector<double>> rows(n_sets);
  parallel_for(static_cast<std::size_t>(n_sets), workers, [&](std::size_t r) {
    RngStream rng = split_stream(seed, stream_base + r);
    const TrainingSet ts = draw_nonempty(pair, model, rng);
    rows[r] = training_set_contribution(ts, nodes, ks);
  });
  return rows;
}

double classification_prob_mc(const PopulationPair& pair, std::span<const double> z, int k,
                              int n_sets, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("classification_prob_mc: k must be >= 1");
  if (n_sets < 1) throw std::invalid_argument("classification_prob_mc: n_sets must be >= 1");
  int x_votes = 0;
  for (int r = 0; r < n_sets; ++r) {
    RngStream rng = split_stream(seed, static_cast<std::uint64_t>(r));
    TrainingSet ts = draw_poisson_training(pair, rng);
    int attempts = 0;
    while (static_cast<int>(ts.size()) < k) {
      if (++attempts > kMaxRedraws)
        throw std::runtime_error("classification_prob_mc: replicate smaller than k after retries");
      ts = draw_poisson_training(pair, rng);
    }
    const NeighborIndex index = NeighborIndex::build(ts, IndexKind::KdTree);
    if (classify_knn(ts, index, z, k) == Label::X) ++x_votes;
  }
  return static_cast<double>(x_votes) / n_sets;
}

ErrorEstimate error_rate_mc(const PopulationPair& pair, const Region& region, int k,
                            int n_sets, const QuadratureGrid& grid, std::uint64_t seed,
                            int workers) {
  const KoptResult res = grid_kopt(pair, region, {k}, n_sets, grid, seed, workers);
  return res.curve.front();
}

KoptResult grid_kopt(const PopulationPair& pair, const Region& region,
                     const std::vector<int>& k_grid, int n_sets, const QuadratureGrid& grid,
                     std::uint64_t seed, int workers) {
  if (k_grid.empty()) throw std::invalid_argument("grid_kopt: k grid is empty");
  if (!std::is_sorted(k_grid.begin(), k_grid.end()))
    throw std::invalid_argument("grid_kopt: k grid must be sorted");
  if (grid.dim != region.dim())
    throw std::invalid_argument("grid_kopt: grid dimension does not match region");

  const ErrNodes nodes = ErrNodes::from_grid(pair, grid);
  const auto rows = replicate_contributions(pair, nodes, k_grid, n_sets, seed, workers);

  KoptResult out;
  out.curve.reserve(k_grid.size());
  for (std::size_t t = 0; t < k_grid.size(); ++t) {
    double acc = 0.0;
    for (int r = 0; r < n_sets; ++r) acc += rows[r][t];
    out.curve.push_back(ErrorEstimate::from(nodes.wf_total + acc / n_sets, n_sets, k_grid[t]));
  }

  std::size_t best = 0;
  for (std::size_t t = 1; t < out.curve.size(); ++t)
    if (out.curve[t].err < out.curve[best].err) best = t;
  out.k_opt = k_grid[best];
  return out;
}

}  // namespace knnorder
