#pragma once

#include <cstdint>
#include <vector>

#include "knnorder/population.hpp"
#include "knnorder/quadrature.hpp"
#include "knnorder/rng.hpp"
#include "knnorder/sampling.hpp"
#include "knnorder/types.hpp"

namespace knnorder {

struct ErrorEstimate {
  double err = 0.0;
  double se = 0.0;
  int n_replicates = 0;
  int k = 0;

  static ErrorEstimate from(double err, int n_replicates, int k);
};

/// The oracle rule: X iff psi(z) >= 1/2.
Label bayes_classify(const PopulationPair& pair, std::span<const double> z);

/// Quadrature of min(mu*f, nu*g) / (mu + nu) over the region.
double bayes_risk(const PopulationPair& pair, const Region& region, const QuadratureGrid& grid);

/// Test nodes carrying the prior-weighted class masses of the error-rate
/// integral: err(k) = sum_i wf_i*(1 - P(i classified X)) + wg_i*P(i classified X).
struct ErrNodes {
  int dim = 0;
  std::vector<double> nodes;  // m x dim
  std::vector<double> wf;     // prior-weighted f mass per node
  std::vector<double> wg;     // prior-weighted g mass per node
  double wf_total = 0.0;

  std::size_t size() const { return wf.size(); }
  std::span<const double> node(std::size_t i) const {
    return {nodes.data() + i * dim, static_cast<std::size_t>(dim)};
  }

  static ErrNodes from_grid(const PopulationPair& pair, const QuadratureGrid& grid);

  /// d >= 3 route: points drawn from f and g truncated to the region by
  /// rejection, weighted by the in-region class masses.
  static ErrNodes from_mc(const PopulationPair& pair, const Region& region,
                          int points_per_class, RngStream& rng);
};

/// Classifies every node under the k-nn rule built on ts, for each k in ks,
/// sharing one neighbor pass; k is capped at |ts| (all-points majority vote).
/// Returns c[k_idx] = sum_i (wg_i - wf_i) * I(node i classified X at ks[k_idx]).
std::vector<double> training_set_contribution(const TrainingSet& ts, const ErrNodes& nodes,
                                              std::span<const int> ks);

/// Fraction of n_sets fresh training sets whose k-nn rule classifies z as X.
/// Replicates with fewer than k points are redrawn.
double classification_prob_mc(const PopulationPair& pair, std::span<const double> z, int k,
                              int n_sets, std::uint64_t seed);

/// The error-rate integral with P-hat estimated from n_sets training
/// replicates, each replicate classifying every grid node.
ErrorEstimate error_rate_mc(const PopulationPair& pair, const Region& region, int k,
                            int n_sets, const QuadratureGrid& grid, std::uint64_t seed,
                            int workers = 0);

struct KoptResult {
  int k_opt = 0;
  std::vector<ErrorEstimate> curve;
};

/// Err-hat over the whole k grid with common random numbers (the same n_sets
/// replicates evaluate every k); argmin with smallest-k tie rule.
KoptResult grid_kopt(const PopulationPair& pair, const Region& region,
                     const std::vector<int>& k_grid, int n_sets, const QuadratureGrid& grid,
                     std::uint64_t seed, int workers = 0);

/// Per-replicate contribution matrix (n_sets rows, replicate r drawn from
/// split_stream(seed, stream_base + r)), shared by grid_kopt and the
/// experiment runners. Empty Poisson replicates are redrawn within their
/// stream; the Binomial model draws exactly round(mu + nu) points.
std::vector<std::vector<double>> replicate_contributions(
    const PopulationPair& pair, const ErrNodes& nodes, std::span<const int> ks, int n_sets,
    std::uint64_t seed, int workers = 0, std::uint64_t stream_base = 0,
    SampleModel model = SampleModel::Poisson);

}  // namespace knnorder
