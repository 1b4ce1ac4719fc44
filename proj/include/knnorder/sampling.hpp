#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "knnorder/population.hpp"
#include "knnorder/rng.hpp"
#include "knnorder/types.hpp"

namespace knnorder {

/// A labeled training sample plus the sampling model and RNG coordinates that
/// produced it, so any set can be re-derived from (seed, stream index) alone.
struct TrainingSet {
  int dim = 0;
  std::vector<double> points;  // n x dim, row-major
  std::vector<Label> labels;
  SampleModel model = SampleModel::Poisson;
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  std::size_t size() const { return labels.size(); }

  std::span<const double> point(std::size_t i) const {
    return {points.data() + i * dim, static_cast<std::size_t>(dim)};
  }

  std::size_t count_label(Label l) const;

  /// Split into the X sample and the Y sample, preserving order.
  std::pair<PointCloud, PointCloud> split_by_label() const;
};

/// One draw from Poisson(mean).
std::uint64_t sample_poisson_count(double mean, RngStream& rng);

/// One multivariate normal draw appended to out (dim doubles).
void sample_gaussian(const GaussianSpec& spec, RngStream& rng, std::vector<double>& out);

/// Poisson model: N ~ Poisson(mu + nu) points from the mixture density, each
/// marked X with probability psi(Z). N = 0 yields a legal empty set.
TrainingSet draw_poisson_training(const PopulationPair& pair, RngStream& rng);

/// Binomial model: exactly T points, marked the same way.
TrainingSet draw_binomial_training(const PopulationPair& pair, int T, RngStream& rng);

}  // namespace knnorder
