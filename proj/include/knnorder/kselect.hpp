#pragma once

#include <cstdint>
#include <vector>

#include "knnorder/rng.hpp"
#include "knnorder/types.hpp"

namespace knnorder {

/// Parameters of the bootstrap neighbor-order selection.
struct BootstrapPlan {
  double r = 1.0 / 3.0;     // resampling fraction, 0 < r < 1
  int B = 100;              // number of resample pairs
  std::vector<int> k_grid;  // empty selects 1..ceil(0.8 * min pooled training size), cap 512

  // Test resamples come from the indices the training resample did not touch
  // (out-of-bag). Switch off to draw them from the full sample instead; note
  // that overlapping draws duplicate training points into the test pool,
  // which deflates the error at small k and collapses the selected order.
  bool disjoint_test = true;
};

struct ResampleSizes {
  int m_star = 0;   // X resample budget
  int n_star = 0;   // Y resample budget
  int m1_star = 0;  // X training resample size, floor(r * m_star)
  int n1_star = 0;  // Y training resample size, floor(r * n_star)

  int training_size() const { return m1_star + n1_star; }
  int test_size() const { return (m_star - m1_star) + (n_star - n1_star); }
};

/// M* ~ Poisson(M), N* ~ Poisson(N); degenerate tuples (an empty training
/// resample or an empty test pool) are redrawn, bounded retries.
ResampleSizes resample_sizes_poisson(int M, int N, double r, RngStream& rng);

/// M* ~ Binomial(M+N, M/(M+N)), N* = M+N-M*; same integer-part rule.
ResampleSizes resample_sizes_binomial(int M, int N, double r, RngStream& rng);

struct CurvePoint {
  int k = 0;
  double mean_error = 0.0;
};

/// Mean resampled test error per k over B resample pairs: train the k-nn rule
/// on with-replacement resamples of sizes (M1*, N1*), test it on independent
/// resamples of the remaining budget, pool the misclassification counts.
std::vector<CurvePoint> bootstrap_error_curve(const PointCloud& xs, const PointCloud& ys,
                                              const BootstrapPlan& plan, SampleModel model,
                                              std::uint64_t seed, int workers = 1);

/// Argmin of the curve; ties go to the smallest k.
int select_k(std::span<const CurvePoint> curve);

/// round(r^{-4/(d+4)} * k_hat) clamped to [1, T-1].
int rescale_k(int k_hat, double r, int d, int T);

struct SelectionResult {
  int k_hat = 0;
  int k_tilde = 0;
  std::vector<CurvePoint> curve;
};

/// The full pipeline: sizes -> resample curve -> argmin -> rescaling.
SelectionResult select_neighbor_order(const PointCloud& xs, const PointCloud& ys,
                                      const BootstrapPlan& plan, SampleModel model,
                                      std::uint64_t seed, int workers = 1);

}  // namespace knnorder
