#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "knnorder/sampling.hpp"
#include "test_support.hpp"

using namespace knnorder;
using Catch::Approx;

namespace {

GaussianSpec normal1d(double mean) {
  Eigen::VectorXd m(1);
  m << mean;
  Eigen::MatrixXd c(1, 1);
  c << 1.0;
  return GaussianSpec(m, c);
}

PopulationPair pair1d(double mu, double nu) {
  return PopulationPair(normal1d(-0.5), normal1d(0.5), mu, nu);
}

// Alternative generator: component drawn by prior, label = component. The
// marked-mixture generator must match this in distribution.
TrainingSet draw_by_component(const PopulationPair& pair, std::size_t count, RngStream& rng) {
  TrainingSet ts;
  ts.dim = pair.dim();
  ts.model = SampleModel::Binomial;
  const double p_x = pair.prior_p();
  for (std::size_t i = 0; i < count; ++i) {
    const bool from_f = rng.next_unit() < p_x;
    sample_gaussian(from_f ? pair.f() : pair.g(), rng, ts.points);
    ts.labels.push_back(from_f ? Label::X : Label::Y);
  }
  return ts;
}

}  // namespace

TEST_CASE("split_stream determinism and independence") {
  RngStream a = split_stream(42, 0);
  RngStream b = split_stream(42, 0);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

  // Distinct indices: distinct first draws, and no cross-correlation.
  std::set<std::uint64_t> firsts;
  for (std::uint64_t k = 0; k <= 100; ++k) firsts.insert(split_stream(42, k).next_u64());
  CHECK(firsts.size() == 101);

  RngStream s0 = split_stream(42, 0);
  RngStream s1 = split_stream(42, 1);
  const int n = 10000;
  double sxy = 0, sx = 0, sy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = s0.next_unit(), y = s1.next_unit();
    sx += x;
    sy += y;
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
  }
  const double corr = (n * sxy - sx * sy) /
                      std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
  CHECK(std::abs(corr) < 2.576 / std::sqrt(static_cast<double>(n)));  // level 0.01
}

TEST_CASE("poisson counts: small-mean limit and moments") {
  RngStream rng(7, 0);
  int zeros = 0;
  for (int i = 0; i < 2000; ++i)
    if (sample_poisson_count(1e-3, rng) == 0) ++zeros;
  CHECK(zeros >= 1990);  // P(0) = exp(-1e-3) ~ 0.999

  const int n = 100000;
  double sum = 0, sumsq = 0;
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(sample_poisson_count(300.0, rng));
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean - 300.0) < 0.17);  // 3 sigma of the mean estimator
  CHECK(var == Approx(300.0).epsilon(0.05));
}

TEST_CASE("poisson counts: exact distribution at small mean") {
  // Chi-square against the exact pmf, exercising the inversion branch.
  RngStream rng(11, 2);
  const double mean = 5.0;
  const int n = 50000;
  const int n_bins = 14;  // 0..12 then 13+
  std::vector<double> observed(n_bins, 0.0);
  for (int i = 0; i < n; ++i) {
    auto k = sample_poisson_count(mean, rng);
    observed[std::min<std::uint64_t>(k, n_bins - 1)] += 1.0;
  }
  std::vector<double> expected(n_bins, 0.0);
  double p = std::exp(-mean), cum = 0.0;
  for (int k = 0; k < n_bins - 1; ++k) {
    expected[k] = n * p;
    cum += p;
    p *= mean / (k + 1);
  }
  expected[n_bins - 1] = n * (1.0 - cum);
  const double stat = testsupport::chi_square_statistic(observed, expected);
  CHECK(stat < testsupport::chi_square_critical_001(n_bins - 1));
}

TEST_CASE("poisson training draws have the right counts and marks") {
  const auto pair = pair1d(100, 100);
  RngStream rng(2024, 0);

  double total = 0, total_x = 0;
  const int reps = 500;
  for (int r = 0; r < reps; ++r) {
    RngStream stream = split_stream(2024, r);
    const TrainingSet ts = draw_poisson_training(pair, stream);
    REQUIRE(ts.points.size() == ts.labels.size() * ts.dim);
    total += static_cast<double>(ts.size());
    total_x += static_cast<double>(ts.count_label(Label::X));
  }
  const double mean_count = total / reps;
  CHECK(std::abs(mean_count - 200.0) < 3.0 * std::sqrt(200.0 / reps));
  CHECK(total_x / total == Approx(0.5).margin(0.01));

  // Skewed intensities: pooled X fraction concentrates at mu/(mu+nu) = 1/3.
  const auto skew = pair1d(100, 200);
  double n_pts = 0, n_x = 0;
  for (int r = 0; r < reps; ++r) {
    RngStream stream = split_stream(2025, r);
    const TrainingSet ts = draw_poisson_training(skew, stream);
    n_pts += static_cast<double>(ts.size());
    n_x += static_cast<double>(ts.count_label(Label::X));
  }
  const double frac = n_x / n_pts;
  CHECK(std::abs(frac - 1.0 / 3.0) < 3.0 * std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / 150000.0) + 0.002);
}

TEST_CASE("marked-mixture draws match component draws (KS level 0.01)") {
  const auto pair = pair1d(100, 200);
  RngStream rng_a(31, 0);
  RngStream rng_b(31, 1);

  const std::size_t n = 10000;
  TrainingSet a = draw_binomial_training(pair, static_cast<int>(n), rng_a);
  TrainingSet b = draw_by_component(pair, n, rng_b);

  std::vector<double> xa(a.points), xb(b.points);
  const double d = testsupport::ks_statistic(xa, xb);
  CHECK(d < testsupport::ks_critical_001(n, n));

  // Label counts agree within 3 sigma of the pooled binomial.
  const double cx_a = static_cast<double>(a.count_label(Label::X));
  const double cx_b = static_cast<double>(b.count_label(Label::X));
  const double sigma = std::sqrt(2.0 * n * (1.0 / 3.0) * (2.0 / 3.0));
  CHECK(std::abs(cx_a - cx_b) < 3.0 * sigma);
}

TEST_CASE("binomial training draws exactly T points") {
  const auto pair = pair1d(100, 200);
  RngStream rng(55, 0);
  const TrainingSet one = draw_binomial_training(pair, 1, rng);
  CHECK(one.size() == 1);
  CHECK(one.model == SampleModel::Binomial);

  double x_total = 0;
  const int reps = 500;
  for (int r = 0; r < reps; ++r) {
    RngStream stream = split_stream(56, r);
    const TrainingSet ts = draw_binomial_training(pair, 300, stream);
    REQUIRE(ts.size() == 300);
    x_total += static_cast<double>(ts.count_label(Label::X));
  }
  const double mean_x = x_total / reps;
  const double sigma = std::sqrt(300.0 * (1.0 / 3.0) * (2.0 / 3.0) / reps);
  CHECK(std::abs(mean_x - 100.0) < 3.0 * sigma);
}

TEST_CASE("poisson conditioned on total count equals binomial (KS level 0.01)") {
  const auto pair = pair1d(100, 100);
  const int T = 200;

  std::vector<double> pois_coords;
  std::uint64_t stream = 0;
  while (pois_coords.size() < 10000) {
    RngStream rng = split_stream(404, stream++);
    const TrainingSet ts = draw_poisson_training(pair, rng);
    if (static_cast<int>(ts.size()) != T) continue;  // condition on N = T
    pois_coords.insert(pois_coords.end(), ts.points.begin(), ts.points.end());
  }

  std::vector<double> bin_coords;
  std::uint64_t bstream = 1000000;
  while (bin_coords.size() < 10000) {
    RngStream rng = split_stream(404, bstream++);
    const TrainingSet ts = draw_binomial_training(pair, T, rng);
    bin_coords.insert(bin_coords.end(), ts.points.begin(), ts.points.end());
  }

  const double d = testsupport::ks_statistic(pois_coords, bin_coords);
  CHECK(d < testsupport::ks_critical_001(pois_coords.size(), bin_coords.size()));
}

TEST_CASE("empirical mark probability tracks psi (chi-square level 0.01)") {
  const auto pair = pair1d(100, 200);
  const int n_bins = 8;
  const double lo = -2.0, hi = 2.0, width = (hi - lo) / n_bins;
  std::vector<double> x_count(n_bins, 0.0), psi_sum(n_bins, 0.0), var_sum(n_bins, 0.0);

  for (int r = 0; r < 300; ++r) {
    RngStream rng = split_stream(777, r);
    const TrainingSet ts = draw_poisson_training(pair, rng);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double z = ts.points[i];
      if (z < lo || z >= hi) continue;
      const int b = static_cast<int>((z - lo) / width);
      const double psi = pair.posterior_psi(ts.point(i));
      psi_sum[b] += psi;
      var_sum[b] += psi * (1.0 - psi);
      if (ts.labels[i] == Label::X) x_count[b] += 1.0;
    }
  }

  double stat = 0.0;
  for (int b = 0; b < n_bins; ++b) {
    REQUIRE(var_sum[b] > 50.0);  // enough mass for the normal approximation
    const double diff = x_count[b] - psi_sum[b];
    stat += diff * diff / var_sum[b];
  }
  CHECK(stat < testsupport::chi_square_critical_001(n_bins));
}

TEST_CASE("training draws are byte-identical functions of (seed, index)") {
  const auto pair = pair1d(100, 100);
  RngStream r1 = split_stream(99, 17);
  RngStream r2 = split_stream(99, 17);
  const TrainingSet a = draw_poisson_training(pair, r1);
  const TrainingSet b = draw_poisson_training(pair, r2);
  REQUIRE(a.size() == b.size());
  CHECK(a.points == b.points);
  CHECK(a.labels == b.labels);
  CHECK(a.master_seed == 99);
  CHECK(a.stream_index == 17);

  RngStream r3 = split_stream(99, 18);
  const TrainingSet c = draw_poisson_training(pair, r3);
  CHECK(a.points != c.points);
}
