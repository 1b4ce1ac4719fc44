#include "knnorder/sampling.hpp"

#include <stdexcept>

namespace knnorder {

std::size_t TrainingSet::count_label(Label l) const {
  std::size_t n = 0;
  for (Label x : labels)
    if (x == l) ++n;
  return n;
}

std::pair<PointCloud, PointCloud> TrainingSet::split_by_label() const {
  PointCloud xs(dim), ys(dim);
  for (std::size_t i = 0; i < size(); ++i) {
    if (labels[i] == Label::X)
      xs.push_back(point(i));
    else
      ys.push_back(point(i));
  }
  return {std::move(xs), std::move(ys)};
}

std::uint64_t sample_poisson_count(double mean, RngStream& rng) {
  return rng.next_poisson(mean);
}

void sample_gaussian(const GaussianSpec& spec, RngStream& rng, std::vector<double>& out) {
  const int d = spec.dim();
  Eigen::VectorXd std_draws(d);
  for (int j = 0; j < d; ++j) std_draws[j] = rng.next_normal();
  const Eigen::VectorXd z = spec.mean() + spec.cholesky_factor() * std_draws;
  out.insert(out.end(), z.data(), z.data() + d);
}

namespace {

TrainingSet draw_marked(const PopulationPair& pair, std::size_t count, SampleModel model,
                        RngStream& rng) {
  TrainingSet ts;
  ts.dim = pair.dim();
  ts.model = model;
  ts.master_seed = rng.master_seed();
  ts.stream_index = rng.stream_index();
  ts.points.reserve(count * ts.dim);
  ts.labels.reserve(count);

  const double p_x = pair.prior_p();
  std::vector<double> buf;
  for (std::size_t i = 0; i < count; ++i) {
    // Mixture draw: pick the component in proportion to the intensities.
    buf.clear();
    if (rng.next_unit() < p_x)
      sample_gaussian(pair.f(), rng, buf);
    else
      sample_gaussian(pair.g(), rng, buf);
    ts.points.insert(ts.points.end(), buf.begin(), buf.end());
    // Mark by the posterior at the drawn location.
    const double psi = pair.posterior_psi(buf);
    ts.labels.push_back(rng.next_unit() < psi ? Label::X : Label::Y);
  }
  return ts;
}

}  // namespace

TrainingSet draw_poisson_training(const PopulationPair& pair, RngStream& rng) {
  const std::uint64_t n = rng.next_poisson(pair.mu() + pair.nu());
  return draw_marked(pair, n, SampleModel::Poisson, rng);
}

TrainingSet draw_binomial_training(const PopulationPair& pair, int T, RngStream& rng) {
  if (T < 1) throw std::invalid_argument("draw_binomial_training: T must be >= 1");
  return draw_marked(pair, static_cast<std::size_t>(T), SampleModel::Binomial, rng);
}

}  // namespace knnorder
