#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace knnorder {

enum class Label : std::uint8_t { X = 0, Y = 1 };

enum class SampleModel : std::uint8_t { Poisson, Binomial };

inline const char* to_string(Label l) { return l == Label::X ? "X" : "Y"; }
inline const char* to_string(SampleModel m) {
  return m == SampleModel::Poisson ? "poisson" : "binomial";
}

/// Axis-aligned box; the classification region the error integrals run over.
struct Region {
  std::vector<double> lower;
  std::vector<double> upper;

  Region() = default;
  Region(std::vector<double> lo, std::vector<double> hi)
      : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size() || lower.empty())
      throw std::invalid_argument("Region: bound dimensions mismatch");
    for (std::size_t j = 0; j < lower.size(); ++j)
      if (!(lower[j] < upper[j]))
        throw std::invalid_argument("Region: lower[" + std::to_string(j) +
                                    "] must be < upper[" + std::to_string(j) + "]");
  }

  /// Cube [-h, h]^d.
  static Region cube(int dim, double half_width) {
    return Region(std::vector<double>(dim, -half_width),
                  std::vector<double>(dim, half_width));
  }

  int dim() const { return static_cast<int>(lower.size()); }

  double volume() const {
    double v = 1.0;
    for (std::size_t j = 0; j < lower.size(); ++j) v *= upper[j] - lower[j];
    return v;
  }

  bool contains(std::span<const double> z) const {
    if (z.size() != lower.size()) return false;
    for (std::size_t j = 0; j < lower.size(); ++j)
      if (z[j] < lower[j] || z[j] > upper[j]) return false;
    return true;
  }
};

/// Flat row-major storage for a set of d-dimensional points.
struct PointCloud {
  int dim = 0;
  std::vector<double> coords;  // size() * dim

  PointCloud() = default;
  explicit PointCloud(int d) : dim(d) {
    if (d < 1) throw std::invalid_argument("PointCloud: dim must be >= 1");
  }

  std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }

  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * dim, static_cast<std::size_t>(dim)};
  }

  void push_back(std::span<const double> z) {
    if (static_cast<int>(z.size()) != dim)
      throw std::invalid_argument("PointCloud: point dimension mismatch");
    coords.insert(coords.end(), z.begin(), z.end());
  }
};

}  // namespace knnorder
