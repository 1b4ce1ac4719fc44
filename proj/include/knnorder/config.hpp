#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "knnorder/population.hpp"
#include "knnorder/types.hpp"

namespace knnorder {

/// Mean + covariance in plain data form, validated on build().
struct DensityConfig {
  std::vector<double> mean;
  std::vector<std::vector<double>> covariance;  // row-major d x d

  GaussianSpec build() const;
};

struct PairConfig {
  DensityConfig f, g;
  double mu = 0.0;
  double nu = 0.0;

  int dim() const { return static_cast<int>(f.mean.size()); }
  PopulationPair build() const { return PopulationPair(f.build(), g.build(), mu, nu); }
};

/// Either an explicit value list or an inclusive [min, max] range of k.
struct KGridSpec {
  int min = 1;
  int max = 0;  // 0 means unset
  std::vector<int> values;

  bool empty() const { return values.empty() && max == 0; }
  std::vector<int> materialize() const;
};

struct RowConfig {
  std::string label;
  PairConfig pair;
  KGridSpec k_grid;
  int paper_kopt = 0;  // reference optimum from the published table, 0 if none
};

struct ScalingConfig {
  RowConfig base;
  double scale = 4.0;        // intensity multiplier between the two levels
  KGridSpec k_grid_scaled;   // grid for the scaled level
};

struct QuadratureConfig {
  int d1_nodes = 2001;
  int d2_nodes_per_axis = 251;
  int mc_points_per_class = 2000;  // d >= 3 test-point route
  int boundary_resolution = 0;     // 0: reuse the grid resolution for d <= 2
};

struct BootstrapConfig {
  std::vector<double> r = {1.0 / 3.0, 0.5, 2.0 / 3.0};
  int B = 100;
};

struct ExperimentConfig {
  int version = 1;
  std::uint64_t seed = 20080501;
  int workers = 0;  // 0: hardware concurrency
  SampleModel model = SampleModel::Poisson;
  int n_training_sets = 100;
  double region_half_width = 2.5;
  QuadratureConfig quadrature;
  BootstrapConfig bootstrap;
  std::optional<PairConfig> pair;       // single-pair subcommands
  std::vector<RowConfig> table1_rows;   // table1 subcommand
  std::optional<ScalingConfig> scaling; // scaling subcommand

  std::string config_hash;  // FNV-1a of the canonical JSON form, set on load

  /// Parses and validates; error messages carry the offending field path.
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig load_file(const std::string& path);

  /// Built-in presets: table1-paper, table1-desk, scaling-d2, scaling-d16.
  static ExperimentConfig preset(const std::string& name);
  static std::vector<std::string> preset_names();

  std::string to_json_text() const;

  /// Recomputes the canonical hash (call after mutating a loaded config).
  void rehash();
};

}  // namespace knnorder
