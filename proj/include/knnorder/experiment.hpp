#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "knnorder/config.hpp"
#include "knnorder/risk.hpp"
#include "knnorder/sampling.hpp"

namespace knnorder {

/// Stream-index layout under the master seed. Every table row owns a 2^32
/// slab: training replicate r sits at base + r, the bootstrap run for
/// resampling-fraction variant j on replicate r at base + (1 + j) * n_sets + r,
/// and auxiliary draws (Monte Carlo test nodes) in a slot beyond those.
struct StreamLayout {
  static constexpr std::uint64_t kRowStride = 1ull << 32;

  static std::uint64_t row_base(std::size_t row) { return row * kRowStride; }
  static std::uint64_t training(std::size_t row, int replicate) {
    return row_base(row) + static_cast<std::uint64_t>(replicate);
  }
  static std::uint64_t bootstrap(std::size_t row, int n_sets, int variant, int replicate) {
    return row_base(row) + static_cast<std::uint64_t>(n_sets) * (1 + variant) + replicate;
  }
  static std::uint64_t aux(std::size_t row, int n_sets, int n_variants) {
    return row_base(row) + static_cast<std::uint64_t>(n_sets) * (2 + n_variants);
  }
};

struct KTildeSummary {
  double r = 0.0;            // resampling fraction
  double err = 0.0;          // error of the classifier using each replicate's k-tilde
  double se = 0.0;
  double mean_k_tilde = 0.0;
};

struct Table1Row {
  std::string label;
  int d = 0;
  double mu = 0.0, nu = 0.0;
  double bayes = 0.0;
  int k_opt = 0;
  ErrorEstimate at_kopt;
  std::vector<KTildeSummary> at_ktilde;
  std::vector<ErrorEstimate> curve;
  std::uint64_t stream_base = 0;
};

struct Table1Result {
  std::vector<Table1Row> rows;
  std::uint64_t seed = 0;
  std::string config_hash;
};

/// Reproduces the error-rate table: per row the Bayes risk, the deterministic
/// grid optimum, and the bootstrap-selected classifier error for each r.
/// Completed rows checkpoint to checkpoint_path (resumed when the config hash
/// matches); log receives one progress line per row when non-null.
Table1Result run_table1(const ExperimentConfig& cfg, const std::string& checkpoint_path = "",
                        std::ostream* log = nullptr);

struct ScalingLevel {
  std::string label;
  double mu = 0.0, nu = 0.0;
  int k_opt = 0;
  ErrorEstimate at_kopt;
  std::vector<ErrorEstimate> curve;
  std::uint64_t stream_base = 0;
};

struct ScalingResult {
  ScalingLevel base, scaled;
  double scale = 0.0;
  double empirical_ratio = 0.0;
  double theoretical_ratio = 0.0;  // scale^{4/(d+4)}
  bool has_theory = false;         // boundary-based constants available (d <= 2)
  double C1 = 0.0, C2 = 0.0;
  bool theory_degenerate = false;
  int theory_kopt_base = 0, theory_kopt_scaled = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
};

ScalingResult run_scaling(const ExperimentConfig& cfg, std::ostream* log = nullptr);

/// Fixed-point 6-decimal real formatting shared by all emitted tables.
std::string format_real(double v);

enum class EmitFormat { Csv, Json };
EmitFormat parse_format(const std::string& name);

/// A rectangular result table; cells are already-formatted strings so CSV and
/// JSON emissions are bit-identical in content.
struct ResultTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells);
};

/// Writes <out_dir>/<name>.<ext> with a version header carrying the master
/// seed and config hash; returns the file path.
std::string emit_table(const ResultTable& table, EmitFormat format, const std::string& out_dir,
                       std::uint64_t seed, const std::string& config_hash);

ResultTable parse_table_csv(const std::string& path);
ResultTable parse_table_json(const std::string& path);

ResultTable table1_to_table(const Table1Result& result, const ExperimentConfig& cfg);
ResultTable curve_to_table(const std::string& name, std::span<const ErrorEstimate> curve,
                           std::uint64_t seed);
ResultTable scaling_to_table(const ScalingResult& result);

/// Training-set dump: version header line, then x1..xd,label rows at
/// round-trip precision.
void dump_training_csv(const TrainingSet& ts, const std::string& path);
TrainingSet load_training_csv(const std::string& path);

}  // namespace knnorder
