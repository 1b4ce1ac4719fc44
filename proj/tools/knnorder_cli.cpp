// Experiment CLI: exposes the library operations as subcommands and
// reproduces the published error-rate table and scaling checks from a
// configuration file or a built-in preset.
#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "knnorder/experiment.hpp"
#include "knnorder/knn.hpp"
#include "knnorder/kselect.hpp"
#include "knnorder/theory.hpp"

using namespace knnorder;

namespace {

std::string cfg_out_dir;  // set from the global args before dispatch

struct GlobalArgs {
  std::string config_path;
  std::string preset;
  std::string out_dir = "out";
  std::string format = "csv";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = -1;
};

ExperimentConfig resolve_config(const GlobalArgs& args) {
  ExperimentConfig cfg;
  if (!args.config_path.empty() && !args.preset.empty())
    throw std::invalid_argument("give either --config or --preset, not both");
  if (!args.config_path.empty())
    cfg = ExperimentConfig::load_file(args.config_path);
  else if (!args.preset.empty())
    cfg = ExperimentConfig::preset(args.preset);
  else
    cfg = ExperimentConfig::preset("table1-desk");
  if (args.seed_set) cfg.seed = args.seed;
  if (args.workers >= 0) cfg.workers = args.workers;
  cfg.rehash();
  return cfg;
}

const PairConfig& require_pair(const ExperimentConfig& cfg) {
  if (!cfg.pair)
    throw std::invalid_argument("this subcommand needs a \"pair\" section in the config");
  return *cfg.pair;
}

std::vector<double> parse_point(const std::string& text, int dim) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
  if (static_cast<int>(out.size()) != dim)
    throw std::invalid_argument("point \"" + text + "\" has dimension " +
                                std::to_string(out.size()) + ", expected " +
                                std::to_string(dim));
  return out;
}

int cmd_simulate(const ExperimentConfig& cfg, std::uint64_t index) {
  const PopulationPair pair = require_pair(cfg).build();
  RngStream rng = split_stream(cfg.seed, index);
  const TrainingSet ts = cfg.model == SampleModel::Binomial
                             ? draw_binomial_training(
                                   pair, std::max(1, static_cast<int>(std::llround(
                                                         pair.mu() + pair.nu()))),
                                   rng)
                             : draw_poisson_training(pair, rng);
  std::filesystem::create_directories(cfg_out_dir);
  const std::string path =
      (std::filesystem::path(cfg_out_dir) / ("training_" + std::to_string(index) + ".csv"))
          .string();
  dump_training_csv(ts, path);
  std::cout << path << " (" << ts.size() << " points, " << ts.count_label(Label::X)
            << " X)\n";
  return 0;
}

int cmd_classify(const std::string& training_path, int k,
                 const std::vector<std::string>& points) {
  const TrainingSet ts = load_training_csv(training_path);
  if (ts.size() == 0) throw std::invalid_argument("training set is empty");
  const NeighborIndex index = NeighborIndex::build(ts, IndexKind::KdTree);
  for (int j = 0; j < ts.dim; ++j) std::cout << "x" << (j + 1) << ",";
  std::cout << "label\n";
  for (const auto& text : points) {
    const auto z = parse_point(text, ts.dim);
    const Label label = classify_knn(ts, index, z, k);
    for (double v : z) std::cout << format_real(v) << ",";
    std::cout << to_string(label) << "\n";
  }
  return 0;
}

int cmd_bayes(const ExperimentConfig& cfg, EmitFormat format) {
  const PopulationPair pair = require_pair(cfg).build();
  const int d = pair.dim();
  const Region region = Region::cube(d, cfg.region_half_width);
  if (d > 2)
    throw std::invalid_argument("bayes quadrature supports d <= 2");
  const QuadratureGrid grid =
      d == 1 ? make_simpson_grid(region, cfg.quadrature.d1_nodes)
             : make_midpoint_grid(region, cfg.quadrature.d2_nodes_per_axis);
  const double risk = bayes_risk(pair, region, grid);

  ResultTable table;
  table.name = "bayes";
  table.columns = {"d", "mu", "nu", "bayes", "n_nodes", "seed", "config_hash"};
  table.add_row({std::to_string(d), format_real(pair.mu()), format_real(pair.nu()),
                 format_real(risk), std::to_string(grid.size()), std::to_string(cfg.seed),
                 cfg.config_hash});
  const std::string path = emit_table(table, format, cfg_out_dir, cfg.seed, cfg.config_hash);
  std::cout << "bayes=" << format_real(risk) << " -> " << path << "\n";
  return 0;
}

int cmd_select_k(const ExperimentConfig& cfg, EmitFormat format,
                 const std::string& training_path, std::uint64_t index, double r_arg, int B_arg) {
  TrainingSet ts;
  if (!training_path.empty()) {
    ts = load_training_csv(training_path);
  } else {
    const PopulationPair pair = require_pair(cfg).build();
    RngStream rng = split_stream(cfg.seed, index);
    ts = cfg.model == SampleModel::Binomial
             ? draw_binomial_training(
                   pair, std::max(1, static_cast<int>(std::llround(pair.mu() + pair.nu()))),
                   rng)
             : draw_poisson_training(pair, rng);
  }
  const auto [xs, ys] = ts.split_by_label();
  if (xs.size() == 0 || ys.size() == 0)
    throw std::invalid_argument("training set must contain both labels");

  BootstrapPlan plan;
  plan.r = r_arg > 0.0 ? r_arg : cfg.bootstrap.r.front();
  plan.B = B_arg > 0 ? B_arg : cfg.bootstrap.B;
  const SelectionResult sel =
      select_neighbor_order(xs, ys, plan, cfg.model, cfg.seed,
                            cfg.workers == 0 ? 0 : cfg.workers);

  ResultTable table;
  table.name = "select_k";
  table.columns = {"k",      "mean_error", "k_hat", "k_tilde", "r",
                   "B",      "n_x",        "n_y",   "seed",    "stream_index",
                   "config_hash"};
  for (const auto& pt : sel.curve)
    table.add_row({std::to_string(pt.k), format_real(pt.mean_error),
                   std::to_string(sel.k_hat), std::to_string(sel.k_tilde),
                   format_real(plan.r), std::to_string(plan.B), std::to_string(xs.size()),
                   std::to_string(ys.size()), std::to_string(cfg.seed),
                   std::to_string(ts.stream_index), cfg.config_hash});
  const std::string path = emit_table(table, format, cfg_out_dir, cfg.seed, cfg.config_hash);
  std::cout << "k_hat=" << sel.k_hat << " k_tilde=" << sel.k_tilde << " -> " << path << "\n";
  return 0;
}

int cmd_theory(const ExperimentConfig& cfg, EmitFormat format) {
  const PopulationPair pair = require_pair(cfg).build();
  const int d = pair.dim();
  const Region region = Region::cube(d, cfg.region_half_width);
  const int resolution = cfg.quadrature.boundary_resolution > 0
                             ? cfg.quadrature.boundary_resolution
                             : (d == 1 ? cfg.quadrature.d1_nodes
                                       : cfg.quadrature.d2_nodes_per_axis);
  const BoundarySet boundary = find_boundary(pair, region, resolution);
  const ExpansionReport report = expansion_constants(boundary);
  const int kopt = report.degenerate ? 0 : theoretical_kopt(report, pair.nu(), d);

  ResultTable summary;
  summary.name = "theory_summary";
  summary.columns = {"d",  "mu",         "nu",        "C1",          "C2",
                     "a_d", "degenerate", "theory_kopt", "boundary_nodes", "seed",
                     "config_hash"};
  summary.add_row({std::to_string(d), format_real(pair.mu()), format_real(pair.nu()),
                   format_real(report.C1), format_real(report.C2), format_real(report.a_d),
                   report.degenerate ? "1" : "0", std::to_string(kopt),
                   std::to_string(boundary.nodes.size()), std::to_string(cfg.seed),
                   cfg.config_hash});
  emit_table(summary, format, cfg_out_dir, cfg.seed, cfg.config_hash);

  ResultTable curve;
  curve.name = "theory_regret";
  curve.columns = {"k", "expansion_regret"};
  const int k_max = std::min(1000, static_cast<int>(std::ceil(pair.nu())));
  for (int k = 1; k <= k_max; ++k)
    curve.add_row({std::to_string(k), format_real(regret_expansion(report, k, pair.nu(), d))});
  const std::string path = emit_table(curve, format, cfg_out_dir, cfg.seed, cfg.config_hash);

  std::cout << "C1=" << format_real(report.C1) << " C2=" << format_real(report.C2)
            << (report.degenerate ? " (degenerate: C2 = 0, no finite optimum)"
                                  : " theory_kopt=" + std::to_string(kopt))
            << " -> " << path << "\n";
  return 0;
}

int cmd_table1(const ExperimentConfig& cfg, EmitFormat format) {
  const std::string checkpoint =
      (std::filesystem::path(cfg_out_dir) / "table1_checkpoint.json").string();
  std::filesystem::create_directories(cfg_out_dir);
  const Table1Result result = run_table1(cfg, checkpoint, &std::cerr);
  const std::string path =
      emit_table(table1_to_table(result, cfg), format, cfg_out_dir, cfg.seed, cfg.config_hash);
  for (const auto& row : result.rows)
    emit_table(curve_to_table("table1_curve_" + row.label, row.curve, cfg.seed), format,
               cfg_out_dir, cfg.seed, cfg.config_hash);
  std::cout << path << "\n";
  return 0;
}

int cmd_scaling(const ExperimentConfig& cfg, EmitFormat format) {
  const ScalingResult result = run_scaling(cfg, &std::cerr);
  emit_table(scaling_to_table(result), format, cfg_out_dir, cfg.seed, cfg.config_hash);
  emit_table(curve_to_table("scaling_curve_base", result.base.curve, cfg.seed), format,
             cfg_out_dir, cfg.seed, cfg.config_hash);
  emit_table(curve_to_table("scaling_curve_scaled", result.scaled.curve, cfg.seed), format,
             cfg_out_dir, cfg.seed, cfg.config_hash);

  ResultTable summary;
  summary.name = "scaling_summary";
  summary.columns = {"scale",         "k_opt_base",       "k_opt_scaled",
                     "empirical_ratio", "theoretical_ratio", "C1",
                     "C2",            "theory_degenerate", "theory_kopt_base",
                     "theory_kopt_scaled", "seed",          "config_hash"};
  summary.add_row({format_real(result.scale), std::to_string(result.base.k_opt),
                   std::to_string(result.scaled.k_opt), format_real(result.empirical_ratio),
                   format_real(result.theoretical_ratio),
                   result.has_theory ? format_real(result.C1) : "",
                   result.has_theory ? format_real(result.C2) : "",
                   result.has_theory ? (result.theory_degenerate ? "1" : "0") : "",
                   std::to_string(result.theory_kopt_base),
                   std::to_string(result.theory_kopt_scaled), std::to_string(cfg.seed),
                   cfg.config_hash});
  const std::string path =
      emit_table(summary, format, cfg_out_dir, cfg.seed, cfg.config_hash);
  std::cout << "ratio=" << format_real(result.empirical_ratio)
            << " theory=" << format_real(result.theoretical_ratio) << " -> " << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-nearest-neighbor order selection experiments"};
  app.require_subcommand(1);

  GlobalArgs globals;
  app.add_option("--config", globals.config_path, "experiment configuration file (JSON)");
  app.add_option("--preset", globals.preset,
                 "built-in preset: table1-paper, table1-desk, scaling-d2, scaling-d16");
  app.add_option("--out", globals.out_dir, "output directory")->capture_default_str();
  app.add_option("--format", globals.format, "output format: csv or json")
      ->capture_default_str();
  auto* seed_opt = app.add_option("--seed", globals.seed, "master seed override");
  app.add_option("--workers", globals.workers, "worker thread count (0 = all cores)");

  auto* simulate = app.add_subcommand("simulate", "draw and dump one training set");
  std::uint64_t sim_index = 0;
  simulate->add_option("--index", sim_index, "replicate stream index")
      ->capture_default_str();

  auto* classify = app.add_subcommand("classify", "k-nn classify points with a dumped set");
  std::string training_path;
  int classify_k = 1;
  std::vector<std::string> classify_points;
  classify->add_option("--training", training_path, "dumped training-set CSV")->required();
  classify->add_option("--k", classify_k, "neighbor order")->required();
  classify->add_option("--point", classify_points, "query point \"x1,x2,...\" (repeatable)")
      ->required();

  auto* bayes = app.add_subcommand("bayes", "Bayes risk by quadrature");

  auto* select = app.add_subcommand("select-k", "bootstrap choice of the neighbor order");
  std::string select_training;
  std::uint64_t select_index = 0;
  double select_r = 0.0;
  int select_B = 0;
  select->add_option("--training", select_training, "dumped training-set CSV");
  select->add_option("--index", select_index, "stream index when simulating instead");
  select->add_option("--r", select_r, "resampling fraction (default: first configured)");
  select->add_option("--B", select_B, "number of resample pairs (default: configured)");

  auto* theory = app.add_subcommand("theory", "expansion constants and theoretical k_opt");
  auto* table1 = app.add_subcommand("table1", "full error-rate table with bootstrap columns");
  auto* scaling = app.add_subcommand("scaling", "k_opt ratio between two intensity levels");

  CLI11_PARSE(app, argc, argv);
  globals.seed_set = seed_opt->count() > 0;

  try {
    const ExperimentConfig cfg = resolve_config(globals);
    const EmitFormat format = parse_format(globals.format);
    cfg_out_dir = globals.out_dir;

    if (simulate->parsed()) return cmd_simulate(cfg, sim_index);
    if (classify->parsed()) return cmd_classify(training_path, classify_k, classify_points);
    if (bayes->parsed()) return cmd_bayes(cfg, format);
    if (select->parsed())
      return cmd_select_k(cfg, format, select_training, select_index, select_r, select_B);
    if (theory->parsed()) return cmd_theory(cfg, format);
    if (table1->parsed()) return cmd_table1(cfg, format);
    if (scaling->parsed()) return cmd_scaling(cfg, format);
    throw std::invalid_argument("no subcommand given");
  } catch (const std::exception& e) {
    const nlohmann::json err{{"error", {{"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
}
