#include "knnorder/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "knnorder/kselect.hpp"
#include "knnorder/parallel.hpp"
#include "knnorder/theory.hpp"

namespace knnorder {

using nlohmann::json;

namespace {

/// Bayes risk as the indicator sum over weighted test nodes (the d >= 3 route).
double mc_bayes_risk(const PopulationPair& pair, const ErrNodes& nodes) {
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    acc += pair.posterior_psi(nodes.node(i)) <= 0.5 ? nodes.wf[i] : nodes.wg[i];
  return acc;
}

struct RowWorkspace {
  ErrNodes nodes;
  double bayes = 0.0;
};

RowWorkspace make_workspace(const ExperimentConfig& cfg, const PopulationPair& pair,
                            const Region& region, std::uint64_t aux_stream) {
  RowWorkspace ws;
  const int d = pair.dim();
  if (d == 1) {
    const auto grid = make_simpson_grid(region, cfg.quadrature.d1_nodes);
    ws.nodes = ErrNodes::from_grid(pair, grid);
    ws.bayes = bayes_risk(pair, region, grid);
  } else if (d == 2) {
    const auto grid = make_midpoint_grid(region, cfg.quadrature.d2_nodes_per_axis);
    ws.nodes = ErrNodes::from_grid(pair, grid);
    ws.bayes = bayes_risk(pair, region, grid);
  } else {
    RngStream rng = split_stream(cfg.seed, aux_stream);
    ws.nodes = ErrNodes::from_mc(pair, region, cfg.quadrature.mc_points_per_class, rng);
    ws.bayes = mc_bayes_risk(pair, ws.nodes);
  }
  return ws;
}

TrainingSet draw_replicate(const PopulationPair& pair, SampleModel model, RngStream& rng) {
  if (model == SampleModel::Binomial) {
    const int T = std::max(1, static_cast<int>(std::llround(pair.mu() + pair.nu())));
    return draw_binomial_training(pair, T, rng);
  }
  for (int attempt = 0; attempt < 1000; ++attempt) {
    TrainingSet ts = draw_poisson_training(pair, rng);
    if (ts.size() > 0) return ts;
  }
  throw std::runtime_error("table run: training set empty after bounded retries");
}

Table1Row run_row(const ExperimentConfig& cfg, const RowConfig& row, std::size_t row_index,
                  std::ostream* log) {
  const PopulationPair pair = row.pair.build();
  const int d = pair.dim();
  const Region region = Region::cube(d, cfg.region_half_width);
  const int n_sets = cfg.n_training_sets;
  const int n_variants = static_cast<int>(cfg.bootstrap.r.size());
  const std::vector<int> k_grid = row.k_grid.materialize();
  const std::size_t n_k = k_grid.size();

  const RowWorkspace ws = make_workspace(
      cfg, pair, region, StreamLayout::aux(row_index, n_sets, n_variants));

  std::vector<std::vector<double>> contrib(n_sets);
  std::vector<std::vector<int>> k_tilde(n_sets, std::vector<int>(n_variants, 1));

  parallel_for(static_cast<std::size_t>(n_sets), cfg.workers, [&](std::size_t rep) {
    RngStream rng = split_stream(cfg.seed, StreamLayout::training(row_index, static_cast<int>(rep)));
    const TrainingSet ts = draw_replicate(pair, cfg.model, rng);

    const auto [xs, ys] = ts.split_by_label();
    for (int j = 0; j < n_variants; ++j) {
      if (xs.size() == 0 || ys.size() == 0) continue;  // freak draw: fall back to k = 1
      BootstrapPlan plan;
      plan.r = cfg.bootstrap.r[j];
      plan.B = cfg.bootstrap.B;
      const std::uint64_t bseed =
          split_stream(cfg.seed,
                       StreamLayout::bootstrap(row_index, n_sets, j, static_cast<int>(rep)))
              .next_u64();
      k_tilde[rep][j] = select_neighbor_order(xs, ys, plan, cfg.model, bseed, 1).k_tilde;
    }

    std::vector<int> ks = k_grid;
    for (int j = 0; j < n_variants; ++j) ks.push_back(k_tilde[rep][j]);
    contrib[rep] = training_set_contribution(ts, ws.nodes, ks);
  });

  Table1Row out;
  out.label = row.label;
  out.d = d;
  out.mu = pair.mu();
  out.nu = pair.nu();
  out.bayes = ws.bayes;
  out.stream_base = StreamLayout::row_base(row_index);

  out.curve.reserve(n_k);
  for (std::size_t t = 0; t < n_k; ++t) {
    double acc = 0.0;
    for (int rep = 0; rep < n_sets; ++rep) acc += contrib[rep][t];
    out.curve.push_back(ErrorEstimate::from(ws.nodes.wf_total + acc / n_sets, n_sets, k_grid[t]));
  }
  std::size_t best = 0;
  for (std::size_t t = 1; t < n_k; ++t)
    if (out.curve[t].err < out.curve[best].err) best = t;
  out.k_opt = k_grid[best];
  out.at_kopt = out.curve[best];

  for (int j = 0; j < n_variants; ++j) {
    double acc = 0.0, k_acc = 0.0;
    for (int rep = 0; rep < n_sets; ++rep) {
      acc += contrib[rep][n_k + j];
      k_acc += k_tilde[rep][j];
    }
    const ErrorEstimate est = ErrorEstimate::from(ws.nodes.wf_total + acc / n_sets, n_sets, 0);
    out.at_ktilde.push_back({cfg.bootstrap.r[j], est.err, est.se, k_acc / n_sets});
  }

  if (log)
    *log << "row " << out.label << ": bayes=" << format_real(out.bayes)
         << " k_opt=" << out.k_opt << " err=" << format_real(out.at_kopt.err) << "\n";
  return out;
}

json row_to_json(const Table1Row& row) {
  json cells = json::object();
  for (const auto& e : row.curve)
    cells[std::to_string(e.k)] = {{"err", e.err}, {"se", e.se}};
  json kt = json::array();
  for (const auto& s : row.at_ktilde)
    kt.push_back({{"r", s.r}, {"err", s.err}, {"se", s.se}, {"mean_k_tilde", s.mean_k_tilde}});
  return json{{"label", row.label}, {"d", row.d},     {"mu", row.mu},
              {"nu", row.nu},       {"bayes", row.bayes}, {"k_opt", row.k_opt},
              {"stream_base", row.stream_base}, {"cells", cells}, {"ktilde", kt}};
}

Table1Row row_from_json(const json& j, int n_sets) {
  Table1Row row;
  row.label = j.at("label").get<std::string>();
  row.d = j.at("d").get<int>();
  row.mu = j.at("mu").get<double>();
  row.nu = j.at("nu").get<double>();
  row.bayes = j.at("bayes").get<double>();
  row.k_opt = j.at("k_opt").get<int>();
  row.stream_base = j.at("stream_base").get<std::uint64_t>();
  std::vector<std::pair<int, ErrorEstimate>> cells;
  for (const auto& [key, value] : j.at("cells").items()) {
    ErrorEstimate e;
    e.k = std::stoi(key);
    e.err = value.at("err").get<double>();
    e.se = value.at("se").get<double>();
    e.n_replicates = n_sets;
    cells.emplace_back(e.k, e);
  }
  std::sort(cells.begin(), cells.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [k, e] : cells) {
    row.curve.push_back(e);
    if (k == row.k_opt) row.at_kopt = e;
  }
  for (const auto& s : j.at("ktilde"))
    row.at_ktilde.push_back({s.at("r").get<double>(), s.at("err").get<double>(),
                             s.at("se").get<double>(), s.at("mean_k_tilde").get<double>()});
  return row;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

Table1Result run_table1(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                        std::ostream* log) {
  if (cfg.table1_rows.empty())
    throw std::invalid_argument("run_table1: config has no table1 rows");
  for (const auto& row : cfg.table1_rows)
    if (row.k_grid.empty())
      throw std::invalid_argument("run_table1: row \"" + row.label + "\" has no k grid");

  Table1Result result;
  result.seed = cfg.seed;
  result.config_hash = cfg.config_hash;

  json done = json::object();
  if (!checkpoint_path.empty() && std::filesystem::exists(checkpoint_path)) {
    std::ifstream in(checkpoint_path);
    json ck = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (!ck.is_discarded() && ck.value("config_hash", "") == cfg.config_hash &&
        ck.contains("rows"))
      done = ck["rows"];
  }

  for (std::size_t i = 0; i < cfg.table1_rows.size(); ++i) {
    const auto& row_cfg = cfg.table1_rows[i];
    if (done.contains(row_cfg.label)) {
      result.rows.push_back(row_from_json(done[row_cfg.label], cfg.n_training_sets));
      if (log) *log << "row " << row_cfg.label << ": restored from checkpoint\n";
      continue;
    }
    Table1Row row = run_row(cfg, row_cfg, i, log);
    done[row.label] = row_to_json(row);
    result.rows.push_back(std::move(row));
    if (!checkpoint_path.empty()) {
      json ck{{"format", "knnorder/table1-checkpoint/v1"},
              {"seed", cfg.seed},
              {"config_hash", cfg.config_hash},
              {"rows", done}};
      write_file_atomic(checkpoint_path, ck.dump(1));
    }
  }
  return result;
}

ScalingResult run_scaling(const ExperimentConfig& cfg, std::ostream* log) {
  if (!cfg.scaling) throw std::invalid_argument("run_scaling: config has no scaling section");
  const ScalingConfig& sc = *cfg.scaling;
  if (sc.base.k_grid.empty())
    throw std::invalid_argument("run_scaling: base level has no k grid");

  ScalingResult result;
  result.seed = cfg.seed;
  result.config_hash = cfg.config_hash;
  result.scale = sc.scale;

  const int n_sets = cfg.n_training_sets;
  for (int level = 0; level < 2; ++level) {
    PairConfig pc = sc.base.pair;
    if (level == 1) {
      pc.mu *= sc.scale;
      pc.nu *= sc.scale;
    }
    const PopulationPair pair = pc.build();
    const Region region = Region::cube(pair.dim(), cfg.region_half_width);
    const KGridSpec& grid_spec =
        (level == 1 && !sc.k_grid_scaled.empty()) ? sc.k_grid_scaled : sc.base.k_grid;
    const std::vector<int> k_grid = grid_spec.materialize();

    const RowWorkspace ws =
        make_workspace(cfg, pair, region, StreamLayout::aux(level, n_sets, 0));
    const auto rows = replicate_contributions(pair, ws.nodes, k_grid, n_sets, cfg.seed,
                                              cfg.workers, StreamLayout::row_base(level),
                                              cfg.model);

    ScalingLevel& out = level == 0 ? result.base : result.scaled;
    out.label = level == 0 ? sc.base.label : sc.base.label + "-scaled";
    out.mu = pair.mu();
    out.nu = pair.nu();
    out.stream_base = StreamLayout::row_base(level);
    out.curve.reserve(k_grid.size());
    for (std::size_t t = 0; t < k_grid.size(); ++t) {
      double acc = 0.0;
      for (int rep = 0; rep < n_sets; ++rep) acc += rows[rep][t];
      out.curve.push_back(
          ErrorEstimate::from(ws.nodes.wf_total + acc / n_sets, n_sets, k_grid[t]));
    }
    std::size_t best = 0;
    for (std::size_t t = 1; t < out.curve.size(); ++t)
      if (out.curve[t].err < out.curve[best].err) best = t;
    out.k_opt = k_grid[best];
    out.at_kopt = out.curve[best];
    if (log)
      *log << "level " << out.label << ": k_opt=" << out.k_opt
           << " err=" << format_real(out.at_kopt.err) << "\n";
  }

  const int d = sc.base.pair.dim();
  result.empirical_ratio =
      static_cast<double>(result.scaled.k_opt) / static_cast<double>(result.base.k_opt);
  result.theoretical_ratio = std::pow(sc.scale, 4.0 / (d + 4.0));

  if (d <= 2) {
    const PopulationPair pair = sc.base.pair.build();
    const Region region = Region::cube(d, cfg.region_half_width);
    const int resolution = cfg.quadrature.boundary_resolution > 0
                               ? cfg.quadrature.boundary_resolution
                               : (d == 1 ? cfg.quadrature.d1_nodes
                                         : cfg.quadrature.d2_nodes_per_axis);
    const auto report = expansion_constants(find_boundary(pair, region, resolution));
    result.has_theory = true;
    result.C1 = report.C1;
    result.C2 = report.C2;
    result.theory_degenerate = report.degenerate;
    if (!report.degenerate) {
      result.theory_kopt_base = theoretical_kopt(report, pair.nu(), d);
      result.theory_kopt_scaled = theoretical_kopt(report, pair.nu() * sc.scale, d);
    }
  }
  return result;
}

std::string format_real(double v) {
  if (v == 0.0) v = 0.0;  // collapse negative zero
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

EmitFormat parse_format(const std::string& name) {
  if (name == "csv") return EmitFormat::Csv;
  if (name == "json") return EmitFormat::Json;
  throw std::invalid_argument("format must be csv or json, got \"" + name + "\"");
}

void ResultTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns.size())
    throw std::invalid_argument("ResultTable: row width does not match columns");
  for (const auto& cell : cells)
    if (cell.find_first_of(",\"\n") != std::string::npos)
      throw std::invalid_argument("ResultTable: cell contains a CSV delimiter: " + cell);
  rows.push_back(std::move(cells));
}

std::string emit_table(const ResultTable& table, EmitFormat format, const std::string& out_dir,
                       std::uint64_t seed, const std::string& config_hash) {
  std::filesystem::create_directories(out_dir);
  const std::string ext = format == EmitFormat::Csv ? ".csv" : ".json";
  const std::string path = (std::filesystem::path(out_dir) / (table.name + ext)).string();

  std::ostringstream out;
  if (format == EmitFormat::Csv) {
    out << "# knnorder " << table.name << " v1 seed=" << seed << " config=" << config_hash
        << "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      out << table.columns[c] << (c + 1 < table.columns.size() ? "," : "\n");
    for (const auto& row : table.rows)
      for (std::size_t c = 0; c < row.size(); ++c)
        out << row[c] << (c + 1 < row.size() ? "," : "\n");
  } else {
    json j{{"format", "knnorder/" + table.name + "/v1"},
           {"seed", seed},
           {"config_hash", config_hash},
           {"columns", table.columns},
           {"rows", table.rows}};
    out << j.dump(1) << "\n";
  }
  write_file_atomic(path, out.str());
  return path;
}

ResultTable parse_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  ResultTable table;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# knnorder ", 0) != 0)
    throw std::runtime_error(path + ": missing version header");
  {
    std::istringstream hs(line.substr(2));
    std::string magic;
    hs >> magic >> table.name;
  }
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  if (std::getline(in, line)) table.columns = split(line);
  while (std::getline(in, line))
    if (!line.empty()) table.add_row(split(line));
  return table;
}

ResultTable parse_table_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  const json j = json::parse(in);
  ResultTable table;
  const std::string format = j.at("format").get<std::string>();
  const auto slash1 = format.find('/');
  const auto slash2 = format.rfind('/');
  if (slash1 == std::string::npos || slash2 <= slash1)
    throw std::runtime_error(path + ": malformed format tag");
  table.name = format.substr(slash1 + 1, slash2 - slash1 - 1);
  table.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& row : j.at("rows")) table.add_row(row.get<std::vector<std::string>>());
  return table;
}

ResultTable table1_to_table(const Table1Result& result, const ExperimentConfig& cfg) {
  ResultTable table;
  table.name = "table1";
  table.columns = {"label", "d", "mu", "nu", "bayes", "k_opt", "err_kopt", "se_kopt"};
  const std::size_t n_variants = cfg.bootstrap.r.size();
  for (std::size_t j = 0; j < n_variants; ++j) {
    const std::string suffix = "_r" + std::to_string(j + 1);
    table.columns.push_back("r" + std::to_string(j + 1));
    table.columns.push_back("err_ktilde" + suffix);
    table.columns.push_back("se_ktilde" + suffix);
    table.columns.push_back("mean_ktilde" + suffix);
  }
  table.columns.insert(table.columns.end(),
                       {"n_sets", "seed", "stream_base", "config_hash"});

  for (const auto& row : result.rows) {
    std::vector<std::string> cells{row.label,
                                   std::to_string(row.d),
                                   format_real(row.mu),
                                   format_real(row.nu),
                                   format_real(row.bayes),
                                   std::to_string(row.k_opt),
                                   format_real(row.at_kopt.err),
                                   format_real(row.at_kopt.se)};
    for (std::size_t j = 0; j < n_variants; ++j) {
      if (j < row.at_ktilde.size()) {
        cells.push_back(format_real(row.at_ktilde[j].r));
        cells.push_back(format_real(row.at_ktilde[j].err));
        cells.push_back(format_real(row.at_ktilde[j].se));
        cells.push_back(format_real(row.at_ktilde[j].mean_k_tilde));
      } else {
        cells.insert(cells.end(), {"", "", "", ""});
      }
    }
    cells.push_back(std::to_string(cfg.n_training_sets));
    cells.push_back(std::to_string(result.seed));
    cells.push_back(std::to_string(row.stream_base));
    cells.push_back(result.config_hash);
    table.add_row(std::move(cells));
  }
  return table;
}

ResultTable curve_to_table(const std::string& name, std::span<const ErrorEstimate> curve,
                           std::uint64_t seed) {
  ResultTable table;
  table.name = name;
  table.columns = {"k", "err", "se", "n_sets", "seed"};
  for (const auto& e : curve)
    table.add_row({std::to_string(e.k), format_real(e.err), format_real(e.se),
                   std::to_string(e.n_replicates), std::to_string(seed)});
  return table;
}

ResultTable scaling_to_table(const ScalingResult& result) {
  ResultTable table;
  table.name = "scaling";
  table.columns = {"level", "label",    "mu",   "nu",          "k_opt",
                   "err",   "se",       "n_sets", "stream_base", "config_hash"};
  for (int level = 0; level < 2; ++level) {
    const ScalingLevel& l = level == 0 ? result.base : result.scaled;
    table.add_row({std::to_string(level), l.label, format_real(l.mu), format_real(l.nu),
                   std::to_string(l.k_opt), format_real(l.at_kopt.err),
                   format_real(l.at_kopt.se), std::to_string(l.at_kopt.n_replicates),
                   std::to_string(l.stream_base), result.config_hash});
  }
  return table;
}

void dump_training_csv(const TrainingSet& ts, const std::string& path) {
  std::ostringstream out;
  out << "# knnorder training-set v1 seed=" << ts.master_seed << " stream=" << ts.stream_index
      << " model=" << to_string(ts.model) << " dim=" << ts.dim << "\n";
  for (int j = 0; j < ts.dim; ++j) out << "x" << (j + 1) << ",";
  out << "label\n";
  char buf[48];
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto p = ts.point(i);
    for (int j = 0; j < ts.dim; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", p[j]);
      out << buf << ",";
    }
    out << to_string(ts.labels[i]) << "\n";
  }
  write_file_atomic(path, out.str());
}

TrainingSet load_training_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# knnorder training-set v1", 0) != 0)
    throw std::runtime_error(path + ": not a knnorder training-set file");

  TrainingSet ts;
  std::istringstream hs(line);
  std::string token;
  while (hs >> token) {
    if (token.rfind("seed=", 0) == 0) ts.master_seed = std::stoull(token.substr(5));
    if (token.rfind("stream=", 0) == 0) ts.stream_index = std::stoull(token.substr(7));
    if (token.rfind("dim=", 0) == 0) ts.dim = std::stoi(token.substr(4));
    if (token == "model=binomial") ts.model = SampleModel::Binomial;
  }
  if (ts.dim < 1) throw std::runtime_error(path + ": header lacks a dimension");

  std::getline(in, line);  // column header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    for (int j = 0; j < ts.dim; ++j) {
      if (!std::getline(ss, cell, ','))
        throw std::runtime_error(path + ": truncated row");
      ts.points.push_back(std::stod(cell));
    }
    if (!std::getline(ss, cell, ','))
      throw std::runtime_error(path + ": missing label");
    if (cell != "X" && cell != "Y") throw std::runtime_error(path + ": bad label " + cell);
    ts.labels.push_back(cell == "X" ? Label::X : Label::Y);
  }
  return ts;
}

}  // namespace knnorder
