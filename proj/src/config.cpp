#include "knnorder/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace knnorder {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw std::invalid_argument("config: " + path + ": " + message);
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

double require_positive(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!(v > 0.0)) fail(path, "must be positive");
  return v;
}

int require_positive_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  const int v = j.get<int>();
  if (v < 1) fail(path, "must be >= 1");
  return v;
}

DensityConfig parse_density(const json& j, const std::string& path) {
  DensityConfig out;
  if (!j.is_object()) fail(path, "expected an object with mean and covariance");
  if (!j.contains("mean") || !j["mean"].is_array() || j["mean"].empty())
    fail(path + ".mean", "expected a nonempty array");
  out.mean = j["mean"].get<std::vector<double>>();
  const std::size_t d = out.mean.size();
  if (!j.contains("covariance") || !j["covariance"].is_array())
    fail(path + ".covariance", "expected a d x d array of rows");
  for (const auto& row : j["covariance"]) {
    if (!row.is_array() || row.size() != d)
      fail(path + ".covariance", "each row must have length " + std::to_string(d));
    out.covariance.push_back(row.get<std::vector<double>>());
  }
  if (out.covariance.size() != d)
    fail(path + ".covariance", "expected " + std::to_string(d) + " rows");
  return out;
}

PairConfig parse_pair(const json& j, const std::string& path) {
  PairConfig out;
  if (!j.is_object()) fail(path, "expected an object");
  if (!j.contains("f")) fail(path + ".f", "missing density");
  if (!j.contains("g")) fail(path + ".g", "missing density");
  out.f = parse_density(j["f"], path + ".f");
  out.g = parse_density(j["g"], path + ".g");
  if (out.f.mean.size() != out.g.mean.size())
    fail(path, "f and g dimensions differ");
  if (!j.contains("mu")) fail(path + ".mu", "missing intensity");
  if (!j.contains("nu")) fail(path + ".nu", "missing intensity");
  out.mu = require_positive(j["mu"], path + ".mu");
  out.nu = require_positive(j["nu"], path + ".nu");
  out.build();  // surfaces SPD and symmetry violations now, not mid-run
  return out;
}

KGridSpec parse_k_grid(const json& j, const std::string& path) {
  KGridSpec out;
  if (!j.is_object()) fail(path, "expected an object with values or min/max");
  if (j.contains("values")) {
    out.values = j["values"].get<std::vector<int>>();
    if (out.values.empty()) fail(path + ".values", "must be nonempty");
    for (int k : out.values)
      if (k < 1) fail(path + ".values", "every k must be >= 1");
    for (std::size_t i = 1; i < out.values.size(); ++i)
      if (out.values[i] <= out.values[i - 1]) fail(path + ".values", "must be strictly increasing");
    return out;
  }
  if (j.contains("min")) out.min = require_positive_int(j["min"], path + ".min");
  if (!j.contains("max")) fail(path + ".max", "missing (or provide values)");
  out.max = require_positive_int(j["max"], path + ".max");
  if (out.max < out.min) fail(path + ".max", "must be >= min");
  return out;
}

RowConfig parse_row(const json& j, const std::string& path) {
  RowConfig out;
  if (!j.contains("label") || !j["label"].is_string() || j["label"].get<std::string>().empty())
    fail(path + ".label", "expected a nonempty string");
  out.label = j["label"].get<std::string>();
  if (!j.contains("pair")) fail(path + ".pair", "missing");
  out.pair = parse_pair(j["pair"], path + ".pair");
  if (j.contains("k_grid")) out.k_grid = parse_k_grid(j["k_grid"], path + ".k_grid");
  if (j.contains("paper_kopt")) out.paper_kopt = require_positive_int(j["paper_kopt"], path + ".paper_kopt");
  return out;
}

json density_json(const DensityConfig& d) {
  return json{{"mean", d.mean}, {"covariance", d.covariance}};
}

json pair_json(const PairConfig& p) {
  return json{{"f", density_json(p.f)}, {"g", density_json(p.g)}, {"mu", p.mu}, {"nu", p.nu}};
}

json k_grid_json(const KGridSpec& k) {
  if (!k.values.empty()) return json{{"values", k.values}};
  return json{{"min", k.min}, {"max", k.max}};
}

json row_json(const RowConfig& r) {
  json j{{"label", r.label}, {"pair", pair_json(r.pair)}};
  if (!r.k_grid.empty()) j["k_grid"] = k_grid_json(r.k_grid);
  if (r.paper_kopt > 0) j["paper_kopt"] = r.paper_kopt;
  return j;
}

DensityConfig gaussian_config(std::vector<double> mean, double correlation = 0.0) {
  DensityConfig d;
  d.mean = std::move(mean);
  const std::size_t dim = d.mean.size();
  d.covariance.assign(dim, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < dim; ++i) d.covariance[i][i] = 1.0;
  if (dim == 2) {
    d.covariance[0][1] = correlation;
    d.covariance[1][0] = correlation;
  }
  return d;
}

RowConfig standard_row(const std::string& label, int d, double correlation, double mu,
                       double nu, int k_max, int paper_kopt) {
  RowConfig row;
  row.label = label;
  if (d == 1) {
    row.pair.f = gaussian_config({-0.5});
    row.pair.g = gaussian_config({0.5});
  } else {
    row.pair.f = gaussian_config({0.5, -0.5}, correlation);
    row.pair.g = gaussian_config({-0.5, 0.5}, correlation);
  }
  row.pair.mu = mu;
  row.pair.nu = nu;
  row.k_grid.min = 1;
  row.k_grid.max = k_max;
  row.paper_kopt = paper_kopt;
  return row;
}

std::vector<RowConfig> table1_standard_rows() {
  return {
      standard_row("d1-mu100-nu100", 1, 0.0, 100, 100, 250, 103),
      standard_row("d1-mu100-nu200", 1, 0.0, 100, 200, 250, 61),
      standard_row("d2-corr00-mu100-nu100", 2, 0.0, 100, 100, 150, 71),
      standard_row("d2-corr05-mu100-nu100", 2, 0.5, 100, 100, 150, 39),
      standard_row("d2-corr00-mu100-nu200", 2, 0.0, 100, 200, 150, 45),
      standard_row("d2-corr05-mu100-nu200", 2, 0.5, 100, 200, 150, 27),
  };
}

}  // namespace

GaussianSpec DensityConfig::build() const {
  const auto d = static_cast<Eigen::Index>(mean.size());
  Eigen::VectorXd m(d);
  for (Eigen::Index i = 0; i < d; ++i) m[i] = mean[i];
  Eigen::MatrixXd c(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) c(i, j) = covariance[i][j];
  return GaussianSpec(m, c);
}

std::vector<int> KGridSpec::materialize() const {
  if (!values.empty()) return values;
  if (max == 0) throw std::invalid_argument("k_grid: unset");
  std::vector<int> out;
  out.reserve(max - min + 1);
  for (int k = min; k <= max; ++k) out.push_back(k);
  return out;
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("$", "top level must be an object");

  ExperimentConfig cfg;
  if (j.contains("version")) {
    cfg.version = j["version"].get<int>();
    if (cfg.version != 1) fail("version", "only version 1 is supported");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
      fail("seed", "expected a 64-bit integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("workers")) {
    cfg.workers = j["workers"].get<int>();
    if (cfg.workers < 0) fail("workers", "must be >= 0");
  }
  if (j.contains("model")) {
    const std::string m = j["model"].get<std::string>();
    if (m == "poisson")
      cfg.model = SampleModel::Poisson;
    else if (m == "binomial")
      cfg.model = SampleModel::Binomial;
    else
      fail("model", "expected \"poisson\" or \"binomial\"");
  }
  if (j.contains("n_training_sets"))
    cfg.n_training_sets = require_positive_int(j["n_training_sets"], "n_training_sets");
  if (j.contains("region_half_width"))
    cfg.region_half_width = require_positive(j["region_half_width"], "region_half_width");

  if (j.contains("quadrature")) {
    const auto& q = j["quadrature"];
    if (q.contains("d1_nodes")) {
      cfg.quadrature.d1_nodes = require_positive_int(q["d1_nodes"], "quadrature.d1_nodes");
      if (cfg.quadrature.d1_nodes % 2 == 0 || cfg.quadrature.d1_nodes < 3)
        fail("quadrature.d1_nodes", "Simpson rule needs an odd node count >= 3");
    }
    if (q.contains("d2_nodes_per_axis"))
      cfg.quadrature.d2_nodes_per_axis =
          require_positive_int(q["d2_nodes_per_axis"], "quadrature.d2_nodes_per_axis");
    if (q.contains("mc_points_per_class"))
      cfg.quadrature.mc_points_per_class =
          require_positive_int(q["mc_points_per_class"], "quadrature.mc_points_per_class");
    if (q.contains("boundary_resolution"))
      cfg.quadrature.boundary_resolution =
          require_positive_int(q["boundary_resolution"], "quadrature.boundary_resolution");
  }

  if (j.contains("bootstrap")) {
    const auto& b = j["bootstrap"];
    if (b.contains("r")) {
      cfg.bootstrap.r = b["r"].get<std::vector<double>>();
      if (cfg.bootstrap.r.empty()) fail("bootstrap.r", "must be nonempty");
      for (double r : cfg.bootstrap.r)
        if (!(r > 0.0) || !(r < 1.0)) fail("bootstrap.r", "every fraction must lie in (0, 1)");
    }
    if (b.contains("B")) cfg.bootstrap.B = require_positive_int(b["B"], "bootstrap.B");
  }

  if (j.contains("pair")) cfg.pair = parse_pair(j["pair"], "pair");
  if (j.contains("table1")) {
    if (!j["table1"].contains("rows") || !j["table1"]["rows"].is_array() ||
        j["table1"]["rows"].empty())
      fail("table1.rows", "expected a nonempty array");
    int i = 0;
    for (const auto& row : j["table1"]["rows"])
      cfg.table1_rows.push_back(parse_row(row, "table1.rows[" + std::to_string(i++) + "]"));
  }
  if (j.contains("scaling")) {
    const auto& s = j["scaling"];
    ScalingConfig sc;
    if (!s.contains("base")) fail("scaling.base", "missing");
    sc.base = parse_row(s["base"], "scaling.base");
    if (s.contains("scale")) sc.scale = require_positive(s["scale"], "scaling.scale");
    if (sc.scale <= 1.0) fail("scaling.scale", "must exceed 1");
    if (s.contains("k_grid_scaled"))
      sc.k_grid_scaled = parse_k_grid(s["k_grid_scaled"], "scaling.k_grid_scaled");
    cfg.scaling = std::move(sc);
  }

  cfg.rehash();
  return cfg;
}

ExperimentConfig ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["version"] = version;
  j["seed"] = seed;
  // workers is a runtime knob with no effect on results, so it stays out of
  // the canonical form and the config hash.
  j["model"] = to_string(model);
  j["n_training_sets"] = n_training_sets;
  j["region_half_width"] = region_half_width;
  j["quadrature"] = {{"d1_nodes", quadrature.d1_nodes},
                     {"d2_nodes_per_axis", quadrature.d2_nodes_per_axis},
                     {"mc_points_per_class", quadrature.mc_points_per_class}};
  if (quadrature.boundary_resolution > 0)
    j["quadrature"]["boundary_resolution"] = quadrature.boundary_resolution;
  j["bootstrap"] = {{"r", bootstrap.r}, {"B", bootstrap.B}};
  if (pair) j["pair"] = pair_json(*pair);
  if (!table1_rows.empty()) {
    json rows = json::array();
    for (const auto& r : table1_rows) rows.push_back(row_json(r));
    j["table1"] = {{"rows", rows}};
  }
  if (scaling) {
    j["scaling"] = {{"base", row_json(scaling->base)}, {"scale", scaling->scale}};
    if (!scaling->k_grid_scaled.empty())
      j["scaling"]["k_grid_scaled"] = k_grid_json(scaling->k_grid_scaled);
  }
  return j.dump(2);
}

void ExperimentConfig::rehash() {
  config_hash.clear();
  config_hash = hex64(fnv1a(to_json_text()));
}

std::vector<std::string> ExperimentConfig::preset_names() {
  return {"table1-paper", "table1-desk", "scaling-d2", "scaling-d16"};
}

ExperimentConfig ExperimentConfig::preset(const std::string& name) {
  ExperimentConfig cfg;
  if (name == "table1-paper") {
    cfg.n_training_sets = 500;
    cfg.table1_rows = table1_standard_rows();
    cfg.pair = cfg.table1_rows.front().pair;
  } else if (name == "table1-desk") {
    cfg.n_training_sets = 100;
    cfg.quadrature.d1_nodes = 201;
    cfg.table1_rows = table1_standard_rows();
    cfg.pair = cfg.table1_rows.front().pair;
  } else if (name == "scaling-d2") {
    cfg.n_training_sets = 100;
    ScalingConfig sc;
    sc.base = standard_row("d2-corr05-mu100-nu200", 2, 0.5, 100, 200, 100, 27);
    sc.scale = 4.0;
    sc.k_grid_scaled.min = 1;
    sc.k_grid_scaled.max = 220;
    cfg.scaling = std::move(sc);
    cfg.pair = cfg.scaling->base.pair;
  } else if (name == "scaling-d16") {
    cfg.n_training_sets = 500;
    ScalingConfig sc;
    RowConfig row;
    row.label = "d16-mu100-nu200";
    row.pair.f = gaussian_config(std::vector<double>(16, 0.25));
    row.pair.g = gaussian_config(std::vector<double>(16, -0.25));
    row.pair.mu = 100;
    row.pair.nu = 200;
    row.k_grid.min = 1;
    row.k_grid.max = 80;
    row.paper_kopt = 25;
    sc.base = std::move(row);
    sc.scale = 100.0;
    sc.k_grid_scaled.min = 1;
    sc.k_grid_scaled.max = 220;
    cfg.scaling = std::move(sc);
    cfg.pair = cfg.scaling->base.pair;
  } else {
    throw std::invalid_argument("config: unknown preset \"" + name + "\"");
  }
  cfg.rehash();
  return cfg;
}

}  // namespace knnorder
