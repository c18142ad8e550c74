#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "tgeom/euclideanity.hpp"
#include "tgeom/report.hpp"
#include "tgeom/riemannian.hpp"
#include "tgeom/sigma_calculus.hpp"
#include "tgeom/tube.hpp"

namespace tgeom::cli {

namespace {

const Json& block(const Json& config, const std::string& name) { return require_field(config, name, ""); }

std::size_t budget_field(const Json& parent, const std::string& key, const std::string& path, std::size_t fallback) {
  if (!parent.contains(key)) return fallback;
  const int b = integer_field(parent, key, path);
  if (b < 1) throw ConfigError(path + "." + key, "budget must be >= 1");
  return static_cast<std::size_t>(b);
}

double tolerance_field(const Json& parent, const std::string& key, const std::string& path, double fallback) {
  const double t = optional_number(parent, key, path).value_or(fallback);
  if (!(t > 0.0)) throw ConfigError(path + "." + key, "tolerance must be positive");
  return t;
}

std::uint64_t seed_of(const Json& config) { return config.at("seed").get<std::uint64_t>(); }

Json sample_tube_report(const TubeSpec& spec, const TubeSampleSet& set) {
  Json out = to_json(set, spec.kind());
  out["p0"] = to_json(spec.p0());
  out["p1"] = to_json(spec.p1());
  if (spec.q0()) out["q0"] = to_json(*spec.q0());
  return out;
}

// --- sigma ---------------------------------------------------------------

CommandResult cmd_sigma(const Json& config) {
  const Json& geometry = block(config, "geometry");
  const WorldFunction sigma = geometry_from_json(geometry, "geometry");
  const auto points = points_from_json(block(config, "points"), "points");
  if (points.size() != 2) throw ConfigError("points", "sigma needs exactly two points");
  require_dim(sigma.dim(), {&points[0], &points[1]});
  CommandResult r;
  r.report["sigma"] = sigma(points[0], points[1]);
  if (sigma.kind() == GeometryKind::numeric_riemannian) {
    const MetricField metric = metric_field_from_json(geometry.at("metric_field"), "geometry.metric_field");
    const GeodesicSolution sol = geodesic_bvp(metric, points[0], points[1], bvp_options_from_json(geometry, "geometry"));
    r.report["bvp"] = {{"converged", sol.converged},
                       {"residual", sol.residual},
                       {"iterations", sol.iterations},
                       {"length", sol.length},
                       {"interval_sign", sol.interval_sign},
                       {"message", sol.message}};
    r.side_files.emplace_back(".geodesic.csv", geodesic_csv(sol));
  }
  return r;
}

// --- parallel ------------------------------------------------------------

CommandResult cmd_parallel(const Json& config) {
  const WorldFunction sigma = geometry_from_json(block(config, "geometry"), "geometry");
  const auto points = points_from_json(block(config, "points"), "points");
  if (points.size() != 4) throw ConfigError("points", "parallel needs four points: a origin, a head, b origin, b head");
  const PointPairVector a(points[0], points[1]);
  const PointPairVector b(points[2], points[3]);
  CommandResult r;
  r.report["scalar_product"] = scalar_product(sigma, a, b);
  r.report["squared_norms"] = {squared_norm(sigma, a), squared_norm(sigma, b)};
  try {
    r.report["parallel"] = is_parallel(sigma, a, b);
  } catch (const IndefiniteNorm& e) {
    r.report["parallel"] = "indefinite";
    r.report["parallel_error"] = e.what();
  }
  r.report["collinear"] = is_collinear(sigma, a, b);
  r.report["residual"] = collinearity_defect(sigma, a, b);
  return r;
}

// --- tube ----------------------------------------------------------------

TubeSpec tube_spec_from_json(const WorldFunction& sigma, const Json& t) {
  const std::string path = "tube";
  const auto kind_json = t.contains("kind") ? t.at("kind").get<std::string>() : std::string("tube-through-origin");
  TubeKind kind;
  try {
    kind = parse_tube_kind(kind_json);
  } catch (const InvalidArgument& e) {
    throw ConfigError("tube.kind", e.what());
  }
  Point p0 = point_from_json(require_field(t, "p0", path), "tube.p0");
  Point p1 = point_from_json(require_field(t, "p1", path), "tube.p1");
  require_dim(sigma.dim(), {&p0, &p1});
  switch (kind) {
    case TubeKind::through_origin:
      return TubeSpec::through_origin(sigma, p0, p1);
    case TubeKind::remote:
      return TubeSpec::remote(sigma, p0, p1, point_from_json(require_field(t, "q0", path), "tube.q0"));
    case TubeKind::surface_intersection_line:
      return TubeSpec::surface_intersection_line(sigma, p0, p1, points_from_json(require_field(t, "aux", path), "tube.aux"));
  }
  throw ConfigError("tube.kind", "unsupported");
}

CommandResult cmd_tube(const Json& config) {
  const WorldFunction sigma = geometry_from_json(block(config, "geometry"), "geometry");
  const Json& t = block(config, "tube");
  TubeSpec spec = [&] {
    try {
      return tube_spec_from_json(sigma, t);
    } catch (const ConfigError&) {
      throw;
    } catch (const InvalidArgument& e) {
      throw ConfigError("tube", e.what());
    }
  }();
  const SearchRegion region = region_from_json(require_field(t, "region", "tube"), sigma.dim(), "tube.region");
  SampleOptions opts;
  opts.budget = budget_field(t, "budget", "tube", opts.budget);
  opts.tol = tolerance_field(t, "tol", "tube", opts.tol);
  if (t.contains("classify")) opts.classify = t.at("classify").get<bool>();
  if (!region.contains(spec.anchor().coords())) throw ConfigError("tube.region", "region must contain the tube origin");

  const TubeSampleSet set = sample_tube(spec, region, opts);
  CommandResult r;
  r.report = sample_tube_report(spec, set);
  if (t.contains("thickness")) {
    const Json& th = t.at("thickness");
    ThicknessOptions topts;
    if (th.contains("directions")) topts.directions = integer_field(th, "directions", "tube.thickness");
    if (th.contains("radial_steps")) topts.radial_steps = integer_field(th, "radial_steps", "tube.thickness");
    topts.max_radius = optional_number(th, "max_radius", "tube.thickness").value_or(0.0);
    topts.tol = tolerance_field(th, "tol", "tube.thickness", topts.tol);
    Json values = Json::array();
    for (const Point& station : points_from_json(require_field(th, "stations", "tube.thickness"), "tube.thickness.stations")) {
      try {
        values.push_back({{"station", to_json(station)}, {"thickness", tube_cross_section_thickness(spec, station, topts)}});
      } catch (const InvalidArgument& e) {
        throw ConfigError("tube.thickness.stations", e.what());
      }
    }
    r.report["thickness"] = std::move(values);
  }
  r.side_files.emplace_back(".samples.csv", samples_csv(set));
  r.side_files.emplace_back(".proj.csv", projections_csv(set));
  if (set.samples.empty()) {
    r.exit_code = empty_result;
    r.error = set.diagnostic;
  }
  return r;
}

// --- conditions ----------------------------------------------------------

CommandResult cmd_conditions(const Json& config) {
  const WorldFunction sigma = geometry_from_json(block(config, "geometry"), "geometry");
  const Json& c = block(config, "conditions");
  const int dim = sigma.dim();
  const int n = c.contains("n") ? integer_field(c, "n", "conditions") : dim;
  if (n < 1) throw ConfigError("conditions.n", "must be >= 1");

  std::vector<Point> cloud;
  std::optional<SearchRegion> region;
  if (c.contains("region")) region = region_from_json(c.at("region"), dim, "conditions.region");
  const Json& cloud_json = require_field(c, "cloud", "conditions");
  if (cloud_json.is_array()) {
    cloud = points_from_json(cloud_json, "conditions.cloud");
    for (std::size_t i = 0; i < cloud.size(); ++i)
      if (cloud[i].dim() != dim) throw ConfigError("conditions.cloud[" + std::to_string(i) + "]", "wrong dimension");
  } else {
    const SearchRegion box = region_from_json(require_field(cloud_json, "region", "conditions.cloud"), dim,
                                              "conditions.cloud.region");
    const std::size_t size = budget_field(cloud_json, "size", "conditions.cloud", 50);
    std::mt19937_64 rng(seed_of(config));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < size; ++i) {
      Vector x(dim);
      for (int k = 0; k < dim; ++k) x[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * unit(rng);
      cloud.emplace_back(x);
    }
    if (!region) region = box;
  }
  if (cloud.size() < static_cast<std::size_t>(n) + 2) throw ConfigError("conditions.cloud", "cloud size must be >= n + 2");
  if (!region) {
    Vector lo = cloud.front().coords(), hi = lo;
    for (const auto& p : cloud) {
      lo = lo.cwiseMin(p.coords());
      hi = hi.cwiseMax(p.coords());
    }
    region = SearchRegion{lo.array() - 1.0, hi.array() + 1.0};
  }

  ConditionIOptions iopts;
  iopts.seed = seed_of(config);
  if (c.contains("trials")) iopts.trials = integer_field(c, "trials", "conditions");
  iopts.tol = tolerance_field(c, "tol", "conditions", iopts.tol);

  std::vector<ConditionReport> reports;
  reports.push_back(check_condition_I(sigma, n, cloud, iopts));
  const BasisFrame frame = select_frame(sigma, n, cloud, iopts);
  CommandResult r;
  r.report["frame"] = {{"origin", to_json(frame.origin())}, {"heads", Json::array()}};
  for (const auto& h : frame.heads()) r.report["frame"]["heads"].push_back(to_json(h));
  if (frame.regular()) {
    std::vector<std::pair<Point, Point>> pairs;
    for (std::size_t i = 0; i < cloud.size() && pairs.size() < 2000; ++i)
      for (std::size_t j = i + 1; j < cloud.size() && pairs.size() < 2000; ++j) pairs.emplace_back(cloud[i], cloud[j]);
    reports.push_back(check_condition_II(sigma, frame, pairs, tolerance_field(c, "tol_II", "conditions", 1e-9)));
    reports.push_back(check_condition_III(frame));
    const std::size_t count = std::min(cloud.size(), budget_field(c, "targets", "conditions", 10));
    std::vector<Vector> targets;
    for (std::size_t i = 0; i < count; ++i) targets.push_back(sigma_coordinates(sigma, frame, cloud[i]));
    reports.push_back(check_condition_IV(sigma, frame, targets, *region));
  } else {
    for (Condition cond : {Condition::II, Condition::III, Condition::IV}) {
      ConditionReport rep{cond, false, {}};
      rep.witness.note = "no nonsingular frame of size n in the cloud";
      rep.witness.points.push_back(frame.origin());
      for (const auto& h : frame.heads()) rep.witness.points.push_back(h);
      reports.push_back(std::move(rep));
    }
  }
  bool all = true;
  r.report["conditions"] = Json::array();
  for (const auto& rep : reports) {
    all = all && rep.passed;
    r.report["conditions"].push_back(to_json(rep));
  }
  r.report["n"] = n;
  r.report["cloud_size"] = cloud.size();
  r.report["passed"] = all;
  return r;
}

// --- transport -----------------------------------------------------------

std::vector<Point> path_from_json(const Json& p, const std::string& path, int dim) {
  const auto vertices = points_from_json(require_field(p, "vertices", path), path + ".vertices");
  if (vertices.size() < 2) throw ConfigError(path + ".vertices", "a path needs at least two vertices");
  for (const auto& v : vertices)
    if (v.dim() != dim) throw ConfigError(path + ".vertices", "vertex dimension differs from the metric");
  const std::string edges = p.contains("edges") ? p.at("edges").get<std::string>() : std::string("chart");
  const int sub = p.contains("subdivide") ? integer_field(p, "subdivide", path) : 1;
  if (sub < 1) throw ConfigError(path + ".subdivide", "must be >= 1");
  std::vector<Point> out{vertices.front()};
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    const Point a = out.back();
    if (edges == "chart") {
      for (int s = 1; s <= sub; ++s) {
        const double t = static_cast<double>(s) / sub;
        out.emplace_back(Vector((1.0 - t) * a.coords() + t * vertices[i].coords()));
      }
    } else if (edges == "great-circle") {
      if (dim != 2) throw ConfigError(path + ".edges", "great-circle edges need a 2D sphere chart");
      const auto arc = great_circle_polyline(a, vertices[i], sub);
      out.insert(out.end(), arc.begin() + 1, arc.end());
    } else {
      throw ConfigError(path + ".edges", "expected 'chart' or 'great-circle'");
    }
  }
  return out;
}

CommandResult cmd_transport(const Json& config) {
  const Json& t = block(config, "transport");
  const Json* mf = t.contains("metric_field") ? &t.at("metric_field") : nullptr;
  if (!mf && config.contains("geometry") && config.at("geometry").contains("metric_field"))
    mf = &config.at("geometry").at("metric_field");
  if (!mf) throw ConfigError("transport.metric_field", "missing field");
  const MetricField metric = metric_field_from_json(*mf, "transport.metric_field");
  const Vector u0 = vector_from_json(require_field(t, "u0", "transport"), "transport.u0");
  if (u0.size() != metric.dim()) throw ConfigError("transport.u0", "dimension differs from the metric");
  const int steps = t.contains("steps_per_segment") ? integer_field(t, "steps_per_segment", "transport") : 8;
  const Json& paths_json = require_field(t, "paths", "transport");
  if (!paths_json.is_array() || paths_json.empty() || paths_json.size() > 2)
    throw ConfigError("transport.paths", "expected one or two paths");

  std::optional<WorldFunction> sigma;
  std::optional<std::pair<PointPairVector, PointPairVector>> check;
  if (t.contains("check")) {
    sigma = geometry_from_json(block(config, "geometry"), "geometry");
    const auto pts = points_from_json(t.at("check"), "transport.check");
    if (pts.size() != 4) throw ConfigError("transport.check", "expected four points");
    check.emplace(PointPairVector(pts[0], pts[1]), PointPairVector(pts[2], pts[3]));
  }

  CommandResult r;
  std::vector<TransportResult> results;
  r.report["paths"] = Json::array();
  for (std::size_t i = 0; i < paths_json.size(); ++i) {
    const std::string path = "transport.paths[" + std::to_string(i) + "]";
    const auto polyline = path_from_json(paths_json[i], path, metric.dim());
    TransportResult tr = parallel_transport(metric, u0, polyline, steps);
    Json entry{{"components", to_json(tr.components)},
               {"end", to_json(polyline.back())},
               {"vertices", polyline.size()},
               {"norm_drift", tr.norm_drift}};
    if (check) {
      entry["collinear"] = is_collinear(*sigma, check->first, check->second);
      entry["collinearity_defect"] = collinearity_defect(*sigma, check->first, check->second);
    }
    r.report["paths"].push_back(std::move(entry));
    results.push_back(std::move(tr));
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& used = results[i].path_used;
    if (metric.wrap(used.back().coords() - used.front().coords()).norm() <= 1e-9)
      r.report["paths"][i]["loop_rotation"] = covector_angle(metric, used.front(), u0, results[i].components);
  }
  if (results.size() == 2) {
    const Point end0 = results[0].path_used.back();
    const Point end1 = results[1].path_used.back();
    const Vector gap = metric.wrap(end0.coords() - end1.coords());
    if (gap.norm() > 1e-9) throw ConfigError("transport.paths", "the two paths must share the end point");
    r.report["angle_between_results"] = covector_angle(metric, end0, results[0].components, results[1].components);
  }
  return r;
}

// --- compare-defs --------------------------------------------------------

CommandResult cmd_compare(const Json& config) {
  const WorldFunction sigma = geometry_from_json(block(config, "geometry"), "geometry");
  const Json& c = block(config, "compare");
  const Point p0 = point_from_json(require_field(c, "p0", "compare"), "compare.p0");
  const Point p1 = point_from_json(require_field(c, "p1", "compare"), "compare.p1");
  const auto aux = points_from_json(require_field(c, "aux", "compare"), "compare.aux");
  const SearchRegion region = region_from_json(require_field(c, "region", "compare"), sigma.dim(), "compare.region");
  const std::size_t budget = budget_field(c, "budget", "compare", 500);
  const double tol = tolerance_field(c, "tol", "compare", 1e-6);
  DefinitionComparison cmp = [&] {
    try {
      return compare_definitions(sigma, p0, p1, aux, region, budget, tol);
    } catch (const EvaluationError&) {
      throw;
    } catch (const InvalidArgument& e) {
      throw ConfigError("compare", e.what());
    }
  }();
  CommandResult r;
  r.report["verdict"] = cmp.same ? "same" : "different";
  r.report["tube_to_line"] = cmp.tube_to_line;
  r.report["line_to_tube"] = cmp.line_to_tube;
  r.report["tolerance"] = cmp.tolerance;
  r.report["tube"] = to_json(cmp.tube, TubeKind::through_origin);
  r.report["line"] = to_json(cmp.line, TubeKind::surface_intersection_line);
  if (cmp.tube.samples.empty() || cmp.line.samples.empty()) {
    r.exit_code = empty_result;
    r.error = "empty sample set";
  }
  return r;
}

const std::map<std::string, std::function<CommandResult(const Json&)>>& registry() {
  static const std::map<std::string, std::function<CommandResult(const Json&)>> table{
      {"sigma", cmd_sigma},         {"parallel", cmd_parallel},   {"tube", cmd_tube},
      {"conditions", cmd_conditions}, {"transport", cmd_transport}, {"compare-defs", cmd_compare}};
  return table;
}

void flatten(const Json& v, const std::string& key, std::ostringstream& out) {
  if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it) flatten(it.value(), key.empty() ? it.key() : key + "." + it.key(), out);
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], key + "[" + std::to_string(i) + "]", out);
  } else if (v.is_number_float()) {
    out << key << ',' << format_double(v.get<double>()) << '\n';
  } else if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      s = q + "\"";
    }
    out << key << ',' << s << '\n';
  } else {
    out << key << ',' << v.dump() << '\n';
  }
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"sigma", "parallel", "tube", "conditions", "transport", "compare-defs"};
  return names;
}

Json resolve_config(Json config, const Overrides& overrides) {
  if (!config.is_object()) throw ConfigError("", "config must be a JSON object");
  if (overrides.seed) config["seed"] = *overrides.seed;
  if (!config.contains("seed")) config["seed"] = 1;
  if (!config.at("seed").is_number_unsigned() && !(config.at("seed").is_number_integer() && config.at("seed").get<std::int64_t>() >= 0))
    throw ConfigError("seed", "expected a 64-bit unsigned integer");
  Json& output = config["output"];
  if (!output.is_object()) output = Json::object();
  if (overrides.out) output["path"] = *overrides.out;
  if (overrides.format) output["format"] = *overrides.format;
  if (!output.contains("format")) output["format"] = "json";
  const std::string format = output.at("format").get<std::string>();
  if (format != "json" && format != "csv") throw ConfigError("output.format", "expected 'json' or 'csv'");
  return config;
}

CommandResult run_command(const std::string& command, const Json& config) {
  CommandResult r;
  const auto it = registry().find(command);
  if (it == registry().end()) {
    r.exit_code = config_error;
    r.error = "unknown command '" + command + "'";
    return r;
  }
  try {
    r = it->second(config);
  } catch (const ConfigError& e) {
    r.exit_code = config_error;
    r.error = e.what();
  } catch (const nlohmann::json::exception& e) {
    r.exit_code = config_error;
    r.error = std::string("config: ") + e.what();
  } catch (const EvaluationError& e) {
    r.exit_code = evaluation_error;
    r.error = e.what();
  } catch (const DimensionUnresolved& e) {
    r.exit_code = evaluation_error;
    r.error = e.what();
  } catch (const InvalidArgument& e) {
    r.exit_code = config_error;
    r.error = e.what();
  } catch (const std::exception& e) {
    r.exit_code = evaluation_error;
    r.error = e.what();
  }
  Json wrapped;
  wrapped["tool"] = kToolName;
  wrapped["version"] = kToolVersion;
  wrapped["command"] = command;
  wrapped["config"] = config;
  wrapped["exit_code"] = r.exit_code;
  if (!r.error.empty()) wrapped["error"] = r.error;
  wrapped["result"] = std::move(r.report);
  r.report = std::move(wrapped);
  return r;
}

std::string render(const Json& report, const std::string& format) {
  if (format == "csv") {
    std::ostringstream out;
    out << "key,value\n";
    flatten(report, "", out);
    return out.str();
  }
  return report.dump(2) + "\n";
}

}  // namespace tgeom::cli
