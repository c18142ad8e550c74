#include "tgeom/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tgeom {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string describe(const std::string& field, const std::string& what, int line) {
  std::ostringstream out;
  if (line > 0) out << "line " << line << ": ";
  if (!field.empty()) out << field << ": ";
  out << what;
  return out.str();
}

int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path, "expected a finite number");
  return d;
}

}  // namespace

ConfigError::ConfigError(const std::string& field, const std::string& what, int line)
    : InvalidArgument(describe(field, what, line)), field_(field), line_(line) {}

Json parse_config(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // parse_error::byte is 1-based and points just past the offending token.
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    throw ConfigError("", "syntax error: " + std::string(e.what()), line_of(text, byte));
  }
}

Json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

const Json& require_field(const Json& parent, const std::string& key, const std::string& path) {
  if (!parent.is_object()) throw ConfigError(path, "expected an object");
  const auto it = parent.find(key);
  if (it == parent.end()) throw ConfigError(join(path, key), "missing field");
  return *it;
}

double number_field(const Json& parent, const std::string& key, const std::string& path) {
  return as_number(require_field(parent, key, path), join(path, key));
}

std::optional<double> optional_number(const Json& parent, const std::string& key, const std::string& path) {
  if (!parent.is_object() || !parent.contains(key)) return std::nullopt;
  return as_number(parent.at(key), join(path, key));
}

int integer_field(const Json& parent, const std::string& key, const std::string& path) {
  const Json& v = require_field(parent, key, path);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v.get<int>();
}

Vector vector_from_json(const Json& value, const std::string& path) {
  if (!value.is_array() || value.empty()) throw ConfigError(path, "expected a non-empty array of numbers");
  Vector v(static_cast<Eigen::Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = as_number(value[i], path + "[" + std::to_string(i) + "]");
  return v;
}

Point point_from_json(const Json& value, const std::string& path) { return Point(vector_from_json(value, path)); }

std::vector<Point> points_from_json(const Json& value, const std::string& path) {
  if (!value.is_array()) throw ConfigError(path, "expected an array of points");
  std::vector<Point> out;
  for (std::size_t i = 0; i < value.size(); ++i)
    out.push_back(point_from_json(value[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Matrix matrix_from_json(const Json& value, int dim, const std::string& path) {
  if (!value.is_array()) throw ConfigError(path, "expected a matrix");
  Matrix m(dim, dim);
  if (!value.empty() && value[0].is_array()) {
    if (static_cast<int>(value.size()) != dim) throw ConfigError(path, "expected " + std::to_string(dim) + " rows");
    for (int i = 0; i < dim; ++i) {
      const std::string row_path = path + "[" + std::to_string(i) + "]";
      const Vector row = vector_from_json(value[static_cast<std::size_t>(i)], row_path);
      if (row.size() != dim) throw ConfigError(row_path, "expected " + std::to_string(dim) + " entries");
      m.row(i) = row.transpose();
    }
    return m;
  }
  const Vector flat = vector_from_json(value, path);
  if (flat.size() != dim * dim)
    throw ConfigError(path, "row-major metric needs " + std::to_string(dim * dim) + " entries");
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = flat[i * dim + j];
  return m;
}

SearchRegion region_from_json(const Json& value, int dim, const std::string& path) {
  SearchRegion r{vector_from_json(require_field(value, "min", path), join(path, "min")),
                 vector_from_json(require_field(value, "max", path), join(path, "max"))};
  if (r.lo.size() != dim || r.hi.size() != dim) throw ConfigError(path, "region dimension must be " + std::to_string(dim));
  for (int i = 0; i < dim; ++i)
    if (!(r.lo[i] < r.hi[i])) throw ConfigError(path, "min < max required on axis " + std::to_string(i));
  return r;
}

MetricField metric_field_from_json(const Json& value, const std::string& path) {
  const Json& kind = require_field(value, "kind", path);
  if (!kind.is_string()) throw ConfigError(join(path, "kind"), "expected a string");
  const std::string k = kind.get<std::string>();
  try {
    if (k == "flat") return MetricField::flat(integer_field(value, "dim", path));
    if (k == "sphere") return MetricField::sphere(number_field(value, "radius", path));
    if (k == "constant") {
      const int dim = integer_field(value, "dim", path);
      if (dim < 1) throw ConfigError(join(path, "dim"), "must be >= 1");
      return MetricField::constant(matrix_from_json(require_field(value, "metric", path), dim, join(path, "metric")));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(join(path, "kind"), "unknown metric field '" + k + "' (flat, sphere, constant)");
}

BvpOptions bvp_options_from_json(const Json& geometry, const std::string& path) {
  BvpOptions opts;
  if (!geometry.contains("bvp")) return opts;
  const Json& b = geometry.at("bvp");
  const std::string bp = join(path, "bvp");
  if (b.contains("steps")) opts.steps = integer_field(b, "steps", bp);
  if (b.contains("max_iterations")) opts.max_iterations = integer_field(b, "max_iterations", bp);
  if (auto t = optional_number(b, "tolerance", bp)) opts.tolerance = *t;
  if (opts.steps < 2) throw ConfigError(join(bp, "steps"), "must be >= 2");
  if (opts.max_iterations < 1) throw ConfigError(join(bp, "max_iterations"), "must be >= 1");
  if (!(opts.tolerance > 0.0)) throw ConfigError(join(bp, "tolerance"), "must be positive");
  return opts;
}

WorldFunction geometry_from_json(const Json& value, const std::string& path) {
  const Json& kind_json = require_field(value, "kind", path);
  if (!kind_json.is_string()) throw ConfigError(join(path, "kind"), "expected a string");
  GeometryKind kind;
  try {
    kind = parse_geometry_kind(kind_json.get<std::string>());
  } catch (const InvalidArgument& e) {
    throw ConfigError(join(path, "kind"), e.what());
  }
  try {
    switch (kind) {
      case GeometryKind::euclidean: {
        const int dim = integer_field(value, "dim", path);
        if (dim < 1) throw ConfigError(join(path, "dim"), "must be >= 1");
        if (!value.contains("metric")) return make_euclidean(dim);
        return make_euclidean(dim, matrix_from_json(value.at("metric"), dim, join(path, "metric")));
      }
      case GeometryKind::minkowski:
        return make_minkowski();
      case GeometryKind::distorted_minkowski:
        return make_distorted_minkowski(number_field(value, "D", path), optional_number(value, "sigma0", path).value_or(0.0));
      case GeometryKind::sphere:
        return make_sphere(optional_number(value, "radius", path).value_or(1.0));
      case GeometryKind::numeric_riemannian: {
        const std::string mp = join(path, "metric_field");
        return world_function_from_metric(metric_field_from_json(require_field(value, "metric_field", path), mp),
                                          bvp_options_from_json(value, path));
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(join(path, "kind"), "unsupported geometry kind");
}

}  // namespace tgeom
