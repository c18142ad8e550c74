#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tgeom/errors.hpp"
#include "tgeom/euclideanity.hpp"
#include "tgeom/metric_field.hpp"
#include "tgeom/riemannian.hpp"
#include "tgeom/world_function.hpp"

namespace tgeom {

using Json = nlohmann::ordered_json;

/// A malformed or inconsistent config record. `field` is a dotted path such as
/// "geometry.metric"; `line` is set for syntax errors.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& field, const std::string& what, int line = 0);
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

/// Parses JSON text; syntax errors become ConfigError with the line number.
Json parse_config(const std::string& text);
Json load_config_file(const std::string& path);

/// Field accessors that raise ConfigError naming the field path.
const Json& require_field(const Json& parent, const std::string& key, const std::string& path);
double number_field(const Json& parent, const std::string& key, const std::string& path);
std::optional<double> optional_number(const Json& parent, const std::string& key, const std::string& path);
int integer_field(const Json& parent, const std::string& key, const std::string& path);

Point point_from_json(const Json& value, const std::string& path);
std::vector<Point> points_from_json(const Json& value, const std::string& path);
Vector vector_from_json(const Json& value, const std::string& path);
/// Square matrix from a row-major flat array or an array of rows.
Matrix matrix_from_json(const Json& value, int dim, const std::string& path);
/// {"min": [...], "max": [...]} with min < max on every axis.
SearchRegion region_from_json(const Json& value, int dim, const std::string& path);

/// geometry.metric_field: {"kind": "flat" | "sphere" | "constant", "dim", "radius", "metric"}.
MetricField metric_field_from_json(const Json& value, const std::string& path);
BvpOptions bvp_options_from_json(const Json& geometry, const std::string& path);

/// Geometry record:
///   {"kind": "euclidean" | "minkowski" | "distorted-minkowski" | "sphere" | "numeric-riemannian",
///    "dim", "metric" (row-major), "radius", "D", "sigma0", "metric_field", "bvp"}.
WorldFunction geometry_from_json(const Json& value, const std::string& path);

}  // namespace tgeom
