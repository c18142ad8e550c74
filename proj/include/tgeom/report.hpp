#pragma once

#include <string>

#include "tgeom/config.hpp"
#include "tgeom/euclideanity.hpp"
#include "tgeom/riemannian.hpp"
#include "tgeom/tube.hpp"

namespace tgeom {

/// Round-trip decimal form with 17 significant digits.
std::string format_double(double value);

Json to_json(const Point& p);
Json to_json(const Vector& v);
Json to_json(const ConditionReport& report);
/// Summary record {kind, dimension, method, counts, tolerances}; no samples.
Json to_json(const TubeSampleSet& set, TubeKind kind);

/// x0..xn-1, residual, gradient_norm, class.
std::string samples_csv(const TubeSampleSet& set);
/// Coordinate pairs (i, j) for every i < j, one row per sample and pair.
std::string projections_csv(const TubeSampleSet& set);
/// tau, x0..xn-1, v0..vn-1.
std::string geodesic_csv(const GeodesicSolution& solution);

}  // namespace tgeom
