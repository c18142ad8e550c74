#include "tgeom/report.hpp"

#include <cstdio>
#include <sstream>

namespace tgeom {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(x);
  return out;
}

Json to_json(const Point& p) { return to_json(p.coords()); }

Json to_json(const ConditionReport& report) {
  Json w;
  w["points"] = Json::array();
  for (const auto& p : report.witness.points) w["points"].push_back(to_json(p));
  w["residuals"] = report.witness.residuals;
  w["eigenvalues"] = report.witness.eigenvalues;
  w["note"] = report.witness.note;
  Json out;
  out["condition"] = std::string(to_string(report.condition));
  out["passed"] = report.passed;
  out["witness"] = std::move(w);
  return out;
}

Json to_json(const TubeSampleSet& set, TubeKind kind) {
  Json out;
  out["kind"] = std::string(to_string(kind));
  out["dimension"] = set.local_dimension;
  out["method"] = std::string(to_string(set.method));
  out["counts"] = {{"seeds", set.seeds},
                   {"samples", set.samples.size()},
                   {"regular", set.regular_count},
                   {"critical", set.critical_count},
                   {"band_inconsistent", set.band_inconsistent},
                   {"unresolved", set.unresolved}};
  out["tolerances"] = {{"membership", set.membership_tol}};
  out["diagnostic"] = set.diagnostic;
  return out;
}

std::string samples_csv(const TubeSampleSet& set) {
  std::ostringstream out;
  const int dim = set.samples.empty() ? 0 : set.samples.front().point.dim();
  for (int i = 0; i < dim; ++i) out << 'x' << i << ',';
  out << "residual,gradient_norm,class\n";
  for (const auto& s : set.samples) {
    for (int i = 0; i < dim; ++i) out << format_double(s.point[i]) << ',';
    out << format_double(s.residual) << ',' << format_double(s.gradient_norm) << ',' << to_string(s.cls) << '\n';
  }
  return out.str();
}

std::string projections_csv(const TubeSampleSet& set) {
  std::ostringstream out;
  out << "sample,i,j,xi,xj\n";
  for (std::size_t k = 0; k < set.samples.size(); ++k) {
    const Point& p = set.samples[k].point;
    for (int i = 0; i < p.dim(); ++i)
      for (int j = i + 1; j < p.dim(); ++j)
        out << k << ',' << i << ',' << j << ',' << format_double(p[i]) << ',' << format_double(p[j]) << '\n';
  }
  return out.str();
}

std::string geodesic_csv(const GeodesicSolution& solution) {
  std::ostringstream out;
  const auto dim = solution.path.empty() ? 0 : solution.path.front().x.size();
  out << "tau";
  for (Eigen::Index i = 0; i < dim; ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < dim; ++i) out << ",v" << i;
  out << '\n';
  for (const auto& node : solution.path) {
    out << format_double(node.tau);
    for (double x : node.x) out << ',' << format_double(x);
    for (double v : node.velocity) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

}  // namespace tgeom
