#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gafzero/ensembles.hpp"
#include "gafzero/error.hpp"
#include "gafzero/geometry.hpp"
#include "gafzero/zeros.hpp"

namespace gafzero::config {

using nlohmann::json;

class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline double to_double(const std::string& s) {
  if (s == "inf" || s == "infinity") return kInf;
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

inline int to_int(const std::string& s) {
  const double v = to_double(s);
  if (v != std::floor(v) || std::abs(v) > 2e9) throw ConfigError("not an integer: '" + s + "'");
  return static_cast<int>(v);
}

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& what) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown field '" + it.key() + "' in " + what);
}

inline GeometryModel parse_geometry(const std::string& s) {
  if (s == "fs" || s == "sphere") return GeometryModel::fubini_study();
  if (s == "flat") return GeometryModel::flat();
  if (s == "hyperbolic" || s == "hyp") return GeometryModel::hyperbolic();
  throw ConfigError("unknown geometry '" + s + "'");
}

inline Family parse_family(const std::string& s) {
  if (s == "su2") return Family::SU2;
  if (s == "bf") return Family::BargmannFock;
  if (s == "su11") return Family::SU11;
  throw ConfigError("unknown ensemble family '" + s + "'");
}

inline cplx parse_point(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError("point must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline double number(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("missing field '" + key + "'");
  const json& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return to_double(v.get<std::string>());
  throw ConfigError("field '" + key + "' must be a number");
}

/// Ensemble literal: "su2:128", "bf:64[:truncation]", "su11:16[:truncation]" or a JSON object.
/// A missing truncation is returned as 0 and filled in later from the experiment radius.
inline EnsembleSpec parse_ensemble(const json& j) {
  Family f;
  int N = 0, trunc = 0;
  if (j.is_string()) {
    const auto parts = split(j.get<std::string>(), ':');
    if (parts.size() < 2 || parts.size() > 3) throw ConfigError("ensemble literal must be family:N[:truncation]");
    f = parse_family(parts[0]);
    N = to_int(parts[1]);
    if (parts.size() == 3) trunc = to_int(parts[2]);
  } else if (j.is_object()) {
    check_keys(j, {"family", "N", "truncation"}, "ensemble");
    if (!j.contains("family") || !j["family"].is_string()) throw ConfigError("ensemble needs a family");
    f = parse_family(j["family"].get<std::string>());
    N = static_cast<int>(number(j, "N"));
    if (j.contains("truncation")) trunc = static_cast<int>(number(j, "truncation"));
  } else {
    throw ConfigError("ensemble must be a string or object");
  }
  if (N < 1) throw ConfigError("N must be >= 1");
  if (trunc < 0) throw ConfigError("truncation must be >= 1");
  EnsembleSpec e{f, N, f == Family::SU2 ? N : trunc};
  return e;
}

inline EnsembleSpec resolve_truncation(EnsembleSpec e, double radius) {
  if (e.family == Family::SU2 || e.truncation > 0) return EnsembleSpec::make(e.family, e.N, std::max(e.truncation, 1));
  return EnsembleSpec::with_radius(e.family, e.N, radius);
}

inline json ensemble_json(const EnsembleSpec& e) {
  return {{"family", to_string(e.family)}, {"N", e.N}, {"truncation", e.truncation}};
}

/// Domain literal: "disk:GEOM:r[:cx:cy]", "annulus:GEOM:r_in:r_out[:cx:cy]",
/// "polygon:GEOM:x,y;x,y;..." or a JSON object.
inline Domain parse_domain(const json& j) {
  try {
    if (j.is_string()) {
      const auto p = split(j.get<std::string>(), ':');
      if (p.size() < 3) throw ConfigError("domain literal must be shape:geometry:params");
      const GeometryModel g = parse_geometry(p[1]);
      if (p[0] == "disk") {
        if (p.size() != 3 && p.size() != 5) throw ConfigError("disk literal is disk:geom:r[:cx:cy]");
        const cplx c = p.size() == 5 ? cplx(to_double(p[3]), to_double(p[4])) : cplx{};
        return Domain::disk(c, to_double(p[2]), g);
      }
      if (p[0] == "annulus") {
        if (p.size() != 4 && p.size() != 6) throw ConfigError("annulus literal is annulus:geom:r_in:r_out[:cx:cy]");
        const cplx c = p.size() == 6 ? cplx(to_double(p[4]), to_double(p[5])) : cplx{};
        return Domain::annulus(c, to_double(p[2]), to_double(p[3]), g);
      }
      if (p[0] == "polygon") {
        if (p.size() != 3) throw ConfigError("polygon literal is polygon:geom:x,y;x,y;...");
        std::vector<cplx> v;
        for (const auto& xy : split(p[2], ';')) {
          const auto c = split(xy, ',');
          if (c.size() != 2) throw ConfigError("polygon vertex must be x,y");
          v.emplace_back(to_double(c[0]), to_double(c[1]));
        }
        return Domain::polygon(v, g);
      }
      throw ConfigError("unknown domain shape '" + p[0] + "'");
    }
    if (!j.is_object()) throw ConfigError("domain must be a string or object");
    if (!j.contains("shape") || !j["shape"].is_string()) throw ConfigError("domain needs a shape");
    const std::string shape = j["shape"].get<std::string>();
    const GeometryModel g = parse_geometry(j.value("geometry", std::string("flat")));
    const cplx c = j.contains("center") ? parse_point(j["center"]) : cplx{};
    if (shape == "disk") {
      check_keys(j, {"shape", "geometry", "center", "radius"}, "disk");
      return Domain::disk(c, number(j, "radius"), g);
    }
    if (shape == "annulus") {
      check_keys(j, {"shape", "geometry", "center", "r_in", "r_out"}, "annulus");
      return Domain::annulus(c, number(j, "r_in"), number(j, "r_out"), g);
    }
    if (shape == "polygon") {
      check_keys(j, {"shape", "geometry", "vertices"}, "polygon");
      if (!j.contains("vertices") || !j["vertices"].is_array()) throw ConfigError("polygon needs vertices");
      std::vector<cplx> v;
      for (const auto& p : j["vertices"]) v.push_back(parse_point(p));
      return Domain::polygon(v, g);
    }
    throw ConfigError("unknown domain shape '" + shape + "'");
  } catch (const InvalidDomain& e) {
    throw ConfigError(std::string("invalid domain: ") + e.what());
  }
}

inline json point_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json num_json(double x) {
  if (std::isinf(x)) return "inf";
  return x;
}

inline json domain_json(const Domain& d) {
  json j;
  j["geometry"] = to_string(d.geometry().kind);
  if (auto p = std::get_if<Disk>(&d.shape())) {
    j["shape"] = "disk";
    j["center"] = point_json(p->center);
    j["radius"] = num_json(p->radius);
  } else if (auto p = std::get_if<Annulus>(&d.shape())) {
    j["shape"] = "annulus";
    j["center"] = point_json(p->center);
    j["r_in"] = p->r_in;
    j["r_out"] = num_json(p->r_out);
  } else {
    j["shape"] = "polygon";
    j["vertices"] = json::array();
    for (cplx v : std::get<Polygon>(d.shape()).vertices) j["vertices"].push_back(point_json(v));
  }
  return j;
}

/// Test function literal: "bump:sigma[:ax:ay[:amplitude]]" or {"center":[x,y],"sigma":s,"amplitude":A}.
inline TestFunction parse_test_function(const json& j, GeometryModel g) {
  cplx a{};
  double sigma = 0.0, amp = 1.0;
  if (j.is_string()) {
    const auto p = split(j.get<std::string>(), ':');
    if (p.empty() || p[0] != "bump" || (p.size() != 2 && p.size() != 4 && p.size() != 5))
      throw ConfigError("test function literal is bump:sigma[:ax:ay[:amplitude]]");
    sigma = to_double(p[1]);
    if (p.size() >= 4) a = {to_double(p[2]), to_double(p[3])};
    if (p.size() == 5) amp = to_double(p[4]);
  } else if (j.is_object()) {
    check_keys(j, {"center", "sigma", "amplitude"}, "test_function");
    sigma = number(j, "sigma");
    if (j.contains("center")) a = parse_point(j["center"]);
    if (j.contains("amplitude")) amp = number(j, "amplitude");
  } else {
    throw ConfigError("test_function must be a string or object");
  }
  try {
    return TestFunction::gaussian_bump(a, sigma, g, amp);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

inline json test_function_json(const TestFunction& f) {
  return {{"center", point_json(f.center())}, {"sigma", f.sigma()}, {"amplitude", f.amplitude()}};
}

}  // namespace gafzero::config
