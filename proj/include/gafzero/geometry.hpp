#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/trapezoidal.hpp>

#include "gafzero/error.hpp"

namespace gafzero {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class MetricKind { FubiniStudy, Flat, Hyperbolic };

inline std::string to_string(MetricKind k) {
  switch (k) {
    case MetricKind::FubiniStudy: return "fs";
    case MetricKind::Flat: return "flat";
    case MetricKind::Hyperbolic: return "hyperbolic";
  }
  return "?";
}

/// Kahler form on the affine chart, omega = g(z) dx dy.
struct GeometryModel {
  MetricKind kind = MetricKind::Flat;
  double scale = 1.0;

  static GeometryModel fubini_study() { return {MetricKind::FubiniStudy, 1.0}; }
  static GeometryModel flat(double scale = 1.0) { return {MetricKind::Flat, scale}; }
  static GeometryModel hyperbolic() { return {MetricKind::Hyperbolic, 1.0}; }

  bool in_chart(cplx z) const {
    return kind != MetricKind::Hyperbolic || std::norm(z) < 1.0;
  }

  /// Area density g(z).
  double density(cplx z) const {
    const double r2 = std::norm(z);
    switch (kind) {
      case MetricKind::FubiniStudy: return 1.0 / ((1.0 + r2) * (1.0 + r2));
      case MetricKind::Flat: return scale;
      case MetricKind::Hyperbolic:
        if (r2 >= 1.0) throw DomainError("point outside the unit disk");
        return 1.0 / ((1.0 - r2) * (1.0 - r2));
    }
    return 0.0;
  }

  double length_density(cplx z) const { return std::sqrt(density(z)); }

  /// A(r^2) with d(A(|z|^2) (x dy - y dx)) = omega.
  double area_potential(double r2) const {
    switch (kind) {
      case MetricKind::FubiniStudy: return 0.5 / (1.0 + r2);
      case MetricKind::Flat: return 0.5 * scale;
      case MetricKind::Hyperbolic: return 0.5 / (1.0 - r2);
    }
    return 0.0;
  }

  /// Riemannian distance between chart points.
  double distance(cplx z, cplx w) const {
    switch (kind) {
      case MetricKind::FubiniStudy: {
        const double d = std::norm(z - w) / ((1.0 + std::norm(z)) * (1.0 + std::norm(w)));
        return std::asin(std::sqrt(std::min(1.0, d)));
      }
      case MetricKind::Flat: return std::sqrt(scale) * std::abs(z - w);
      case MetricKind::Hyperbolic: {
        const double rho = std::abs(z - w) / std::abs(1.0 - z * std::conj(w));
        return std::atanh(std::min(rho, 1.0));
      }
    }
    return 0.0;
  }

  bool operator==(const GeometryModel&) const = default;
};

struct Disk {
  cplx center{0.0, 0.0};
  double radius = 1.0;
};

struct Annulus {
  cplx center{0.0, 0.0};
  double r_in = 0.5;
  double r_out = 1.0;
};

struct Polygon {
  std::vector<cplx> vertices;
};

using Shape = std::variant<Disk, Annulus, Polygon>;

enum class Location { Inside, Outside, Boundary };

/// Quadrature node on the boundary: point, conj of unit tangent, chart arclength weight.
struct BoundaryNode {
  cplx z;
  cplx dzbar_ds;
  double weight;
};

/// Closed positively oriented boundary component parameterized by chart arclength.
class BoundaryLoop {
 public:
  static BoundaryLoop circle(cplx c, double r, bool ccw) {
    BoundaryLoop l;
    l.circle_ = true;
    l.center_ = c;
    l.radius_ = r;
    l.dir_ = ccw ? 1.0 : -1.0;
    l.length_ = 2.0 * kPi * r;
    return l;
  }

  static BoundaryLoop polyline(std::vector<cplx> v) {
    BoundaryLoop l;
    l.circle_ = false;
    l.vertices_ = std::move(v);
    l.cum_.assign(1, 0.0);
    for (std::size_t i = 0; i < l.vertices_.size(); ++i) {
      const cplx a = l.vertices_[i], b = l.vertices_[(i + 1) % l.vertices_.size()];
      l.cum_.push_back(l.cum_.back() + std::abs(b - a));
    }
    l.length_ = l.cum_.back();
    return l;
  }

  bool is_circle() const { return circle_; }
  cplx center() const { return center_; }
  double radius() const { return radius_; }
  bool counterclockwise() const { return dir_ > 0; }
  double length() const { return length_; }
  const std::vector<cplx>& vertices() const { return vertices_; }
  /// Arclength parameter of each polygon vertex (plus the closing one).
  const std::vector<double>& vertex_params() const { return cum_; }

  cplx point(double s) const {
    s = wrap(s);
    if (circle_) return center_ + radius_ * std::polar(1.0, dir_ * s / radius_);
    const std::size_t e = edge_of(s);
    const cplx a = vertices_[e], b = vertices_[(e + 1) % vertices_.size()];
    return a + (b - a) * ((s - cum_[e]) / (cum_[e + 1] - cum_[e]));
  }

  cplx tangent(double s) const {
    s = wrap(s);
    if (circle_) return cplx(0.0, dir_) * std::polar(1.0, dir_ * s / radius_);
    const std::size_t e = edge_of(s);
    const cplx d = vertices_[(e + 1) % vertices_.size()] - vertices_[e];
    return d / std::abs(d);
  }

  double wrap(double s) const {
    s = std::fmod(s, length_);
    return s < 0 ? s + length_ : s;
  }

 private:
  std::size_t edge_of(double s) const {
    auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    std::size_t e = static_cast<std::size_t>(it - cum_.begin());
    e = e == 0 ? 0 : e - 1;
    return std::min(e, vertices_.size() - 1);
  }

  bool circle_ = true;
  cplx center_{};
  double radius_ = 0.0;
  double dir_ = 1.0;
  double length_ = 0.0;
  std::vector<cplx> vertices_;
  std::vector<double> cum_;
};

namespace detail {

inline double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

inline bool on_segment(cplx p, cplx a, cplx b) {
  return std::min(a.real(), b.real()) <= p.real() && p.real() <= std::max(a.real(), b.real()) &&
         std::min(a.imag(), b.imag()) <= p.imag() && p.imag() <= std::max(a.imag(), b.imag());
}

inline bool segments_intersect(cplx p1, cplx p2, cplx q1, cplx q2) {
  const double d1 = cross(q2 - q1, p1 - q1), d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1), d4 = cross(p2 - p1, q2 - p1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  if (d1 == 0 && on_segment(p1, q1, q2)) return true;
  if (d2 == 0 && on_segment(p2, q1, q2)) return true;
  if (d3 == 0 && on_segment(q1, p1, p2)) return true;
  if (d4 == 0 && on_segment(q2, p1, p2)) return true;
  return false;
}

inline double segment_distance(cplx p, cplx a, cplx b) {
  const cplx d = b - a;
  const double t = std::clamp(((p - a) * std::conj(d)).real() / std::norm(d), 0.0, 1.0);
  return std::abs(p - (a + t * d));
}

inline bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace detail

/// Validated region in the affine chart together with its Kahler form.
class Domain {
 public:
  Domain(Shape shape, GeometryModel geometry) : shape_(std::move(shape)), geometry_(geometry) {
    validate();
    build_loops();
  }

  static Domain disk(cplx c, double r, GeometryModel g) { return Domain(Disk{c, r}, g); }
  static Domain annulus(cplx c, double r_in, double r_out, GeometryModel g) {
    return Domain(Annulus{c, r_in, r_out}, g);
  }
  static Domain polygon(std::vector<cplx> v, GeometryModel g) { return Domain(Polygon{std::move(v)}, g); }

  const Shape& shape() const { return shape_; }
  const GeometryModel& geometry() const { return geometry_; }
  const std::vector<BoundaryLoop>& boundary() const { return loops_; }

  /// True when the closure contains the point at infinity of the sphere.
  bool contains_infinity() const {
    if (auto d = std::get_if<Disk>(&shape_)) return std::isinf(d->radius);
    if (auto a = std::get_if<Annulus>(&shape_)) return std::isinf(a->r_out);
    return false;
  }

  /// max |z| over the closure in the chart.
  double chart_extent() const {
    if (auto d = std::get_if<Disk>(&shape_)) return std::abs(d->center) + d->radius;
    if (auto a = std::get_if<Annulus>(&shape_)) return std::abs(a->center) + a->r_out;
    double m = 0.0;
    for (cplx v : std::get<Polygon>(shape_).vertices) m = std::max(m, std::abs(v));
    return m;
  }

  /// Size scale used for relative boundary tolerances.
  double characteristic_radius() const {
    if (auto d = std::get_if<Disk>(&shape_)) return std::isinf(d->radius) ? 1.0 : d->radius;
    if (auto a = std::get_if<Annulus>(&shape_)) return std::isinf(a->r_out) ? std::max(a->r_in, 1e-300) : a->r_out;
    const auto& v = std::get<Polygon>(shape_).vertices;
    cplx c{};
    for (cplx p : v) c += p;
    c /= static_cast<double>(v.size());
    double m = 0.0;
    for (cplx p : v) m = std::max(m, std::abs(p - c));
    return m;
  }

  double chart_perimeter() const {
    double s = 0.0;
    for (const auto& l : loops_) s += l.length();
    return s;
  }

 private:
  void validate() {
    if (!(geometry_.scale > 0.0) || !std::isfinite(geometry_.scale))
      throw InvalidDomain("geometry scale must be positive and finite");
    const bool fs = geometry_.kind == MetricKind::FubiniStudy;
    if (auto d = std::get_if<Disk>(&shape_)) {
      if (!detail::finite(d->center)) throw InvalidDomain("disk center must be finite");
      if (!(d->radius > 0.0)) throw InvalidDomain("disk radius must be positive");
      if (std::isinf(d->radius) && !fs) throw InvalidDomain("infinite disk requires Fubini-Study geometry");
      if (geometry_.kind == MetricKind::Hyperbolic && std::abs(d->center) + d->radius >= 1.0)
        throw InvalidDomain("hyperbolic domain must lie inside the unit disk");
    } else if (auto a = std::get_if<Annulus>(&shape_)) {
      if (!detail::finite(a->center)) throw InvalidDomain("annulus center must be finite");
      if (!(a->r_in >= 0.0) || !(a->r_out > a->r_in) || std::isinf(a->r_in))
        throw InvalidDomain("annulus radii must satisfy 0 <= r_in < r_out");
      if (std::isinf(a->r_out) && !fs) throw InvalidDomain("unbounded annulus requires Fubini-Study geometry");
      if (geometry_.kind == MetricKind::Hyperbolic && std::abs(a->center) + a->r_out >= 1.0)
        throw InvalidDomain("hyperbolic domain must lie inside the unit disk");
    } else {
      validate_polygon(std::get<Polygon>(shape_).vertices);
    }
  }

  void validate_polygon(std::vector<cplx>& v) {
    const std::size_t n = v.size();
    if (n < 3) throw InvalidDomain("polygon needs at least 3 vertices");
    for (cplx p : v)
      if (!detail::finite(p)) throw InvalidDomain("polygon vertex must be finite");
    for (std::size_t i = 0; i < n; ++i)
      if (v[i] == v[(i + 1) % n]) throw InvalidDomain("polygon has repeated vertex");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (j == i + 1 || (i == 0 && j == n - 1)) continue;
        if (detail::segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]))
          throw InvalidDomain("polygon is self-intersecting");
      }
    }
    double signed_area = 0.0;
    for (std::size_t i = 0; i < n; ++i) signed_area += detail::cross(v[i], v[(i + 1) % n]);
    if (signed_area == 0.0) throw InvalidDomain("polygon has zero area");
    if (signed_area < 0.0) std::reverse(v.begin(), v.end());
    for (std::size_t i = 0; i < n; ++i) {
      const cplx p = v[(i + n - 1) % n], c = v[i], q = v[(i + 1) % n];
      const double turn = std::arg((q - c) / (c - p));
      const double interior = kPi - turn;
      if (interior < 1e-3 || interior > 2.0 * kPi - 1e-3)
        throw InvalidDomain("polygon has a cusp-like corner");
    }
    if (geometry_.kind == MetricKind::Hyperbolic)
      for (cplx p : v)
        if (std::abs(p) >= 1.0) throw InvalidDomain("hyperbolic domain must lie inside the unit disk");
  }

  void build_loops() {
    if (auto d = std::get_if<Disk>(&shape_)) {
      if (!std::isinf(d->radius)) loops_.push_back(BoundaryLoop::circle(d->center, d->radius, true));
    } else if (auto a = std::get_if<Annulus>(&shape_)) {
      if (!std::isinf(a->r_out)) loops_.push_back(BoundaryLoop::circle(a->center, a->r_out, true));
      if (a->r_in > 0.0) loops_.push_back(BoundaryLoop::circle(a->center, a->r_in, false));
    } else {
      loops_.push_back(BoundaryLoop::polyline(std::get<Polygon>(shape_).vertices));
    }
  }

  Shape shape_;
  GeometryModel geometry_;
  std::vector<BoundaryLoop> loops_;
};

namespace detail {

/// Integral of A(|z|^2) Im(conj(z) dz) over a counterclockwise circle.
inline double circle_area(cplx c, double r, const GeometryModel& g) {
  if (g.kind == MetricKind::Flat) return g.scale * kPi * r * r;
  if (c == cplx{}) return 2.0 * kPi * r * r * g.area_potential(r * r);
  auto f = [&](double t) {
    const cplx e = std::polar(1.0, t);
    const cplx z = c + r * e;
    return g.area_potential(std::norm(z)) * (std::conj(z) * cplx(0.0, r) * e).imag();
  };
  return boost::math::quadrature::trapezoidal(f, 0.0, 2.0 * kPi, 1e-14);
}

inline double circle_length(cplx c, double r, const GeometryModel& g) {
  if (c == cplx{}) return 2.0 * kPi * r * g.length_density(r);
  auto f = [&](double t) { return r * g.length_density(c + r * std::polar(1.0, t)); };
  return boost::math::quadrature::trapezoidal(f, 0.0, 2.0 * kPi, 1e-14);
}

inline double polygon_integral(const std::vector<cplx>& v, const auto& edge_integrand) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const cplx a = v[i], b = v[(i + 1) % v.size()];
    auto f = [&](double t) { return edge_integrand(a + t * (b - a), b - a); };
    s += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 15, 1e-14);
  }
  return s;
}

}  // namespace detail

/// Area of the domain under its Kahler form.
inline double area(const Domain& d) {
  const GeometryModel& g = d.geometry();
  if (auto disk = std::get_if<Disk>(&d.shape())) {
    if (std::isinf(disk->radius)) return kPi;
    return detail::circle_area(disk->center, disk->radius, g);
  }
  if (auto a = std::get_if<Annulus>(&d.shape())) {
    const double inner = a->r_in > 0.0 ? detail::circle_area(a->center, a->r_in, g) : 0.0;
    const double outer = std::isinf(a->r_out) ? kPi : detail::circle_area(a->center, a->r_out, g);
    return outer - inner;
  }
  if (g.kind == MetricKind::Flat) {
    const auto& v = std::get<Polygon>(d.shape()).vertices;
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += detail::cross(v[i], v[(i + 1) % v.size()]);
    return 0.5 * g.scale * s;
  }
  return detail::polygon_integral(std::get<Polygon>(d.shape()).vertices, [&](cplx z, cplx dz) {
    return g.area_potential(std::norm(z)) * (std::conj(z) * dz).imag();
  });
}

/// Length of the boundary under the metric.
inline double boundary_length(const Domain& d) {
  const GeometryModel& g = d.geometry();
  if (std::holds_alternative<Polygon>(d.shape())) {
    return detail::polygon_integral(std::get<Polygon>(d.shape()).vertices,
                                    [&](cplx z, cplx dz) { return g.length_density(z) * std::abs(dz); });
  }
  double s = 0.0;
  for (const auto& l : d.boundary()) s += detail::circle_length(l.center(), l.radius(), g);
  return s;
}

/// Chart distance from z to the boundary.
inline double boundary_distance(const Domain& d, cplx z) {
  double m = kInf;
  for (const auto& l : d.boundary()) {
    if (l.is_circle()) {
      m = std::min(m, std::abs(std::abs(z - l.center()) - l.radius()));
    } else {
      const auto& v = l.vertices();
      for (std::size_t i = 0; i < v.size(); ++i)
        m = std::min(m, detail::segment_distance(z, v[i], v[(i + 1) % v.size()]));
    }
  }
  return m;
}

inline Location contains(const Domain& d, cplx z, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("boundary tolerance must be positive");
  if (!detail::finite(z)) return d.contains_infinity() ? Location::Inside : Location::Outside;
  if (!d.geometry().in_chart(z)) return Location::Outside;
  if (boundary_distance(d, z) < tol) return Location::Boundary;
  bool inside = false;
  if (auto disk = std::get_if<Disk>(&d.shape())) {
    inside = std::abs(z - disk->center) < disk->radius;
  } else if (auto a = std::get_if<Annulus>(&d.shape())) {
    const double r = std::abs(z - a->center);
    inside = r > a->r_in && r < a->r_out;
  } else {
    const auto& v = std::get<Polygon>(d.shape()).vertices;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
      if ((v[i].imag() > z.imag()) != (v[j].imag() > z.imag())) {
        const double x = v[j].real() + (z.imag() - v[j].imag()) * (v[i].real() - v[j].real()) /
                                           (v[i].imag() - v[j].imag());
        if (z.real() < x) inside = !inside;
      }
    }
  }
  return inside ? Location::Inside : Location::Outside;
}

/// Number of nodes each loop receives out of a total of n.
inline std::vector<int> loop_node_counts(const Domain& d, int n) {
  std::vector<int> out;
  const double total = d.chart_perimeter();
  for (const auto& l : d.boundary())
    out.push_back(std::max(1, static_cast<int>(std::lround(n * l.length() / total))));
  return out;
}

/// Arclength parameters and weights of the node set on one loop.
inline void loop_params(const BoundaryLoop& l, int m, bool offset, std::vector<double>& s,
                        std::vector<double>& w) {
  s.clear();
  w.clear();
  if (l.is_circle()) {
    const double h = l.length() / m;
    for (int k = 0; k < m; ++k) {
      s.push_back((k + (offset ? 0.5 : 0.0)) * h);
      w.push_back(h);
    }
    return;
  }
  const auto& cum = l.vertex_params();
  const std::size_t ne = l.vertices().size();
  for (std::size_t e = 0; e < ne; ++e) {
    const double le = cum[e + 1] - cum[e];
    int me = std::max(1, static_cast<int>(std::lround(m * le / l.length())));
    if (offset) ++me;
    const double h = le / me;
    for (int j = 0; j < me; ++j) {
      s.push_back(cum[e] + (j + 0.5) * h);
      w.push_back(h);
    }
  }
}

/// Boundary quadrature nodes; offset=true gives a staggered set disjoint from the default one.
inline std::vector<BoundaryNode> boundary_nodes(const Domain& d, int n, bool offset = false) {
  std::vector<BoundaryNode> out;
  if (d.boundary().empty()) return out;
  if (n < 4) throw InvalidArgument("boundary_nodes needs n >= 4");
  if (auto p = std::get_if<Polygon>(&d.shape()); p && n < static_cast<int>(p->vertices.size()))
    throw InvalidArgument("boundary_nodes needs at least one node per polygon edge");
  const auto counts = loop_node_counts(d, n);
  std::vector<double> s, w;
  for (std::size_t i = 0; i < d.boundary().size(); ++i) {
    const auto& l = d.boundary()[i];
    loop_params(l, counts[i], offset, s, w);
    for (std::size_t k = 0; k < s.size(); ++k)
      out.push_back({l.point(s[k]), std::conj(l.tangent(s[k])), w[k]});
  }
  return out;
}

}  // namespace gafzero
