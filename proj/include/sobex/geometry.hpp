#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace sobex {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct BBox {
  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
};

// Shapes are open sets. Disk, annulus, diamond and ellipse are centered at
// the origin; the rectangle is (0,w) x (0,h).
struct Disk {
  double r;
};
struct Annulus {
  double a, b;  // inner and outer radius, a < b
};
struct Rectangle {
  double w, h;
};
struct Diamond {
  double s;  // |x| + |y| < s
};
struct Ellipse {
  double a, b;  // semi-axes
};
struct Polygon {
  std::vector<Point> vertices;  // simple, stored counterclockwise
};

namespace detail {

inline double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline double polygon_signed_area(const std::vector<Point>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point& p = v[i];
    const Point& q = v[(i + 1) % v.size()];
    s += p.x * q.y - q.x * p.y;
  }
  return 0.5 * s;
}

inline double point_segment_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

inline bool on_segment(Point p, Point a, Point b) {
  return cross(a, b, p) == 0.0 && std::min(a.x, b.x) <= p.x &&
         p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

// Proper or improper intersection of segments ab and cd.
inline bool segments_intersect(Point a, Point b, Point c, Point d) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  if (d1 == 0 && on_segment(a, c, d)) return true;
  if (d2 == 0 && on_segment(b, c, d)) return true;
  if (d3 == 0 && on_segment(c, a, b)) return true;
  if (d4 == 0 && on_segment(d, a, b)) return true;
  return false;
}

}  // namespace detail

class DomainSpec {
public:
  using Shape = std::variant<Disk, Annulus, Rectangle, Diamond, Ellipse, Polygon>;

  explicit DomainSpec(Shape shape) : shape_(std::move(shape)) { validate(); }

  const Shape& shape() const { return shape_; }

  std::string kind() const {
    struct V {
      std::string operator()(const Disk&) const { return "disk"; }
      std::string operator()(const Annulus&) const { return "annulus"; }
      std::string operator()(const Rectangle&) const { return "rectangle"; }
      std::string operator()(const Diamond&) const { return "diamond"; }
      std::string operator()(const Ellipse&) const { return "ellipse"; }
      std::string operator()(const Polygon&) const { return "polygon"; }
    };
    return std::visit(V{}, shape_);
  }

  bool inside(Point p) const {
    struct V {
      Point p;
      bool operator()(const Disk& d) const { return norm(p) < d.r; }
      bool operator()(const Annulus& a) const {
        const double r = norm(p);
        return a.a < r && r < a.b;
      }
      bool operator()(const Rectangle& r) const {
        return 0.0 < p.x && p.x < r.w && 0.0 < p.y && p.y < r.h;
      }
      bool operator()(const Diamond& d) const {
        return std::abs(p.x) + std::abs(p.y) < d.s;
      }
      bool operator()(const Ellipse& e) const {
        const double u = p.x / e.a, v = p.y / e.b;
        return u * u + v * v < 1.0;
      }
      bool operator()(const Polygon& poly) const {
        // Open set: points within a hair of an edge count as outside, which
        // keeps lattice-aligned polygon edges from flickering.
        const auto& vs = poly.vertices;
        double scale = 0.0;
        for (const auto& v : vs) scale = std::max(scale, std::abs(v.x) + std::abs(v.y));
        const double eps = 1e-12 * std::max(scale, 1.0);
        for (std::size_t i = 0; i < vs.size(); ++i) {
          if (detail::point_segment_distance(p, vs[i], vs[(i + 1) % vs.size()]) <= eps)
            return false;
        }
        bool in = false;
        for (std::size_t i = 0; i < vs.size(); ++i) {
          const Point& a = vs[i];
          const Point& b = vs[(i + 1) % vs.size()];
          if ((a.y > p.y) != (b.y > p.y)) {
            const double xi = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < xi) in = !in;
          }
        }
        return in;
      }
    };
    return std::visit(V{p}, shape_);
  }

  BBox bounding_box() const {
    struct V {
      BBox operator()(const Disk& d) const { return {-d.r, d.r, -d.r, d.r}; }
      BBox operator()(const Annulus& a) const { return {-a.b, a.b, -a.b, a.b}; }
      BBox operator()(const Rectangle& r) const { return {0.0, r.w, 0.0, r.h}; }
      BBox operator()(const Diamond& d) const { return {-d.s, d.s, -d.s, d.s}; }
      BBox operator()(const Ellipse& e) const { return {-e.a, e.a, -e.b, e.b}; }
      BBox operator()(const Polygon& poly) const {
        BBox b{poly.vertices[0].x, poly.vertices[0].x, poly.vertices[0].y,
               poly.vertices[0].y};
        for (const auto& v : poly.vertices) {
          b.xmin = std::min(b.xmin, v.x);
          b.xmax = std::max(b.xmax, v.x);
          b.ymin = std::min(b.ymin, v.y);
          b.ymax = std::max(b.ymax, v.y);
        }
        return b;
      }
    };
    return std::visit(V{}, shape_);
  }

  double analytic_area() const {
    struct V {
      double operator()(const Disk& d) const { return M_PI * d.r * d.r; }
      double operator()(const Annulus& a) const {
        return M_PI * (a.b * a.b - a.a * a.a);
      }
      double operator()(const Rectangle& r) const { return r.w * r.h; }
      double operator()(const Diamond& d) const { return 2.0 * d.s * d.s; }
      double operator()(const Ellipse& e) const { return M_PI * e.a * e.b; }
      double operator()(const Polygon& p) const {
        return detail::polygon_signed_area(p.vertices);
      }
    };
    return std::visit(V{}, shape_);
  }

  // Signed distance is not needed anywhere; this is the plain distance to the
  // boundary for shapes where a closed formula exists. Ellipse and polygon
  // fall back to the marched field.
  std::optional<double> exact_boundary_distance(Point p) const {
    struct V {
      Point p;
      std::optional<double> operator()(const Disk& d) const {
        return d.r - norm(p);
      }
      std::optional<double> operator()(const Annulus& a) const {
        const double r = norm(p);
        return std::min(r - a.a, a.b - r);
      }
      std::optional<double> operator()(const Rectangle& r) const {
        return std::min(std::min(p.x, r.w - p.x), std::min(p.y, r.h - p.y));
      }
      std::optional<double> operator()(const Diamond& d) const {
        return (d.s - std::abs(p.x) - std::abs(p.y)) / std::sqrt(2.0);
      }
      std::optional<double> operator()(const Ellipse&) const { return std::nullopt; }
      std::optional<double> operator()(const Polygon&) const { return std::nullopt; }
    };
    return std::visit(V{p}, shape_);
  }

  bool has_exact_distance() const {
    return exact_boundary_distance(Point{0, 0}).has_value();
  }

  // Ordered closed loops of boundary points, spacing at most `step`. The
  // annulus yields two loops; everything else yields one.
  std::vector<std::vector<Point>> boundary_loops(double step) const {
    if (!(step > 0.0)) throw InvalidParams("boundary_loops: step must be > 0");
    auto circle = [&](double radius) {
      const int m = std::max(8, static_cast<int>(std::ceil(2.0 * M_PI * radius / step)));
      std::vector<Point> loop(m);
      for (int k = 0; k < m; ++k) {
        const double t = 2.0 * M_PI * k / m;
        loop[k] = {radius * std::cos(t), radius * std::sin(t)};
      }
      return loop;
    };
    auto walk = [&](const std::vector<Point>& verts) {
      std::vector<Point> loop;
      for (std::size_t i = 0; i < verts.size(); ++i) {
        const Point a = verts[i];
        const Point b = verts[(i + 1) % verts.size()];
        const int m = std::max(1, static_cast<int>(std::ceil(dist(a, b) / step)));
        for (int k = 0; k < m; ++k) {
          const double t = static_cast<double>(k) / m;
          loop.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        }
      }
      return loop;
    };
    if (const auto* d = std::get_if<Disk>(&shape_)) return {circle(d->r)};
    if (const auto* a = std::get_if<Annulus>(&shape_))
      return {circle(a->b), circle(a->a)};
    if (const auto* r = std::get_if<Rectangle>(&shape_))
      return {walk({{0, 0}, {r->w, 0}, {r->w, r->h}, {0, r->h}})};
    if (const auto* d = std::get_if<Diamond>(&shape_))
      return {walk({{d->s, 0}, {0, d->s}, {-d->s, 0}, {0, -d->s}})};
    if (const auto* e = std::get_if<Ellipse>(&shape_)) {
      const double rmax = std::max(e->a, e->b);
      const int m = std::max(8, static_cast<int>(std::ceil(2.0 * M_PI * rmax / step)));
      std::vector<Point> loop(m);
      for (int k = 0; k < m; ++k) {
        const double t = 2.0 * M_PI * k / m;
        loop[k] = {e->a * std::cos(t), e->b * std::sin(t)};
      }
      return {loop};
    }
    return {walk(std::get<Polygon>(shape_).vertices)};
  }

  // sup over boundary points y of |y - p|. On segments that sup sits at a
  // vertex; on circles it is radius + |center offset|.
  double max_boundary_distance(Point p) const {
    struct V {
      Point p;
      double operator()(const Disk& d) const { return d.r + norm(p); }
      double operator()(const Annulus& a) const { return a.b + norm(p); }
      double operator()(const Rectangle& r) const {
        double m = 0.0;
        for (Point v : {Point{0, 0}, Point{r.w, 0}, Point{r.w, r.h}, Point{0, r.h}})
          m = std::max(m, dist(p, v));
        return m;
      }
      double operator()(const Diamond& d) const {
        double m = 0.0;
        for (Point v : {Point{d.s, 0}, Point{0, d.s}, Point{-d.s, 0}, Point{0, -d.s}})
          m = std::max(m, dist(p, v));
        return m;
      }
      double operator()(const Ellipse& e) const {
        double m = 0.0;
        const int samples = 4096;
        for (int k = 0; k < samples; ++k) {
          const double t = 2.0 * M_PI * k / samples;
          m = std::max(m, dist(p, {e.a * std::cos(t), e.b * std::sin(t)}));
        }
        return m;
      }
      double operator()(const Polygon& poly) const {
        double m = 0.0;
        for (const auto& v : poly.vertices) m = std::max(m, dist(p, v));
        return m;
      }
    };
    return std::visit(V{p}, shape_);
  }

private:
  void validate() {
    struct V {
      void operator()(const Disk& d) const {
        if (!(d.r > 0.0)) throw InvalidParams("disk: r must be > 0");
      }
      void operator()(const Annulus& a) const {
        if (!(a.a > 0.0)) throw InvalidParams("annulus: a must be > 0");
        if (!(a.b > a.a)) throw InvalidParams("annulus: b must be > a");
      }
      void operator()(const Rectangle& r) const {
        if (!(r.w > 0.0)) throw InvalidParams("rectangle: w must be > 0");
        if (!(r.h > 0.0)) throw InvalidParams("rectangle: h must be > 0");
      }
      void operator()(const Diamond& d) const {
        if (!(d.s > 0.0)) throw InvalidParams("diamond: s must be > 0");
      }
      void operator()(const Ellipse& e) const {
        if (!(e.a > 0.0)) throw InvalidParams("ellipse: a must be > 0");
        if (!(e.b > 0.0)) throw InvalidParams("ellipse: b must be > 0");
      }
      void operator()(const Polygon& p) const {
        const auto& v = p.vertices;
        if (v.size() < 3) throw InvalidParams("polygon: needs at least 3 vertices");
        if (detail::polygon_signed_area(v) == 0.0)
          throw InvalidParams("polygon: degenerate (zero area)");
        const std::size_t n = v.size();
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = i + 1; j < n; ++j) {
            // Edges sharing a vertex touch by construction; skip those pairs.
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (detail::segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]))
              throw InvalidParams("polygon: self-intersecting");
          }
        }
      }
    };
    std::visit(V{}, shape_);
    // Normalize polygon orientation so loops and areas are consistent.
    if (auto* p = std::get_if<Polygon>(&shape_)) {
      if (detail::polygon_signed_area(p->vertices) < 0.0)
        std::reverse(p->vertices.begin(), p->vertices.end());
    }
  }

  Shape shape_;
};

inline DomainSpec make_disk(double r) { return DomainSpec(Disk{r}); }
inline DomainSpec make_annulus(double a, double b) { return DomainSpec(Annulus{a, b}); }
inline DomainSpec make_rectangle(double w, double h) { return DomainSpec(Rectangle{w, h}); }
inline DomainSpec make_diamond(double s) { return DomainSpec(Diamond{s}); }
inline DomainSpec make_ellipse(double a, double b) { return DomainSpec(Ellipse{a, b}); }
inline DomainSpec make_polygon(std::vector<Point> vertices) {
  return DomainSpec(Polygon{std::move(vertices)});
}

// Node-centered lattice over the domain's bounding box. Spacing is h = 1/n,
// the node counts are odd, and the lattice is anchored so the bounding-box
// center is exactly a node. That pins the natural symmetry point of every
// stock shape (disk center, square center) onto the grid at any resolution.
class Grid {
public:
  double h = 0.0;
  int nx = 0, ny = 0;
  Point origin;                    // coordinates of node (0,0)
  std::vector<std::uint8_t> mask;  // 1 for interior nodes, row-major j*nx+i
  std::vector<int> interior;       // flat indices of interior nodes, scan order
  std::vector<int> cells;          // base node index of cells with >= 1 interior corner

  int idx(int i, int j) const { return j * nx + i; }
  int ix(int flat) const { return flat % nx; }
  int iy(int flat) const { return flat / nx; }
  double x(int i) const { return origin.x + i * h; }
  double y(int j) const { return origin.y + j * h; }
  Point point(int flat) const { return {x(ix(flat)), y(iy(flat))}; }
  bool is_interior(int i, int j) const {
    return i >= 0 && i < nx && j >= 0 && j < ny && mask[idx(i, j)] != 0;
  }
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  double area() const { return static_cast<double>(interior.size()) * h * h; }

  // Flat index of the lattice node nearest to p; ValidationError if p falls
  // outside the lattice by more than half a cell.
  int nearest_node(Point p) const {
    const int i = static_cast<int>(std::lround((p.x - origin.x) / h));
    const int j = static_cast<int>(std::lround((p.y - origin.y) / h));
    if (i < 0 || i >= nx || j < 0 || j >= ny)
      throw BadNode("nearest_node: point outside lattice");
    return idx(i, j);
  }
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr rasterize(const DomainSpec& spec, int n) {
  if (n < 8) throw InvalidParams("rasterize: resolution n must be >= 8");
  auto g = std::make_shared<Grid>();
  g->h = 1.0 / n;
  const BBox bb = spec.bounding_box();
  const double cx = 0.5 * (bb.xmin + bb.xmax);
  const double cy = 0.5 * (bb.ymin + bb.ymax);
  // One spare ring beyond the bounding box so every interior node has a full
  // neighborhood of lattice nodes.
  const int mx = static_cast<int>(std::ceil(0.5 * (bb.xmax - bb.xmin) / g->h)) + 1;
  const int my = static_cast<int>(std::ceil(0.5 * (bb.ymax - bb.ymin) / g->h)) + 1;
  g->nx = 2 * mx + 1;
  g->ny = 2 * my + 1;
  g->origin = {cx - mx * g->h, cy - my * g->h};
  g->mask.assign(g->size(), 0);
  for (int j = 0; j < g->ny; ++j)
    for (int i = 0; i < g->nx; ++i)
      if (spec.inside({g->x(i), g->y(j)})) g->mask[g->idx(i, j)] = 1;

  for (int j = 0; j < g->ny; ++j)
    for (int i = 0; i < g->nx; ++i)
      if (g->mask[g->idx(i, j)]) g->interior.push_back(g->idx(i, j));
  if (g->interior.empty())
    throw ResolutionTooCoarse("rasterize: no interior node at n=" + std::to_string(n));

  for (int flat : g->interior) {
    const int i = g->ix(flat), j = g->iy(flat);
    if (!g->is_interior(i - 1, j) && !g->is_interior(i + 1, j) &&
        !g->is_interior(i, j - 1) && !g->is_interior(i, j + 1))
      throw ResolutionTooCoarse("rasterize: isolated interior node at n=" +
                                std::to_string(n));
  }

  // Interior must be 4-connected, otherwise the variational problems split
  // into independent pieces the caller did not ask for.
  {
    std::vector<std::uint8_t> seen(g->size(), 0);
    std::deque<int> queue{g->interior.front()};
    seen[g->interior.front()] = 1;
    std::size_t reached = 0;
    while (!queue.empty()) {
      const int flat = queue.front();
      queue.pop_front();
      ++reached;
      const int i = g->ix(flat), j = g->iy(flat);
      const int nbr[4] = {g->idx(i - 1, j), g->idx(i + 1, j), g->idx(i, j - 1),
                          g->idx(i, j + 1)};
      const bool ok[4] = {g->is_interior(i - 1, j), g->is_interior(i + 1, j),
                          g->is_interior(i, j - 1), g->is_interior(i, j + 1)};
      for (int k = 0; k < 4; ++k)
        if (ok[k] && !seen[nbr[k]]) {
          seen[nbr[k]] = 1;
          queue.push_back(nbr[k]);
        }
    }
    if (reached != g->interior.size())
      throw ResolutionTooCoarse("rasterize: interior mask disconnected at n=" +
                                std::to_string(n));
  }

  for (int j = 0; j + 1 < g->ny; ++j)
    for (int i = 0; i + 1 < g->nx; ++i) {
      if (g->mask[g->idx(i, j)] || g->mask[g->idx(i + 1, j)] ||
          g->mask[g->idx(i, j + 1)] || g->mask[g->idx(i + 1, j + 1)])
        g->cells.push_back(g->idx(i, j));
    }
  return g;
}

// Node values on a grid. Values at non-interior nodes are zero; the few
// operations that break that rule (the comparison cone) say so.
class ScalarField {
public:
  explicit ScalarField(GridPtr grid)
      : grid_(std::move(grid)), values_(grid_->size(), 0.0) {}

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }

  double& operator[](int flat) { return values_[flat]; }
  double operator[](int flat) const { return values_[flat]; }
  double& at(int i, int j) { return values_[grid_->idx(i, j)]; }
  double at(int i, int j) const { return values_[grid_->idx(i, j)]; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  void zero_exterior() {
    for (std::size_t k = 0; k < values_.size(); ++k)
      if (!grid_->mask[k]) values_[k] = 0.0;
  }

  // First node in scan order attaining the interior maximum.
  int argmax_interior() const {
    int best = grid_->interior.front();
    for (int flat : grid_->interior)
      if (values_[flat] > values_[best]) best = flat;
    return best;
  }

  double max_interior() const { return values_[argmax_interior()]; }

private:
  GridPtr grid_;
  std::vector<double> values_;
};

inline double sup_abs_diff_interior(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (int flat : a.grid().interior)
    m = std::max(m, std::abs(a[flat] - b[flat]));
  return m;
}

}  // namespace sobex
