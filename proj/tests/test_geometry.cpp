#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include <sobex/geometry.hpp>

using namespace sobex;

TEST_CASE("domain constructors validate their parameters") {
  REQUIRE_NOTHROW(make_disk(1.0));
  REQUIRE_NOTHROW(make_annulus(1.0, 2.0));
  REQUIRE_NOTHROW(make_rectangle(2.0, 0.5));
  REQUIRE_NOTHROW(make_diamond(1.0));
  REQUIRE_NOTHROW(make_ellipse(1.5, 1.0));

  REQUIRE_THROWS_AS(make_disk(0.0), InvalidParams);
  REQUIRE_THROWS_AS(make_disk(-1.0), InvalidParams);
  REQUIRE_THROWS_AS(make_annulus(2.0, 1.0), InvalidParams);
  REQUIRE_THROWS_AS(make_annulus(0.0, 1.0), InvalidParams);
  REQUIRE_THROWS_AS(make_rectangle(0.0, 1.0), InvalidParams);
  REQUIRE_THROWS_AS(make_rectangle(1.0, -2.0), InvalidParams);
  REQUIRE_THROWS_AS(make_diamond(0.0), InvalidParams);
  REQUIRE_THROWS_AS(make_ellipse(1.0, 0.0), InvalidParams);
}

TEST_CASE("polygon validation") {
  REQUIRE_NOTHROW(make_polygon({{0, 0}, {1, 0}, {0.5, 1}}));
  // Too few vertices, zero area, self-intersection.
  REQUIRE_THROWS_AS(make_polygon({{0, 0}, {1, 0}}), InvalidParams);
  REQUIRE_THROWS_AS(make_polygon({{0, 0}, {1, 0}, {2, 0}}), InvalidParams);
  REQUIRE_THROWS_AS(make_polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}),
                    InvalidParams);
}

TEST_CASE("clockwise polygon input is stored counterclockwise") {
  DomainSpec spec = make_polygon({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
  const auto& poly = std::get<Polygon>(spec.shape());
  double area2 = 0.0;
  for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
    const Point& a = poly.vertices[i];
    const Point& b = poly.vertices[(i + 1) % poly.vertices.size()];
    area2 += a.x * b.y - b.x * a.y;
  }
  REQUIRE(area2 > 0.0);
}

TEST_CASE("inside test on primitive shapes") {
  DomainSpec disk = make_disk(1.0);
  REQUIRE(disk.inside({0, 0}));
  REQUIRE_FALSE(disk.inside({1, 0}));  // open set excludes the boundary
  REQUIRE_FALSE(disk.inside({0.8, 0.7}));

  DomainSpec diamond = make_diamond(1.0);
  REQUIRE(diamond.inside({0.3, 0.3}));
  REQUIRE_FALSE(diamond.inside({0.5, 0.6}));

  DomainSpec ann = make_annulus(1.0, 2.0);
  REQUIRE(ann.inside({1.5, 0}));
  REQUIRE_FALSE(ann.inside({0.5, 0}));
  REQUIRE_FALSE(ann.inside({2.5, 0}));

  DomainSpec rect = make_rectangle(1.0, 1.0);
  REQUIRE(rect.inside({0.5, 0.5}));
  REQUIRE_FALSE(rect.inside({-0.1, 0.5}));
  REQUIRE_FALSE(rect.inside({0.5, 0.0}));

  DomainSpec tri = make_polygon({{0, 0}, {1, 0}, {0.5, 1}});
  REQUIRE(tri.inside({0.5, 0.3}));
  REQUIRE_FALSE(tri.inside({0.05, 0.5}));
}

TEST_CASE("rasterized area approximates the analytic area") {
  auto disk = rasterize(make_disk(1.0), 80);
  REQUIRE(std::abs(disk->area() - M_PI) / M_PI < 0.02);

  auto square = rasterize(make_rectangle(1.0, 1.0), 80);
  REQUIRE(std::abs(square->area() - 1.0) < 0.02);

  auto ann = rasterize(make_annulus(1.0, 2.0), 80);
  REQUIRE(std::abs(ann->area() - 3.0 * M_PI) / (3.0 * M_PI) < 0.02);
}

TEST_CASE("rasterized area error shrinks as the grid refines") {
  double prev = 1e9;
  for (int n : {20, 40, 80}) {
    auto g = rasterize(make_disk(1.0), n);
    const double err = std::abs(g->area() - M_PI);
    REQUIRE(err < prev);
    prev = err;
  }
}

TEST_CASE("rasterize rejects hopeless resolutions") {
  REQUIRE_THROWS_AS(rasterize(make_disk(0.01), 8), ResolutionTooCoarse);
  REQUIRE_THROWS_AS(rasterize(make_disk(1.0), 7), InvalidParams);
}

TEST_CASE("lattice dimensions are odd and anchored at the box center") {
  for (int n : {8, 33, 80}) {
    auto g = rasterize(make_disk(1.0), n);
    REQUIRE(g->nx % 2 == 1);
    REQUIRE(g->ny % 2 == 1);
    // Center node sits exactly at the symmetric domain's center.
    const int c = g->idx(g->nx / 2, g->ny / 2);
    REQUIRE(std::abs(g->point(c).x) < 1e-12);
    REQUIRE(std::abs(g->point(c).y) < 1e-12);
  }
}

TEST_CASE("every interior node passes the inside test") {
  for (const DomainSpec& spec :
       {make_disk(1.0), make_annulus(1.0, 2.0), make_rectangle(1.0, 1.0),
        make_diamond(1.0), make_ellipse(1.3, 0.8),
        make_polygon({{0, 0}, {1, 0}, {0.5, 1}})}) {
    auto g = rasterize(spec, 40);
    for (int f : g->interior) REQUIRE(spec.inside(g->point(f)));
    // And the mask has no stragglers outside the interior list.
    std::size_t count = 0;
    for (std::size_t k = 0; k < g->size(); ++k)
      if (g->mask[k]) ++count;
    REQUIRE(count == g->interior.size());
  }
}

TEST_CASE("interior mask is 4-connected") {
  auto g = rasterize(make_annulus(1.0, 2.0), 24);
  // Flood fill from one interior node must reach all of them.
  std::vector<std::uint8_t> seen(g->size(), 0);
  std::vector<int> stack{g->interior.front()};
  seen[stack.front()] = 1;
  std::size_t reached = 0;
  while (!stack.empty()) {
    const int f = stack.back();
    stack.pop_back();
    ++reached;
    for (int d : {1, -1, g->nx, -g->nx}) {
      const int nb = f + d;
      if (g->mask[nb] && !seen[nb]) {
        seen[nb] = 1;
        stack.push_back(nb);
      }
    }
  }
  REQUIRE(reached == g->interior.size());
}

TEST_CASE("grid areas use the interior count times the cell area") {
  auto g = rasterize(make_rectangle(1.0, 1.0), 16);
  REQUIRE(g->area() ==
          Catch::Approx(double(g->interior.size()) * g->h * g->h));
}

TEST_CASE("nearest node round trip") {
  auto g = rasterize(make_disk(1.0), 16);
  for (int f : {g->interior.front(), g->interior.back(),
                g->idx(g->nx / 2, g->ny / 2)}) {
    REQUIRE(g->nearest_node(g->point(f)) == f);
  }
  REQUIRE_THROWS_AS(g->nearest_node({50.0, 0.0}), BadNode);
}

TEST_CASE("scalar fields live on their grid") {
  auto g = rasterize(make_disk(1.0), 16);
  ScalarField f(g);
  for (std::size_t k = 0; k < g->size(); ++k)
    REQUIRE(f[static_cast<int>(k)] == 0.0);
  f[g->interior.front()] = 2.5;
  REQUIRE(f.max_interior() == 2.5);
  REQUIRE(f.argmax_interior() == g->interior.front());
}

TEST_CASE("argmax ties break toward the lowest row then column") {
  auto g = rasterize(make_rectangle(1.0, 1.0), 10);
  ScalarField f(g);
  for (int fidx : g->interior) f[fidx] = 1.0;
  const int got = f.argmax_interior();
  // Scan order is row-major from the bottom row, so the first interior
  // node in that order must win.
  REQUIRE(got == g->interior.front());
}

TEST_CASE("boundary loops sample each component densely") {
  DomainSpec ann = make_annulus(1.0, 2.0);
  auto loops = ann.boundary_loops(0.01);
  REQUIRE(loops.size() == 2);
  for (const auto& loop : loops) {
    REQUIRE(loop.size() >= 3);
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const Point a = loop[k];
      const Point b = loop[(k + 1) % loop.size()];
      REQUIRE(dist(a, b) <= 0.011);
      const double r = norm(a);
      const bool inner = std::abs(r - 1.0) < 1e-9;
      const bool outer = std::abs(r - 2.0) < 1e-9;
      REQUIRE((inner || outer));
    }
  }
}
