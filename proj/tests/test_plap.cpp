#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <sobex/closedform.hpp>
#include <sobex/distance.hpp>
#include <sobex/plap.hpp>

using namespace sobex;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kLamBall241 = 1.86168453546061821538527015305;   // 16pi/27
constexpr double kDiracPeak = 0.812889105208933513116842047245;   // (16pi/27)^{-1/3}

ScalarField affine_field(const GridPtr& g, double a, double gx, double gy) {
  ScalarField f(g);
  for (std::size_t k = 0; k < g->size(); ++k) {
    const Point p = g->point(static_cast<int>(k));
    f[static_cast<int>(k)] = a + gx * p.x + gy * p.y;
  }
  return f;
}

}  // namespace

TEST_CASE("energy of the zero field is zero with zero gradient") {
  auto g = rasterize(make_disk(1.0), 16);
  ScalarField u(g);
  auto [e, grad] = p_energy(u, 4.0);
  REQUIRE(e == 0.0);
  for (std::size_t k = 0; k < g->size(); ++k)
    REQUIRE(grad[static_cast<int>(k)] == 0.0);
}

TEST_CASE("energy of an affine ramp is slope to the p per unit area") {
  auto g = rasterize(make_rectangle(1.0, 1.0), 16);
  const double gx = 0.75, gy = -0.5;
  ScalarField u = affine_field(g, 2.0, gx, gy);
  const double e = p_energy(u, 4.0).first;
  const double slope2 = gx * gx + gy * gy;
  const double cells = double(g->cells.size());
  REQUIRE_THAT(e, WithinRel(std::pow(slope2, 2.0) * cells * g->h * g->h,
                            1e-12));
}

TEST_CASE("energy gradient matches central differences") {
  // 9x9 interior patch; random fields; the acceptance-level tolerance.
  auto g = rasterize(make_rectangle(1.0, 1.0), 10);
  std::mt19937 rng(123u);
  std::uniform_real_distribution<double> val(0.1, 1.0);
  for (double p : {3.0, 4.0, 6.0}) {
    ScalarField u(g);
    for (int f : g->interior) u[f] = val(rng);
    auto [e0, grad] = p_energy(u, p);
    const double step = 1e-6;
    double worst = 0.0;
    for (int f : g->interior) {
      ScalarField up = u, dn = u;
      up[f] += step;
      dn[f] -= step;
      const double fd =
          (p_energy(up, p).first - p_energy(dn, p).first) / (2.0 * step);
      const double scale = std::max({std::abs(fd), std::abs(grad[f]), 1e-12});
      worst = std::max(worst, std::abs(fd - grad[f]) / scale);
    }
    CAPTURE(p, worst);
    REQUIRE(worst < 1e-6);
  }
}

TEST_CASE("norm of the constant one field is the area root") {
  auto g = rasterize(make_rectangle(1.0, 1.0), 16);
  ScalarField u(g);
  for (int f : g->interior) u[f] = 1.0;
  for (double q : {1.0, 2.0, 7.5}) {
    REQUIRE_THAT(lq_norm(u, q), WithinRel(std::pow(g->area(), 1.0 / q), 1e-12));
  }
  REQUIRE(lq_norm(ScalarField(g), 2.0) == 0.0);
}

TEST_CASE("very large q drives the norm toward the maximum") {
  // Discretely the q=512 norm is pinched between the peak node's own
  // contribution and the peak times the area factor.
  DomainSpec disk = make_disk(1.0);
  auto g = rasterize(disk, 80);
  ScalarField u(g);
  for (int f : g->interior)
    u[f] = ball_profile(2, 4.0, 1.0, std::min(1.0, norm(g->point(f))));
  const double n512 = lq_norm(u, 512.0);
  const double peak = u.max_interior();
  REQUIRE(peak == 1.0);
  REQUIRE(n512 >= peak * std::pow(g->h * g->h, 1.0 / 512.0) * (1.0 - 1e-12));
  REQUIRE(n512 <= peak * std::pow(g->area(), 1.0 / 512.0) * (1.0 + 1e-12));
  REQUIRE(std::abs(n512 - peak) < 0.02);
  REQUIRE(std::abs(n512 - peak) < std::abs(lq_norm(u, 64.0) - peak));
}

TEST_CASE("embedding constant is stable under grid refinement") {
  DomainSpec disk = make_disk(1.0);
  SolveConfig cfg;
  cfg.p = 4;
  cfg.q = 2;
  auto coarse = solve_lambda_q(rasterize(disk, 80), cfg);
  auto fine = solve_lambda_q(rasterize(disk, 160), cfg);
  REQUIRE(std::abs(coarse.value - fine.value) / fine.value < 0.05);
}

TEST_CASE("embedding minimizer is a unit-norm nonnegative field") {
  DomainSpec disk = make_disk(1.0);
  auto g = rasterize(disk, 40);
  SolveConfig cfg;
  cfg.p = 4;
  cfg.q = 2;
  auto rep = solve_lambda_q(g, cfg);
  REQUIRE_THAT(lq_norm(rep.field, 2.0), WithinAbs(1.0, 1e-10));
  for (int f : g->interior) REQUIRE(rep.field[f] >= 0.0);
  REQUIRE(g->mask[rep.argmax_node]);
  REQUIRE(rep.field[rep.argmax_node] == rep.field.max_interior());
  for (std::size_t k = 1; k < rep.energy_trace.size(); ++k)
    REQUIRE(rep.energy_trace[k] <= rep.energy_trace[k - 1]);
  REQUIRE(rep.final_residual < 1e-8);
}

TEST_CASE("quotient value ignores the initialization scale") {
  DomainSpec disk = make_disk(1.0);
  auto g = rasterize(disk, 40);
  SolveConfig cfg;
  cfg.p = 4;
  cfg.q = 2;
  ScalarField init = fast_march_distance(g);
  ScalarField scaled = init;
  for (double& x : scaled.values()) x *= 10.0;
  auto a = solve_lambda_q(g, cfg, init);
  auto b = solve_lambda_q(g, cfg, scaled);
  REQUIRE_THAT(a.value, WithinRel(b.value, 1e-6));
}

TEST_CASE("exponent guards on the embedding solver") {
  auto g = rasterize(make_disk(1.0), 16);
  SolveConfig cfg;
  cfg.p = 2.0;
  cfg.q = 2.0;
  REQUIRE_THROWS_AS(solve_lambda_q(g, cfg), BadExponent);
  cfg.p = 4.0;
  cfg.q = 128.0;
  REQUIRE_THROWS_AS(solve_lambda_q(g, cfg), BadExponent);
  cfg.q = 0.5;
  REQUIRE_THROWS_AS(solve_lambda_q(g, cfg), InvalidParams);
  cfg.q = 2.0;
  cfg.tol_rel_energy = 0.0;
  REQUIRE_THROWS_AS(solve_lambda_q(g, cfg), InvalidParams);
}

TEST_CASE("iteration cap raises a diagnosable failure") {
  auto g = rasterize(make_disk(1.0), 24);
  SolveConfig cfg;
  cfg.p = 4;
  cfg.q = 2;
  cfg.max_iters = 3;
  try {
    solve_lambda_q(g, cfg);
    FAIL("expected NoConvergence");
  } catch (const NoConvergence& e) {
    REQUIRE(e.iterations >= 3);
    REQUIRE(std::isfinite(e.last_value));
    REQUIRE_FALSE(e.trace.empty());
  }
}

TEST_CASE("point-load solution obeys the energy identity") {
  DomainSpec disk = make_disk(1.0);
  auto g = rasterize(disk, 40);
  const int y = g->nearest_node({0, 0});
  auto rep = dirac_solve(g, 4.0, y);
  REQUIRE_THAT(rep.value, WithinRel(rep.field[y], 1e-6));
  REQUIRE(rep.final_residual < 1e-4);
  for (int f : g->interior) REQUIRE(rep.field[f] > 0.0);
  REQUIRE(rep.argmax_node == y);
}

TEST_CASE("point-load peak approaches the closed-form scaling") {
  DomainSpec disk = make_disk(1.0);
  auto g = rasterize(disk, 80);
  const int y = g->nearest_node({0, 0});
  auto rep = dirac_solve(g, 4.0, y);
  REQUIRE(std::abs(rep.field[y] - kDiracPeak) / kDiracPeak < 0.03);
}

TEST_CASE("point-load solution is independent of the initialization") {
  DomainSpec disk = make_disk(1.0);
  auto g = rasterize(disk, 40);
  const int y = g->nearest_node({0, 0});
  SolveConfig cfg;
  cfg.p = 4;
  cfg.tol_rel_energy = 1e-12;
  cfg.max_iters = 300000;
  auto a = dirac_solve(g, 4.0, y, cfg);
  ScalarField init(g);
  for (int f : g->interior) {
    const double r = norm(g->point(f));
    init[f] = 0.5 * (1.0 - r * r);
  }
  auto b = dirac_solve(g, 4.0, y, cfg, init);
  REQUIRE(sup_abs_diff_interior(a.field, b.field) < 1e-5);
}

TEST_CASE("point load rejects non-interior source nodes") {
  auto g = rasterize(make_disk(1.0), 16);
  REQUIRE_THROWS_AS(dirac_solve(g, 4.0, 0), BadNode);
  REQUIRE_THROWS_AS(dirac_solve(g, 4.0, -1), BadNode);
  REQUIRE_THROWS_AS(dirac_solve(g, 4.0, int(g->size())), BadNode);
}

TEST_CASE("sup-norm extremal on a coarse disk") {
  DomainSpec disk = make_disk(1.0);
  auto g = rasterize(disk, 41);
  auto rep = solve_extremal(g, 4.0);
  // Normalization makes the maximum exactly one at exactly one node.
  int ones = 0;
  for (int f : g->interior)
    if (rep.field[f] == 1.0) ++ones;
  REQUIRE(ones == 1);
  REQUIRE(rep.field[rep.argmax_node] == 1.0);
  REQUIRE(rep.argmax_node == g->nearest_node({0, 0}));
  // Coarse-grid constant lands within ten percent of the ball value.
  REQUIRE(std::abs(rep.value - kLamBall241) / kLamBall241 < 0.10);
  for (std::size_t k = 1; k < rep.energy_trace.size(); ++k)
    REQUIRE(rep.energy_trace[k] <= rep.energy_trace[k - 1]);
}

TEST_CASE("extremal profile follows the radial closed form") {
  DomainSpec disk = make_disk(1.0);
  auto g = rasterize(disk, 61);
  auto rep = solve_extremal(g, 4.0);
  double sup = 0.0;
  for (int f : g->interior) {
    const double r = std::min(1.0, norm(g->point(f)));
    sup = std::max(sup, std::abs(rep.field[f] - ball_profile(2, 4.0, 1.0, r)));
  }
  REQUIRE(sup < 0.04);
}

TEST_CASE("extremal value sits between the measure and inradius bounds") {
  DomainSpec dia = make_diamond(1.0);
  auto g = rasterize(dia, 61);
  auto rep = solve_extremal(g, 4.0);
  auto dres = distance_field(dia, g);
  const double lo = talenti_lower(2, 4.0, g->area());
  const double hi = inradius_upper(2, 4.0, dres.sup_norm);
  REQUIRE(rep.value >= lo * 0.98);
  REQUIRE(rep.value <= hi * 1.02);
}

TEST_CASE("embedding value approaches the sup-norm constant slowly in q") {
  // The field converges much faster than the value: at q=64 the value
  // still carries the (sup/||u||_q)^p factor, about 1.7x here.
  DomainSpec disk = make_disk(1.0);
  auto g = rasterize(disk, 80);
  SolveConfig cfg;
  cfg.p = 4;
  cfg.q = 64;
  cfg.tol_rel_energy = 1e-8;
  auto lam = solve_lambda_q(g, cfg);
  auto ext = solve_extremal(g, 4.0, cfg);
  ScalarField w = lam.field;
  const double wmax = w.max_interior();
  for (double& x : w.values()) x /= wmax;
  REQUIRE(sup_abs_diff_interior(w, ext.field) < 0.05);
  REQUIRE(lam.value > ext.value);
  REQUIRE(lam.value < 2.0 * ext.value);
}

TEST_CASE("continuation ladder resolves sensibly") {
  SolveConfig cfg;
  cfg.p = 12.0;
  auto stages = detail::resolve_continuation(cfg);
  REQUIRE(stages == std::vector<double>{4.0, 6.0, 8.0, 12.0});
  auto direct = detail::resolve_continuation(cfg, true);
  REQUIRE(direct == std::vector<double>{12.0});
  cfg.continuation = {3.0, 12.0};
  REQUIRE(detail::resolve_continuation(cfg) ==
          std::vector<double>{3.0, 12.0});
  cfg.continuation = {12.0, 3.0};
  REQUIRE_THROWS_AS(detail::resolve_continuation(cfg), InvalidParams);
  cfg.continuation = {3.0, 8.0};
  REQUIRE_THROWS_AS(detail::resolve_continuation(cfg), InvalidParams);
}
