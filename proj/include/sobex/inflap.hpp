#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "log.hpp"

namespace sobex {

// Dirichlet data: 0 on every non-interior node, 1 at the puncture.
struct InfProblem {
  GridPtr grid;
  int puncture = -1;  // flat index, must be interior
};

struct InfReport {
  explicit InfReport(ScalarField f) : field(std::move(f)) {}

  ScalarField field;
  long iterations = 0;        // sweeps executed
  double final_update = 0.0;  // max node change in the last sweep
  double lipschitz_estimate = 0.0;
};

namespace detail {

inline constexpr double inv_sqrt2 = 0.70710678118654752440;

// Midrange of the 8-neighbor stencil. Diagonal values sit at distance h*sqrt2
// and are linearly interpolated toward distance h before the comparison, so
// all eight candidates speak for the same step length. The interpolation is
// monotone in the diagonal value, so it commutes with min/max and only needs
// to be applied to the extreme diagonals.
inline double midrange8(const ScalarField& u, int flat, int nx) {
  const double uc = u[flat];
  const double a0 = u[flat - 1], a1 = u[flat + 1];
  const double a2 = u[flat - nx], a3 = u[flat + nx];
  const double d0 = u[flat - nx - 1], d1 = u[flat - nx + 1];
  const double d2 = u[flat + nx - 1], d3 = u[flat + nx + 1];
  const double dmx = std::max(std::max(d0, d1), std::max(d2, d3));
  const double dmn = std::min(std::min(d0, d1), std::min(d2, d3));
  const double mx = std::max(std::max(std::max(a0, a1), std::max(a2, a3)),
                             uc + (dmx - uc) * inv_sqrt2);
  const double mn = std::min(std::min(std::min(a0, a1), std::min(a2, a3)),
                             uc + (dmn - uc) * inv_sqrt2);
  return 0.5 * (mx + mn);
}

inline double lipschitz_over_pairs(const ScalarField& u) {
  const Grid& g = u.grid();
  const double inv_h = 1.0 / g.h;
  const double inv_hd = inv_h * inv_sqrt2;
  double L = 0.0;
  for (int flat : g.interior) {
    const double uc = u[flat];
    L = std::max(L, std::abs(uc - u[flat - 1]) * inv_h);
    L = std::max(L, std::abs(uc - u[flat + 1]) * inv_h);
    L = std::max(L, std::abs(uc - u[flat - g.nx]) * inv_h);
    L = std::max(L, std::abs(uc - u[flat + g.nx]) * inv_h);
    L = std::max(L, std::abs(uc - u[flat - g.nx - 1]) * inv_hd);
    L = std::max(L, std::abs(uc - u[flat - g.nx + 1]) * inv_hd);
    L = std::max(L, std::abs(uc - u[flat + g.nx - 1]) * inv_hd);
    L = std::max(L, std::abs(uc - u[flat + g.nx + 1]) * inv_hd);
  }
  return L;
}

}  // namespace detail

// Apex-to-boundary reach against the lattice boundary actually seen by the
// stencil: non-interior nodes with at least one interior 8-neighbor. These
// are the nodes where the solve pins zero, so a unit cone built with this m
// dominates the discrete data exactly, which is what the comparison argument
// needs. (DomainSpec::max_boundary_distance gives the continuum analogue.)
inline double max_boundary_distance(const Grid& g, int node) {
  if (node < 0 || node >= static_cast<int>(g.size()))
    throw BadNode("max_boundary_distance: node out of range");
  const Point x = g.point(node);
  double m = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.mask[k]) continue;
    const int i = g.ix(static_cast<int>(k)), j = g.iy(static_cast<int>(k));
    if (g.is_interior(i - 1, j) || g.is_interior(i + 1, j) ||
        g.is_interior(i, j - 1) || g.is_interior(i, j + 1) ||
        g.is_interior(i - 1, j - 1) || g.is_interior(i - 1, j + 1) ||
        g.is_interior(i + 1, j - 1) || g.is_interior(i + 1, j + 1))
      m = std::max(m, dist(g.point(static_cast<int>(k)), x));
  }
  return m;
}

// The comparison cone 1 - |x - vertex|/m. This field deliberately carries
// nonzero (possibly negative) values on exterior nodes: it is a test object,
// not a solution.
inline ScalarField cone(const GridPtr& grid, int vertex, double m) {
  if (!(m > 0.0)) throw InvalidParams("cone: m must be > 0");
  if (vertex < 0 || vertex >= static_cast<int>(grid->size()))
    throw BadNode("cone: vertex node out of range");
  ScalarField f(grid);
  const Point v = grid->point(vertex);
  for (std::size_t k = 0; k < grid->size(); ++k)
    f[static_cast<int>(k)] = 1.0 - dist(grid->point(static_cast<int>(k)), v) / m;
  return f;
}

// Gauss-Seidel iteration of u <- midrange8(u), alternating lexicographic and
// reverse-lexicographic sweeps, all interior nodes except the puncture.
// The update is monotone in the neighbor values and keeps u inside [0, 1].
inline InfReport inf_solve(const InfProblem& pb, double tol = 1e-8,
                           long max_sweeps = 100000) {
  if (!(tol > 0.0)) throw InvalidParams("inf_solve: tol must be > 0");
  if (max_sweeps < 1) throw InvalidParams("inf_solve: max_sweeps must be >= 1");
  const Grid& g = *pb.grid;
  if (pb.puncture < 0 || pb.puncture >= static_cast<int>(g.size()) ||
      !g.mask[pb.puncture])
    throw BadNode("inf_solve: puncture must be an interior node");

  // Start from the clipped unit cone at the puncture; its slope already has
  // the right sign everywhere, which saves a large fraction of the sweeps.
  const Point xstar = g.point(pb.puncture);
  double m0 = max_boundary_distance(g, pb.puncture);
  if (m0 <= 0.0) m0 = g.h;

  InfReport rep{ScalarField(pb.grid)};
  ScalarField& u = rep.field;
  for (int flat : g.interior)
    u[flat] = std::max(0.0, 1.0 - dist(g.point(flat), xstar) / m0);
  u[pb.puncture] = 1.0;

  double delta = 0.0;
  bool converged = false;
  for (long sweep = 0; sweep < max_sweeps; ++sweep) {
    delta = 0.0;
    if (sweep % 2 == 0) {
      for (int flat : g.interior) {
        if (flat == pb.puncture) continue;
        const double nv = detail::midrange8(u, flat, g.nx);
        delta = std::max(delta, std::abs(nv - u[flat]));
        u[flat] = nv;
      }
    } else {
      for (auto it = g.interior.rbegin(); it != g.interior.rend(); ++it) {
        const int flat = *it;
        if (flat == pb.puncture) continue;
        const double nv = detail::midrange8(u, flat, g.nx);
        delta = std::max(delta, std::abs(nv - u[flat]));
        u[flat] = nv;
      }
    }
    rep.iterations = sweep + 1;
    if (delta < tol) {
      converged = true;
      break;
    }
  }
  rep.final_update = delta;
  if (!converged)
    throw NoConvergence("inf_solve: max_sweeps reached", rep.iterations, 0.0,
                        delta);
  rep.lipschitz_estimate = detail::lipschitz_over_pairs(u);
  log_info("inf_solve: " + std::to_string(rep.iterations) + " sweeps, update " +
           std::to_string(delta));
  return rep;
}

// Deviation from the midrange fixed point, same stencil as inf_solve.
// Zero at exterior and excluded nodes.
inline ScalarField inf_residual(const ScalarField& u,
                                const std::vector<int>& exclude = {}) {
  const Grid& g = u.grid();
  std::vector<std::uint8_t> skip(g.size(), 0);
  for (int flat : exclude)
    if (flat >= 0 && flat < static_cast<int>(g.size())) skip[flat] = 1;
  ScalarField res(u.grid_ptr());
  for (int flat : g.interior) {
    if (skip[flat]) continue;
    res[flat] = std::abs(u[flat] - detail::midrange8(u, flat, g.nx));
  }
  return res;
}

// u <= v + slack over the interior. The interior is where the comparison
// principle speaks; cones go negative on far exterior corners by design.
inline bool comparison_check(const ScalarField& u, const ScalarField& v,
                             double slack) {
  if (u.grid_ptr() != v.grid_ptr())
    throw InvalidParams("comparison_check: fields live on different grids");
  for (int flat : u.grid().interior)
    if (u[flat] > v[flat] + slack) return false;
  return true;
}

}  // namespace sobex
