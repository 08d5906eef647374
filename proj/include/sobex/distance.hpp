#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "geometry.hpp"

namespace sobex {

// First-order fast marching against the non-interior node set. Only the mask
// is consulted, so solvers without a DomainSpec at hand can reuse it.
inline ScalarField fast_march_distance(const GridPtr& grid) {
  const Grid& g = *grid;
  ScalarField rho(grid);
  constexpr double INF = std::numeric_limits<double>::infinity();
  std::vector<double> d(g.size(), INF);
  std::vector<std::uint8_t> accepted(g.size(), 0);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (!g.mask[k]) {
      d[k] = 0.0;
      accepted[k] = 1;
    }

  auto neighbor = [&](int i, int j) -> double {
    if (i < 0 || i >= g.nx || j < 0 || j >= g.ny) return 0.0;  // off-lattice: exterior
    const int f = g.idx(i, j);
    return accepted[f] ? d[f] : INF;
  };
  auto update = [&](int i, int j) -> double {
    double a = std::min(neighbor(i - 1, j), neighbor(i + 1, j));
    double b = std::min(neighbor(i, j - 1), neighbor(i, j + 1));
    if (a > b) std::swap(a, b);
    if (a == INF) return INF;
    if (b - a >= g.h || b == INF) return a + g.h;
    // Both axes active: solve (t-a)^2 + (t-b)^2 = h^2 for the larger root.
    return 0.5 * (a + b + std::sqrt(2.0 * g.h * g.h - (a - b) * (a - b)));
  };

  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
  for (int flat : g.interior) {
    const int i = g.ix(flat), j = g.iy(flat);
    if (!g.is_interior(i - 1, j) || !g.is_interior(i + 1, j) ||
        !g.is_interior(i, j - 1) || !g.is_interior(i, j + 1)) {
      d[flat] = update(i, j);
      if (d[flat] < INF) heap.push({d[flat], flat});
    }
  }
  while (!heap.empty()) {
    const auto [val, flat] = heap.top();
    heap.pop();
    if (accepted[flat] || val > d[flat]) continue;
    accepted[flat] = 1;
    const int i = g.ix(flat), j = g.iy(flat);
    const int di[4] = {-1, 1, 0, 0};
    const int dj[4] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      const int ii = i + di[k], jj = j + dj[k];
      if (!g.is_interior(ii, jj)) continue;
      const int f = g.idx(ii, jj);
      if (accepted[f]) continue;
      const double cand = update(ii, jj);
      if (cand < d[f]) {
        d[f] = cand;
        heap.push({cand, f});
      }
    }
  }
  for (int flat : g.interior) rho[flat] = d[flat];
  return rho;
}

struct DistanceResult {
  ScalarField rho;
  double sup_norm = 0.0;
  int argmax = -1;                // first sup node in scan order
  std::vector<int> maxima_nodes;  // interior nodes within h/2 of the sup
  std::vector<Point> maxima;      // same nodes as coordinates
  bool used_exact_formula = false;
};

inline DistanceResult distance_field(const DomainSpec& spec, const GridPtr& grid) {
  const Grid& g = *grid;
  DistanceResult res{ScalarField(grid)};
  if (spec.has_exact_distance()) {
    for (int flat : g.interior)
      res.rho[flat] = *spec.exact_boundary_distance(g.point(flat));
    res.used_exact_formula = true;
  } else {
    res.rho = fast_march_distance(grid);
  }
  res.argmax = res.rho.argmax_interior();
  res.sup_norm = res.rho[res.argmax];
  // Grid quantization blurs the maximum point; anything within h/2 counts.
  for (int flat : g.interior)
    if (res.rho[flat] >= res.sup_norm - 0.5 * g.h) {
      res.maxima_nodes.push_back(flat);
      res.maxima.push_back(g.point(flat));
    }
  return res;
}

// | |D rho| - 1 | with one-sided differences toward smaller rho. Evaluated at
// every lattice node (a zero field scores residual 1 everywhere).
inline ScalarField eikonal_residual(const DistanceResult& res) {
  const Grid& g = res.rho.grid();
  ScalarField out(res.rho.grid_ptr());
  auto value = [&](int i, int j) -> double {
    if (i < 0 || i >= g.nx || j < 0 || j >= g.ny) return 0.0;
    return res.rho[g.idx(i, j)];
  };
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double c = value(i, j);
      const double gx =
          std::max({c - value(i - 1, j), c - value(i + 1, j), 0.0}) / g.h;
      const double gy =
          std::max({c - value(i, j - 1), c - value(i, j + 1), 0.0}) / g.h;
      out[g.idx(i, j)] = std::abs(std::hypot(gx, gy) - 1.0);
    }
  return out;
}

struct RidgeWitness {
  int node = -1;  // flat index
  Point y1, y2;   // boundary points realizing the near-minimal distance
  double separation = 0.0;
};

struct RidgeResult {
  std::vector<RidgeWitness> nodes;

  bool contains(int flat) const {
    for (const auto& w : nodes)
      if (w.node == flat) return true;
    return false;
  }
};

// A node joins the ridge when its near-minimal boundary points fall into two
// clusters separated by more than delta_sep. Clusters are wrap-around runs of
// consecutive near-minimal samples along each boundary loop. A single run
// covering most of a loop (the disk center sees the whole circle as
// near-minimal) still witnesses the ridge: its two spread-out ends are taken.
inline RidgeResult ridge_set(const DomainSpec& spec, const GridPtr& grid,
                             double eps_near, double delta_sep) {
  const Grid& g = *grid;
  if (!(eps_near >= 2.0 * g.h))
    throw InvalidParams("ridge_set: eps_near must be >= 2h");
  if (!(delta_sep > 4.0 * g.h))
    throw InvalidParams("ridge_set: delta_sep must be > 4h");

  const auto loops = spec.boundary_loops(0.5 * g.h);
  RidgeResult res;
  for (int flat : g.interior) {
    const Point x = g.point(flat);
    double dmin = std::numeric_limits<double>::infinity();
    for (const auto& loop : loops)
      for (const auto& s : loop) dmin = std::min(dmin, dist(x, s));

    struct Run {
      Point rep;       // nearest sample in the run
      double rep_d;
      Point spread;    // sample farthest from rep, for degenerate loops
      std::size_t count = 0;
    };
    std::vector<Run> runs;
    std::size_t loop_samples_of_max_run = 0;
    std::size_t max_run_count = 0;
    for (const auto& loop : loops) {
      const std::size_t m = loop.size();
      std::vector<std::uint8_t> near(m);
      for (std::size_t k = 0; k < m; ++k)
        near[k] = dist(x, loop[k]) < dmin + eps_near ? 1 : 0;
      // Start scanning at a non-near sample so wrap-around runs stay whole.
      std::size_t start = 0;
      while (start < m && near[start]) ++start;
      if (start == m) {
        // Whole loop near-minimal: one degenerate run.
        Run r;
        r.rep_d = std::numeric_limits<double>::infinity();
        for (const auto& s : loop)
          if (dist(x, s) < r.rep_d) {
            r.rep_d = dist(x, s);
            r.rep = s;
          }
        double far = -1.0;
        for (const auto& s : loop)
          if (dist(r.rep, s) > far) {
            far = dist(r.rep, s);
            r.spread = s;
          }
        r.count = m;
        runs.push_back(r);
        if (m > max_run_count) {
          max_run_count = m;
          loop_samples_of_max_run = m;
        }
        continue;
      }
      std::size_t k = start;
      do {
        if (near[k % m]) {
          Run r;
          r.rep_d = std::numeric_limits<double>::infinity();
          const std::size_t run_start = k;
          while (near[k % m]) {
            const Point s = loop[k % m];
            if (dist(x, s) < r.rep_d) {
              r.rep_d = dist(x, s);
              r.rep = s;
            }
            ++k;
          }
          r.count = k - run_start;
          double far = -1.0;
          for (std::size_t t = run_start; t < k; ++t) {
            const Point s = loop[t % m];
            if (dist(r.rep, s) > far) {
              far = dist(r.rep, s);
              r.spread = s;
            }
          }
          runs.push_back(r);
          if (r.count > max_run_count) {
            max_run_count = r.count;
            loop_samples_of_max_run = m;
          }
        } else {
          ++k;
        }
      } while (k % m != start);
    }

    if (runs.empty()) continue;
    RidgeWitness w;
    w.node = flat;
    if (runs.size() >= 2) {
      double best = -1.0;
      for (std::size_t a = 0; a < runs.size(); ++a)
        for (std::size_t b = a + 1; b < runs.size(); ++b) {
          const double sep = dist(runs[a].rep, runs[b].rep);
          if (sep > best) {
            best = sep;
            w.y1 = runs[a].rep;
            w.y2 = runs[b].rep;
          }
        }
      w.separation = best;
    } else {
      const Run& r = runs.front();
      if (loop_samples_of_max_run == 0 ||
          r.count * 4 < loop_samples_of_max_run * 3)
        continue;  // one tight cluster: a regular (non-ridge) node
      w.y1 = r.rep;
      w.y2 = r.spread;
      w.separation = dist(r.rep, r.spread);
    }
    if (w.separation > delta_sep) res.nodes.push_back(w);
  }
  return res;
}

}  // namespace sobex
