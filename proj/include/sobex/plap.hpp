#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "distance.hpp"
#include "geometry.hpp"
#include "log.hpp"

namespace sobex {

struct StepRule {
  double shrink = 0.5;     // backtracking contraction
  double decrease = 1e-4;  // sufficient-decrease constant
};

struct SolveConfig {
  double p = 4.0;
  double q = 2.0;  // constraint norm exponent (quotient solves only)
  double tol_rel_energy = 1e-9;
  long max_iters = 50000;                // per continuation stage
  std::vector<double> continuation;      // empty: automatic ladder up to p
  StepRule step_rule;
};

struct SolveReport {
  explicit SolveReport(ScalarField f) : field(std::move(f)) {}

  double value = 0.0;  // lambda_q, Lambda_p, or a plain energy
  ScalarField field;
  int argmax_node = -1;
  long iterations = 0;
  double final_residual = 0.0;
  std::vector<double> energy_trace;  // accepted objective values, final stage
};

namespace detail {

inline double pow_half_p(double m, double p) {
  // m^(p/2) with fast paths for the exponents the ladder visits constantly.
  if (p == 4.0) return m * m;
  if (p == 3.0) return m * std::sqrt(m);
  if (p == 6.0) return m * m * m;
  if (p == 8.0) {
    const double m2 = m * m;
    return m2 * m2;
  }
  return std::pow(m, 0.5 * p);
}

// 2x2 Gauss abscissa offset on the unit cell.
inline constexpr double gauss_off = 0.28867513459481288225;  // 1/(2 sqrt 3)

inline double p_energy_value(const ScalarField& u, double p) {
  const Grid& g = u.grid();
  const double inv2h = 0.5 / g.h;
  const double invh = 1.0 / g.h;
  const double w4 = 0.25 * g.h * g.h;
  double E = 0.0;
  for (int c : g.cells) {
    const double u00 = u[c], u10 = u[c + 1];
    const double u01 = u[c + g.nx], u11 = u[c + g.nx + 1];
    const double mx = ((u10 - u00) + (u11 - u01)) * inv2h;
    const double my = ((u01 - u00) + (u11 - u10)) * inv2h;
    const double tw = ((u00 + u11) - (u10 + u01)) * invh * gauss_off;
    for (int s = -1; s <= 1; s += 2)
      for (int t = -1; t <= 1; t += 2) {
        const double gx = mx + s * tw;
        const double gy = my + t * tw;
        const double m = gx * gx + gy * gy;
        if (m > 0.0) E += pow_half_p(m, p) * w4;
      }
  }
  return E;
}

}  // namespace detail

// Discrete p-Dirichlet energy: |grad of the bilinear interpolant|^p
// integrated per cell by 2x2 Gauss quadrature. One-point (cell-center)
// quadrature is cheaper but blind to the twist mode of the interpolant;
// point loads then buy value through checkerboard spikes at zero cost, so the
// four-point rule is not optional here. The second return is the exact
// derivative of E with respect to every node value; constrained
// (non-interior) entries are reported too, callers mask them.
inline std::pair<double, ScalarField> p_energy(const ScalarField& u, double p) {
  if (!(p > 1.0)) throw BadExponent("p_energy: requires p > 1");
  const Grid& g = u.grid();
  ScalarField grad(u.grid_ptr());
  const double inv2h = 0.5 / g.h;
  const double invh = 1.0 / g.h;
  const double w4 = 0.25 * g.h * g.h;
  double E = 0.0;
  for (int c : g.cells) {
    const double u00 = u[c], u10 = u[c + 1];
    const double u01 = u[c + g.nx], u11 = u[c + g.nx + 1];
    const double mx = ((u10 - u00) + (u11 - u01)) * inv2h;
    const double my = ((u01 - u00) + (u11 - u10)) * inv2h;
    const double tw = ((u00 + u11) - (u10 + u01)) * invh * detail::gauss_off;
    double dmx = 0.0, dmy = 0.0, dtw = 0.0;
    for (int s = -1; s <= 1; s += 2)
      for (int t = -1; t <= 1; t += 2) {
        const double gx = mx + s * tw;
        const double gy = my + t * tw;
        const double m = gx * gx + gy * gy;
        if (m == 0.0) continue;
        const double mp2 = detail::pow_half_p(m, p);
        E += mp2 * w4;
        const double w = p * (mp2 / m) * w4;
        dmx += w * gx;
        dmy += w * gy;
        dtw += w * (s * gx + t * gy);
      }
    const double ax = dmx * inv2h, ay = dmy * inv2h;
    const double at = dtw * invh * detail::gauss_off;
    grad[c] += -ax - ay + at;
    grad[c + 1] += ax - ay - at;
    grad[c + g.nx] += -ax + ay - at;
    grad[c + g.nx + 1] += ax + ay + at;
  }
  return {E, std::move(grad)};
}

inline double lq_norm(const ScalarField& u, double q) {
  if (!(q >= 1.0)) throw BadExponent("lq_norm: requires q >= 1");
  const Grid& g = u.grid();
  double s = 0.0;
  if (q == 2.0) {
    for (int flat : g.interior) s += u[flat] * u[flat];
  } else {
    for (int flat : g.interior) s += std::pow(std::abs(u[flat]), q);
  }
  return std::pow(s * g.h * g.h, 1.0 / q);
}

namespace detail {

struct StageOut {
  double value = 0.0;
  long iters = 0;
  double residual = 0.0;
  bool converged = false;
};

// Shared descent skeleton: spectral (Barzilai-Borwein) trial step, monotone
// Armijo backtracking, convergence on 10 consecutive accepted steps with
// relative objective change under tol. Plain fixed-step descent is hopeless
// here: the cell Hessian spreads over six orders of magnitude once p > 3.
template <class Objective>
StageOut descend(ScalarField& u, const SolveConfig& cfg, Objective&& obj,
                 std::vector<double>& trace) {
  const Grid& g = u.grid();
  trace.clear();

  double F = obj.prepare(u);  // also refreshes obj's gradient state
  trace.push_back(obj.traced(F));

  std::vector<double> d(g.size(), 0.0);
  std::vector<double> prev_u, prev_d;
  ScalarField cand(u.grid_ptr());
  double t = 0.0;
  int streak = 0;
  StageOut out;
  out.value = F;

  for (long iter = 1; iter <= cfg.max_iters; ++iter) {
    obj.direction(u, F, d);  // interior entries only; exterior stay 0
    double dd = 0.0;
    for (int flat : g.interior) dd += d[flat] * d[flat];
    if (dd == 0.0) {
      out.converged = true;
      break;
    }

    if (!prev_u.empty()) {
      double ss = 0.0, sy = 0.0;
      for (int flat : g.interior) {
        const double du = u[flat] - prev_u[flat];
        ss += du * du;
        sy += du * (d[flat] - prev_d[flat]);
      }
      t = sy > 0.0 ? ss / sy : t * 4.0;
    } else {
      double umax = 0.0, dmax = 0.0;
      for (int flat : g.interior) {
        umax = std::max(umax, std::abs(u[flat]));
        dmax = std::max(dmax, std::abs(d[flat]));
      }
      t = dmax > 0.0 ? 0.1 * std::max(umax, 1e-12) / dmax : 1.0;
    }
    t = std::clamp(t, 1e-20, 1e20);

    prev_u = u.values();
    prev_d = d;

    bool accepted = false;
    double Fnew = F;
    for (int bt = 0; bt < 60; ++bt) {
      cand.values() = u.values();
      for (int flat : g.interior) cand[flat] = u[flat] - t * d[flat];
      double Fc;
      if (obj.evaluate(cand, Fc) && Fc <= F - cfg.step_rule.decrease * t * dd) {
        accepted = true;
        Fnew = Fc;
        break;
      }
      t *= cfg.step_rule.shrink;
    }
    if (!accepted) {
      // No decrease at any representable step: we are at the floating-point
      // floor of this objective. Count it as converged.
      out.converged = true;
      out.iters = iter;
      break;
    }

    obj.accept(cand, Fnew);  // normalizations; updates gradient state
    u.values() = cand.values();
    const double rel = (F - Fnew) / std::max(std::abs(Fnew), 1e-300);
    F = Fnew;
    trace.push_back(obj.traced(F));
    out.iters = iter;
    out.residual = rel;
    if (rel < cfg.tol_rel_energy) {
      if (++streak >= 10) {
        out.converged = true;
        break;
      }
    } else {
      streak = 0;
    }
  }
  out.value = obj.final_value(F);
  return out;
}

// Rayleigh quotient E(u) / ||u||_q^p restricted to u >= 0, ||u||_q = 1.
// evaluate() clamps and renormalizes, so the iterate never leaves the
// constraint set and the traced objective is the quotient itself.
struct QuotientObjective {
  double p, q;
  ScalarField gradE;
  double h2;

  QuotientObjective(const GridPtr& grid, double p, double q)
      : p(p), q(q), gradE(grid), h2(grid->h * grid->h) {}

  double prepare(ScalarField& u) {
    const Grid& g = u.grid();
    for (int flat : g.interior) u[flat] = std::max(0.0, u[flat]);
    const double nu = lq_norm(u, q);
    if (!(nu > 0.0)) throw InvalidParams("solve_lambda_q: zero initial field");
    for (int flat : g.interior) u[flat] /= nu;
    auto [E, gE] = p_energy(u, p);
    gradE = std::move(gE);
    return E;
  }

  void direction(const ScalarField& u, double E, std::vector<double>& d) const {
    const Grid& g = u.grid();
    std::fill(d.begin(), d.end(), 0.0);
    for (int flat : g.interior) {
      // d/du of E(u) - p E ||u||_q at ||u||_q = 1, u >= 0.
      const double s = h2 * std::pow(u[flat], q - 1.0);
      d[flat] = gradE[flat] - p * E * s;
    }
  }

  bool evaluate(ScalarField& cand, double& F) const {
    const Grid& g = cand.grid();
    for (int flat : g.interior) cand[flat] = std::max(0.0, cand[flat]);
    const double nu = lq_norm(cand, q);
    if (!(nu > 0.0)) return false;
    for (int flat : g.interior) cand[flat] /= nu;
    F = p_energy_value(cand, p);
    return std::isfinite(F);
  }

  void accept(const ScalarField& u, double) {
    auto [E, gE] = p_energy(u, p);
    (void)E;
    gradE = std::move(gE);
  }

  double traced(double F) const { return F; }
  double final_value(double F) const { return F; }
};

// J(v) = E(v)/p - v(y): the point-source functional. Strictly convex for
// p > 2, so the minimizer is unique and any descent limit is it. The iterate
// is rescaled along its ray only on entry and exit: the rescale never raises
// J, and doing it inside the loop would poison the quasi-Newton step (the
// secant pair must come from plain gradient steps).
struct DiracObjective {
  double p;
  int y;
  ScalarField gradE;

  DiracObjective(const GridPtr& grid, double p, int y)
      : p(p), y(y), gradE(grid) {}

  // Jump to the minimum of J along the ray {t v}: t = (v(y)/E)^(1/(p-1)).
  // At that point E(tv) = t v(y) holds exactly, the discrete energy identity.
  static double ray_rescale(ScalarField& v, double p, int y, double& E) {
    const double vy = v[y];
    if (!(vy > 0.0) || !(E > 0.0)) return E / p - vy;
    const double t = std::pow(vy / E, 1.0 / (p - 1.0));
    for (double& x : v.values()) x *= t;
    E *= std::pow(t, p);
    return E / p - v[y];
  }

  double prepare(ScalarField& v) {
    double E = p_energy_value(v, p);
    const double J = ray_rescale(v, p, y, E);
    auto [E2, gE] = p_energy(v, p);
    (void)E2;
    gradE = std::move(gE);
    return J;
  }

  void direction(const ScalarField& v, double, std::vector<double>& d) const {
    const Grid& g = v.grid();
    std::fill(d.begin(), d.end(), 0.0);
    for (int flat : g.interior) d[flat] = gradE[flat] / p;
    d[y] -= 1.0;
  }

  bool evaluate(ScalarField& cand, double& F) const {
    const double E = p_energy_value(cand, p);
    if (!std::isfinite(E)) return false;
    F = E / p - cand[y];
    return std::isfinite(F);
  }

  void accept(const ScalarField& v, double) {
    auto [E, gE] = p_energy(v, p);
    (void)E;
    gradE = std::move(gE);
  }

  // Exit rescale, applied by the caller after the stage converges.
  static void finalize(ScalarField& v, double p, int y) {
    double E = p_energy_value(v, p);
    ray_rescale(v, p, y, E);
  }

  double traced(double F) const { return F; }
  double final_value(double) const { return 0.0; }  // caller reports E(v)
};

// Moderate exponents descend fine from a cold start; the ladder exists for
// large p, where the energy's flat regions stall any descent started far
// away. Warm-started solves skip the ladder: their init already has the
// right shape.
inline std::vector<double> exponent_ladder(double target, bool warm) {
  static const double rungs[] = {4, 6, 8, 12, 16, 24, 32, 48};
  std::vector<double> out;
  if (!warm)
    for (double r : rungs)
      if (r > 2.0 && r < target) out.push_back(r);
  out.push_back(target);
  return out;
}

inline std::vector<double> resolve_continuation(const SolveConfig& cfg,
                                                bool warm = false) {
  if (!(cfg.p > 2.0)) throw BadExponent("solver: requires p > 2");
  if (!(cfg.tol_rel_energy > 0.0))
    throw InvalidParams("solver: tol_rel_energy must be > 0");
  if (cfg.max_iters < 1) throw InvalidParams("solver: max_iters must be >= 1");
  if (cfg.continuation.empty()) return exponent_ladder(cfg.p, warm);
  for (std::size_t k = 0; k < cfg.continuation.size(); ++k) {
    if (!(cfg.continuation[k] > 2.0))
      throw InvalidParams("continuation: stages must exceed 2");
    if (k > 0 && !(cfg.continuation[k] > cfg.continuation[k - 1]))
      throw InvalidParams("continuation: stages must be strictly increasing");
  }
  if (cfg.continuation.back() != cfg.p)
    throw InvalidParams("continuation: last stage must equal p");
  return cfg.continuation;
}

}  // namespace detail

// Best constant of the W^{1,p}_0 -> L^q embedding, via projected descent on
// the Rayleigh quotient. Continuation runs up the p-ladder first, then up a
// q-ladder, warm-starting every stage; only the final stage must converge.
inline SolveReport solve_lambda_q(const GridPtr& grid, const SolveConfig& cfg,
                                  std::optional<ScalarField> init = {}) {
  const bool warm = init.has_value();
  const auto pstages = detail::resolve_continuation(cfg, warm);
  if (!(cfg.q >= 1.0)) throw InvalidParams("solve_lambda_q: q must be >= 1");
  if (cfg.q >= 128.0)
    throw BadExponent(
        "solve_lambda_q: q must be < 128 (the power |u|^(q-1) degrades; use "
        "solve_extremal for the q->infinity limit)");
  std::vector<double> qstages;
  if (!warm)
    for (double r : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0})
      if (r < cfg.q) qstages.push_back(r);
  qstages.push_back(cfg.q);

  ScalarField u = init ? std::move(*init) : fast_march_distance(grid);
  if (u.grid_ptr() != grid)
    throw InvalidParams("solve_lambda_q: init field built on a different grid");
  u.zero_exterior();

  std::vector<double> trace;
  detail::StageOut out;
  long total = 0;
  for (double sp : pstages) {
    detail::QuotientObjective obj(grid, sp, qstages.front());
    out = detail::descend(u, cfg, obj, trace);
    total += out.iters;
    log_trace("lambda_q stage p=" + std::to_string(sp) +
              " iters=" + std::to_string(out.iters));
  }
  for (std::size_t k = 1; k < qstages.size(); ++k) {
    detail::QuotientObjective obj(grid, cfg.p, qstages[k]);
    out = detail::descend(u, cfg, obj, trace);
    total += out.iters;
    log_trace("lambda_q stage q=" + std::to_string(qstages[k]) +
              " iters=" + std::to_string(out.iters));
  }
  if (!out.converged)
    throw NoConvergence("solve_lambda_q: max_iters reached in final stage",
                        total, out.value, out.residual, trace);

  SolveReport rep(std::move(u));
  rep.value = out.value;
  rep.argmax_node = rep.field.argmax_interior();
  rep.iterations = total;
  rep.final_residual = out.residual;
  rep.energy_trace = std::move(trace);
  return rep;
}

// Minimize J(v) = p_energy(v)/p - v(y): the discrete p-Laplace problem with a
// unit point load at node y. Reported value is p_energy of the minimizer,
// which matches v(y) to roundoff by the energy identity.
inline SolveReport dirac_solve(const GridPtr& grid, double p, int y,
                               const SolveConfig& cfg_in = {},
                               std::optional<ScalarField> init = {}) {
  SolveConfig cfg = cfg_in;
  cfg.p = p;
  const auto pstages = detail::resolve_continuation(cfg, init.has_value());
  if (y < 0 || y >= static_cast<int>(grid->size()) || !grid->mask[y])
    throw BadNode("dirac_solve: source node must be interior");

  ScalarField v = init ? std::move(*init) : fast_march_distance(grid);
  if (v.grid_ptr() != grid)
    throw InvalidParams("dirac_solve: init field built on a different grid");
  v.zero_exterior();
  if (!(v[y] > 0.0)) v = fast_march_distance(grid);

  std::vector<double> trace;
  detail::StageOut out;
  long total = 0;
  for (double sp : pstages) {
    detail::DiracObjective obj(grid, sp, y);
    out = detail::descend(v, cfg, obj, trace);
    detail::DiracObjective::finalize(v, sp, y);
    total += out.iters;
    log_trace("dirac stage p=" + std::to_string(sp) +
              " iters=" + std::to_string(out.iters));
  }
  if (!out.converged)
    throw NoConvergence("dirac_solve: max_iters reached in final stage", total,
                        out.value, out.residual, trace);

  SolveReport rep(std::move(v));
  rep.value = detail::p_energy_value(rep.field, p);
  rep.argmax_node = rep.field.argmax_interior();
  rep.iterations = total;
  rep.final_residual =
      std::abs(rep.value - rep.field[y]) / std::max(rep.field[y], 1e-300);
  rep.energy_trace = std::move(trace);
  return rep;
}

// The sup-norm best constant via the point-source fixed point: move the load
// to the current maximum until it stops moving. Reported field is the
// extremal normalized to peak one.
inline SolveReport solve_extremal(const GridPtr& grid, double p,
                                  const SolveConfig& cfg_in = {},
                                  std::optional<ScalarField> init = {}) {
  SolveConfig cfg = cfg_in;
  cfg.p = p;
  (void)detail::resolve_continuation(cfg);

  std::optional<ScalarField> warm = std::move(init);
  int y;
  if (warm) {
    if (warm->grid_ptr() != grid)
      throw InvalidParams("solve_extremal: init field built on a different grid");
    y = warm->argmax_interior();
  } else {
    y = fast_march_distance(grid).argmax_interior();
  }
  std::vector<int> history{y};
  long total = 0;
  SolveReport rep{ScalarField(grid)};
  for (int update = 0;; ++update) {
    if (update > 20) {
      throw NoConvergence("solve_extremal: source node failed to settle in 20 updates",
                          total, 0.0, 0.0);
    }
    rep = dirac_solve(grid, p, y, cfg, warm);
    total += rep.iterations;
    const int ynew = rep.field.argmax_interior();
    if (ynew == y) break;
    for (std::size_t k = 0; k + 1 < history.size(); ++k)
      if (history[k] == ynew) {
        std::string cyc = "solve_extremal: source node cycle:";
        for (std::size_t t = k; t < history.size(); ++t)
          cyc += " " + std::to_string(history[t]);
        throw NoConvergence(cyc + " " + std::to_string(ynew), total, 0.0, 0.0);
      }
    history.push_back(ynew);
    log_info("solve_extremal: moved source to node " + std::to_string(ynew));
    warm = rep.field;
    y = ynew;
  }

  const double vmax = rep.field[y];
  for (double& x : rep.field.values()) x /= vmax;
  rep.value = rep.value / std::pow(vmax, p);
  rep.argmax_node = y;
  rep.iterations = total;
  return rep;
}

}  // namespace sobex
