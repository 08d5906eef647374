#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "distance.hpp"
#include "geometry.hpp"
#include "inflap.hpp"
#include "plap.hpp"

namespace sobex {

struct StudyRecord {
  double exponent = 0.0;    // the swept p or q
  double value = 0.0;       // lambda_q or Lambda_p
  double normalized = 0.0;  // value * area^(p/q), or (value/area)^(1/p)
  Point argmax;
  double wall_time_s = 0.0;  // never serialized: outputs stay reproducible
  bool ok = false;
  std::string message;  // failure reason when !ok
};

struct StudyConfig {
  SolveConfig solver;
  double monotone_slack = 0.005;
  double target_rel_tol = 0.0;  // 0: per-study default (0.05 for q, 0.10 for p)
};

struct StudyReport {
  std::vector<StudyRecord> records;  // sorted by exponent (input order)
  double target = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> extrapolated_limit;  // p-sweeps only
  bool monotone = true;
  bool within_target = false;
  bool incomplete = false;
  // q-sweep: sup|w_tail/max(w_tail) - u_p| over the interior.
  // p-sweep: distance from the tail argmax to the nearest distance maximum.
  double tail_sup_distance = std::numeric_limits<double>::quiet_NaN();
  double argmax_drift = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace detail

// Sweep q upward at fixed p: checks the rescaled values decrease, and that
// the tail approaches the q->infinity constant from solve_extremal.
inline StudyReport study_q(const GridPtr& grid, double p,
                           const std::vector<double>& q_list,
                           const StudyConfig& cfg = {}) {
  StudyReport rep;
  if (q_list.empty()) return rep;
  for (std::size_t k = 0; k < q_list.size(); ++k) {
    if (!(q_list[k] >= 1.0)) throw InvalidParams("study_q: q values must be >= 1");
    if (k > 0 && !(q_list[k] > q_list[k - 1]))
      throw InvalidParams("study_q: q_list must be strictly increasing");
  }
  if (!(q_list.back() < 128.0))
    throw BadExponent("study_q: q_list max must be < 128");

  const double area = grid->area();
  const double tol = cfg.target_rel_tol > 0.0 ? cfg.target_rel_tol : 0.05;
  std::optional<ScalarField> warm;
  std::optional<ScalarField> tail_field;
  for (double q : q_list) {
    StudyRecord rec;
    rec.exponent = q;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      SolveConfig sc = cfg.solver;
      sc.p = p;
      sc.q = q;
      SolveReport sol = solve_lambda_q(grid, sc, warm);
      rec.value = sol.value;
      rec.normalized = sol.value * std::pow(area, p / q);
      rec.argmax = grid->point(sol.argmax_node);
      rec.ok = true;
      warm = sol.field;
      tail_field = std::move(sol.field);
    } catch (const Error& e) {
      rec.message = e.what();
      rep.incomplete = true;
    }
    rec.wall_time_s = detail::seconds_since(t0);
    rep.records.push_back(std::move(rec));
  }

  const StudyRecord* prev = nullptr;
  for (const auto& rec : rep.records) {
    if (!rec.ok) continue;
    if (prev && rec.normalized > prev->normalized * (1.0 + cfg.monotone_slack))
      rep.monotone = false;
    prev = &rec;
  }

  try {
    SolveReport ext = solve_extremal(grid, p, cfg.solver);
    rep.target = ext.value;
    const StudyRecord* tail = nullptr;
    for (const auto& rec : rep.records)
      if (rec.ok) tail = &rec;
    if (tail) {
      rep.within_target = std::abs(tail->value - rep.target) <= tol * rep.target;
      if (tail_field) {
        ScalarField w = *tail_field;
        const double wmax = w.max_interior();
        if (wmax > 0.0)
          for (double& x : w.values()) x /= wmax;
        rep.tail_sup_distance = sup_abs_diff_interior(w, ext.field);
      }
    }
  } catch (const Error& e) {
    rep.incomplete = true;
    rep.note = std::string("limit solve failed: ") + e.what();
  }
  return rep;
}

// Sweep p upward: checks (Lambda_p / area)^(1/p) increases, extrapolates its
// limit from the tail, and compares against 1/sup(rho).
inline StudyReport study_p(const GridPtr& grid,
                           const std::vector<double>& p_list,
                           const StudyConfig& cfg = {}) {
  StudyReport rep;
  if (p_list.empty()) return rep;
  for (std::size_t k = 0; k < p_list.size(); ++k) {
    if (!(p_list[k] > 2.0)) throw BadExponent("study_p: p values must exceed 2");
    if (k > 0 && !(p_list[k] > p_list[k - 1]))
      throw InvalidParams("study_p: p_list must be strictly increasing");
  }
  if (!(p_list.back() <= 50.0))
    throw BadExponent("study_p: p values above 50 are not supported (descent "
                      "stalls at reachable resolutions)");

  const double area = grid->area();
  const double tol = cfg.target_rel_tol > 0.0 ? cfg.target_rel_tol : 0.10;
  const ScalarField rho = fast_march_distance(grid);
  const double sup_rho = rho.max_interior();
  rep.target = 1.0 / sup_rho;
  std::vector<Point> rho_maxima;
  for (int flat : grid->interior)
    if (rho[flat] >= sup_rho - 0.5 * grid->h)
      rho_maxima.push_back(grid->point(flat));

  std::optional<ScalarField> warm;
  for (double p : p_list) {
    StudyRecord rec;
    rec.exponent = p;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      SolveReport sol = solve_extremal(grid, p, cfg.solver, warm);
      rec.value = sol.value;
      rec.normalized = std::pow(sol.value / area, 1.0 / p);
      rec.argmax = grid->point(sol.argmax_node);
      rec.ok = true;
      warm = std::move(sol.field);
    } catch (const Error& e) {
      rec.message = e.what();
      rep.incomplete = true;
    }
    rec.wall_time_s = detail::seconds_since(t0);
    rep.records.push_back(std::move(rec));
  }

  const StudyRecord* prev = nullptr;
  const StudyRecord* tail = nullptr;
  for (const auto& rec : rep.records) {
    if (!rec.ok) continue;
    if (prev && rec.normalized < prev->normalized * (1.0 - cfg.monotone_slack))
      rep.monotone = false;
    prev = &rec;
    tail = &rec;
  }

  // Fit normalized = L * exp(c/p) through the last three good records:
  // least squares on (1/p, log normalized).
  std::vector<const StudyRecord*> fitpts;
  for (auto it = rep.records.rbegin(); it != rep.records.rend() && fitpts.size() < 3; ++it)
    if (it->ok) fitpts.push_back(&*it);
  if (!fitpts.empty()) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(fitpts.size());
    for (const auto* r : fitpts) {
      const double x = 1.0 / r->exponent;
      const double y = std::log(r->normalized);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    const double intercept =
        denom != 0.0 ? (sy * sxx - sx * sxy) / denom : sy / n;
    rep.extrapolated_limit = std::exp(intercept);
    rep.within_target =
        std::abs(*rep.extrapolated_limit - rep.target) <= tol * rep.target;
  }

  if (tail) {
    double drift = std::numeric_limits<double>::infinity();
    for (const auto& mp : rho_maxima)
      drift = std::min(drift, dist(tail->argmax, mp));
    rep.argmax_drift = drift;
  }
  return rep;
}

struct MultiplicityResult {
  GridPtr grid;
  std::vector<int> punctures;  // flat node indices, one per angle
  std::vector<InfReport> reports;
  std::vector<std::vector<double>> pairwise_sup;  // sup |u_i - u_j| interior
};

// Punctured-annulus solutions at several midcircle angles. Distinct angles
// give genuinely different solutions; the pairwise table quantifies that.
inline MultiplicityResult annulus_multiplicity(double a, double b, int n,
                                               const std::vector<double>& angles,
                                               double tol = 1e-8,
                                               long max_sweeps = 100000) {
  if (angles.empty()) throw InvalidParams("annulus_multiplicity: empty angle list");
  for (std::size_t i = 0; i < angles.size(); ++i)
    for (std::size_t j = i + 1; j < angles.size(); ++j)
      if (angles[i] == angles[j])
        throw InvalidParams("annulus_multiplicity: angles must be distinct");

  const DomainSpec spec = make_annulus(a, b);
  MultiplicityResult out;
  out.grid = rasterize(spec, n);
  const double mid = 0.5 * (a + b);
  for (double theta : angles) {
    const int node =
        out.grid->nearest_node({mid * std::cos(theta), mid * std::sin(theta)});
    if (!out.grid->mask[node])
      throw BadNode("annulus_multiplicity: puncture fell on a non-interior node");
    out.punctures.push_back(node);
    out.reports.push_back(inf_solve({out.grid, node}, tol, max_sweeps));
  }
  const std::size_t m = out.reports.size();
  out.pairwise_sup.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double s =
          sup_abs_diff_interior(out.reports[i].field, out.reports[j].field);
      out.pairwise_sup[i][j] = out.pairwise_sup[j][i] = s;
    }
  return out;
}

}  // namespace sobex
