#pragma once

#include <cmath>
#include <string>

#include "errors.hpp"

namespace sobex {

namespace detail {

// Lanczos approximation, Godfrey's 15-term table with g = 607/128.
// Relative error stays below 1e-13 on the positive real axis.
inline constexpr double lanczos_g = 607.0 / 128.0;
inline constexpr double lanczos_c[15] = {
    0.99999999999999709182,     57.156235665862923517,
    -59.597960355475491248,     14.136097974741747174,
    -0.49191381609762019978,    3.3994649984811888699e-5,
    4.6523628927048575665e-5,   -9.8374475304879564677e-5,
    1.5808870322491248884e-4,   -2.1026444172410488319e-4,
    2.1743961811521264320e-4,   -1.6431810653676389022e-4,
    8.4418223983852743293e-5,   -2.6190838401581408670e-5,
    3.6899182659531622704e-6};

inline double lanczos_sum(double z) {
  double s = lanczos_c[0];
  for (int k = 1; k < 15; ++k) s += lanczos_c[k] / (z - 1.0 + k);
  return s;
}

}  // namespace detail

inline double gamma_fn(double t) {
  if (t <= 0.0)
    throw DomainError("gamma: t must be > 0, got " + std::to_string(t));
  if (t < 0.5) {
    // Reflection; sin(pi t) > 0 since t is in (0, 0.5).
    return M_PI / (std::sin(M_PI * t) * gamma_fn(1.0 - t));
  }
  const double base = t + detail::lanczos_g - 0.5;
  return std::sqrt(2.0 * M_PI) * std::pow(base, t - 0.5) * std::exp(-base) *
         detail::lanczos_sum(t);
}

// Volume of the unit ball in R^n: pi^(n/2) / Gamma(n/2 + 1).
inline double unit_ball_volume(int n) {
  if (n < 1) throw InvalidParams("unit_ball_volume: n must be >= 1");
  return std::pow(M_PI, 0.5 * n) / gamma_fn(0.5 * n + 1.0);
}

// Best constant of the Sobolev embedding into L^(np/(n-p)), valid for
// 1 < p < n.
inline double sobolev_constant(int n, double p) {
  if (n < 2) throw InvalidParams("sobolev_constant: n must be >= 2");
  if (!(p > 1.0 && p < n))
    throw DomainError("sobolev_constant: requires 1 < p < n");
  const double ratio = gamma_fn(n / p) * gamma_fn(1.0 + n - n / p) /
                       (gamma_fn(1.0 + 0.5 * n) * gamma_fn(static_cast<double>(n)));
  return std::pow(M_PI, 0.5 * p) * n *
         std::pow((n - p) / (p - 1.0), p - 1.0) * std::pow(ratio, p / n);
}

// Gradient energy of the extremal on a ball of radius r, normalized to peak
// value one. Evaluated in log space so large p and small r do not overflow.
inline double lambda_ball(int n, double p, double r) {
  if (n < 1) throw InvalidParams("lambda_ball: n must be >= 1");
  if (!(p > n)) throw DomainError("lambda_ball: requires p > n");
  if (!(r > 0.0)) throw InvalidParams("lambda_ball: r must be > 0");
  const double log_nv = std::log(n * unit_ball_volume(n));
  const double log_val = log_nv + (p - 1.0) * std::log((p - n) / (p - 1.0)) -
                         (p - n) * std::log(r);
  return std::exp(log_val);
}

// The extremal itself: radial, peak 1 at the center, zero on the sphere.
inline double ball_profile(int n, double p, double r, double rho) {
  if (n < 1) throw InvalidParams("ball_profile: n must be >= 1");
  if (!(p > n)) throw DomainError("ball_profile: requires p > n");
  if (!(r > 0.0)) throw InvalidParams("ball_profile: r must be > 0");
  if (!(rho >= 0.0 && rho <= r))
    throw DomainError("ball_profile: rho must lie in [0, r]");
  return 1.0 - std::pow(rho / r, (p - n) / (p - 1.0));
}

// Lower bound obtained by symmetrization: depends on the domain only through
// its measure.
inline double talenti_lower(int n, double p, double area) {
  if (n < 1) throw InvalidParams("talenti_lower: n must be >= 1");
  if (!(p > n)) throw DomainError("talenti_lower: requires p > n");
  if (!(area > 0.0)) throw InvalidParams("talenti_lower: area must be > 0");
  const double log_val = std::log(static_cast<double>(n)) +
                         (p / n) * std::log(unit_ball_volume(n)) +
                         (p - 1.0) * std::log((p - n) / (p - 1.0)) +
                         (1.0 - p / n) * std::log(area);
  return std::exp(log_val);
}

// Upper bound by domain monotonicity: the ball inscribed in the domain.
inline double inradius_upper(int n, double p, double inradius) {
  if (!(inradius > 0.0)) throw InvalidParams("inradius_upper: inradius must be > 0");
  return lambda_ball(n, p, inradius);
}

// lim_{p -> n+} of the ball constant at radius one: n omega_n / (n-1)^(n-1).
inline double p_to_n_limit_constant(int n) {
  if (n < 2) throw InvalidParams("p_to_n_limit_constant: n must be >= 2");
  return n * unit_ball_volume(n) / std::pow(n - 1.0, n - 1.0);
}

// Growth constant of the least nonzero Dirichlet energy at the conformal
// exponent: n^(2n-1) omega_n e^(n-1) / (n-1)^(n-1).
inline double renwei_constant(int n) {
  if (n < 2) throw InvalidParams("renwei_constant: n must be >= 2");
  return std::pow(static_cast<double>(n), 2.0 * n - 1.0) * unit_ball_volume(n) *
         std::exp(n - 1.0) / std::pow(n - 1.0, n - 1.0);
}

}  // namespace sobex
