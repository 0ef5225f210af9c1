#pragma once

// Stationarity system of the rate-constrained harvesting problem after
// eigenbasis reduction. With the transmit covariance restricted to the
// channel's right singular basis and the top r_s eigenchannels active, the
// optimality conditions collapse to scalar root-finding problems in the
// power multiplier nu (and, for the non-ideal receiver, the split rho).
//
// Conventions used throughout:
//   - singvals are plain singular values; gains lambda_k^2 are formed here.
//   - mu is the rate multiplier, nu the power multiplier.
//   - residuals are signed (lhs - rhs) so bracketing root finders can use
//     them directly; normalized_* variants divide by |rhs| + 1 for
//     scale-invariant tolerance checks.

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "swipt/common.hpp"

namespace swipt {

struct SmKktPoint {
  double rho = 0.0;
  double mu = 0.0;
  double nu = 0.0;
  int r_s = 0;
  PowerAllocation powers;
};

namespace detail {

inline void check_active_set(const std::vector<double>& singvals, int r_s) {
  if (r_s < 1 || r_s > static_cast<int>(singvals.size()))
    throw std::invalid_argument("r_s must lie in [1, rank]");
}

struct Sides {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual() const { return lhs - rhs; }
  double normalized() const { return (lhs - rhs) / (std::abs(rhs) + 1.0); }
};

// Geometric mean of lambda_k^2 / (nu - rho lambda_k^2) over the active set,
// evaluated in log space; the raw product overflows at high SNR.
inline double active_gain_geomean(double nu, double rho, const std::vector<double>& singvals,
                                  int r_s) {
  double acc = 0.0;
  for (int k = 0; k < r_s; ++k) {
    const double l2 = singvals[k] * singvals[k];
    const double den = nu - rho * l2;
    if (!(den > 0.0)) throw std::domain_error("nu must exceed rho*lambda_k^2 on the active set");
    acc += std::log(l2 / den);
  }
  return std::exp(acc / r_s);
}

}  // namespace detail

// p_k = (mu/(ln2 (nu - rho lambda_k^2)) - sigma2/((1-rho) lambda_k^2))+ on the
// active set, zero beyond it.
inline PowerAllocation power_allocation(double mu, double nu, double rho,
                                        const std::vector<double>& singvals, int r_s,
                                        double sigma2) {
  detail::check_active_set(singvals, r_s);
  if (!(rho >= 0.0 && rho < 1.0)) throw std::domain_error("rho must lie in [0,1)");
  PowerAllocation p(singvals.size(), 0.0);
  for (int k = 0; k < r_s; ++k) {
    const double l2 = singvals[k] * singvals[k];
    const double den = nu - rho * l2;
    if (!(den > 0.0)) throw std::domain_error("nu must exceed rho*lambda_k^2 on the active set");
    p[k] = pos(mu / (ln2 * den) - sigma2 / ((1.0 - rho) * l2));
  }
  return p;
}

// Rate multiplier eliminated through the power budget: the unique mu for
// which the unclamped active powers sum to p_t.
inline double mu_from_nu_rho(double nu, double rho, const std::vector<double>& singvals, int r_s,
                             double p_t, double sigma2) {
  detail::check_active_set(singvals, r_s);
  if (!(rho >= 0.0 && rho < 1.0)) throw std::domain_error("rho must lie in [0,1)");
  double num = p_t;
  double den = 0.0;
  for (int k = 0; k < r_s; ++k) {
    const double l2 = singvals[k] * singvals[k];
    const double d = nu - rho * l2;
    if (!(d > 0.0)) throw std::domain_error("nu must exceed rho*lambda_k^2 on the active set");
    num += sigma2 / ((1.0 - rho) * l2);
    den += 1.0 / (d * ln2);
  }
  return num / den;
}

namespace detail {

inline Sides budget_rate_sides(double nu, double rho, const std::vector<double>& singvals,
                               int r_s, double p_t, double sigma2, double rate_req) {
  check_active_set(singvals, r_s);
  if (!(rho >= 0.0 && rho < 1.0)) throw std::domain_error("rho must lie in [0,1)");
  double inv_gain_sum = 0.0;
  double pole_sum = 0.0;
  for (int k = 0; k < r_s; ++k) {
    const double l2 = singvals[k] * singvals[k];
    const double den = nu - rho * l2;
    if (!(den > 0.0)) throw std::domain_error("nu must exceed rho*lambda_k^2 on the active set");
    inv_gain_sum += 1.0 / l2;
    pole_sum += 1.0 / den;
  }
  Sides s;
  s.lhs = (p_t * (1.0 - rho) / sigma2 + inv_gain_sum) / pole_sum;
  s.rhs = std::exp2(rate_req / r_s) / active_gain_geomean(nu, rho, singvals, r_s);
  return s;
}

}  // namespace detail

// Budget-form mu minus rate-form mu, expressed on a common scale. A zero
// means the active powers implied by (nu, rho, r_s) exhaust the budget and
// meet the rate at equality simultaneously. Negative just above the pole
// nu = rho*lambda_1^2, positive at large nu for attainable rates.
inline double residual_budget_rate(double nu, double rho, const std::vector<double>& singvals,
                                   int r_s, double p_t, double sigma2, double rate_req) {
  return detail::budget_rate_sides(nu, rho, singvals, r_s, p_t, sigma2, rate_req).residual();
}

inline double residual_budget_rate_normalized(double nu, double rho,
                                              const std::vector<double>& singvals, int r_s,
                                              double p_t, double sigma2, double rate_req) {
  return detail::budget_rate_sides(nu, rho, singvals, r_s, p_t, sigma2, rate_req).normalized();
}

namespace detail {

inline Sides stationarity_rho_sides(double nu, double rho, const std::vector<double>& singvals,
                                    int r_s, double sigma2, double rate_req) {
  check_active_set(singvals, r_s);
  if (!(rho >= 0.0 && rho < 1.0)) throw std::domain_error("rho must lie in [0,1)");
  const double gm = active_gain_geomean(nu, rho, singvals, r_s);
  const double rate_scale = std::exp2(rate_req / r_s);
  double weighted = 0.0;   // sum of p_k lambda_k^2
  double shrink = 0.0;     // sum of p_k lambda_k^2 / (sigma2 + (1-rho) p_k lambda_k^2)
  for (int k = 0; k < r_s; ++k) {
    const double l2 = singvals[k] * singvals[k];
    const double den = nu - rho * l2;
    if (!(den > 0.0)) throw std::domain_error("nu must exceed rho*lambda_k^2 on the active set");
    const double p_k = sigma2 / (1.0 - rho) * (rate_scale / (gm * den) - 1.0 / l2);
    const double w = p_k * l2;
    weighted += w;
    shrink += w / (sigma2 + (1.0 - rho) * w);
  }
  Sides s;
  s.lhs = (1.0 - rho) * weighted * gm;
  s.rhs = rate_scale * sigma2 * shrink;
  return s;
}

}  // namespace detail

// Split-stationarity residual at the rate-tight point implied by (nu, rho,
// r_s). Scaled so its sign equals the sign of the Lagrangian's derivative in
// rho: positive when nudging rho upward would still help.
inline double residual_stationarity_rho(double nu, double rho,
                                        const std::vector<double>& singvals, int r_s,
                                        double sigma2, double rate_req) {
  return detail::stationarity_rho_sides(nu, rho, singvals, r_s, sigma2, rate_req).residual();
}

inline double residual_stationarity_rho_normalized(double nu, double rho,
                                                   const std::vector<double>& singvals, int r_s,
                                                   double sigma2, double rate_req) {
  return detail::stationarity_rho_sides(nu, rho, singvals, r_s, sigma2, rate_req).normalized();
}

namespace detail {

inline Sides ideal_sides(double nu2, const std::vector<double>& singvals, int r_s, double p_t,
                         double sigma2, double rate_req) {
  check_active_set(singvals, r_s);
  double inv_gain_sum = 0.0;
  double pole_sum = 0.0;
  double log_gm = 0.0;
  for (int k = 0; k < r_s; ++k) {
    const double l2 = singvals[k] * singvals[k];
    const double den = nu2 - l2;
    if (!(den > 0.0)) throw std::domain_error("nu2 must exceed lambda_k^2 on the active set");
    inv_gain_sum += 1.0 / l2;
    pole_sum += 1.0 / den;
    log_gm += std::log(l2 / den);
  }
  Sides s;
  s.lhs = (p_t / sigma2 + inv_gain_sum) * std::exp(log_gm / r_s);
  s.rhs = std::exp2(rate_req / r_s) * pole_sum;
  return s;
}

}  // namespace detail

// Ideal-receiver counterpart of residual_budget_rate: one equation in nu2
// since no splitting variable exists. Negative just above nu2 = lambda_1^2.
inline double residual_ideal(double nu2, const std::vector<double>& singvals, int r_s, double p_t,
                             double sigma2, double rate_req) {
  return detail::ideal_sides(nu2, singvals, r_s, p_t, sigma2, rate_req).residual();
}

inline double residual_ideal_normalized(double nu2, const std::vector<double>& singvals, int r_s,
                                        double p_t, double sigma2, double rate_req) {
  return detail::ideal_sides(nu2, singvals, r_s, p_t, sigma2, rate_req).normalized();
}

// Multiplier and powers of the ideal-receiver problem at a given nu2. The
// powers are returned unclamped; callers recurse on the active-set size until
// they come out positive, so a negative entry is a signal, not an error.
inline std::pair<double, PowerAllocation> ideal_mu2_and_powers(double nu2,
                                                               const std::vector<double>& singvals,
                                                               int r_s, double p_t,
                                                               double sigma2) {
  detail::check_active_set(singvals, r_s);
  double num = p_t;
  double den = 0.0;
  for (int k = 0; k < r_s; ++k) {
    const double l2 = singvals[k] * singvals[k];
    const double d = nu2 - l2;
    if (!(d > 0.0)) throw std::domain_error("nu2 must exceed lambda_k^2 on the active set");
    num += sigma2 / l2;
    den += 1.0 / (d * ln2);
  }
  const double mu2 = num / den;
  PowerAllocation p(singvals.size(), 0.0);
  for (int k = 0; k < r_s; ++k) {
    const double l2 = singvals[k] * singvals[k];
    p[k] = mu2 / (ln2 * (nu2 - l2)) - sigma2 / l2;
  }
  return {mu2, p};
}

}  // namespace swipt
