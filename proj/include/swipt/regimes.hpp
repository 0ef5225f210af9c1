#pragma once

// Closed forms for the two structural regimes of the rate-constrained
// harvesting problem: below a rate threshold the optimum beamforms all power
// onto the strongest eigenchannel, above it the optimum multiplexes. All
// lambda*_sq arguments are squared singular values, i.e. eigenchannel gains.

#include <cmath>
#include <stdexcept>

#include "swipt/common.hpp"

namespace swipt {

// Splitting fraction that holds the single-eigenchannel rate exactly at the
// requirement, clamped at zero when even full-decode cannot make the rate.
inline double rho_eb(double rate_req, double p_t, double lambda1_sq, double sigma2) {
  if (!(lambda1_sq > 0.0)) throw std::invalid_argument("lambda1_sq must be positive");
  return pos(1.0 - (std::exp2(rate_req) - 1.0) * sigma2 / (p_t * lambda1_sq));
}

namespace detail {

inline double two_mode_rate(double rho, double p1, double p2, double l1, double l2,
                            double sigma2) {
  return std::log2(1.0 + (1.0 - rho) * p1 * l1 / sigma2) +
         std::log2(1.0 + (1.0 - rho) * p2 * l2 / sigma2);
}

}  // namespace detail

// Splitting fraction putting the two-eigenchannel rate at the requirement.
// The closed form (root of a quadratic in 1-rho) is evaluated first and kept
// only if its rate residual is below 1e-8; otherwise bisection on the
// monotone rate curve is authoritative.
inline double rho_sm2(double p1, double p2, double lambda1_sq, double lambda2_sq, double sigma2,
                      double rate_req) {
  if (!(p1 > 0.0 && p2 > 0.0)) throw std::invalid_argument("powers must be positive");
  if (!(lambda1_sq > lambda2_sq && lambda2_sq > 0.0))
    throw std::invalid_argument("need lambda1_sq > lambda2_sq > 0");
  if (detail::two_mode_rate(0.0, p1, p2, lambda1_sq, lambda2_sq, sigma2) < rate_req)
    throw infeasible_error("rate requirement exceeds the two-eigenchannel rate at rho=0");

  const double a = lambda1_sq * p1;
  const double b = lambda2_sq * p2;
  const double disc = (a - b) * (a - b) + std::exp2(rate_req + 2.0) * a * b;
  const double closed = 1.0 + 0.5 * sigma2 * (1.0 / a + 1.0 / b - std::sqrt(disc) / (a * b));
  if (closed >= 0.0 && closed <= 1.0) {
    const double resid = detail::two_mode_rate(closed, p1, p2, lambda1_sq, lambda2_sq, sigma2) -
                         rate_req;
    if (std::abs(resid) <= 1e-8 * (1.0 + std::abs(rate_req))) return closed;
  }

  double lo = 0.0, hi = 1.0;  // rate(lo) >= rate_req, rate decreasing in rho
  for (int i = 0; i < 100 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (detail::two_mode_rate(mid, p1, p2, lambda1_sq, lambda2_sq, sigma2) >= rate_req)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

// Rate requirement at which beamforming and two-eigenchannel multiplexing
// collect the same received power, using the near-degenerate split
// p1 = P_T - p_delta, p2 = p_delta.
inline double rate_threshold(double p1, double p2, double lambda1_sq, double lambda2_sq,
                             double sigma2) {
  if (!(lambda1_sq >= lambda2_sq && lambda2_sq > 0.0))
    throw std::invalid_argument("need lambda1_sq >= lambda2_sq > 0");
  if (!(p1 > 0.0 && p2 > 0.0)) throw std::invalid_argument("powers must be positive");
  const double gap = lambda1_sq - lambda2_sq;
  const double mix = lambda1_sq * p1 + lambda2_sq * p2;
  const double arg = 1.0 + p2 * gap / sigma2 +
                     std::sqrt(gap * mix * mix / (lambda1_sq * lambda2_sq * sigma2 * p1));
  return std::log2(arg);
}

inline constexpr double rate_threshold_p_delta = 1e-3;

// rate_threshold specialization used by the solvers: all but a sliver of the
// budget on the dominant eigenchannel.
inline double rate_threshold_default(double p_t, double lambda1_sq, double lambda2_sq,
                                     double sigma2) {
  return rate_threshold(p_t - rate_threshold_p_delta, rate_threshold_p_delta, lambda1_sq,
                        lambda2_sq, sigma2);
}

// Largest rate an ideal (no-splitting-loss) receiver can decode under
// beamforming; above it even the ideal problem must multiplex.
inline double rate_threshold_ideal(double lambda1_sq, double p_t, double sigma2) {
  if (!(lambda1_sq > 0.0)) throw std::invalid_argument("lambda1_sq must be positive");
  return std::log2(1.0 + p_t * lambda1_sq / sigma2);
}

struct EbKktPoint {
  double rho_eb = 0.0;
  double mu_eb = 0.0;   // rate multiplier
  double nu_eb = 0.0;   // splitting-stationarity multiplier
  double p1 = 0.0;      // full budget on the top eigenchannel
};

// Closed-form multiplier set for the beamforming regime. Feeding these back
// into the stationarity conditions gives zero residual.
inline EbKktPoint eb_kkt_point(double rate_req, double p_t, double lambda1_sq, double sigma2) {
  EbKktPoint pt;
  pt.rho_eb = rho_eb(rate_req, p_t, lambda1_sq, sigma2);
  const double shrunk = (1.0 - pt.rho_eb) * p_t * lambda1_sq;
  pt.mu_eb = sigma2 * ln2 * (1.0 + shrunk / sigma2);
  pt.nu_eb = pt.mu_eb * (1.0 - pt.rho_eb) * lambda1_sq / (ln2 * (sigma2 + shrunk)) +
             lambda1_sq * pt.rho_eb;
  pt.p1 = p_t;
  return pt;
}

}  // namespace swipt
