#pragma once

// High-SNR variants of the two solvers. Dropping the +1 inside the rate
// logarithms keeps every eigenchannel active (no active-set recursion) and,
// for the ideal receiver, collapses the whole problem to one scalar equation
// in beta = nu2 - lambda_1^2 on (0,1).

#include <algorithm>
#include <cmath>
#include <vector>

#include "swipt/channel.hpp"
#include "swipt/common.hpp"
#include "swipt/regimes.hpp"
#include "swipt/solver.hpp"
#include "swipt/waterfill.hpp"

namespace swipt {

namespace detail {

// Noise-free analogue of residual_budget_rate with every mode active.
inline double residual_budget_rate_hs(double nu, double rho, const std::vector<double>& sv,
                                      double p_t, double sigma2, double rate_req) {
  const int r = static_cast<int>(sv.size());
  double pole_sum = 0.0;
  double log_gm = 0.0;
  for (int k = 0; k < r; ++k) {
    const double l2 = sv[k] * sv[k];
    const double den = nu - rho * l2;
    if (!(den > 0.0)) throw std::domain_error("nu must exceed rho*lambda_k^2");
    pole_sum += 1.0 / den;
    log_gm += std::log(l2 / den);
  }
  const double gm = std::exp(log_gm / r);
  return (p_t * (1.0 - rho) / sigma2) / pole_sum - std::exp2(rate_req / r) / gm;
}

struct HsInner {
  bool ok = false;
  double nu = 0.0;
  double mu = 0.0;
  double p_re = 0.0;
  PowerAllocation powers;
};

inline HsInner eval_split_hs(const std::vector<double>& sv, const SystemParams& params,
                             double rho, double xtol_rel, SolveStats* stats,
                             bool count_as_search) {
  const int r = static_cast<int>(sv.size());
  HsInner out;
  long long evals = 0;
  auto f = [&](double nu) {
    ++evals;
    return residual_budget_rate_hs(nu, rho, sv, params.p_t, params.sigma2, params.rate_req);
  };
  const double pole = rho * sv[0] * sv[0];
  double width = 1.0 - rho;
  double flo = 0.0;
  const double lo = lower_bracket_edge(f, pole, 1e-12, &flo);
  double hi = pole + width;
  double fhi = f(hi);
  for (int d = 0; d < kMaxBracketDoublings && (flo > 0.0) == (fhi > 0.0); ++d) {
    width *= 2.0;
    hi = pole + width;
    fhi = f(hi);
  }
  if ((flo > 0.0) != (fhi > 0.0)) {
    out.nu = bisect_root(f, lo, hi, flo, (hi - lo) * xtol_rel, 120, nullptr);
    double pole_sum = 0.0;
    for (int k = 0; k < r; ++k) pole_sum += 1.0 / (out.nu - rho * sv[k] * sv[k]);
    out.mu = params.p_t * ln2 / pole_sum;
    out.powers.assign(r, 0.0);
    out.p_re = 0.0;
    for (int k = 0; k < r; ++k) {
      const double l2 = sv[k] * sv[k];
      out.powers[k] = out.mu / (ln2 * (out.nu - rho * l2));
      out.p_re += out.powers[k] * l2;
    }
    out.p_re *= rho;
    out.ok = true;
    if (count_as_search) ++stats->inner_root_finds;
  }
  if (count_as_search)
    stats->inner_iterations += evals;
  else
    stats->polish_iterations += evals;
  return out;
}

}  // namespace detail

// High-SNR splitting solver: same outer search as solve_op1, but the inner
// point keeps all rank eigenchannels active and ignores the noise floor in
// the budget/rate elimination. Reported rate is the true noisy rate, which
// lands slightly above the requirement.
inline JointSolution solve_op1_highsnr(const ChannelDecomposition& dec,
                                       const SystemParams& params) {
  validate(params);
  const auto& sv = dec.singvals;
  const double l1_sq = sv[0] * sv[0];
  JointSolution sol;
  sol.powers.assign(dec.rank, 0.0);

  const PowerAllocation wf = waterfill_allocation(sv, params.p_t, params.sigma2);
  const double r_max = achievable_rate(dec, wf, 0.0, params.sigma2);
  if (params.rate_req > r_max) return sol;

  const double r_th =
      dec.rank >= 2
          ? rate_threshold_default(params.p_t, l1_sq, sv[1] * sv[1], params.sigma2)
          : r_max;
  if (params.rate_req <= r_th || dec.rank == 1) {
    const EbKktPoint eb = eb_kkt_point(params.rate_req, params.p_t, l1_sq, params.sigma2);
    sol.mode = Mode::EnergyBeamforming;
    sol.mu = eb.mu_eb;
    sol.nu = eb.nu_eb;
    sol.powers[0] = params.p_t;
    sol.r_s = 1;
    sol.rho = detail::rate_feasible_split(dec, sol.powers, eb.rho_eb, params.sigma2,
                                          params.rate_req, &sol.rate_achieved);
    sol.p_re = sol.rho * params.p_t * l1_sq;
    return sol;
  }

  // A fully symmetric spectrum degenerates the reduced system (nu drops
  // out), but then the noise-free rate pins the split directly and the
  // budget splits evenly across the modes.
  bool symmetric = true;
  for (int k = 1; k < dec.rank; ++k)
    symmetric = symmetric && std::abs(sv[k] * sv[k] - l1_sq) <= 1e-12 * l1_sq;
  if (symmetric) {
    const int r = dec.rank;
    const double keep = std::exp2(params.rate_req / r) * params.sigma2 * r / (params.p_t * l1_sq);
    const double rho_a = std::max(0.0, 1.0 - keep);
    sol.mode = Mode::SpatialMultiplexing;
    sol.rho = rho_a;
    sol.powers.assign(r, params.p_t / r);
    sol.nu = rho_a * l1_sq + 0.5 * (1.0 - rho_a);
    sol.mu = params.p_t * ln2 * (sol.nu - rho_a * l1_sq) / r;
    sol.r_s = r;
    sol.p_re = rho_a * received_power(dec, sol.powers);
    sol.rate_achieved = achievable_rate(dec, sol.powers, rho_a, params.sigma2);
    return sol;
  }

  double rho_lo = rho_eb(params.rate_req, params.p_t, l1_sq, params.sigma2);
  double rho_hi = rho_upper_bound(dec, params);
  if (rho_hi < rho_lo) std::swap(rho_lo, rho_hi);

  auto eval = [&](double rho, double xtol_rel, bool search) {
    return detail::eval_split_hs(sv, params, rho, xtol_rel, &sol.stats, search);
  };
  double a = rho_lo, b = rho_hi;
  double x1 = b - inv_golden * (b - a);
  double x2 = a + inv_golden * (b - a);
  detail::HsInner i1 = eval(x1, params.tol, true);
  detail::HsInner i2 = eval(x2, params.tol, true);
  if (!i1.ok || !i2.ok)
    throw numerical_error("no bracketed root for the high-SNR power multiplier");
  while (b - a > params.tol) {
    if (i1.p_re >= i2.p_re) {
      b = x2;
      x2 = x1;
      i2 = i1;
      x1 = b - inv_golden * (b - a);
      i1 = eval(x1, params.tol, true);
    } else {
      a = x1;
      x1 = x2;
      i1 = i2;
      x2 = a + inv_golden * (b - a);
      i2 = eval(x2, params.tol, true);
    }
    if (!i1.ok || !i2.ok)
      throw numerical_error("no bracketed root for the high-SNR power multiplier");
    ++sol.stats.outer_iterations;
  }
  const double rho_star = i1.p_re >= i2.p_re ? x1 : x2;
  detail::HsInner fin = eval(rho_star, 1e-15, false);
  if (!fin.ok) throw numerical_error("high-SNR inner point lost at the final split");

  sol.mode = Mode::SpatialMultiplexing;
  sol.rho = rho_star;
  sol.mu = fin.mu;
  sol.nu = fin.nu;
  sol.r_s = dec.rank;
  sol.powers = fin.powers;
  sol.p_re = fin.p_re;
  sol.rate_achieved = achievable_rate(dec, sol.powers, rho_star, params.sigma2);
  sol.iterations = sol.stats.outer_iterations;
  return sol;
}

// Single equation of the high-SNR ideal receiver in beta = nu2 - lambda_1^2:
// scaled geometric-mean side minus rate-scaled harmonic side. Negative as
// beta -> 0+, positive at large beta for attainable rates.
inline double beta_residual(double beta, const std::vector<double>& singvals, double p_t,
                            double sigma2, double rate_req) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
  const int r = static_cast<int>(singvals.size());
  const double l1_sq = singvals[0] * singvals[0];
  double log_prod = 0.0;
  double sum = 0.0;
  for (int k = 0; k < r; ++k) {
    const double l2 = singvals[k] * singvals[k];
    const double den = beta + l1_sq - l2;
    log_prod += std::log(beta * l2 / den);
    sum += beta / den;
  }
  return (p_t / sigma2) * std::exp(log_prod / r) - std::exp2(rate_req / r) * sum;
}

// High-SNR ideal-receiver solver: one bisection on beta_residual over
// (1e-6, 1-1e-6). When the bracket shows no sign change (degenerate spectra,
// or the root pushed below 1e-6 at very high SNR) the exact solver is used
// instead and the result carries stats.fell_back_exact.
inline JointSolution solve_op2_highsnr(const ChannelDecomposition& dec,
                                       const SystemParams& params) {
  validate(params);
  const auto& sv = dec.singvals;
  const double l1_sq = sv[0] * sv[0];
  JointSolution sol;
  sol.powers.assign(dec.rank, 0.0);

  const PowerAllocation wf = waterfill_allocation(sv, params.p_t, params.sigma2);
  const double r_max = achievable_rate(dec, wf, 0.0, params.sigma2);
  if (params.rate_req > r_max) return sol;

  const double r_th_id = rate_threshold_ideal(l1_sq, params.p_t, params.sigma2);
  if (params.rate_req <= r_th_id || dec.rank == 1) {
    sol.mode = Mode::EnergyBeamforming;
    sol.rho = 1.0;
    sol.mu = 0.0;
    sol.nu = l1_sq;
    sol.powers[0] = params.p_t;
    sol.r_s = 1;
    sol.p_re = params.p_t * l1_sq;
    sol.rate_achieved = r_th_id;
    return sol;
  }

  const int r = dec.rank;
  auto f = [&](double beta) {
    ++sol.stats.inner_iterations;
    return beta_residual(beta, sv, params.p_t, params.sigma2, params.rate_req);
  };
  const double lo = 1e-6, hi = 1.0 - 1e-6;
  const double flo = f(lo);
  const double fhi = f(hi);
  if ((flo > 0.0) == (fhi > 0.0)) {
    JointSolution exact = solve_op2(dec, params);
    exact.stats.fell_back_exact = true;
    return exact;
  }
  ++sol.stats.inner_root_finds;
  long long search_steps = 0;
  bisect_root(f, lo, hi, flo, (hi - lo) * params.tol, 90, &search_steps);
  sol.iterations = static_cast<int>(search_steps);
  long long polish_steps = 0;
  auto fp = [&](double beta) {
    return beta_residual(beta, sv, params.p_t, params.sigma2, params.rate_req);
  };
  const double beta = bisect_root(fp, lo, hi, flo, (hi - lo) * 1e-16, 120, &polish_steps);
  sol.stats.polish_iterations += polish_steps;

  double coupling = 0.0;  // sum over the weaker modes of beta/(beta + l1^2 - lk^2)
  for (int k = 1; k < r; ++k)
    coupling += beta / (beta + l1_sq - sv[k] * sv[k]);
  const double p1 = params.p_t / (1.0 + coupling);
  sol.powers[0] = p1;
  double pole_sum = 1.0 / beta;
  for (int k = 1; k < r; ++k) {
    const double den = beta + l1_sq - sv[k] * sv[k];
    sol.powers[k] = beta * p1 / den;
    pole_sum += 1.0 / den;
  }
  sol.mode = Mode::SpatialMultiplexing;
  sol.rho = 1.0;
  sol.mu = params.p_t * ln2 / pole_sum;
  sol.nu = beta + l1_sq;
  sol.r_s = r;
  sol.p_re = received_power(dec, sol.powers);
  sol.rate_achieved = achievable_rate(dec, sol.powers, 0.0, params.sigma2);
  return sol;
}

}  // namespace swipt
