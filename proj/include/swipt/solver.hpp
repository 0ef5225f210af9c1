#pragma once

// Global optimizers for the two harvesting problems: the rate-constrained
// splitting receiver (outer golden-section search over the split, inner
// active-set root-find over the power multiplier) and its ideal-receiver
// reduction (single root-find). Feasibility gating, regime switching and
// analytic search bounds live here too.
//
// Each solve has two phases. The search phase runs at the configured
// tolerance and is what the iteration counters measure; once the winning
// (rho, r_s) cell is known, a polish phase re-tightens the root and, for the
// splitting problem, nails the split-stationarity zero inside the final
// search bracket. Polish work is tracked separately in SolveStats so the
// search-phase complexity accounting stays honest.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "swipt/channel.hpp"
#include "swipt/common.hpp"
#include "swipt/kkt.hpp"
#include "swipt/regimes.hpp"
#include "swipt/waterfill.hpp"

namespace swipt {

enum class Mode { EnergyBeamforming, SpatialMultiplexing, Infeasible };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::EnergyBeamforming: return "eb";
    case Mode::SpatialMultiplexing: return "sm";
    default: return "infeasible";
  }
}

struct SolveStats {
  int outer_iterations = 0;        // golden-section shrink steps over rho
  int inner_root_finds = 0;        // nu bisections launched during the search
  long long inner_iterations = 0;  // residual evaluations inside those bisections
  long long polish_iterations = 0; // residual evaluations spent tightening the accepted point
  double grid_resolution = 0.0;    // grid oracles only: per-axis spacing
  bool fell_back_exact = false;    // an approximation handed off to the exact solver
};

struct JointSolution {
  Mode mode = Mode::Infeasible;
  double rho = 0.0;
  PowerAllocation powers;
  double mu = 0.0;
  double nu = 0.0;
  double p_re = 0.0;           // received power routed to the harvester, watts
  double rate_achieved = 0.0;  // bps/Hz
  int r_s = 0;                 // active eigenchannel count
  int iterations = 0;          // outer search steps (see SolveStats for the rest)
  SolveStats stats;
};

struct GssBracket {
  double lo = 0.0;
  double hi = 1.0;
  double tol = 1e-4;
};

// Golden-section maximization of a unimodal f. One new evaluation per
// iteration; stops once the bracket is narrower than tol.
template <class F>
std::pair<double, int> gss_maximize(F&& f, GssBracket bracket) {
  if (!(bracket.lo < bracket.hi) || !(bracket.tol > 0.0))
    throw std::invalid_argument("invalid golden-section bracket");
  double a = bracket.lo, b = bracket.hi;
  double x1 = b - inv_golden * (b - a);
  double x2 = a + inv_golden * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  int iters = 0;
  while (b - a > bracket.tol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_golden * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_golden * (b - a);
      f2 = f(x2);
    }
    ++iters;
  }
  return {f1 >= f2 ? x1 : x2, iters};
}

// Largest split the waterfilling allocation can absorb while still decoding
// rate_req. Bisection runs geometrically in 1-rho so the answer keeps full
// relative precision even when the root sits within ulps of 1.
inline double rho_upper_bound(const ChannelDecomposition& dec, const SystemParams& params) {
  validate(params);
  const PowerAllocation wf = waterfill_allocation(dec.singvals, params.p_t, params.sigma2);
  const double r_max = achievable_rate(dec, wf, 0.0, params.sigma2);
  if (params.rate_req > r_max)
    throw infeasible_error("rate requirement exceeds the waterfilling rate");
  auto rate_at = [&](double keep) {  // keep = 1 - rho
    double rate = 0.0;
    for (int k = 0; k < dec.rank; ++k) {
      const double l2 = dec.singvals[k] * dec.singvals[k];
      rate += std::log2(1.0 + keep * wf[k] * l2 / params.sigma2);
    }
    return rate;
  };
  double log_lo = std::log(1e-300);  // rate below rate_req here unless rate_req ~ 0
  double log_hi = 0.0;
  if (rate_at(std::exp(log_lo)) >= params.rate_req) return 1.0;
  for (int i = 0; i < 200 && log_hi - log_lo > 1e-14; ++i) {
    const double mid = 0.5 * (log_lo + log_hi);
    if (rate_at(std::exp(mid)) >= params.rate_req)
      log_hi = mid;
    else
      log_lo = mid;
  }
  return 1.0 - std::exp(log_hi);
}

// Search interval for the power multiplier at a given split: a hair above
// the pole rho*lambda_1^2, and an analytic cap of width 1-rho that holds in
// the high-SNR regime (the solver extends past it when a root escapes).
inline GssBracket nu_bracket(double rho, double lambda1_sq) {
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in [0,1)");
  GssBracket b;
  b.lo = rho * lambda1_sq + 1e-12;
  b.hi = rho * lambda1_sq + (1.0 - rho);
  b.tol = 1e-12;
  return b;
}

namespace detail {

struct InnerPoint {
  bool ok = false;
  double nu = 0.0;
  double mu = 0.0;
  double p_re = 0.0;
  int r_s = 0;
  PowerAllocation powers;
};

constexpr int kMaxBracketDoublings = 60;

// Root of residual_budget_rate in nu for a fixed (rho, r_s), or not-found.
// xtol_rel scales the bisection exit width by the bracket width.
inline bool solve_nu_at(double rho, const std::vector<double>& sv, int r_s, double p_t,
                        double sigma2, double rate_req, double xtol_rel, double* nu_out,
                        long long* evals) {
  const double pole = rho * sv[0] * sv[0];
  double width = 1.0 - rho;
  auto f = [&](double nu) {
    ++*evals;
    return residual_budget_rate(nu, rho, sv, r_s, p_t, sigma2, rate_req);
  };
  double flo = 0.0;
  const double lo = lower_bracket_edge(f, pole, 1e-12, &flo);
  double hi = pole + width;
  double fhi = f(hi);
  for (int d = 0; d < kMaxBracketDoublings && (flo > 0.0) == (fhi > 0.0); ++d) {
    width *= 2.0;
    hi = pole + width;
    fhi = f(hi);
  }
  if ((flo > 0.0) == (fhi > 0.0)) return false;
  *nu_out = bisect_root(f, lo, hi, flo, (hi - lo) * xtol_rel, 90, nullptr);
  return true;
}

// Largest representable split at or below rho whose reported rate clears the
// requirement. When the noise floor sits far below the budget the closed-form
// splits land within a few ulp of 1, and rounding the subtraction 1 - keep
// can put the stored split on the infeasible side of the rate constraint.
inline double rate_feasible_split(const ChannelDecomposition& dec, const PowerAllocation& powers,
                                  double rho, double sigma2, double rate_req, double* rate_out) {
  double rate = achievable_rate(dec, powers, rho, sigma2);
  for (int i = 0; i < 64 && rate < rate_req && rho > 0.0; ++i) {
    rho = std::nextafter(rho, 0.0);
    rate = achievable_rate(dec, powers, rho, sigma2);
  }
  *rate_out = rate;
  return rho;
}

// One evaluation of the inner problem: best received power at a fixed split,
// found by shrinking the active set until the implied powers are all
// strictly positive.
inline InnerPoint eval_split(const ChannelDecomposition& dec, const SystemParams& params,
                             double rho, int r_w, double xtol_rel, SolveStats* stats,
                             bool count_as_search) {
  const auto& sv = dec.singvals;
  InnerPoint out;
  long long evals = 0;
  int launches = 0;
  for (int r_s = std::min(r_w, dec.rank); r_s >= 2; --r_s) {
    double nu = 0.0;
    const bool found =
        solve_nu_at(rho, sv, r_s, params.p_t, params.sigma2, params.rate_req, xtol_rel, &nu,
                    &evals);
    if (found) ++launches;
    if (!found) continue;
    double mu = mu_from_nu_rho(nu, rho, sv, r_s, params.p_t, params.sigma2);
    PowerAllocation p = power_allocation(mu, nu, rho, sv, r_s, params.sigma2);
    bool all_positive = true;
    for (int k = 0; k < r_s; ++k) all_positive = all_positive && p[k] > 0.0;
    if (!all_positive && xtol_rel > 1e-15) {
      // A weak mode crossing zero can be an artifact of a coarse root: the
      // power's sign is only trustworthy once the multiplier is resolved
      // past it. Re-tighten before shrinking the active set.
      solve_nu_at(rho, sv, r_s, params.p_t, params.sigma2, params.rate_req, 1e-15, &nu, &evals);
      mu = mu_from_nu_rho(nu, rho, sv, r_s, params.p_t, params.sigma2);
      p = power_allocation(mu, nu, rho, sv, r_s, params.sigma2);
      all_positive = true;
      for (int k = 0; k < r_s; ++k) all_positive = all_positive && p[k] > 0.0;
    }
    if (!all_positive) continue;
    out.ok = true;
    out.nu = nu;
    out.mu = mu;
    out.r_s = r_s;
    out.powers = std::move(p);
    out.p_re = 0.0;
    for (int k = 0; k < r_s; ++k)
      out.p_re += out.powers[k] * sv[k] * sv[k];
    out.p_re *= rho;
    break;
  }
  if (count_as_search) {
    stats->inner_iterations += evals;
    stats->inner_root_finds += launches;
  } else {
    stats->polish_iterations += evals;
  }
  return out;
}

}  // namespace detail

// Joint split-and-precoder optimum under a minimum-rate constraint.
inline JointSolution solve_op1(const ChannelDecomposition& dec, const SystemParams& params) {
  validate(params);
  const auto& sv = dec.singvals;
  const double l1_sq = sv[0] * sv[0];
  JointSolution sol;
  sol.powers.assign(dec.rank, 0.0);

  const PowerAllocation wf = waterfill_allocation(sv, params.p_t, params.sigma2);
  const double r_max = achievable_rate(dec, wf, 0.0, params.sigma2);
  if (params.rate_req > r_max) return sol;  // mode stays Infeasible

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

  const int r_w = waterfill_rank(sv, params.p_t, params.sigma2);

  // Equal singular values make the received power allocation-independent;
  // the inner multiplier residual then has no root except at the one split
  // where the rate constraint is tight under an even division, which is the
  // optimum.
  bool symmetric = true;
  for (int k = 1; k < dec.rank; ++k)
    symmetric = symmetric && std::abs(sv[k] * sv[k] - l1_sq) <= 1e-12 * l1_sq;
  if (symmetric) {
    const int r = dec.rank;
    const double keep =
        (std::exp2(params.rate_req / r) - 1.0) * params.sigma2 * r / (params.p_t * l1_sq);
    sol.mode = Mode::SpatialMultiplexing;
    sol.powers.assign(r, params.p_t / r);
    const double rho_sym =
        detail::rate_feasible_split(dec, sol.powers, std::max(0.0, 1.0 - keep), params.sigma2,
                                    params.rate_req, &sol.rate_achieved);
    sol.rho = rho_sym;
    sol.nu = rho_sym * l1_sq + 0.5 * (1.0 - rho_sym);
    sol.mu = ln2 * (sol.nu - rho_sym * l1_sq) *
             (params.p_t + r * params.sigma2 / ((1.0 - rho_sym) * l1_sq)) / r;
    sol.r_s = r;
    sol.p_re = rho_sym * received_power(dec, sol.powers);
    return sol;
  }

  // Rate pinned at the waterfilling corner: the only feasible precoder is
  // the waterfilling one and the multiplier root diverges, so return it
  // directly instead of searching.
  if (r_max - params.rate_req <= 1e-9 * (1.0 + r_max)) {
    const double rho_corner = rho_upper_bound(dec, params);
    sol.mode = Mode::SpatialMultiplexing;
    sol.rho = rho_corner;
    sol.mu = 0.0;
    sol.nu = rho_corner * l1_sq + 1.0;
    sol.r_s = r_w;
    sol.powers = wf;
    sol.p_re = rho_corner * received_power(dec, wf);
    sol.rate_achieved = achievable_rate(dec, wf, rho_corner, params.sigma2);
    return sol;
  }

  double rho_lo = rho_eb(params.rate_req, params.p_t, l1_sq, params.sigma2);
  double rho_hi = rho_upper_bound(dec, params);
  if (rho_hi < rho_lo) std::swap(rho_lo, rho_hi);

  auto eval = [&](double rho, double xtol_rel, bool search) {
    return detail::eval_split(dec, params, rho, r_w, xtol_rel, &sol.stats, search);
  };

  // Search phase: golden-section over the split at the configured tolerance.
  double a = rho_lo, b = rho_hi;
  double x1 = b - inv_golden * (b - a);
  double x2 = a + inv_golden * (b - a);
  detail::InnerPoint i1 = eval(x1, params.tol, true);
  detail::InnerPoint i2 = eval(x2, params.tol, true);
  if (!i1.ok || !i2.ok)
    throw numerical_error("no bracketed root for the power multiplier at a probed split");
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
      throw numerical_error("no bracketed root for the power multiplier at a probed split");
    ++sol.stats.outer_iterations;
  }
  double rho_star = i1.p_re >= i2.p_re ? x1 : x2;

  // Polish phase: locate the split-stationarity zero around the search
  // winner, then re-tighten the multiplier root at the final split.
  auto stationarity = [&](double rho) {
    detail::InnerPoint pt = eval(rho, 1e-13, false);
    if (!pt.ok) throw numerical_error("active set lost while polishing the split");
    return residual_stationarity_rho(pt.nu, rho, sv, pt.r_s, params.sigma2, params.rate_req);
  };
  try {
    const double span = rho_hi - rho_lo;
    double w = std::max(b - a, 1e-9 * span);
    double lo = std::max(rho_lo, rho_star - w);
    double hi = std::min(rho_hi, rho_star + w);
    double s_lo = stationarity(lo);
    double s_hi = stationarity(hi);
    int rounds = 0;
    while ((s_lo > 0.0) == (s_hi > 0.0) && rounds < 24 && (lo > rho_lo || hi < rho_hi)) {
      w *= 2.0;
      lo = std::max(rho_lo, rho_star - w);
      hi = std::min(rho_hi, rho_star + w);
      s_lo = stationarity(lo);
      s_hi = stationarity(hi);
      ++rounds;
    }
    if ((s_lo > 0.0) != (s_hi > 0.0)) {
      for (int i = 0; i < 80 && hi - lo > 1e-14; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double s_mid = stationarity(mid);
        if ((s_lo > 0.0) == (s_mid > 0.0)) {
          lo = mid;
          s_lo = s_mid;
        } else {
          hi = mid;
        }
      }
      rho_star = 0.5 * (lo + hi);
    }
  } catch (const numerical_error&) {
    // A window endpoint can sit past the point where the reduced active
    // sets stop having interior roots (right at the regime boundary the
    // split window collapses onto the beamforming corner). The search
    // winner is already within tol, so it stands.
  }
  detail::InnerPoint fin = eval(rho_star, 1e-15, false);
  if (!fin.ok) throw numerical_error("active set lost at the polished split");

  sol.mode = Mode::SpatialMultiplexing;
  sol.rho = rho_star;
  sol.mu = fin.mu;
  sol.nu = fin.nu;
  sol.r_s = fin.r_s;
  sol.powers = fin.powers;
  sol.p_re = fin.p_re;
  sol.rate_achieved = achievable_rate(dec, sol.powers, rho_star, params.sigma2);
  sol.iterations = sol.stats.outer_iterations;
  return sol;
}

// Ideal-receiver optimum: no splitting loss, so a single root-find in the
// power multiplier with the same active-set recursion.
inline JointSolution solve_op2(const ChannelDecomposition& dec, const SystemParams& params) {
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

  // Equal singular values make the received power allocation-independent,
  // so the multiplier residual has no root; waterfilling is already optimal.
  bool symmetric = true;
  for (int k = 1; k < dec.rank; ++k)
    symmetric = symmetric && std::abs(sv[k] * sv[k] - l1_sq) <= 1e-12 * l1_sq;
  if (symmetric) {
    sol.mode = Mode::SpatialMultiplexing;
    sol.rho = 1.0;
    sol.nu = l1_sq + 1.0;
    sol.mu = ln2 * (params.p_t / dec.rank + params.sigma2 / l1_sq);
    sol.r_s = dec.rank;
    sol.powers = wf;
    sol.p_re = received_power(dec, sol.powers);
    sol.rate_achieved = r_max;
    return sol;
  }

  const int r_w = waterfill_rank(sv, params.p_t, params.sigma2);
  const double pole = l1_sq;
  for (int r_s = std::min(r_w, dec.rank); r_s >= 2; --r_s) {
    auto f = [&](double nu2) {
      ++sol.stats.inner_iterations;
      return residual_ideal(nu2, sv, r_s, params.p_t, params.sigma2, params.rate_req);
    };
    double width = 1.0;
    double flo = 0.0;
    const double lo = lower_bracket_edge(f, pole, 1e-12, &flo);
    double hi = pole + width;
    double fhi = f(hi);
    for (int d = 0; d < detail::kMaxBracketDoublings && (flo > 0.0) == (fhi > 0.0); ++d) {
      width *= 2.0;
      hi = pole + width;
      fhi = f(hi);
    }
    if ((flo > 0.0) == (fhi > 0.0)) continue;
    ++sol.stats.inner_root_finds;
    long long search_steps = 0;
    bisect_root(f, lo, hi, flo, (hi - lo) * params.tol, 90, &search_steps);
    sol.iterations += static_cast<int>(search_steps);
    // polish to full precision before extracting powers
    long long polish_steps = 0;
    auto fp = [&](double x) {
      return residual_ideal(x, sv, r_s, params.p_t, params.sigma2, params.rate_req);
    };
    const double nu2 = bisect_root(fp, lo, hi, flo, (hi - lo) * 1e-16, 120, &polish_steps);
    sol.stats.polish_iterations += polish_steps;
    auto [mu2, p] = ideal_mu2_and_powers(nu2, sv, r_s, params.p_t, params.sigma2);
    bool all_positive = true;
    for (int k = 0; k < r_s; ++k) all_positive = all_positive && p[k] > 0.0;
    if (!all_positive) continue;
    sol.mode = Mode::SpatialMultiplexing;
    sol.rho = 1.0;
    sol.mu = mu2;
    sol.nu = nu2;
    sol.r_s = r_s;
    sol.powers = std::move(p);
    sol.p_re = received_power(dec, sol.powers);
    sol.rate_achieved = achievable_rate(dec, sol.powers, 0.0, params.sigma2);
    return sol;
  }

  // Rate pinned at (or within noise of) the waterfilling corner: the root
  // runs off to infinity and the optimum is the waterfilling point itself.
  if (r_max - params.rate_req <= 1e-6 * (1.0 + r_max)) {
    sol.mode = Mode::SpatialMultiplexing;
    sol.rho = 1.0;
    sol.mu = 0.0;
    sol.nu = pole + 1.0;
    sol.r_s = r_w;
    sol.powers = wf;
    sol.p_re = received_power(dec, sol.powers);
    sol.rate_achieved = r_max;
    return sol;
  }
  throw numerical_error("no bracketed root for the ideal-receiver multiplier");
}

// Diagnostic sampler: received power of the inner problem across the split
// interval. Returns (rho, p_re) pairs; handy for eyeballing unimodality.
inline std::vector<std::pair<double, double>> profile_rho(const ChannelDecomposition& dec,
                                                          const SystemParams& params,
                                                          int n_points = 50) {
  validate(params);
  if (n_points < 2) throw std::invalid_argument("need at least two samples");
  const double l1_sq = dec.singvals[0] * dec.singvals[0];
  const double lo = rho_eb(params.rate_req, params.p_t, l1_sq, params.sigma2);
  const double hi = rho_upper_bound(dec, params);
  const int r_w = waterfill_rank(dec.singvals, params.p_t, params.sigma2);
  SolveStats scratch;
  std::vector<std::pair<double, double>> out;
  out.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double rho = lo + (hi - lo) * (i + 0.5) / n_points;
    detail::InnerPoint pt = detail::eval_split(dec, params, rho, r_w, 1e-10, &scratch, false);
    out.emplace_back(rho, pt.ok ? pt.p_re : 0.0);
  }
  return out;
}

}  // namespace swipt
