#pragma once

// Comparison schemes and validation oracles. OPS fixes the precoder to
// waterfilling and only tunes the split; OTCM fixes the split at one half
// and only tunes the precoder; the DPS grid searches per-antenna splits; the
// 2x2 grid oracle brute-forces the joint problem for cross-checking.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

#include "swipt/channel.hpp"
#include "swipt/common.hpp"
#include "swipt/solver.hpp"
#include "swipt/waterfill.hpp"

namespace swipt {

// Waterfilling transmitter, split tuned to hold the rate at the requirement.
inline JointSolution baseline_ops(const ChannelDecomposition& dec, const SystemParams& params) {
  validate(params);
  JointSolution sol;
  sol.powers.assign(dec.rank, 0.0);
  const PowerAllocation wf = waterfill_allocation(dec.singvals, params.p_t, params.sigma2);
  const double r_max = achievable_rate(dec, wf, 0.0, params.sigma2);
  if (params.rate_req > r_max) return sol;
  const double rho = rho_upper_bound(dec, params);
  const int r_w = waterfill_rank(dec.singvals, params.p_t, params.sigma2);
  sol.mode = r_w == 1 ? Mode::EnergyBeamforming : Mode::SpatialMultiplexing;
  sol.rho = rho;
  sol.powers = wf;
  sol.r_s = r_w;
  sol.p_re = rho * received_power(dec, wf);
  sol.rate_achieved = achievable_rate(dec, wf, rho, params.sigma2);
  return sol;
}

// Split pinned to one half, precoder optimized. Beamforming whenever it
// already meets the rate; otherwise the rate-tight active-set point.
inline JointSolution baseline_otcm(const ChannelDecomposition& dec, const SystemParams& params) {
  validate(params);
  const auto& sv = dec.singvals;
  const double l1_sq = sv[0] * sv[0];
  JointSolution sol;
  sol.powers.assign(dec.rank, 0.0);
  const PowerAllocation wf = waterfill_allocation(sv, params.p_t, params.sigma2);
  if (achievable_rate(dec, wf, 0.5, params.sigma2) < params.rate_req) return sol;
  sol.rho = 0.5;
  const double eb_rate = std::log2(1.0 + 0.5 * params.p_t * l1_sq / params.sigma2);
  if (eb_rate >= params.rate_req) {
    sol.mode = Mode::EnergyBeamforming;
    sol.powers[0] = params.p_t;
    sol.r_s = 1;
    sol.p_re = 0.5 * params.p_t * l1_sq;
    sol.rate_achieved = eb_rate;
    return sol;
  }
  const int r_w = waterfill_rank(sv, params.p_t, params.sigma2);
  detail::InnerPoint pt = detail::eval_split(dec, params, 0.5, r_w, 1e-15, &sol.stats, true);
  if (!pt.ok) throw numerical_error("no bracketed root at the pinned split");
  sol.mode = Mode::SpatialMultiplexing;
  sol.mu = pt.mu;
  sol.nu = pt.nu;
  sol.r_s = pt.r_s;
  sol.powers = pt.powers;
  sol.p_re = pt.p_re;
  sol.rate_achieved = achievable_rate(dec, sol.powers, 0.5, params.sigma2);
  sol.iterations = static_cast<int>(sol.stats.inner_iterations);
  return sol;
}

namespace detail {

struct DpsPoint {
  bool feasible = false;
  double value = 0.0;  // power collected by the harvesting branches, watts
  double rate = 0.0;
  PowerAllocation powers;  // spectrum in the split-modified channel's eigenbasis
  double mu = 0.0;
  double nu = 0.0;
  int r_s = 0;
};

// Best transmit spectrum for a fixed per-antenna split tuple. The decoder
// sees diag(sqrt(1-rho_i)) H; the harvester collects sum_i rho_i of row i's
// received power. Restricting the covariance to the modified channel's right
// singular basis turns this into the same multiplier root-find as the
// uniform-split inner problem, with per-mode harvest weights.
inline DpsPoint dps_fixed_tuple(const ChannelMatrix& h, const SystemParams& params,
                                const std::vector<double>& rho_tuple) {
  const int n_r = static_cast<int>(h.rows());
  DpsPoint out;
  Eigen::VectorXd keep(n_r), divert(n_r);
  for (int i = 0; i < n_r; ++i) {
    if (!(rho_tuple[i] >= 0.0 && rho_tuple[i] <= 1.0))
      throw std::invalid_argument("split entries must lie in [0,1]");
    keep(i) = std::sqrt(1.0 - rho_tuple[i]);
    divert(i) = rho_tuple[i];
  }
  const Eigen::MatrixXcd w_eh = h.adjoint() * divert.asDiagonal() * h;
  const ChannelMatrix h_id = keep.asDiagonal() * h;

  // Pure-harvest candidate: all power on the top eigenvector of the harvest
  // quadratic form, admissible when its decode rate clears the requirement.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(w_eh);
  const int top = static_cast<int>(es.eigenvalues().size()) - 1;
  const Eigen::VectorXcd top_vec = es.eigenvectors().col(top);
  const double top_gain = es.eigenvalues()(top);
  const double bf_rate =
      std::log2(1.0 + params.p_t * (h_id * top_vec).squaredNorm() / params.sigma2);
  if (bf_rate >= params.rate_req && params.p_t * top_gain > out.value) {
    out.feasible = true;
    out.value = params.p_t * top_gain;
    out.rate = bf_rate;
    out.powers.assign(1, params.p_t);
    out.r_s = 1;
  }

  if (h_id.norm() < 1e-14 * h.norm()) return out;  // decode branch fully diverted
  const ChannelDecomposition dec_id = decompose(h_id);
  const int r = dec_id.rank;
  std::vector<double> id_gain(r), eh_gain(r);
  for (int k = 0; k < r; ++k) {
    id_gain[k] = dec_id.singvals[k] * dec_id.singvals[k];
    eh_gain[k] = std::real(dec_id.v.col(k).dot(w_eh * dec_id.v.col(k)));
  }

  // Per-mode vertex candidates (rate constraint slack at the optimum).
  for (int k = 0; k < r; ++k) {
    const double rate_k = std::log2(1.0 + params.p_t * id_gain[k] / params.sigma2);
    if (rate_k >= params.rate_req && params.p_t * eh_gain[k] > out.value) {
      out.feasible = true;
      out.value = params.p_t * eh_gain[k];
      out.rate = rate_k;
      out.powers.assign(r, 0.0);
      out.powers[k] = params.p_t;
      out.r_s = 1;
    }
  }

  // Rate-active candidates via the active-set recursion.
  const int r_w = waterfill_rank(dec_id.singvals, params.p_t, params.sigma2);
  for (int r_s = r_w; r_s >= 2; --r_s) {
    double pole = 0.0;
    double min_split = 1.0;
    for (int k = 0; k < r_s; ++k) pole = std::max(pole, eh_gain[k]);
    for (int i = 0; i < n_r; ++i) min_split = std::min(min_split, rho_tuple[i]);
    auto mu_budget = [&](double nu) {
      double num = params.p_t;
      double den = 0.0;
      for (int k = 0; k < r_s; ++k) {
        num += params.sigma2 / id_gain[k];
        den += 1.0 / ((nu - eh_gain[k]) * ln2);
      }
      return num / den;
    };
    auto mu_rate = [&](double nu) {
      double log_gm = 0.0;
      for (int k = 0; k < r_s; ++k) log_gm += std::log(id_gain[k] / (nu - eh_gain[k]));
      return std::exp2(params.rate_req / r_s) * params.sigma2 * ln2 / std::exp(log_gm / r_s);
    };
    auto f = [&](double nu) { return mu_budget(nu) - mu_rate(nu); };
    double width = std::max(1.0 - min_split, 1e-6);
    double flo = 0.0;
    const double lo = lower_bracket_edge(f, pole, 1e-12, &flo);
    double hi = pole + width;
    double fhi = f(hi);
    for (int d = 0; d < kMaxBracketDoublings && (flo > 0.0) == (fhi > 0.0); ++d) {
      width *= 2.0;
      hi = pole + width;
      fhi = f(hi);
    }
    if ((flo > 0.0) == (fhi > 0.0)) continue;
    const double nu = bisect_root(f, lo, hi, flo, (hi - lo) * 1e-16, 120, nullptr);
    const double mu = mu_budget(nu);
    PowerAllocation q(r, 0.0);
    bool all_positive = true;
    double value = 0.0;
    double rate = 0.0;
    for (int k = 0; k < r_s; ++k) {
      q[k] = mu / (ln2 * (nu - eh_gain[k])) - params.sigma2 / id_gain[k];
      all_positive = all_positive && q[k] > 0.0;
      value += q[k] * eh_gain[k];
      rate += std::log2(1.0 + q[k] * id_gain[k] / params.sigma2);
    }
    if (!all_positive) continue;
    if (rate >= params.rate_req - 1e-9 * (1.0 + params.rate_req) && value > out.value) {
      out.feasible = true;
      out.value = value;
      out.rate = rate;
      out.powers = q;
      out.mu = mu;
      out.nu = nu;
      out.r_s = r_s;
    }
    break;
  }
  return out;
}

}  // namespace detail

// Exhaustive per-antenna split search. Receives the raw channel because the
// per-antenna scaling happens before any eigenbasis exists. The uniform-split
// optimum is always one of the candidates, so the result can only improve on
// solve_op1.
inline JointSolution baseline_dps_grid(const ChannelMatrix& h, const SystemParams& params,
                                       int grid_points) {
  validate(params);
  const int n_r = static_cast<int>(h.rows());
  if (n_r > 4) throw std::invalid_argument("per-antenna grid search supports up to 4 antennas");
  if (grid_points < 11) throw std::invalid_argument("need at least 11 grid points per axis");
  const ChannelDecomposition dec = decompose(h);

  JointSolution best = solve_op1(dec, params);
  if (best.mode == Mode::Infeasible) return best;  // no split tuple can beat R_max
  best.stats.grid_resolution = 1.0 / (grid_points - 1);

  std::vector<int> idx(n_r, 0);
  std::vector<double> tuple(n_r, 0.0);
  while (true) {
    for (int i = 0; i < n_r; ++i) tuple[i] = static_cast<double>(idx[i]) / (grid_points - 1);
    detail::DpsPoint pt = detail::dps_fixed_tuple(h, params, tuple);
    if (pt.feasible && pt.value > best.p_re) {
      double mean_split = 0.0;
      for (double v : tuple) mean_split += v;
      best.mode = pt.r_s == 1 ? Mode::EnergyBeamforming : Mode::SpatialMultiplexing;
      best.rho = mean_split / n_r;
      best.powers = pt.powers;
      best.powers.resize(dec.rank, 0.0);
      best.mu = pt.mu;
      best.nu = pt.nu;
      best.r_s = pt.r_s;
      best.p_re = pt.value;
      best.rate_achieved = pt.rate;
    }
    int d = 0;
    while (d < n_r && ++idx[d] == grid_points) idx[d++] = 0;
    if (d == n_r) break;
  }
  return best;
}

// Brute-force joint grid over the split and the two-mode power split, in the
// channel eigenbasis. Validation-only; quadratic in grid_points.
inline JointSolution oracle_grid_2x2(const ChannelMatrix& h, const SystemParams& params,
                                     int grid_points) {
  validate(params);
  const ChannelDecomposition dec = decompose(h);
  if (dec.rank != 2) throw std::invalid_argument("grid oracle expects a rank-2 channel");
  if (grid_points < 11) throw std::invalid_argument("need at least 11 grid points per axis");
  const double l1 = dec.singvals[0] * dec.singvals[0];
  const double l2 = dec.singvals[1] * dec.singvals[1];
  JointSolution sol;
  sol.powers.assign(2, 0.0);
  sol.stats.grid_resolution = 1.0 / (grid_points - 1);
  double best = -1.0;
  for (int i = 0; i < grid_points; ++i) {
    const double rho = static_cast<double>(i) / (grid_points - 1);
    const double snr_scale = (1.0 - rho) / params.sigma2;
    for (int j = 0; j < grid_points; ++j) {
      const double p1 = params.p_t * j / (grid_points - 1);
      const double p2 = params.p_t - p1;
      const double rate = std::log2(1.0 + snr_scale * p1 * l1) +
                          std::log2(1.0 + snr_scale * p2 * l2);
      if (rate < params.rate_req) continue;
      const double value = rho * (p1 * l1 + p2 * l2);
      if (value > best) {
        best = value;
        sol.rho = rho;
        sol.powers[0] = p1;
        sol.powers[1] = p2;
        sol.rate_achieved = rate;
      }
    }
  }
  if (best < 0.0) return sol;  // mode stays Infeasible
  sol.mode = sol.powers[1] > 0.0 ? Mode::SpatialMultiplexing : Mode::EnergyBeamforming;
  sol.r_s = sol.powers[1] > 0.0 ? 2 : 1;
  sol.p_re = best;
  return sol;
}

}  // namespace swipt
