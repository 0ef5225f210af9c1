#pragma once

// Classic waterfilling over channel eigenmodes. This is the rate-optimal
// allocation when no power is harvested, and its rank is the hard ceiling on
// how many eigenchannels any rate-constrained optimum can occupy.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "swipt/channel.hpp"
#include "swipt/common.hpp"

namespace swipt {

namespace detail {

inline void check_singvals(const std::vector<double>& singvals) {
  if (singvals.empty()) throw std::invalid_argument("empty singular value list");
  for (std::size_t k = 0; k < singvals.size(); ++k) {
    if (!(singvals[k] > 0.0)) throw std::invalid_argument("singular values must be positive");
    if (k > 0 && singvals[k] > singvals[k - 1] + 1e-15 * singvals[0])
      throw std::invalid_argument("singular values must be sorted descending");
  }
}

}  // namespace detail

// Number of eigenmodes that receive strictly positive water. The test is a
// strict sign test on the residual budget after raising the weakest kept
// mode to the common level; no epsilon slack.
inline int waterfill_rank(const std::vector<double>& singvals, double p_t, double sigma2) {
  detail::check_singvals(singvals);
  if (!(p_t > 0.0) || !(sigma2 > 0.0)) throw std::invalid_argument("p_t and sigma2 must be positive");
  int r_w = 1;
  for (int k = 2; k <= static_cast<int>(singvals.size()); ++k) {
    const double inv_k = sigma2 / (singvals[k - 1] * singvals[k - 1]);
    double residual = p_t;
    for (int i = 0; i < k - 1; ++i)
      residual -= inv_k - sigma2 / (singvals[i] * singvals[i]);
    if (residual > 0.0) r_w = k;
  }
  return r_w;
}

inline PowerAllocation waterfill_allocation(const std::vector<double>& singvals, double p_t,
                                            double sigma2) {
  const int r_w = waterfill_rank(singvals, p_t, sigma2);
  const int r = static_cast<int>(singvals.size());
  const double inv_rw = sigma2 / (singvals[r_w - 1] * singvals[r_w - 1]);
  double residual = p_t;
  for (int i = 0; i < r_w - 1; ++i)
    residual -= inv_rw - sigma2 / (singvals[i] * singvals[i]);
  PowerAllocation p(r, 0.0);
  for (int k = 0; k < r_w; ++k)
    p[k] = residual / r_w + inv_rw - sigma2 / (singvals[k] * singvals[k]);
  return p;
}

// Capacity of the link when the decoder gets the full received signal.
inline double max_rate(const ChannelDecomposition& dec, const SystemParams& params) {
  validate(params);
  const PowerAllocation p = waterfill_allocation(dec.singvals, params.p_t, params.sigma2);
  return achievable_rate(dec, p, 0.0, params.sigma2);
}

}  // namespace swipt
