#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace swipt {

// Rate requirement exceeds what the channel can carry.
class infeasible_error : public std::runtime_error {
 public:
  explicit infeasible_error(const std::string& what) : std::runtime_error(what) {}
};

// A root or bracket the algorithm relies on could not be located.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double inv_golden = 0.6180339887498949;  // (sqrt(5)-1)/2
inline constexpr double ln2 = 0.6931471805599453;

inline double pos(double x) { return x > 0.0 ? x : 0.0; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// Bisection on a sign change. f(lo) and f(hi) must have opposite signs
// (a zero endpoint counts as either sign). Runs until the interval shrinks
// below xtol or max_steps is hit, returns the midpoint. If step_count is
// given it is incremented once per function evaluation inside the loop.
template <class F>
double bisect_root(F&& f, double lo, double hi, double flo, double xtol, int max_steps,
                   long long* step_count = nullptr) {
  for (int i = 0; i < max_steps && (hi - lo) > xtol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (step_count) ++*step_count;
    if ((flo <= 0.0 && fm <= 0.0) || (flo >= 0.0 && fm >= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Floor of a bracket that opens just above a pole. The residuals bracketed
// this way are negative immediately above their pole in exact arithmetic, so
// a positive probe at pole+off0 means the crossing sits below the floor; the
// offset is halved toward the pole until the sign recovers or the offset
// falls out of floating-point resolution. flo receives the residual at the
// returned edge.
template <class F>
double lower_bracket_edge(F&& f, double pole, double off0, double* flo) {
  double off = off0;
  double lo = pole + off;
  *flo = f(lo);
  for (int d = 0; d < 120 && *flo > 0.0; ++d) {
    off *= 0.5;
    const double next = pole + off;
    if (!(next > pole) || next >= lo) break;
    lo = next;
    *flo = f(lo);
  }
  return lo;
}

// Per-eigenchannel transmit powers in watts, descending eigenchannel order.
using PowerAllocation = std::vector<double>;

struct SystemParams {
  double p_t = 10.0;       // transmit power budget, watts
  double sigma2 = 1e-13;   // receiver noise variance, watts
  double rate_req = 0.0;   // minimum rate, bits/s/Hz
  double tol = 1e-4;       // search tolerance for the outer maximization
};

inline void validate(const SystemParams& p) {
  if (!(p.p_t > 0.0)) throw std::invalid_argument("p_t must be positive");
  if (!(p.sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
  if (!(p.rate_req >= 0.0)) throw std::invalid_argument("rate_req must be nonnegative");
  if (!(p.tol > 0.0 && p.tol < 1.0)) throw std::invalid_argument("tol must be in (0,1)");
}

}  // namespace swipt
