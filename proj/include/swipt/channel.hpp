#pragma once

// Flat-fading MIMO channel: seeded generation, SVD decomposition, and the
// two quantities everything downstream is built from, namely the power
// collected across the receive array for a given eigenchannel power loading
// and the log-det rate of the information decoder after power splitting.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "swipt/common.hpp"

namespace swipt {

using ChannelMatrix = Eigen::MatrixXcd;

struct ChannelDecomposition {
  ChannelMatrix h;
  Eigen::MatrixXcd u;               // n_r x r
  Eigen::MatrixXcd v;               // n_t x r
  std::vector<double> singvals;     // descending, strictly positive
  int rank = 0;
};

namespace detail {

// Standard normal via Box-Muller on explicitly constructed 53-bit uniforms.
// std::normal_distribution is not portable across standard libraries; this is.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : eng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * M_PI * u2;
    spare_ = mag * std::sin(ang);
    have_spare_ = true;
    return mag * std::cos(ang);
  }

 private:
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace detail

// H = theta * G with G having i.i.d. unit-variance circularly symmetric
// complex Gaussian entries. Entries are drawn row-major, real part first,
// so a given (n_r, n_t, seed) triple reproduces bit-identical matrices.
inline ChannelMatrix generate_channel(int n_r, int n_t, double theta, std::uint64_t seed) {
  if (n_r < 1 || n_t < 1) throw std::invalid_argument("channel dimensions must be positive");
  if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
  detail::NormalSource normal(seed);
  ChannelMatrix h(n_r, n_t);
  const double scale = theta / std::sqrt(2.0);
  for (int i = 0; i < n_r; ++i) {
    for (int j = 0; j < n_t; ++j) {
      const double re = normal();
      const double im = normal();
      h(i, j) = scale * std::complex<double>(re, im);
    }
  }
  return h;
}

// Thin SVD with relative truncation: singular values below 1e-12 times the
// largest are dropped along with their vectors.
inline ChannelDecomposition decompose(const ChannelMatrix& h) {
  if (h.rows() < 1 || h.cols() < 1) throw std::invalid_argument("empty channel matrix");
  Eigen::JacobiSVD<ChannelMatrix> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double s_max = sv.size() > 0 ? sv(0) : 0.0;
  if (!(s_max > 0.0)) throw std::invalid_argument("degenerate channel: all singular values vanish");
  int r = 0;
  while (r < sv.size() && sv(r) > 1e-12 * s_max) ++r;
  ChannelDecomposition dec;
  dec.h = h;
  dec.u = svd.matrixU().leftCols(r);
  dec.v = svd.matrixV().leftCols(r);
  dec.singvals.assign(sv.data(), sv.data() + r);
  dec.rank = r;
  return dec;
}

// Total received power sum_k p_k * lambda_k^2 for S = V diag(p) V^H.
inline double received_power(const ChannelDecomposition& dec, const PowerAllocation& alloc) {
  if (static_cast<int>(alloc.size()) != dec.rank)
    throw std::invalid_argument("allocation length must equal channel rank");
  double total = 0.0;
  for (int k = 0; k < dec.rank; ++k) {
    if (alloc[k] < 0.0) throw std::domain_error("negative eigenchannel power");
    total += alloc[k] * dec.singvals[k] * dec.singvals[k];
  }
  return total;
}

// Rate of the information decoder when a fraction rho of the received power
// is diverted to the harvester: sum_k log2(1 + (1-rho) p_k lambda_k^2 / sigma2).
inline double achievable_rate(const ChannelDecomposition& dec, const PowerAllocation& alloc,
                              double rho, double sigma2) {
  if (static_cast<int>(alloc.size()) != dec.rank)
    throw std::invalid_argument("allocation length must equal channel rank");
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::domain_error("rho must lie in [0,1]");
  if (!(sigma2 > 0.0)) throw std::domain_error("sigma2 must be positive");
  double rate = 0.0;
  for (int k = 0; k < dec.rank; ++k) {
    if (alloc[k] < 0.0) throw std::domain_error("negative eigenchannel power");
    const double l2 = dec.singvals[k] * dec.singvals[k];
    rate += std::log2(1.0 + (1.0 - rho) * alloc[k] * l2 / sigma2);
  }
  return rate;
}

}  // namespace swipt
