#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <swipt/channel.hpp>
#include <swipt/kkt.hpp>
#include <swipt/regimes.hpp>
#include <swipt/solver.hpp>
#include <swipt/waterfill.hpp>

using namespace swipt;

namespace {

struct SmInstance {
  ChannelDecomposition dec;
  SystemParams params;
  JointSolution sol;
};

// A multiplexing-mode solve on a seeded 2x2 channel, mid-rate.
SmInstance sm_instance(std::uint64_t seed, double frac = 0.6) {
  SmInstance inst;
  inst.dec = decompose(generate_channel(2, 2, 0.1, seed));
  inst.params.p_t = 10.0;
  inst.params.sigma2 = 1e-10;
  inst.params.rate_req = frac * max_rate(inst.dec, inst.params);
  inst.sol = solve_op1(inst.dec, inst.params);
  return inst;
}

}  // namespace

TEST_CASE("modified waterfilling spectrum basics") {
  const std::vector<double> sv = {0.2, 0.1};
  REQUIRE(power_allocation(0.0, 0.05, 0.5, sv, 2, 1e-10) == PowerAllocation{0.0, 0.0});
  const std::vector<double> eq = {0.15, 0.15};
  const PowerAllocation p = power_allocation(0.3, 0.05, 0.5, eq, 2, 1e-10);
  REQUIRE(p[0] == Catch::Approx(p[1]).epsilon(1e-14));
  REQUIRE_THROWS_AS(power_allocation(0.3, 0.02, 0.5, sv, 2, 1e-10), std::domain_error);
  REQUIRE_THROWS_AS(power_allocation(0.3, 0.05, 1.0, sv, 2, 1e-10), std::domain_error);
}

TEST_CASE("budget multiplier closes the power budget when nothing clamps") {
  const std::vector<double> sv = {0.2, 0.1};
  const double rho = 0.5, p_t = 10.0, s2 = 1e-10;
  const double nu = rho * 0.04 + 0.001;
  const double mu = mu_from_nu_rho(nu, rho, sv, 2, p_t, s2);
  const PowerAllocation p = power_allocation(mu, nu, rho, sv, 2, s2);
  REQUIRE(p[0] > 0.0);
  REQUIRE(p[1] > 0.0);
  REQUIRE(p[0] + p[1] == Catch::Approx(p_t).epsilon(1e-9));
}

TEST_CASE("single-mode multiplier reduces to its closed form") {
  const std::vector<double> sv = {0.2, 0.1};
  const double nu = 0.03, rho = 0.4, p_t = 10.0, s2 = 1e-9;
  const double want = ln2 * (nu - rho * 0.04) * (p_t + s2 / ((1.0 - rho) * 0.04));
  REQUIRE(mu_from_nu_rho(nu, rho, sv, 1, p_t, s2) == Catch::Approx(want).epsilon(1e-12));
}

TEST_CASE("budget-rate residual vanishes at solved points and brackets the root") {
  int sm_count = 0;
  for (std::uint64_t seed = 7; seed < 127 && sm_count < 100; ++seed) {
    const SmInstance inst = sm_instance(seed);
    if (inst.sol.mode != Mode::SpatialMultiplexing) continue;
    ++sm_count;
    const auto& sv = inst.dec.singvals;
    const double res = residual_budget_rate_normalized(
        inst.sol.nu, inst.sol.rho, sv, inst.sol.r_s, inst.params.p_t, inst.params.sigma2,
        inst.params.rate_req);
    REQUIRE(std::abs(res) <= 1e-8);

    // pole side is negative, and the sign flips somewhere above the root
    const double pole = inst.sol.rho * sv[0] * sv[0];
    const double at_lo =
        residual_budget_rate(pole + 1e-12, inst.sol.rho, sv, inst.sol.r_s, inst.params.p_t,
                             inst.params.sigma2, inst.params.rate_req);
    REQUIRE(at_lo < 0.0);
    double hi = pole + (1.0 - inst.sol.rho);
    double at_hi = residual_budget_rate(hi, inst.sol.rho, sv, inst.sol.r_s, inst.params.p_t,
                                        inst.params.sigma2, inst.params.rate_req);
    for (int d = 0; d < 60 && at_hi <= 0.0; ++d) {
      hi = pole + 2.0 * (hi - pole);
      at_hi = residual_budget_rate(hi, inst.sol.rho, sv, inst.sol.r_s, inst.params.p_t,
                                   inst.params.sigma2, inst.params.rate_req);
    }
    REQUIRE(at_hi > 0.0);
  }
  REQUIRE(sm_count == 100);
}

TEST_CASE("split-stationarity residual vanishes at solved points") {
  for (std::uint64_t seed : {7, 11, 23, 41}) {
    const SmInstance inst = sm_instance(seed);
    if (inst.sol.mode != Mode::SpatialMultiplexing) continue;
    const double res = residual_stationarity_rho_normalized(
        inst.sol.nu, inst.sol.rho, inst.dec.singvals, inst.sol.r_s, inst.params.sigma2,
        inst.params.rate_req);
    REQUIRE(std::abs(res) <= 1e-6);
  }
}

TEST_CASE("split-stationarity residual signs the received-power slope") {
  int tested = 0;
  for (std::uint64_t seed = 200; seed < 280 && tested < 100; ++seed) {
    const ChannelDecomposition dec = decompose(generate_channel(2, 2, 0.1, seed));
    SystemParams params;
    params.p_t = 10.0;
    params.sigma2 = 1e-10;
    params.rate_req = 0.6 * max_rate(dec, params);
    const double l1 = dec.singvals[0] * dec.singvals[0];
    const double l2 = dec.singvals[1] * dec.singvals[1];
    if (params.rate_req <= rate_threshold_default(params.p_t, l1, l2, params.sigma2)) continue;
    const double lo = rho_eb(params.rate_req, params.p_t, l1, params.sigma2);
    const double hi = rho_upper_bound(dec, params);
    const int r_w = waterfill_rank(dec.singvals, params.p_t, params.sigma2);
    SolveStats scratch;
    for (double t : {0.2, 0.5, 0.8}) {
      const double rho = lo + t * (hi - lo);
      const double h = 1e-7 * (hi - lo);
      const auto mid = detail::eval_split(dec, params, rho, r_w, 1e-13, &scratch, false);
      const auto fwd = detail::eval_split(dec, params, rho + h, r_w, 1e-13, &scratch, false);
      const auto bwd = detail::eval_split(dec, params, rho - h, r_w, 1e-13, &scratch, false);
      if (!mid.ok || !fwd.ok || !bwd.ok) continue;
      if (mid.r_s != fwd.r_s || mid.r_s != bwd.r_s) continue;
      const double fd = (fwd.p_re - bwd.p_re) / (2.0 * h);
      if (std::abs(fd) * h <= 1e-8 * std::abs(mid.p_re)) continue;  // too near the peak
      const double res = residual_stationarity_rho(mid.nu, rho, dec.singvals, mid.r_s,
                                                   params.sigma2, params.rate_req);
      REQUIRE((res > 0.0) == (fd > 0.0));
      ++tested;
    }
  }
  REQUIRE(tested >= 100);
}

TEST_CASE("ideal-receiver residual vanishes at solved points and brackets") {
  int checked = 0;
  for (std::uint64_t seed = 300; seed < 460 && checked < 100; ++seed) {
    const ChannelDecomposition dec = decompose(generate_channel(2, 2, 0.1, seed));
    SystemParams params;
    params.p_t = 10.0;
    params.sigma2 = 1e-10;
    const double r_max = max_rate(dec, params);
    const double l1 = dec.singvals[0] * dec.singvals[0];
    const double r_th_id = rate_threshold_ideal(l1, params.p_t, params.sigma2);
    params.rate_req = r_th_id + 0.6 * (0.99 * r_max - r_th_id);
    const JointSolution sol = solve_op2(dec, params);
    if (sol.mode != Mode::SpatialMultiplexing) continue;
    const double res = residual_ideal_normalized(sol.nu, dec.singvals, sol.r_s, params.p_t,
                                                 params.sigma2, params.rate_req);
    REQUIRE(std::abs(res) <= 1e-8);
    const double at_lo = residual_ideal(l1 + 1e-12, dec.singvals, sol.r_s, params.p_t,
                                        params.sigma2, params.rate_req);
    const double at_hi = residual_ideal(l1 + 1.0, dec.singvals, sol.r_s, params.p_t,
                                        params.sigma2, params.rate_req);
    REQUIRE(at_lo < 0.0);
    REQUIRE(at_hi > 0.0);
    ++checked;
  }
  REQUIRE(checked == 100);
}

TEST_CASE("single-mode ideal residual degenerates exactly at the beamforming capacity") {
  const std::vector<double> sv = {0.2, 0.1};
  const double p_t = 10.0, s2 = 1e-10;
  const double r = rate_threshold_ideal(0.04, p_t, s2);
  for (double nu2 : {0.041, 0.05, 0.3, 1.0}) {
    REQUIRE(residual_ideal_normalized(nu2, sv, 1, p_t, s2, r) ==
            Catch::Approx(0.0).margin(1e-9));
  }
}

TEST_CASE("ideal multiplier splits equal modes evenly and closes the budget") {
  const std::vector<double> eq = {0.15, 0.15};
  const auto [mu2, p] = ideal_mu2_and_powers(0.03, eq, 2, 10.0, 1e-10);
  REQUIRE(mu2 > 0.0);
  REQUIRE(p[0] == Catch::Approx(p[1]).epsilon(1e-12));
  REQUIRE(p[0] + p[1] == Catch::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("ideal solve closes rate and budget through the recovered multiplier") {
  const ChannelDecomposition dec = decompose(generate_channel(2, 2, 0.1, 7));
  SystemParams params;
  params.p_t = 10.0;
  params.sigma2 = 1e-10;
  const double l1 = dec.singvals[0] * dec.singvals[0];
  const double r_th_id = rate_threshold_ideal(l1, params.p_t, params.sigma2);
  params.rate_req = 0.5 * (r_th_id + max_rate(dec, params));
  const JointSolution sol = solve_op2(dec, params);
  REQUIRE(sol.mode == Mode::SpatialMultiplexing);
  const auto [mu2, p] = ideal_mu2_and_powers(sol.nu, dec.singvals, sol.r_s, params.p_t,
                                             params.sigma2);
  double total = 0.0;
  for (double v : p) total += v;
  REQUIRE(total == Catch::Approx(params.p_t).epsilon(1e-9));
  REQUIRE(achievable_rate(dec, sol.powers, 0.0, params.sigma2) ==
          Catch::Approx(params.rate_req).margin(1e-6));
  REQUIRE(mu2 == Catch::Approx(sol.mu).epsilon(1e-9));
}

TEST_CASE("ideal spectrum equals the whitened-channel construction") {
  // Build the covariance through the shifted-inverse square root of the Gram
  // matrix and compare its eigen-spectrum with the direct per-mode powers.
  const ChannelMatrix h = generate_channel(2, 2, 0.1, 7);
  const ChannelDecomposition dec = decompose(h);
  SystemParams params;
  params.p_t = 10.0;
  params.sigma2 = 1e-10;
  const double l1 = dec.singvals[0] * dec.singvals[0];
  const double r_th_id = rate_threshold_ideal(l1, params.p_t, params.sigma2);
  params.rate_req = 0.5 * (r_th_id + max_rate(dec, params));
  const JointSolution sol = solve_op2(dec, params);
  REQUIRE(sol.mode == Mode::SpatialMultiplexing);

  const int n = static_cast<int>(h.cols());
  const Eigen::MatrixXcd gram = h.adjoint() * h;
  const Eigen::MatrixXcd q = sol.nu * Eigen::MatrixXcd::Identity(n, n) - gram;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(q);
  REQUIRE(es.eigenvalues().minCoeff() > 0.0);
  const Eigen::MatrixXcd q_isqrt =
      es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
      es.eigenvectors().adjoint();

  const ChannelMatrix h_white = h * q_isqrt;
  const ChannelDecomposition dec_white = decompose(h_white);
  Eigen::MatrixXcd spectrum = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < dec_white.rank; ++k) {
    const double lt = dec_white.singvals[k] * dec_white.singvals[k];
    const double pk = pos(sol.mu / ln2 - params.sigma2 / lt);
    spectrum += pk * dec_white.v.col(k) * dec_white.v.col(k).adjoint();
  }
  const Eigen::MatrixXcd s_rebuilt = q_isqrt * spectrum * q_isqrt;

  for (int k = 0; k < dec.rank; ++k) {
    const double via_construction =
        std::real(dec.v.col(k).dot(s_rebuilt * dec.v.col(k)));
    REQUIRE(via_construction == Catch::Approx(sol.powers[k]).margin(1e-8 * params.p_t));
  }
}

TEST_CASE("active sets shrink within the waterfilling rank and order their powers") {
  for (std::uint64_t seed = 500; seed < 540; ++seed) {
    const ChannelDecomposition dec = decompose(generate_channel(4, 4, 0.1, seed));
    SystemParams params;
    params.p_t = 10.0;
    params.sigma2 = 1e-9;
    params.rate_req = 0.7 * max_rate(dec, params);
    const JointSolution sol = solve_op1(dec, params);
    if (sol.mode != Mode::SpatialMultiplexing) continue;
    REQUIRE(sol.r_s <= waterfill_rank(dec.singvals, params.p_t, params.sigma2));
    for (int k = 0; k + 1 < sol.r_s; ++k)
      REQUIRE(sol.powers[k] >= sol.powers[k + 1] - 1e-12 * params.p_t);
  }
}
