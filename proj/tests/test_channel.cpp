#include <catch_amalgamated.hpp>

#include <complex>

#include <swipt/channel.hpp>

using namespace swipt;

TEST_CASE("channel generation is seed-deterministic") {
  const ChannelMatrix a = generate_channel(3, 2, 0.1, 42);
  const ChannelMatrix b = generate_channel(3, 2, 0.1, 42);
  const ChannelMatrix c = generate_channel(3, 2, 0.1, 43);
  REQUIRE(a.rows() == 3);
  REQUIRE(a.cols() == 2);
  REQUIRE((a - b).norm() == 0.0);
  REQUIRE((a - c).norm() > 0.0);
}

TEST_CASE("channel entries have the requested scale") {
  const double theta = 0.1;
  double sum_sq = 0.0;
  int count = 0;
  for (int s = 0; s < 500; ++s) {
    const ChannelMatrix h = generate_channel(4, 4, theta, 1000 + s);
    sum_sq += h.squaredNorm();
    count += 16;
  }
  const double mean_sq = sum_sq / count;
  REQUIRE(mean_sq == Catch::Approx(theta * theta).margin(0.05 * theta * theta));
}

TEST_CASE("decomposition reconstructs the channel and orders the spectrum") {
  const ChannelMatrix h = generate_channel(4, 3, 0.05, 7);
  const ChannelDecomposition dec = decompose(h);
  REQUIRE(dec.rank == 3);
  REQUIRE(static_cast<int>(dec.singvals.size()) == dec.rank);
  for (int k = 0; k + 1 < dec.rank; ++k) REQUIRE(dec.singvals[k] >= dec.singvals[k + 1]);
  REQUIRE(dec.singvals.back() > 0.0);

  Eigen::MatrixXcd rebuilt = Eigen::MatrixXcd::Zero(4, 3);
  for (int k = 0; k < dec.rank; ++k)
    rebuilt += dec.singvals[k] * dec.u.col(k) * dec.v.col(k).adjoint();
  REQUIRE((rebuilt - h).norm() <= 1e-12 * h.norm());

  const Eigen::MatrixXcd vhv = dec.v.adjoint() * dec.v;
  REQUIRE((vhv - Eigen::MatrixXcd::Identity(dec.rank, dec.rank)).norm() < 1e-12);
}

TEST_CASE("rank-deficient channels are detected") {
  const ChannelMatrix h = generate_channel(3, 1, 0.1, 9);
  ChannelMatrix outer = h * ChannelMatrix::Ones(1, 3);  // rank 1, 3x3
  REQUIRE(decompose(outer).rank == 1);
  REQUIRE_THROWS_AS(decompose(ChannelMatrix::Zero(2, 2)), std::invalid_argument);
}

TEST_CASE("received power sums mode powers against squared gains") {
  const ChannelDecomposition dec = decompose(generate_channel(2, 2, 0.1, 7));
  const double l1 = dec.singvals[0] * dec.singvals[0];
  const double l2 = dec.singvals[1] * dec.singvals[1];
  REQUIRE(received_power(dec, {10.0, 0.0}) == Catch::Approx(10.0 * l1).epsilon(1e-12));
  REQUIRE(received_power(dec, {3.0, 4.0}) ==
          Catch::Approx(3.0 * l1 + 4.0 * l2).epsilon(1e-12));
  REQUIRE_THROWS_AS(received_power(dec, {1.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(received_power(dec, {-1.0, 0.0}), std::domain_error);
}

TEST_CASE("achievable rate matches the per-mode log sum and guards its domain") {
  const ChannelDecomposition dec = decompose(generate_channel(2, 2, 0.1, 7));
  const double sigma2 = 1e-10;
  const PowerAllocation p = {6.0, 4.0};
  double want = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double l = dec.singvals[k] * dec.singvals[k];
    want += std::log2(1.0 + 0.75 * p[k] * l / sigma2);
  }
  REQUIRE(achievable_rate(dec, p, 0.25, sigma2) == Catch::Approx(want).epsilon(1e-12));
  REQUIRE(achievable_rate(dec, p, 1.0, sigma2) == 0.0);
  REQUIRE_THROWS_AS(achievable_rate(dec, p, -0.1, sigma2), std::domain_error);
  REQUIRE_THROWS_AS(achievable_rate(dec, p, 1.1, sigma2), std::domain_error);
}
