#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <vector>

#include <swipt/channel.hpp>
#include <swipt/harvest.hpp>
#include <swipt/solver.hpp>
#include <swipt/waterfill.hpp>

using namespace swipt;

namespace {

std::vector<EhCircuitModel> shipped_models() {
  return {linear_model(0.5), sample_logistic_model(), sample_rectifier_table()};
}

}  // namespace

TEST_CASE("conversion curves pass through the origin") {
  for (const auto& m : shipped_models()) {
    REQUIRE(harvested_power(0.0, m) == 0.0);
    REQUIRE_THROWS_AS(harvested_power(-1e-9, m), std::domain_error);
  }
}

TEST_CASE("linear model scales by the constant efficiency") {
  const EhCircuitModel m = linear_model(0.5);
  REQUIRE(harvested_power(2e-3, m) == Catch::Approx(1e-3).epsilon(1e-15));
  REQUIRE(implied_efficiency(0.07, m) == Catch::Approx(0.5).epsilon(1e-15));
  REQUIRE_THROWS_AS(linear_model(0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(linear_model(1.5), std::invalid_argument);
}

TEST_CASE("logistic fit stays close to the digitized curve between anchors") {
  const EhCircuitModel logistic = sample_logistic_model();
  const EhCircuitModel table = sample_rectifier_table();
  // 50 mW sits midway between the fit anchors; the saturation s-curve should
  // land within 10% of the digitized value there.
  const double mid = harvested_power(0.05, logistic);
  const double ref = harvested_power(0.05, table);
  REQUIRE(std::abs(mid - ref) <= 0.10 * ref);
}

TEST_CASE("implied efficiency behaves like a rectifier") {
  const EhCircuitModel logistic = sample_logistic_model();
  // deep in saturation more input buys no more output
  REQUIRE(implied_efficiency(0.9, logistic) < implied_efficiency(0.5, logistic));
  for (const auto& m : shipped_models()) {
    REQUIRE_THROWS_AS(implied_efficiency(0.0, m), std::domain_error);
    for (int i = 0; i <= 60; ++i) {
      const double p = 1e-6 * std::pow(10.0, i / 10.0);  // 1 uW .. 1 W
      REQUIRE(implied_efficiency(p, m) <= 1.0);
    }
  }
}

TEST_CASE("conversion curves are nondecreasing") {
  for (const auto& m : shipped_models()) {
    double prev = harvested_power(0.0, m);
    for (int i = 1; i <= 1000; ++i) {
      const double cur = harvested_power(0.2 * i / 1000.0, m);
      REQUIRE(cur >= prev);
      prev = cur;
    }
  }
}

TEST_CASE("table interpolation and saturation tail") {
  const EhCircuitModel m = sample_rectifier_table();
  // exact at the samples
  REQUIRE(harvested_power(0.010, m) == Catch::Approx(0.0040).epsilon(1e-12));
  REQUIRE(harvested_power(0.100, m) == Catch::Approx(0.0520).epsilon(1e-12));
  // linear between samples and from the implicit origin
  REQUIRE(harvested_power(0.0005, m) == Catch::Approx(5e-5).epsilon(1e-12));
  REQUIRE(harvested_power(0.015, m) == Catch::Approx(0.5 * (0.0040 + 0.0105)).epsilon(1e-12));
  // flat beyond the last sample
  REQUIRE(harvested_power(0.3, m) == Catch::Approx(0.0520).epsilon(1e-12));
  REQUIRE(harvested_power(5.0, m) == harvested_power(0.3, m));

  REQUIRE_THROWS_AS(table_model({}), std::invalid_argument);
  REQUIRE_THROWS_AS(table_model({{0.0, 0.0}}), std::invalid_argument);
  REQUIRE_THROWS_AS(table_model({{0.2, 0.1}, {0.1, 0.2}}), std::invalid_argument);
  REQUIRE_THROWS_AS(table_model({{0.1, 0.2}, {0.2, 0.1}}), std::invalid_argument);
  REQUIRE_THROWS_AS(logistic_model(0.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("table CSV loader round-trips") {
  namespace fs = std::filesystem;
  const fs::path tmp = fs::temp_directory_path() / "swipt_eh_table_test.csv";
  {
    std::ofstream out(tmp);
    out << "p_rf_w,p_dc_w\n";
    for (const auto& [x, y] : sample_rectifier_table().table) out << x << "," << y << "\n";
  }
  const EhCircuitModel loaded = load_table_csv(tmp.string());
  const EhCircuitModel builtin = sample_rectifier_table();
  REQUIRE(loaded.table.size() == builtin.table.size());
  for (std::size_t i = 0; i < loaded.table.size(); ++i) {
    REQUIRE(loaded.table[i].first == Catch::Approx(builtin.table[i].first).epsilon(1e-12));
    REQUIRE(loaded.table[i].second == Catch::Approx(builtin.table[i].second).epsilon(1e-12));
  }
  std::remove(tmp.string().c_str());

  REQUIRE_THROWS_AS(load_table_csv("/nonexistent/eh.csv"), std::runtime_error);
  const fs::path bad = fs::temp_directory_path() / "swipt_eh_bad_header.csv";
  {
    std::ofstream out(bad);
    out << "rf,dc\n0.1,0.05\n";
  }
  REQUIRE_THROWS_AS(load_table_csv(bad.string()), std::runtime_error);
  std::remove(bad.string().c_str());

  const EhCircuitModel shipped =
      load_table_csv(std::string(SWIPT_SOURCE_DIR) + "/data/rectifier_sample.csv");
  REQUIRE(shipped.table == builtin.table);
}

TEST_CASE("ranking by received power ranks harvested power") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto models = shipped_models();
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p_re(100);
    // keep candidates inside the strictly increasing span of every curve
    for (double& p : p_re) p = 0.1 * unif(rng);
    std::size_t best_re = 0;
    for (std::size_t i = 1; i < p_re.size(); ++i)
      if (p_re[i] > p_re[best_re]) best_re = i;
    for (const auto& m : models) {
      std::size_t best_h = 0;
      double best_val = harvested_power(p_re[0], m);
      for (std::size_t i = 1; i < p_re.size(); ++i) {
        const double v = harvested_power(p_re[i], m);
        if (v > best_val) {
          best_val = v;
          best_h = i;
        }
      }
      REQUIRE(best_h == best_re);
    }
  }
}

TEST_CASE("harvested power falls as the rate requirement tightens") {
  const ChannelDecomposition dec = decompose(generate_channel(2, 2, 0.1, 7));
  SystemParams params;
  params.p_t = 10.0;
  params.sigma2 = 1e-10;
  const double r_max = max_rate(dec, params);
  for (const auto& m : shipped_models()) {
    double prev = std::numeric_limits<double>::infinity();
    for (double frac : {0.80, 0.85, 0.90, 0.95}) {
      params.rate_req = frac * r_max;
      const JointSolution sol = solve_op1(dec, params);
      const double p_h = harvested_power(sol.p_re, m);
      REQUIRE(p_h <= prev * (1.0 + 1e-9));
      prev = p_h;
    }
  }
}
