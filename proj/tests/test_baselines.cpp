#include "coopt/baselines.hpp"

#include <cmath>
#include <vector>

#include "coopt/errors.hpp"
#include "coopt/random.hpp"
#include "doctest.h"

using namespace coopt;

namespace {

void check_close(double actual, double expected, double tol) {
  CAPTURE(actual);
  CAPTURE(expected);
  CHECK(std::abs(actual - expected) <= tol);
}

// Fills a one-coordinate table sample with the given cell-one count.
std::vector<double> table_rows(int n, int ones) {
  std::vector<double> rows(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < ones; ++i) rows[static_cast<std::size_t>(i)] = 1.0;
  return rows;
}

}  // namespace

TEST_CASE("Kolmogorov-Smirnov statistic on hand cases") {
  const std::vector<double> a{1.0, 2.0};
  const std::vector<double> b{1.5, 2.5};
  check_close(ks_statistic(a, b), 0.5, 1e-15);

  const std::vector<double> c{1.0, 1.0, 2.0};
  const std::vector<double> d{1.0, 2.0, 2.0};
  check_close(ks_statistic(c, d), 1.0 / 3.0, 1e-15);

  const std::vector<double> e{0.4, 0.1, 0.7};
  check_close(ks_statistic(e, e), 0.0, 1e-15);

  const std::vector<double> lo{1.0, 2.0, 3.0};
  const std::vector<double> hi{4.0, 5.0};
  check_close(ks_statistic(lo, hi), 1.0, 1e-15);

  CHECK_THROWS_AS(ks_statistic({}, a), input_error);
}

TEST_CASE("Gibbs sampler configuration validation") {
  EpsilonGibbsConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.alpha_cell = 0.0;
  CHECK_THROWS_AS(cfg.validate(), input_error);
  cfg = EpsilonGibbsConfig{};
  cfg.a_eps = -1.0;
  CHECK_THROWS_AS(cfg.validate(), input_error);
  cfg = EpsilonGibbsConfig{};
  cfg.burn_in = -1;
  CHECK_THROWS_AS(cfg.validate(), input_error);
  cfg = EpsilonGibbsConfig{};
  cfg.keep = 0;
  CHECK_THROWS_AS(cfg.validate(), input_error);
}

TEST_CASE("Gibbs sampler rejects unsupported inputs") {
  const SampleSpace rect = SampleSpace::rectangle({0.0}, {1.0});
  const Dataset r(rect, {0.5});
  CHECK_THROWS_AS(epsilon_gibbs(r, r, EpsilonGibbsConfig{}), input_error);

  const SampleSpace wide = SampleSpace::binary_table(63);
  const Dataset w(wide, std::vector<double>(63, 0.0));
  CHECK_THROWS_AS(epsilon_gibbs(w, w, EpsilonGibbsConfig{}), input_error);
}

TEST_CASE("without data epsilon follows its Beta prior") {
  const SampleSpace s = SampleSpace::binary_table(1);
  const Dataset empty(s, {});
  EpsilonGibbsConfig cfg;
  cfg.burn_in = 500;
  cfg.keep = 4000;
  cfg.seed = 21;
  const EpsilonGibbsResult r = epsilon_gibbs(empty, empty, cfg);
  REQUIRE(r.draws.size() == 4000);
  check_close(r.mean_eps, 0.5, 0.02);
  for (double e : r.draws) {
    CHECK(e >= 0.0);
    CHECK(e <= 1.0);
  }
}

TEST_CASE("a concentrated prior pins epsilon") {
  const SampleSpace s = SampleSpace::binary_table(1);
  const Dataset a(s, table_rows(20, 10));
  EpsilonGibbsConfig cfg;
  cfg.a_eps = 3000.0;
  cfg.b_eps = 3.0;
  cfg.burn_in = 200;
  cfg.keep = 500;
  cfg.seed = 4;
  const EpsilonGibbsResult r = epsilon_gibbs(a, a, cfg);
  CHECK(r.mean_eps > 0.99);
}

TEST_CASE("matched samples draw larger epsilon than separated ones") {
  const SampleSpace s = SampleSpace::binary_table(1);
  const Dataset even1(s, table_rows(400, 200));
  const Dataset even2(s, table_rows(400, 210));
  const Dataset skew(s, table_rows(400, 390));
  EpsilonGibbsConfig cfg;
  cfg.burn_in = 2000;
  cfg.keep = 2000;
  cfg.seed = 17;
  cfg.check_invariants = true;
  const double matched = epsilon_gibbs(even1, even2, cfg).mean_eps;
  const double separated = epsilon_gibbs(even1, skew, cfg).mean_eps;
  CHECK(matched > separated + 0.1);
}

TEST_CASE("draws are deterministic in the seed") {
  const SampleSpace s = SampleSpace::binary_table(2);
  const Dataset a(s, {0, 0, 0, 1, 1, 0, 1, 1, 0, 0});
  const Dataset b(s, {0, 0, 1, 1, 1, 1, 0, 1, 1, 0});
  EpsilonGibbsConfig cfg;
  cfg.burn_in = 50;
  cfg.keep = 100;
  cfg.seed = 8;
  const EpsilonGibbsResult r1 = epsilon_gibbs(a, b, cfg);
  const EpsilonGibbsResult r2 = epsilon_gibbs(a, b, cfg);
  CHECK(r1.draws == r2.draws);
  cfg.seed = 9;
  const EpsilonGibbsResult r3 = epsilon_gibbs(a, b, cfg);
  CHECK(r1.draws != r3.draws);
}
