#include "coopt/oracle.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "coopt/coopt.hpp"
#include "coopt/errors.hpp"
#include "coopt/opt.hpp"
#include "doctest.h"

using namespace coopt;

namespace {

void check_close(double actual, double expected, double tol) {
  CAPTURE(actual);
  CAPTURE(expected);
  CHECK(std::abs(actual - expected) <= tol);
}

}  // namespace

TEST_CASE("configuration counts follow the recursive recurrences") {
  // Single tree: C_0 = 1, C_p = 1 + p * C_{p-1}^2.
  const OptParams op;
  CHECK(count_oracle_opt_configs(SampleSpace::binary_table(1), op, 1u << 30) == 2);
  CHECK(count_oracle_opt_configs(SampleSpace::binary_table(2), op, 1u << 30) == 9);
  CHECK(count_oracle_opt_configs(SampleSpace::binary_table(3), op, 1u << 30) == 244);
  CHECK(count_oracle_opt_configs(SampleSpace::binary_table(4), op, 1u << 30) == 238145);
  // Coupled pair: U_0 = 1, U_p = C_p + p * U_{p-1}^2.
  const CooptParams cp;
  CHECK(count_oracle_coopt_configs(SampleSpace::binary_table(1), cp, 1u << 30) == 3);
  CHECK(count_oracle_coopt_configs(SampleSpace::binary_table(2), cp, 1u << 30) == 27);
  CHECK(count_oracle_coopt_configs(SampleSpace::binary_table(3), cp, 1u << 30) == 2431);
  CHECK(count_oracle_coopt_configs(SampleSpace::binary_table(4), cp, 100'000'000) == 23877189);
  // The count saturates at cap + 1 instead of overflowing.
  CHECK(count_oracle_coopt_configs(SampleSpace::binary_table(8), cp, 1000) == 1001);
}

TEST_CASE("enumeration matches the hand-computed two-cell marginals") {
  const SampleSpace s = SampleSpace::binary_table(1);
  const Dataset a(s, {0.0, 1.0});
  const Dataset b(s, {0.0, 1.0});
  const CooptParams cp;
  check_close(oracle_coopt_log_marginal(a, b, cp), std::log(15.0 / 512.0), 1e-12);
  check_close(oracle_coupling_statistic(a, b, cp), 11.0 / 15.0, 1e-12);
  const std::vector<OracleConfig> configs = oracle_coopt_configs(a, b, cp);
  CHECK(configs.size() == 3);

  const Dataset pooled(s, {0.0, 1.0, 0.0, 1.0});
  const OptParams op = cp.pooled_opt_params();
  check_close(oracle_opt_log_marginal(pooled, op), std::log(11.0 / 256.0), 1e-12);
  CHECK(oracle_opt_configs(pooled, op).size() == 2);
}

TEST_CASE("enumeration agrees with the recursive engine on two coordinates") {
  const SampleSpace s = SampleSpace::binary_table(2);
  std::mt19937 gen(4721);
  std::uniform_int_distribution<int> bit(0, 1);
  std::uniform_int_distribution<int> len(0, 4);
  const std::vector<double> levels{0.3, 0.5, 0.9};
  for (int rep = 0; rep < 24; ++rep) {
    std::vector<double> f1, f2;
    const int n1 = len(gen), n2 = len(gen);
    for (int i = 0; i < 2 * n1; ++i) f1.push_back(bit(gen));
    for (int i = 0; i < 2 * n2; ++i) f2.push_back(bit(gen));
    const Dataset a(s, f1), b(s, f2);
    CooptParams cp;
    cp.gamma0 = levels[static_cast<std::size_t>(rep) % 3];
    cp.rho0 = levels[static_cast<std::size_t>(rep / 3) % 3];
    CAPTURE(rep);
    check_close(coopt_log_marginal(a, b, cp), oracle_coopt_log_marginal(a, b, cp), 1e-9);
    check_close(coupling_statistic(a, b, cp), oracle_coupling_statistic(a, b, cp), 1e-9);

    OptParams op;
    op.rho0 = cp.rho0;
    check_close(opt_log_marginal(a, op, BaseMeasure::uniform()),
                oracle_opt_log_marginal(a, op), 1e-9);
  }
}

TEST_CASE("the configuration budget caps enumeration") {
  const SampleSpace s = SampleSpace::binary_table(4);
  const Dataset a(s, {0.0, 0.0, 0.0, 0.0});
  const Dataset b(s, {1.0, 1.0, 1.0, 1.0});
  CHECK_THROWS_AS(oracle_coopt_log_marginal(a, b, CooptParams{}), resource_limit_error);
  OracleLimits tight;
  tight.max_configs = 100;
  CHECK_THROWS_AS(oracle_opt_log_marginal(a, OptParams{}, tight), resource_limit_error);
}

TEST_CASE("enumeration is restricted to plain binary tables") {
  const SampleSpace rect = SampleSpace::rectangle({0.0}, {1.0});
  const Dataset r(rect, {0.5});
  CHECK_THROWS_AS(oracle_opt_log_marginal(r, OptParams{}), input_error);
  CHECK_THROWS_AS(oracle_coopt_log_marginal(r, r, CooptParams{}), input_error);

  const SampleSpace s = SampleSpace::binary_table(2);
  const Dataset t(s, {0.0, 1.0});
  OptParams op;
  op.selector = [](const Node&) { return std::vector<double>{1.0, 1.0}; };
  CHECK_THROWS_AS(oracle_opt_log_marginal(t, op), input_error);
  CooptParams cp;
  cp.selector = [](const Node&) { return std::vector<double>{1.0, 1.0}; };
  CHECK_THROWS_AS(oracle_coopt_log_marginal(t, t, cp), input_error);
}
