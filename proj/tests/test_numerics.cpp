#include "coopt/numerics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"

using namespace coopt;

namespace {

void check_close(double actual, double expected, double tol) {
  CAPTURE(actual);
  CAPTURE(expected);
  CHECK(std::abs(actual - expected) <= tol);
}

void check_log_gamma(double x, double expected) {
  const double tol = std::max(1e-12, 5e-15 * std::abs(expected));
  check_close(log_gamma(x), expected, tol);
}

}  // namespace

TEST_CASE("log_gamma matches high-precision references") {
  check_log_gamma(0.25, 1.288022524698077457371);
  check_log_gamma(0.5, 0.5723649429247000870717);
  check_log_gamma(1.0, 0.0);
  check_log_gamma(1.5, -0.1207822376352452223455);
  check_log_gamma(2.5, 0.2846828704729191596325);
  check_log_gamma(5.0, 3.178053830347945619647);
  check_log_gamma(10.3, 13.48203678613835697062);
  check_log_gamma(100.5, 361.4355404677776215553);
  check_log_gamma(10000.0, 82099.71749644237727265);
  check_log_gamma(1000000.0, 12815504.56914761165998);
}

TEST_CASE("log_gamma rejects non-positive arguments") {
  CHECK_THROWS_AS(log_gamma(0.0), std::domain_error);
  CHECK_THROWS_AS(log_gamma(-1.0), std::domain_error);
}

TEST_CASE("log_dirichlet_norm closed forms") {
  const std::vector<double> half{0.5, 0.5};
  check_close(log_dirichlet_norm(half), 1.1447298858494001741434, 1e-14);
  const std::vector<double> ones{1.0, 1.0};
  check_close(log_dirichlet_norm(ones), 0.0, 1e-14);
  const std::vector<double> a23{2.0, 3.0};
  check_close(log_dirichlet_norm(a23), -2.4849066497880003102297, 1e-14);
  const std::vector<double> quarters{0.5, 0.5, 0.5, 0.5};
  check_close(log_dirichlet_norm(quarters), 2.2894597716988003482869, 1e-14);
}

TEST_CASE("log_sum_exp handles empty, -inf, and large inputs") {
  CHECK(log_sum_exp({}) == kNegInf);
  const std::vector<double> both_inf{kNegInf, kNegInf};
  CHECK(log_sum_exp(both_inf) == kNegInf);
  const std::vector<double> two_zero{0.0, 0.0};
  check_close(log_sum_exp(two_zero), kLn2, 1e-15);
  const std::vector<double> large{1000.0, 1000.0};
  check_close(log_sum_exp(large), 1000.0 + kLn2, 1e-12);
}

TEST_CASE("log_sum_exp is exact when all but one term vanish") {
  const std::vector<double> v{3.0, kNegInf, kNegInf};
  CHECK(log_sum_exp(v) == 3.0);
  const std::vector<double> w{kNegInf, -7.25};
  CHECK(log_sum_exp(w) == -7.25);
}

TEST_CASE("log_add_exp") {
  CHECK(log_add_exp(kNegInf, 1.5) == 1.5);
  CHECK(log_add_exp(1.5, kNegInf) == 1.5);
  check_close(log_add_exp(0.0, 0.0), kLn2, 1e-15);
  check_close(log_add_exp(std::log(3.0), std::log(5.0)), std::log(8.0), 1e-14);
}
