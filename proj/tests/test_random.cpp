#include "coopt/random.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"

using namespace coopt;

TEST_CASE("equal seeds give equal streams") {
  RandomStream a(42), b(42);
  for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());
  RandomStream c(43);
  bool all_equal = true;
  RandomStream a2(42);
  for (int i = 0; i < 16; ++i) all_equal = all_equal && (a2.next_u64() == c.next_u64());
  CHECK_FALSE(all_equal);
}

TEST_CASE("fork depends only on the key, not on draw position") {
  RandomStream parent(7);
  RandomStream early = parent.fork(3);
  for (int i = 0; i < 100; ++i) parent.next_u64();
  RandomStream late = parent.fork(3);
  for (int i = 0; i < 16; ++i) CHECK(early.next_u64() == late.next_u64());
}

TEST_CASE("distinct fork keys give distinct streams") {
  RandomStream parent(7);
  RandomStream a = parent.fork(1), b = parent.fork(2);
  bool all_equal = true;
  for (int i = 0; i < 16; ++i) all_equal = all_equal && (a.next_u64() == b.next_u64());
  CHECK_FALSE(all_equal);
}

TEST_CASE("uniform lies in [0, 1) with mean near one half") {
  RandomStream rng(2024);
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.004);
}

TEST_CASE("normal has mean zero and unit variance") {
  RandomStream rng(99);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(s2 / n - mean * mean - 1.0) < 0.02);
}

TEST_CASE("gamma matches its mean and variance") {
  for (double shape : {0.3, 1.0, 4.5}) {
    RandomStream rng(5000 + static_cast<std::uint64_t>(10 * shape));
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = rng.gamma(shape);
      REQUIRE(g >= 0.0);
      s += g;
      s2 += g * g;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    CHECK(std::abs(mean - shape) < 0.05 * std::max(1.0, shape));
    CHECK(std::abs(var - shape) < 0.1 * std::max(1.0, shape));
  }
}

TEST_CASE("dirichlet draws are simplex points with the right means") {
  RandomStream rng(11);
  const std::vector<double> alpha{2.0, 3.0, 5.0};
  const int n = 50000;
  std::vector<double> mean(3, 0.0);
  for (int i = 0; i < n; ++i) {
    const std::vector<double> w = sample_dirichlet(alpha, rng);
    REQUIRE(w.size() == 3);
    double total = 0.0;
    for (double v : w) {
      REQUIRE(v >= 0.0);
      total += v;
    }
    REQUIRE(std::abs(total - 1.0) <= 1e-12);
    for (int k = 0; k < 3; ++k) mean[static_cast<std::size_t>(k)] += w[static_cast<std::size_t>(k)];
  }
  CHECK(std::abs(mean[0] / n - 0.2) < 0.01);
  CHECK(std::abs(mean[1] / n - 0.3) < 0.01);
  CHECK(std::abs(mean[2] / n - 0.5) < 0.01);
}

TEST_CASE("singleton dirichlet is exactly one") {
  RandomStream rng(1);
  const std::vector<double> alpha{0.7};
  const std::vector<double> w = sample_dirichlet(alpha, rng);
  REQUIRE(w.size() == 1);
  CHECK(w[0] == 1.0);
}

TEST_CASE("bernoulli endpoints are exact") {
  RandomStream rng(3);
  for (int i = 0; i < 100; ++i) {
    CHECK(sample_bernoulli(0.0, rng) == 0);
    CHECK(sample_bernoulli(1.0, rng) == 1);
  }
}

TEST_CASE("categorical respects the weights") {
  RandomStream rng(17);
  const std::vector<double> w{0.2, 0.8};
  int ones = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const std::size_t k = sample_categorical(w, rng);
    REQUIRE(k < 2);
    ones += k == 1 ? 1 : 0;
  }
  CHECK(std::abs(static_cast<double>(ones) / n - 0.8) < 0.01);
}
