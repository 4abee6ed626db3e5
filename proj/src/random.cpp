#include "coopt/random.hpp"

#include <cmath>
#include <stdexcept>

namespace coopt {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

constexpr double kTwoPi = 6.283185307179586476925287;

}  // namespace

RandomStream::RandomStream(std::uint64_t seed)
    : key_(mix64(seed + kGolden)), counter_(0) {}

RandomStream::RandomStream(raw_tag, std::uint64_t key) : key_(key), counter_(0) {}

RandomStream RandomStream::fork(std::uint64_t key) const {
  const std::uint64_t child = mix64(key_ + kGolden) ^ mix64(key * 0xD1342543DE82EF95ull + kGolden);
  return RandomStream(raw_tag{}, child);
}

std::uint64_t RandomStream::next_u64() {
  counter_ += kGolden;
  return mix64(key_ ^ counter_);
}

double RandomStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() {
  // Box-Muller, cosine branch only; keeps the stream stateless across calls.
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double RandomStream::gamma(double shape) {
  if (!(shape > 0.0)) throw std::domain_error("gamma: shape must be > 0");
  if (shape < 1.0) {
    const double g = gamma(shape + 1.0);
    double u = uniform();
    while (u == 0.0) u = uniform();
    return g * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = normal();
    const double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::vector<double> sample_dirichlet(std::span<const double> alpha, RandomStream& rng) {
  if (alpha.empty()) throw std::domain_error("sample_dirichlet: empty alpha");
  for (double a : alpha)
    if (!(a > 0.0)) throw std::domain_error("sample_dirichlet: alpha entries must be > 0");
  if (alpha.size() == 1) return {1.0};
  std::vector<double> out(alpha.size());
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    out[i] = rng.gamma(alpha[i]);
    total += out[i];
  }
  if (total <= 0.0) {
    // All gamma draws underflowed; fall back to the uniform barycenter.
    const double w = 1.0 / static_cast<double>(out.size());
    for (double& o : out) o = w;
    return out;
  }
  for (double& o : out) o /= total;
  return out;
}

int sample_bernoulli(double p, RandomStream& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("sample_bernoulli: p must be in [0, 1]");
  return rng.uniform() < p ? 1 : 0;
}

std::size_t sample_categorical(std::span<const double> weights, RandomStream& rng) {
  if (weights.empty()) throw std::domain_error("sample_categorical: empty weights");
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

}  // namespace coopt
