#pragma once
// Deterministic, forkable random streams plus the samplers the library needs.
//
// A RandomStream is identified by a 64-bit key. fork(k) derives the key of an
// independent child stream from the parent key and k alone, never from how
// many draws the parent has produced, so consumers can fork per logical unit
// (a tree node, a replicate index) and get reproducible draws regardless of
// evaluation order.

#include <cstdint>
#include <span>
#include <vector>

namespace coopt {

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  // Independent child stream; does not advance or modify this stream.
  RandomStream fork(std::uint64_t key) const;

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double normal();   // standard normal
  // Gamma(shape, 1), shape > 0, Marsaglia-Tsang squeeze with the
  // shape < 1 boost.
  double gamma(double shape);

 private:
  struct raw_tag {};
  RandomStream(raw_tag, std::uint64_t key);

  std::uint64_t key_;
  std::uint64_t counter_;
};

// Dirichlet(alpha) draw; alpha nonempty, all entries > 0. A singleton alpha
// yields exactly {1.0}.
std::vector<double> sample_dirichlet(std::span<const double> alpha, RandomStream& rng);

// Bernoulli(p) for p in [0, 1]; p = 0 and p = 1 are exact.
int sample_bernoulli(double p, RandomStream& rng);

// Index draw from a normalized weight vector; guards against the cumulative
// sum falling a rounding error short of 1.
std::size_t sample_categorical(std::span<const double> weights, RandomStream& rng);

}  // namespace coopt
