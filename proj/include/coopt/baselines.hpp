#pragma once
// Reference two-sample statistics: the Kolmogorov-Smirnov statistic for 1-d
// continuous samples and a dependent-Dirichlet Gibbs sampler for binary
// tables whose similarity parameter epsilon plays the role of a coupling
// probability.
//
// The Gibbs model: Q1 = eps * H0 + (1 - eps) * H1 and
// Q2 = eps * H0 + (1 - eps) * H2, with H0, H1, H2 Dirichlet over the cells
// observed in either sample and eps ~ Beta(a, b). Each observation carries an
// indicator J; J = 1 assigns it to the shared component H0.

#include <cstdint>
#include <span>
#include <vector>

#include "coopt/space.hpp"

namespace coopt {

// sup_t |F1(t) - F2(t)| over empirical CDFs, evaluated after all jumps at
// each distinct pooled value.
double ks_statistic(std::span<const double> x1, std::span<const double> x2);

struct EpsilonGibbsConfig {
  double alpha_cell = 0.5;  // Dirichlet pseudo-count per observed cell
  double a_eps = 3.0;       // Beta prior on eps
  double b_eps = 3.0;
  int burn_in = 10000;
  int keep = 10000;
  std::uint64_t seed = 0;
  // Re-checks simplex and [0, 1] invariants after every sweep.
  bool check_invariants = false;

  void validate() const;
};

struct EpsilonGibbsResult {
  double mean_eps = 0.0;
  std::vector<double> draws;  // kept eps draws, in sweep order
};

// Sweep order: H0, H1, H2, every J, eps. Initial state: eps = 0.5, H vectors
// uniform over the support, all J = 0. Deterministic given the seed.
EpsilonGibbsResult epsilon_gibbs(const Dataset& sample1, const Dataset& sample2,
                                 const EpsilonGibbsConfig& cfg);

}  // namespace coopt
