#pragma once
// Brute-force reference for small binary tables: enumerates every explicit
// configuration of the recursive partition process (stop / split choices of
// the shared tree, couple / split choices of the coupled pair) and sums
// weighted likelihoods directly. No memoization, no closed-form shortcuts,
// fresh count scans at every node, so results are an independent check on
// the recursive engine. Cost is superexponential in the table dimension and
// guarded by a configuration budget.

#include <cstddef>
#include <utility>
#include <vector>

#include "coopt/coopt.hpp"
#include "coopt/opt.hpp"
#include "coopt/space.hpp"

namespace coopt {

struct OracleLimits {
  std::size_t max_configs = 10'000'000;
};

struct OracleConfig {
  double log_weight;  // prior log probability of the configuration
  double log_lik;     // data log likelihood given the configuration
  bool root_coupled;  // whether the root carries a coupling (not a split)
};

std::size_t count_oracle_opt_configs(const SampleSpace& s, const OptParams& params,
                                     std::size_t cap);
std::size_t count_oracle_coopt_configs(const SampleSpace& s, const CooptParams& params,
                                       std::size_t cap);

// All stop / split configurations of a single optional Polya tree with a
// uniform base over a binary table, as (log_weight, log_lik) pairs.
std::vector<std::pair<double, double>> oracle_opt_configs(const Dataset& data,
                                                          const OptParams& params,
                                                          const OracleLimits& limits = {});

std::vector<OracleConfig> oracle_coopt_configs(const Dataset& s1, const Dataset& s2,
                                               const CooptParams& params,
                                               const OracleLimits& limits = {});

double oracle_opt_log_marginal(const Dataset& data, const OptParams& params,
                               const OracleLimits& limits = {});
double oracle_coopt_log_marginal(const Dataset& s1, const Dataset& s2,
                                 const CooptParams& params, const OracleLimits& limits = {});
// Posterior coupling probability at the root: the posterior weight mass of
// configurations whose root is coupled.
double oracle_coupling_statistic(const Dataset& s1, const Dataset& s2,
                                 const CooptParams& params, const OracleLimits& limits = {});

}  // namespace coopt
