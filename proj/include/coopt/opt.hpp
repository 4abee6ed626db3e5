#pragma once
// Optional Polya tree prior over a recursively partitioned sample space:
// exact marginal likelihood and full conjugate posterior by memoized
// recursion over canonical partition nodes.
//
// At each node the prior either stops (probability rho0) and spreads the
// node's mass per the base measure, or picks a splittable coordinate and
// passes mass to the two halves through a Beta-Dirichlet weight. The
// marginal likelihood of the data in a node therefore satisfies
//
//   P(A) = rho0 * q0(x | A)
//        + (1 - rho0) * sum_j lambda_j * D(n_j + a_j) / D(a_j) * P(A_j0) * P(A_j1)
//
// with q0 the stopped likelihood under the base measure, D the Dirichlet
// normalizer, n_j the child counts of split j, and a_j its pseudo-counts.
// The posterior keeps the same form with updated per-node weights.

#include <array>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "coopt/space.hpp"

namespace coopt {

// Base distribution the prior centers on. Either uniform on the space or a
// piecewise-constant density on the regular dyadic grid of a rectangle.
class BaseMeasure {
 public:
  static BaseMeasure uniform();
  // cell_masses holds one weight per grid cell at the given per-coordinate
  // depth, row-major over coordinates; weights are normalized internally.
  static BaseMeasure dyadic_grid(int dims, int depth, std::vector<double> cell_masses);

  bool is_uniform() const { return uniform_; }
  // log density at x with respect to the space's reference measure.
  double log_density(const SampleSpace& s, std::span<const double> x) const;
  // log Q0(A), the base probability mass of the node.
  double log_mass(const SampleSpace& s, const Node& n) const;

 private:
  BaseMeasure() = default;
  void check_space(const SampleSpace& s) const;

  bool uniform_ = true;
  int dims_ = 0;
  int depth_ = 0;
  std::vector<double> mass_;
};

struct OptParams {
  double rho0 = 0.5;           // per-node stopping probability, in [0, 1]
  double alpha_total = 1.0;    // pseudo-count total per split; each child gets half
  bool center_on_base = false; // split pseudo-counts proportional to base child masses
  double cutoff = 1e-3;        // force-stop nodes with relative measure <= cutoff
  int max_depth = 0;           // per-coordinate split bound; 0 derives it from cutoff
  // Optional per-node split weights over split_dims order; empty means uniform.
  std::function<std::vector<double>(const Node&)> selector;
  std::size_t max_nodes = 20'000'000;

  void validate() const;
  int effective_max_depth() const;
  // True when the closed-form value 1 / measure(A) applies to single-point
  // nodes: uniform split weights and pseudo-counts 1/2 per child.
  bool symmetric_defaults() const;
};

enum class NodeKind : std::uint8_t {
  kInterior,        // evaluated through the stop-or-split mixture
  kEmpty,           // no observations; likelihood one
  kSingleObs,       // one observation under symmetric defaults; closed form
  kForcedTerminal,  // atom or measure at the cutoff; stopping forced
};

struct OptEntry {
  std::uint32_t n = 0;
  double log_p = 0.0;     // log marginal likelihood of the node's data
  double log_stop = 0.0;  // log stopped likelihood q0(x | A)
  NodeKind kind = NodeKind::kEmpty;
};

struct OptNodePosterior {
  double log_p = 0.0;
  double rho_post = 1.0;
  std::vector<int> split_dims;                     // ascending coordinates
  std::vector<double> lambda_post;                 // aligned with split_dims
  std::vector<std::array<double, 2>> alpha_post;   // aligned with split_dims
};

// log [ D(n + a) / D(a) ] for one two-cell split.
double log_split_ratio(int n_left, int n_right, double a_left, double a_right);

// Smallest total depth at which a node's relative measure falls to the
// cutoff; nodes at or beyond it are forced terminal.
int forced_stop_depth(double cutoff);

// Pseudo-counts for one split, proportional to the base masses of the two
// children and scaled to the given total.
std::array<double, 2> centered_pseudocounts(const SampleSpace& s, const Node& n, int dim,
                                            const BaseMeasure& base, double total);

// Exact posterior of an optional Polya tree given one sample, rooted at any
// node (default: the whole space). Holds one entry per evaluated node; every
// node with observations is present along with both children of each
// considered split.
class OptFit {
 public:
  OptFit(Dataset data, OptParams params, BaseMeasure base);
  OptFit(Dataset data, OptParams params, BaseMeasure base, const Node& root);

  const SampleSpace& space() const { return data_.space(); }
  const OptParams& params() const { return params_; }
  const PartitionRule& rule() const { return rule_; }
  const Node& root() const { return root_; }
  const Dataset& data() const { return data_; }

  double log_marginal() const;       // log P at the fit's root
  double gof_statistic() const;      // posterior stopping probability at the root

  bool has(const Node& n) const { return entries_.count(n) > 0; }
  const OptEntry& entry(const Node& n) const;
  // Synthesizes the entry of an unvisited (necessarily empty) node.
  OptEntry entry_or_prior(const Node& n) const;

  double rho_post(const Node& n) const;
  OptNodePosterior node_posterior(const Node& n) const;

  std::size_t size() const { return entries_.size(); }
  const std::unordered_map<Node, OptEntry, NodeHash>& entries() const { return entries_; }

 private:
  void init();
  const OptEntry& eval(const Node& n, const std::vector<std::uint32_t>& idx);
  double stopped_loglik(const Node& n, const std::vector<std::uint32_t>& idx) const;
  std::vector<double> split_weights(const Node& n, const std::vector<int>& dims) const;
  std::array<double, 2> split_alpha(const Node& n, int dim) const;
  bool forced(const Node& n) const;
  std::pair<int, int> child_counts(const Node& n, int dim) const;

  Dataset data_;
  OptParams params_;
  BaseMeasure base_;
  PartitionRule rule_;
  Node root_;
  std::unordered_map<Node, OptEntry, NodeHash> entries_;
};

double opt_log_marginal(const Dataset& data, const OptParams& params, const BaseMeasure& base);
OptNodePosterior opt_posterior(const Node& n, const Dataset& data, const OptParams& params,
                               const BaseMeasure& base);
// Posterior probability that the process stops at the root: small values
// indicate lack of fit to the base measure.
double gof_statistic(const Dataset& data, const OptParams& params, const BaseMeasure& base);

}  // namespace coopt
