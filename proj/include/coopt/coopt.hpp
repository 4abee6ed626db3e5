#pragma once
// Coupled pair of optional Polya trees for two-sample inference.
//
// The generative prior walks the recursive partition of the shared space.
// Each node carries a coupling variable: with probability gamma0 the node is
// coupled and both samples follow one shared optional Polya tree (the base
// tree) from that node down; otherwise a coordinate is split and the two
// samples receive independent Dirichlet assignment weights. The joint
// marginal likelihood of two samples in a node is
//
//   P(A) = gamma0 * P0(A)
//        + (1 - gamma0) * sum_j lambda_j * R1_j * R2_j * P(A_j0) * P(A_j1)
//
// where P0 is the shared-tree marginal of the pooled data and R*_j are the
// per-sample Dirichlet count ratios of split j. The posterior is conjugate:
// it has the same form with per-node updated weights, all recoverable from
// the memoized table of (P, P0) values.
//
// gamma_post at the root is the posterior probability that the two samples
// are identically distributed from the root down; it is the test statistic.

#include <array>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "coopt/opt.hpp"
#include "coopt/space.hpp"

namespace coopt {

struct CooptParams {
  double gamma0 = 0.5;       // per-node prior coupling probability
  double rho0 = 0.5;         // stopping probability of the shared base tree
  double alpha1 = 0.5;       // per-child pseudo-count, sample 1 assignments
  double alpha2 = 0.5;       // per-child pseudo-count, sample 2 assignments
  double alpha_base = 0.5;   // per-child pseudo-count, base tree assignments
  double cutoff = 1e-3;      // force coupling and stopping at this relative measure
  int max_depth = 0;         // per-coordinate split bound; 0 derives it from cutoff
  // Optional per-node split weights (uncoupled and base tree); empty = uniform.
  std::function<std::vector<double>(const Node&)> selector;
  std::function<std::vector<double>(const Node&)> base_selector;
  std::size_t max_nodes = 20'000'000;
  int threads = 1;

  void validate() const;
  int effective_max_depth() const;
  bool symmetric_defaults() const;
  // The base tree viewed as a single-sample prior over the pooled data.
  OptParams pooled_opt_params() const;
};

struct PosteriorEntry {
  std::uint32_t n1 = 0, n2 = 0;
  double log_p = 0.0;   // joint two-sample marginal of the node's data
  double log_p0 = 0.0;  // shared-tree marginal of the pooled data
  NodeKind kind = NodeKind::kEmpty;
};

struct CooptNodePosterior {
  double log_p = 0.0, log_p0 = 0.0;
  double gamma_post = 1.0;
  double rho_post = 1.0;  // base-tree stop probability given coupling
  std::vector<int> split_dims;
  std::vector<double> lambda_post;       // uncoupled split weights
  std::vector<double> base_lambda_post;  // base-tree split weights
  std::vector<std::array<double, 2>> alpha1_post;
  std::vector<std::array<double, 2>> alpha2_post;
  std::vector<std::array<double, 2>> alpha_base_post;
};

// Exact joint posterior over all partition nodes touched by the data: every
// node with a positive pooled count plus both children of every considered
// split. Entries suffice to reconstruct any node-level posterior quantity.
class PosteriorTable {
 public:
  PosteriorTable(Dataset sample1, Dataset sample2, CooptParams params);
  PosteriorTable(Dataset sample1, Dataset sample2, CooptParams params, const Node& root);

  const SampleSpace& space() const { return sample1_.space(); }
  const CooptParams& params() const { return params_; }
  const PartitionRule& rule() const { return rule_; }
  const Node& root() const { return root_; }
  const Dataset& sample1() const { return sample1_; }
  const Dataset& sample2() const { return sample2_; }

  double log_marginal() const;
  double log_base_marginal() const;
  // gamma_post at the root: posterior probability of a shared distribution.
  double coupling_statistic() const;

  bool has(const Node& n) const { return entries_.count(n) > 0; }
  const PosteriorEntry& entry(const Node& n) const;
  // Synthesizes the entry of an unvisited (necessarily unobserved) node.
  PosteriorEntry entry_or_prior(const Node& n) const;

  bool forced_terminal(const Node& n) const;
  double gamma_post(const Node& n) const;
  double rho_post(const Node& n) const;
  std::vector<double> lambda_post(const Node& n) const;
  std::vector<double> base_lambda_post(const Node& n) const;
  std::array<double, 2> alpha1_post(const Node& n, int dim) const;
  std::array<double, 2> alpha2_post(const Node& n, int dim) const;
  std::array<double, 2> alpha_base_post(const Node& n, int dim) const;
  CooptNodePosterior node_posterior(const Node& n) const;

  std::size_t size() const { return entries_.size(); }
  // Total evaluations including duplicated work across worker threads.
  std::size_t nodes_evaluated() const { return nodes_evaluated_; }
  const std::unordered_map<Node, PosteriorEntry, NodeHash>& entries() const { return entries_; }

  nlohmann::json to_json(bool include_entries = true) const;

 private:
  void build();
  std::vector<double> split_weights(const Node& n, const std::vector<int>& dims, bool base) const;
  std::pair<int, int> child_counts(const Node& n, int dim, const Dataset& data) const;

  Dataset sample1_, sample2_;
  CooptParams params_;
  PartitionRule rule_;
  Node root_;
  std::unordered_map<Node, PosteriorEntry, NodeHash> entries_;
  std::size_t nodes_evaluated_ = 0;
};

PosteriorTable fit(Dataset sample1, Dataset sample2, const CooptParams& params);

double coopt_log_marginal(const Dataset& s1, const Dataset& s2, const CooptParams& params);
CooptNodePosterior coopt_posterior(const Node& n, const Dataset& s1, const Dataset& s2,
                                   const CooptParams& params);
// gamma_post at the root; small values indicate the samples differ.
double coupling_statistic(const Dataset& s1, const Dataset& s2, const CooptParams& params);

nlohmann::json space_to_json(const SampleSpace& s);
SampleSpace space_from_json(const nlohmann::json& j);

}  // namespace coopt
