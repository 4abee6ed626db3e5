#pragma once
// Coupling trees over the fitted posterior: the maximum a posteriori tree
// that localizes where two samples differ, exact posterior draws of coupling
// trees with random measure masses, and posterior samples of distributional
// distances computed from those draws.
//
// A coupling tree recursively records, per node, whether the two underlying
// distributions are coupled (identical from that node down) or split along a
// coordinate with separate mass assignments. Once a node couples, both
// distributions place the same conditional mass below it, so any mass-based
// distance between the two random measures is a finite sum over the tree's
// coupled leaves.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "coopt/coopt.hpp"
#include "coopt/opt.hpp"
#include "coopt/random.hpp"
#include "coopt/space.hpp"

namespace coopt {

struct CouplingTreeNode {
  Node node;
  bool coupled = true;   // leaf: the two measures agree below this node
  int split_dim = -1;    // 0-based coordinate when not coupled
  int child_low = -1;    // indices into CouplingTree::nodes()
  int child_high = -1;
  double q1 = 1.0, q2 = 1.0;  // measure masses of the node (root mass is one)
  double gamma_post = 1.0;
  std::uint32_t n1 = 0, n2 = 0;
};

class CouplingTree {
 public:
  CouplingTree(std::vector<CouplingTreeNode> nodes, bool has_masses);

  const std::vector<CouplingTreeNode>& nodes() const { return nodes_; }
  const CouplingTreeNode& root() const { return nodes_.front(); }
  bool has_masses() const { return has_masses_; }
  std::vector<int> leaf_indices() const;

  nlohmann::json to_json(const SampleSpace& s) const;
  std::string render_text(const SampleSpace& s) const;

 private:
  std::vector<CouplingTreeNode> nodes_;
  bool has_masses_;
};

// Greedy maximum a posteriori coupling tree: at each node keep the coupled
// state if its posterior weight beats every split's, otherwise take the best
// split and recurse. Ties prefer coupling, then the lowest coordinate.
// Forced-terminal nodes are coupled leaves. Masses are not populated.
CouplingTree hmap_tree(const PosteriorTable& post);

// One exact draw of a coupling tree with measure masses from the posterior.
// Each node's decisions come from a substream forked on the node's canonical
// key, so a draw is a pure function of (posterior, stream) regardless of
// traversal order.
CouplingTree sample_posterior_tree(const PosteriorTable& post, const RandomStream& rng);

enum class DistanceMetric { kL1, kHellingerSq };

// The distance between the two random measures of a mass-bearing coupling
// tree: a sum of |q1 - q2| or (sqrt(q1) - sqrt(q2))^2 over coupled leaves.
double tree_distance(const CouplingTree& tree, DistanceMetric metric);

// Posterior sample of distances between the two latent distributions; draw k
// uses the substream forked on k.
std::vector<double> distance_samples(const PosteriorTable& post, DistanceMetric metric,
                                     int n_draws, const RandomStream& rng);

// One draw from a single optional Polya tree prior (no data), returned as
// atom masses. Stopped mass spreads over the atoms below a node
// proportionally to the base measure. Requires a space whose partition
// bottoms out, so effectively small tables or shallow depth bounds.
std::unordered_map<Node, double, NodeHash> sample_prior_measure(const SampleSpace& s,
                                                                const OptParams& params,
                                                                const BaseMeasure& base,
                                                                const RandomStream& rng);

}  // namespace coopt
