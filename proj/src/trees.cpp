#include "coopt/trees.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "coopt/errors.hpp"
#include "coopt/numerics.hpp"

namespace coopt {

CouplingTree::CouplingTree(std::vector<CouplingTreeNode> nodes, bool has_masses)
    : nodes_(std::move(nodes)), has_masses_(has_masses) {
  if (nodes_.empty()) throw std::invalid_argument("CouplingTree: empty node list");
}

std::vector<int> CouplingTree::leaf_indices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].coupled) out.push_back(static_cast<int>(i));
  return out;
}

namespace {

nlohmann::json node_to_json(const CouplingTree& t, const SampleSpace& s, int idx) {
  const CouplingTreeNode& n = t.nodes()[static_cast<std::size_t>(idx)];
  nlohmann::json j;
  j["key"] = n.node.key();
  j["region"] = describe(s, n.node);
  j["coupled"] = n.coupled;
  j["gamma_post"] = n.gamma_post;
  j["n1"] = n.n1;
  j["n2"] = n.n2;
  if (t.has_masses()) {
    j["q1"] = n.q1;
    j["q2"] = n.q2;
  }
  if (!n.coupled) {
    j["split_dim"] = n.split_dim + 1;
    j["low"] = node_to_json(t, s, n.child_low);
    j["high"] = node_to_json(t, s, n.child_high);
  }
  return j;
}

void render_node(const CouplingTree& t, const SampleSpace& s, int idx, int indent,
                 std::ostringstream& os) {
  const CouplingTreeNode& n = t.nodes()[static_cast<std::size_t>(idx)];
  for (int i = 0; i < indent; ++i) os << "  ";
  os << describe(s, n.node);
  os << (n.coupled ? " | coupled" : " | split x" + std::to_string(n.split_dim + 1));
  os << " | gamma_post=" << n.gamma_post;
  os << " | n=(" << n.n1 << "," << n.n2 << ")";
  if (t.has_masses()) os << " | q=(" << n.q1 << "," << n.q2 << ")";
  os << '\n';
  if (!n.coupled) {
    render_node(t, s, n.child_low, indent + 1, os);
    render_node(t, s, n.child_high, indent + 1, os);
  }
}

}  // namespace

nlohmann::json CouplingTree::to_json(const SampleSpace& s) const {
  nlohmann::json j;
  j["has_masses"] = has_masses_;
  j["nodes"] = static_cast<int>(nodes_.size());
  j["root"] = node_to_json(*this, s, 0);
  return j;
}

std::string CouplingTree::render_text(const SampleSpace& s) const {
  std::ostringstream os;
  render_node(*this, s, 0, 0, os);
  return os.str();
}

namespace {

CouplingTreeNode make_record(const PosteriorTable& post, const Node& node, double q1, double q2) {
  const PosteriorEntry e = post.entry_or_prior(node);
  return CouplingTreeNode{node, true, -1, -1, -1, q1, q2, post.gamma_post(node), e.n1, e.n2};
}

int build_hmap(const PosteriorTable& post, const Node& node, std::vector<CouplingTreeNode>& out) {
  const int idx = static_cast<int>(out.size());
  out.push_back(make_record(post, node, 1.0, 1.0));
  if (post.forced_terminal(node)) return idx;

  const double g = out[static_cast<std::size_t>(idx)].gamma_post;
  const std::vector<int> dims = post.rule().split_dims(node);
  const std::vector<double> lam = post.lambda_post(node);
  double best = g;  // coupled weight; ties keep the coupled state
  int best_dim = -1;
  std::size_t best_j = 0;
  for (std::size_t j = 0; j < dims.size(); ++j) {
    const double w = (1.0 - g) * lam[j];
    if (w > best) {
      best = w;
      best_dim = dims[j];
      best_j = j;
    }
  }
  (void)best_j;
  if (best_dim < 0) return idx;

  out[static_cast<std::size_t>(idx)].coupled = false;
  out[static_cast<std::size_t>(idx)].split_dim = best_dim;
  const auto [cl, cr] = post.rule().children(node, best_dim);
  const int low = build_hmap(post, cl, out);
  out[static_cast<std::size_t>(idx)].child_low = low;
  const int high = build_hmap(post, cr, out);
  out[static_cast<std::size_t>(idx)].child_high = high;
  return idx;
}

int build_sampled(const PosteriorTable& post, const Node& node, double q1, double q2,
                  const RandomStream& rng, std::vector<CouplingTreeNode>& out) {
  const int idx = static_cast<int>(out.size());
  out.push_back(make_record(post, node, q1, q2));
  if (post.forced_terminal(node)) return idx;

  RandomStream sub = rng.fork(node.hash64());
  const double g = out[static_cast<std::size_t>(idx)].gamma_post;
  if (sample_bernoulli(g, sub) == 1) return idx;

  const std::vector<int> dims = post.rule().split_dims(node);
  const std::vector<double> lam = post.lambda_post(node);
  const int d = dims[sample_categorical(lam, sub)];
  const std::array<double, 2> a1 = post.alpha1_post(node, d);
  const std::array<double, 2> a2 = post.alpha2_post(node, d);
  const std::vector<double> th1 = sample_dirichlet(a1, sub);
  const std::vector<double> th2 = sample_dirichlet(a2, sub);

  out[static_cast<std::size_t>(idx)].coupled = false;
  out[static_cast<std::size_t>(idx)].split_dim = d;
  const auto [cl, cr] = post.rule().children(node, d);
  const int low = build_sampled(post, cl, q1 * th1[0], q2 * th2[0], rng, out);
  out[static_cast<std::size_t>(idx)].child_low = low;
  const int high = build_sampled(post, cr, q1 * th1[1], q2 * th2[1], rng, out);
  out[static_cast<std::size_t>(idx)].child_high = high;
  return idx;
}

}  // namespace

CouplingTree hmap_tree(const PosteriorTable& post) {
  std::vector<CouplingTreeNode> nodes;
  build_hmap(post, post.root(), nodes);
  return CouplingTree(std::move(nodes), false);
}

CouplingTree sample_posterior_tree(const PosteriorTable& post, const RandomStream& rng) {
  std::vector<CouplingTreeNode> nodes;
  build_sampled(post, post.root(), 1.0, 1.0, rng, nodes);
  return CouplingTree(std::move(nodes), true);
}

double tree_distance(const CouplingTree& tree, DistanceMetric metric) {
  if (!tree.has_masses())
    throw std::invalid_argument("tree_distance: tree carries no measure masses");
  double acc = 0.0;
  for (const CouplingTreeNode& n : tree.nodes()) {
    if (!n.coupled) continue;
    if (metric == DistanceMetric::kL1) {
      acc += std::abs(n.q1 - n.q2);
    } else {
      const double d = std::sqrt(n.q1) - std::sqrt(n.q2);
      acc += d * d;
    }
  }
  return acc;
}

std::vector<double> distance_samples(const PosteriorTable& post, DistanceMetric metric,
                                     int n_draws, const RandomStream& rng) {
  if (n_draws < 1) throw input_error("distance_samples: n_draws must be >= 1");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_draws));
  for (int k = 0; k < n_draws; ++k) {
    const CouplingTree tree =
        sample_posterior_tree(post, rng.fork(static_cast<std::uint64_t>(k)));
    out.push_back(tree_distance(tree, metric));
  }
  return out;
}

namespace {

// Spread `mass` over the atoms below `node` proportionally to the base
// measure's conditional masses.
void distribute(const SampleSpace& s, const PartitionRule& rule, const BaseMeasure& base,
                const Node& node, double mass,
                std::unordered_map<Node, double, NodeHash>& out) {
  if (rule.is_atom(node)) {
    out[node] += mass;
    return;
  }
  const int d = rule.split_dims(node).front();
  const auto [cl, cr] = rule.children(node, d);
  const double ll = base.log_mass(s, cl);
  const double lr = base.log_mass(s, cr);
  double wl;
  if (ll == kNegInf && lr == kNegInf)
    wl = 0.5;
  else if (ll == kNegInf)
    wl = 0.0;
  else if (lr == kNegInf)
    wl = 1.0;
  else
    wl = 1.0 / (1.0 + std::exp(lr - ll));
  if (wl > 0.0) distribute(s, rule, base, cl, mass * wl, out);
  if (wl < 1.0) distribute(s, rule, base, cr, mass * (1.0 - wl), out);
}

void draw_prior(const SampleSpace& s, const PartitionRule& rule, const OptParams& params,
                const BaseMeasure& base, const RandomStream& rng, const Node& node, double mass,
                int force_depth, std::unordered_map<Node, double, NodeHash>& out) {
  if (rule.is_atom(node) || node.total_depth() >= force_depth) {
    distribute(s, rule, base, node, mass, out);
    return;
  }
  RandomStream sub = rng.fork(node.hash64());
  if (sample_bernoulli(params.rho0, sub) == 1) {
    distribute(s, rule, base, node, mass, out);
    return;
  }
  const std::vector<int> dims = rule.split_dims(node);
  std::vector<double> lam;
  if (params.selector) {
    lam = params.selector(node);
    double total = 0.0;
    for (double w : lam) total += w;
    for (double& w : lam) w /= total;
  } else {
    lam.assign(dims.size(), 1.0 / static_cast<double>(dims.size()));
  }
  const int d = dims[sample_categorical(lam, sub)];
  std::array<double, 2> alpha;
  if (params.center_on_base && !base.is_uniform())
    alpha = centered_pseudocounts(s, node, d, base, params.alpha_total);
  else
    alpha = {0.5 * params.alpha_total, 0.5 * params.alpha_total};
  const std::vector<double> th = sample_dirichlet(alpha, sub);
  const auto [cl, cr] = rule.children(node, d);
  draw_prior(s, rule, params, base, rng, cl, mass * th[0], force_depth, out);
  draw_prior(s, rule, params, base, rng, cr, mass * th[1], force_depth, out);
}

}  // namespace

std::unordered_map<Node, double, NodeHash> sample_prior_measure(const SampleSpace& s,
                                                                const OptParams& params,
                                                                const BaseMeasure& base,
                                                                const RandomStream& rng) {
  params.validate();
  const PartitionRule rule(s, params.effective_max_depth());
  std::unordered_map<Node, double, NodeHash> out;
  draw_prior(s, rule, params, base, rng, Node::root(s), 1.0, forced_stop_depth(params.cutoff),
             out);
  return out;
}

}  // namespace coopt
