#include "coopt/coopt.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <future>
#include <stdexcept>

#include "coopt/errors.hpp"
#include "coopt/numerics.hpp"

namespace coopt {

void CooptParams::validate() const {
  if (!(gamma0 >= 0.0 && gamma0 <= 1.0)) throw input_error("gamma0 must be in [0, 1]");
  if (!(rho0 >= 0.0 && rho0 <= 1.0)) throw input_error("rho0 must be in [0, 1]");
  if (!(alpha1 > 0.0) || !(alpha2 > 0.0) || !(alpha_base > 0.0))
    throw input_error("pseudo-counts must be > 0");
  if (!(cutoff > 0.0 && cutoff <= 1.0)) throw input_error("cutoff must be in (0, 1]");
  if (max_depth != 0 && (max_depth < 1 || max_depth > 30))
    throw input_error("max_depth must be 0 (derived) or in [1, 30]");
  if (max_nodes == 0) throw input_error("max_nodes must be positive");
  if (threads < 1 || threads > 256) throw input_error("threads must be in [1, 256]");
}

OptParams CooptParams::pooled_opt_params() const {
  OptParams p;
  p.rho0 = rho0;
  p.alpha_total = 2.0 * alpha_base;
  p.center_on_base = false;
  p.cutoff = cutoff;
  p.max_depth = max_depth;
  p.selector = base_selector;
  p.max_nodes = max_nodes;
  return p;
}

int CooptParams::effective_max_depth() const { return pooled_opt_params().effective_max_depth(); }

bool CooptParams::symmetric_defaults() const {
  return alpha1 == 0.5 && alpha2 == 0.5 && alpha_base == 0.5 && !selector && !base_selector;
}

namespace {

CooptParams validated(CooptParams p) {
  p.validate();
  return p;
}

using IndexVec = std::vector<std::uint32_t>;
using EntryMap = std::unordered_map<Node, PosteriorEntry, NodeHash>;

std::vector<double> node_split_weights(
    const std::function<std::vector<double>(const Node&)>& selector, const Node& n,
    std::size_t m) {
  if (!selector) return std::vector<double>(m, 1.0 / static_cast<double>(m));
  std::vector<double> w = selector(n);
  if (w.size() != m) throw input_error("selector returned wrong number of split weights");
  double total = 0.0;
  for (double wi : w) {
    if (!(wi >= 0.0)) throw input_error("selector weights must be >= 0");
    total += wi;
  }
  if (!(total > 0.0)) throw input_error("selector weights must not all vanish");
  for (double& wi : w) wi /= total;
  return w;
}

// Memoized joint recursion. Computes both the coupled-pair marginal log_p and
// the shared-tree pooled marginal log_p0 in one pass so the two trees share
// traversal and cache.
struct Evaluator {
  const Dataset& d1;
  const Dataset& d2;
  const CooptParams& params;
  const PartitionRule& rule;
  int force_depth;
  EntryMap& cache;
  std::size_t evaluated = 0;

  const PosteriorEntry& eval(const Node& n, const IndexVec& i1, const IndexVec& i2) {
    if (auto it = cache.find(n); it != cache.end()) return it->second;
    ++evaluated;
    const SampleSpace& space = d1.space();
    const auto n1 = static_cast<std::uint32_t>(i1.size());
    const auto n2 = static_cast<std::uint32_t>(i2.size());
    const double nn = static_cast<double>(i1.size() + i2.size());

    PosteriorEntry e;
    if (rule.is_atom(n) || n.total_depth() >= force_depth) {
      const double u = -nn * log_measure(space, n);
      e = PosteriorEntry{n1, n2, u, u, NodeKind::kForcedTerminal};
    } else if (i1.empty() && i2.empty()) {
      e = PosteriorEntry{0, 0, 0.0, 0.0, NodeKind::kEmpty};
    } else if (i1.size() + i2.size() == 1 && params.symmetric_defaults()) {
      const double v = -log_measure(space, n);
      e = PosteriorEntry{n1, n2, v, v, NodeKind::kSingleObs};
    } else {
      const std::vector<int> dims = rule.split_dims(n);
      const std::size_t m = dims.size();
      const std::vector<double> lam = node_split_weights(params.selector, n, m);
      const std::vector<double> lam_base = node_split_weights(params.base_selector, n, m);
      const double stop = -nn * log_measure(space, n);
      const double log_cont_rho = std::log1p(-params.rho0);
      const double log_cont_gamma = std::log1p(-params.gamma0);
      std::vector<double> p0_terms, p_terms;
      p0_terms.reserve(m + 1);
      p_terms.reserve(m + 1);
      p0_terms.push_back(std::log(params.rho0) + stop);
      p_terms.push_back(0.0);  // coupled term, filled once log_p0 is known
      for (std::size_t j = 0; j < m; ++j) {
        const int d = dims[j];
        IndexVec l1, r1, l2, r2;
        for (std::uint32_t i : i1) {
          if (child_side(space, n, d, d1.at(static_cast<int>(i), d)) == 0)
            l1.push_back(i);
          else
            r1.push_back(i);
        }
        for (std::uint32_t i : i2) {
          if (child_side(space, n, d, d2.at(static_cast<int>(i), d)) == 0)
            l2.push_back(i);
          else
            r2.push_back(i);
        }
        const auto [cl, cr] = rule.children(n, d);
        const PosteriorEntry& el = eval(cl, l1, l2);
        const PosteriorEntry& er = eval(cr, r1, r2);
        const double dm_base =
            log_split_ratio(static_cast<int>(l1.size() + l2.size()),
                            static_cast<int>(r1.size() + r2.size()), params.alpha_base,
                            params.alpha_base);
        p0_terms.push_back(log_cont_rho + std::log(lam_base[j]) + dm_base + el.log_p0 +
                           er.log_p0);
        const double dm1 = log_split_ratio(static_cast<int>(l1.size()),
                                           static_cast<int>(r1.size()), params.alpha1,
                                           params.alpha1);
        const double dm2 = log_split_ratio(static_cast<int>(l2.size()),
                                           static_cast<int>(r2.size()), params.alpha2,
                                           params.alpha2);
        // (dm1 + dm2) binds first so swapping the sample labels cannot change
        // the rounding of the term.
        p_terms.push_back(log_cont_gamma + std::log(lam[j]) + (dm1 + dm2) + el.log_p +
                          er.log_p);
      }
      const double log_p0 = log_sum_exp(p0_terms);
      p_terms[0] = std::log(params.gamma0) + log_p0;
      const double log_p = log_sum_exp(p_terms);
      e = PosteriorEntry{n1, n2, log_p, log_p0, NodeKind::kInterior};
    }

    auto [it, inserted] = cache.emplace(n, e);
    if (cache.size() > params.max_nodes)
      throw resource_limit_error("fit: node cache exceeded max_nodes");
    return it->second;
  }
};

}  // namespace

PosteriorTable::PosteriorTable(Dataset sample1, Dataset sample2, CooptParams params)
    : sample1_(std::move(sample1)),
      sample2_(std::move(sample2)),
      params_(validated(params)),
      rule_(sample1_.space(), params_.effective_max_depth()),
      root_(Node::root(sample1_.space())) {
  build();
}

PosteriorTable::PosteriorTable(Dataset sample1, Dataset sample2, CooptParams params,
                               const Node& root)
    : sample1_(std::move(sample1)),
      sample2_(std::move(sample2)),
      params_(validated(params)),
      rule_(sample1_.space(), params_.effective_max_depth()),
      root_(root) {
  build();
}

void PosteriorTable::build() {
  if (!(sample1_.space() == sample2_.space()))
    throw input_error("fit: the two samples must share one sample space");
  if (root_.dims() != space().dims())
    throw std::invalid_argument("fit: root node dimension mismatch");

  IndexVec i1, i2;
  for (int i = 0; i < sample1_.size(); ++i)
    if (contains(space(), root_, sample1_.row(i))) i1.push_back(static_cast<std::uint32_t>(i));
  for (int i = 0; i < sample2_.size(); ++i)
    if (contains(space(), root_, sample2_.row(i))) i2.push_back(static_cast<std::uint32_t>(i));

  const int force_depth = forced_stop_depth(params_.cutoff);
  const bool root_terminal = rule_.is_atom(root_) || root_.total_depth() >= force_depth ||
                             i1.size() + i2.size() == 0 ||
                             (i1.size() + i2.size() == 1 && params_.symmetric_defaults());

  if (params_.threads > 1 && !root_terminal) {
    // Evaluate each root-level child subtree in its own task with a private
    // cache, then merge in a fixed order. Shared descendants are computed
    // more than once, but every computation of a node yields bit-identical
    // values, so the merged table does not depend on scheduling.
    struct Task {
      Node child;
      IndexVec i1, i2;
      std::future<std::pair<EntryMap, std::size_t>> result;
    };
    std::vector<Task> tasks;
    for (int d : rule_.split_dims(root_)) {
      IndexVec l1, r1, l2, r2;
      for (std::uint32_t i : i1) {
        if (child_side(space(), root_, d, sample1_.at(static_cast<int>(i), d)) == 0)
          l1.push_back(i);
        else
          r1.push_back(i);
      }
      for (std::uint32_t i : i2) {
        if (child_side(space(), root_, d, sample2_.at(static_cast<int>(i), d)) == 0)
          l2.push_back(i);
        else
          r2.push_back(i);
      }
      const auto [cl, cr] = rule_.children(root_, d);
      tasks.push_back(Task{cl, std::move(l1), std::move(l2), {}});
      tasks.push_back(Task{cr, std::move(r1), std::move(r2), {}});
    }
    for (Task& t : tasks) {
      t.result = std::async(std::launch::async, [this, &t]() {
        EntryMap local;
        Evaluator ev{sample1_, sample2_, params_, rule_, forced_stop_depth(params_.cutoff),
                     local};
        ev.eval(t.child, t.i1, t.i2);
        return std::make_pair(std::move(local), ev.evaluated);
      });
    }
    for (Task& t : tasks) {
      auto [local, evaluated] = t.result.get();
      nodes_evaluated_ += evaluated;
      for (auto& [node, entry] : local) {
        auto [it, inserted] = entries_.emplace(node, entry);
        assert(inserted ||
               (it->second.log_p == entry.log_p && it->second.log_p0 == entry.log_p0));
        (void)it;
        (void)inserted;
      }
      if (entries_.size() > params_.max_nodes)
        throw resource_limit_error("fit: node cache exceeded max_nodes");
    }
  }

  Evaluator ev{sample1_, sample2_, params_, rule_, force_depth, entries_};
  ev.eval(root_, i1, i2);
  nodes_evaluated_ += ev.evaluated;
}

const PosteriorEntry& PosteriorTable::entry(const Node& n) const {
  auto it = entries_.find(n);
  if (it == entries_.end()) throw std::out_of_range("PosteriorTable::entry: node not evaluated");
  return it->second;
}

PosteriorEntry PosteriorTable::entry_or_prior(const Node& n) const {
  if (auto it = entries_.find(n); it != entries_.end()) return it->second;
  PosteriorEntry e;
  e.kind = forced_terminal(n) ? NodeKind::kForcedTerminal : NodeKind::kEmpty;
  return e;
}

bool PosteriorTable::forced_terminal(const Node& n) const {
  return rule_.is_atom(n) || n.total_depth() >= forced_stop_depth(params_.cutoff);
}

double PosteriorTable::log_marginal() const { return entry(root_).log_p; }

double PosteriorTable::log_base_marginal() const { return entry(root_).log_p0; }

double PosteriorTable::gamma_post(const Node& n) const {
  const PosteriorEntry e = entry_or_prior(n);
  switch (e.kind) {
    case NodeKind::kForcedTerminal:
      return 1.0;
    case NodeKind::kEmpty:
    case NodeKind::kSingleObs:
      return params_.gamma0;
    case NodeKind::kInterior:
      break;
  }
  const double g = std::exp(std::log(params_.gamma0) + e.log_p0 - e.log_p);
  return std::clamp(g, 0.0, 1.0);
}

double PosteriorTable::rho_post(const Node& n) const {
  const PosteriorEntry e = entry_or_prior(n);
  switch (e.kind) {
    case NodeKind::kForcedTerminal:
      return 1.0;
    case NodeKind::kEmpty:
    case NodeKind::kSingleObs:
      return params_.rho0;
    case NodeKind::kInterior:
      break;
  }
  const double nn = static_cast<double>(e.n1) + static_cast<double>(e.n2);
  const double stop = -nn * log_measure(space(), n);
  const double r = std::exp(std::log(params_.rho0) + stop - e.log_p0);
  return std::clamp(r, 0.0, 1.0);
}

std::vector<double> PosteriorTable::split_weights(const Node& n, const std::vector<int>& dims,
                                                  bool base) const {
  return node_split_weights(base ? params_.base_selector : params_.selector, n, dims.size());
}

std::pair<int, int> PosteriorTable::child_counts(const Node& n, int dim,
                                                 const Dataset& data) const {
  const auto [cl, cr] = rule_.children(n, dim);
  const auto il = entries_.find(cl);
  const auto ir = entries_.find(cr);
  if (il != entries_.end() && ir != entries_.end()) {
    if (&data == &sample1_)
      return {static_cast<int>(il->second.n1), static_cast<int>(ir->second.n1)};
    return {static_cast<int>(il->second.n2), static_cast<int>(ir->second.n2)};
  }
  return {data.count(cl), data.count(cr)};
}

std::vector<double> PosteriorTable::lambda_post(const Node& n) const {
  const PosteriorEntry e = entry_or_prior(n);
  const std::vector<int> dims = rule_.split_dims(n);
  std::vector<double> lam = split_weights(n, dims, false);
  if (e.kind != NodeKind::kInterior) return lam;
  std::vector<double> terms(dims.size());
  for (std::size_t j = 0; j < dims.size(); ++j) {
    const int d = dims[j];
    const auto [cl, cr] = rule_.children(n, d);
    const PosteriorEntry& el = entry(cl);
    const PosteriorEntry& er = entry(cr);
    const double dm1 = log_split_ratio(static_cast<int>(el.n1), static_cast<int>(er.n1),
                                       params_.alpha1, params_.alpha1);
    const double dm2 = log_split_ratio(static_cast<int>(el.n2), static_cast<int>(er.n2),
                                       params_.alpha2, params_.alpha2);
    terms[j] = std::log(lam[j]) + (dm1 + dm2) + el.log_p + er.log_p;
  }
  const double norm = log_sum_exp(terms);
  std::vector<double> out(dims.size());
  for (std::size_t j = 0; j < dims.size(); ++j) out[j] = std::exp(terms[j] - norm);
  return out;
}

std::vector<double> PosteriorTable::base_lambda_post(const Node& n) const {
  const PosteriorEntry e = entry_or_prior(n);
  const std::vector<int> dims = rule_.split_dims(n);
  std::vector<double> lam = split_weights(n, dims, true);
  if (e.kind != NodeKind::kInterior) return lam;
  std::vector<double> terms(dims.size());
  for (std::size_t j = 0; j < dims.size(); ++j) {
    const int d = dims[j];
    const auto [cl, cr] = rule_.children(n, d);
    const PosteriorEntry& el = entry(cl);
    const PosteriorEntry& er = entry(cr);
    const double dm_base = log_split_ratio(static_cast<int>(el.n1 + el.n2),
                                           static_cast<int>(er.n1 + er.n2), params_.alpha_base,
                                           params_.alpha_base);
    terms[j] = std::log(lam[j]) + dm_base + el.log_p0 + er.log_p0;
  }
  const double norm = log_sum_exp(terms);
  std::vector<double> out(dims.size());
  for (std::size_t j = 0; j < dims.size(); ++j) out[j] = std::exp(terms[j] - norm);
  return out;
}

std::array<double, 2> PosteriorTable::alpha1_post(const Node& n, int dim) const {
  const auto [nl, nr] = child_counts(n, dim, sample1_);
  return {params_.alpha1 + static_cast<double>(nl), params_.alpha1 + static_cast<double>(nr)};
}

std::array<double, 2> PosteriorTable::alpha2_post(const Node& n, int dim) const {
  const auto [nl, nr] = child_counts(n, dim, sample2_);
  return {params_.alpha2 + static_cast<double>(nl), params_.alpha2 + static_cast<double>(nr)};
}

std::array<double, 2> PosteriorTable::alpha_base_post(const Node& n, int dim) const {
  const auto [nl1, nr1] = child_counts(n, dim, sample1_);
  const auto [nl2, nr2] = child_counts(n, dim, sample2_);
  return {params_.alpha_base + static_cast<double>(nl1 + nl2),
          params_.alpha_base + static_cast<double>(nr1 + nr2)};
}

CooptNodePosterior PosteriorTable::node_posterior(const Node& n) const {
  const PosteriorEntry e = entry_or_prior(n);
  CooptNodePosterior out;
  out.log_p = e.log_p;
  out.log_p0 = e.log_p0;
  out.gamma_post = gamma_post(n);
  out.rho_post = rho_post(n);
  out.split_dims = rule_.split_dims(n);
  out.lambda_post = lambda_post(n);
  out.base_lambda_post = base_lambda_post(n);
  for (int d : out.split_dims) {
    out.alpha1_post.push_back(alpha1_post(n, d));
    out.alpha2_post.push_back(alpha2_post(n, d));
    out.alpha_base_post.push_back(alpha_base_post(n, d));
  }
  return out;
}

double PosteriorTable::coupling_statistic() const { return gamma_post(root_); }

namespace {

const char* kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::kInterior:
      return "interior";
    case NodeKind::kEmpty:
      return "empty";
    case NodeKind::kSingleObs:
      return "single";
    case NodeKind::kForcedTerminal:
      return "forced";
  }
  return "?";
}

}  // namespace

nlohmann::json space_to_json(const SampleSpace& s) {
  nlohmann::json j;
  j["kind"] = s.kind() == SpaceKind::kRectangle ? "rectangle" : "binary_table";
  j["dims"] = s.dims();
  if (s.kind() == SpaceKind::kRectangle) {
    std::vector<double> lo, hi;
    for (int d = 0; d < s.dims(); ++d) {
      lo.push_back(s.lo(d));
      hi.push_back(s.hi(d));
    }
    j["lo"] = lo;
    j["hi"] = hi;
  }
  return j;
}

SampleSpace space_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "binary_table") return SampleSpace::binary_table(j.at("dims").get<int>());
  if (kind != "rectangle") throw input_error("space_from_json: unknown kind");
  return SampleSpace::rectangle(j.at("lo").get<std::vector<double>>(),
                                j.at("hi").get<std::vector<double>>());
}

nlohmann::json PosteriorTable::to_json(bool include_entries) const {
  nlohmann::json j;
  j["space"] = space_to_json(space());
  j["params"] = {{"gamma0", params_.gamma0},
                 {"rho0", params_.rho0},
                 {"alpha1", params_.alpha1},
                 {"alpha2", params_.alpha2},
                 {"alpha_base", params_.alpha_base},
                 {"cutoff", params_.cutoff},
                 {"max_depth", params_.effective_max_depth()},
                 {"threads", params_.threads}};
  j["root"] = root_.key();
  j["n1"] = sample1_.size();
  j["n2"] = sample2_.size();
  j["log_marginal"] = log_marginal();
  j["log_base_marginal"] = log_base_marginal();
  j["coupling_statistic"] = coupling_statistic();
  j["nodes"] = size();
  j["nodes_evaluated"] = nodes_evaluated();
  if (!include_entries) return j;

  std::vector<const Node*> order;
  order.reserve(entries_.size());
  for (const auto& [node, entry] : entries_) order.push_back(&node);
  std::sort(order.begin(), order.end(), [](const Node* a, const Node* b) {
    const int da = a->total_depth(), db = b->total_depth();
    if (da != db) return da < db;
    return a->key() < b->key();
  });
  nlohmann::json arr = nlohmann::json::array();
  for (const Node* node : order) {
    const PosteriorEntry& e = entries_.at(*node);
    nlohmann::json je;
    je["key"] = node->key();
    je["region"] = describe(space(), *node);
    je["depth"] = node->total_depth();
    je["n1"] = e.n1;
    je["n2"] = e.n2;
    je["kind"] = kind_name(e.kind);
    je["log_p"] = e.log_p;
    je["log_p0"] = e.log_p0;
    je["gamma_post"] = gamma_post(*node);
    je["rho_post"] = rho_post(*node);
    if (e.kind == NodeKind::kInterior) {
      std::vector<int> dims1;
      for (int d : rule_.split_dims(*node)) dims1.push_back(d + 1);
      je["split_dims"] = dims1;
      je["lambda_post"] = lambda_post(*node);
      je["base_lambda_post"] = base_lambda_post(*node);
    }
    arr.push_back(std::move(je));
  }
  j["entries"] = std::move(arr);
  return j;
}

PosteriorTable fit(Dataset sample1, Dataset sample2, const CooptParams& params) {
  return PosteriorTable(std::move(sample1), std::move(sample2), params);
}

double coopt_log_marginal(const Dataset& s1, const Dataset& s2, const CooptParams& params) {
  return PosteriorTable(s1, s2, params).log_marginal();
}

CooptNodePosterior coopt_posterior(const Node& n, const Dataset& s1, const Dataset& s2,
                                   const CooptParams& params) {
  return PosteriorTable(s1, s2, params, n).node_posterior(n);
}

double coupling_statistic(const Dataset& s1, const Dataset& s2, const CooptParams& params) {
  return PosteriorTable(s1, s2, params).coupling_statistic();
}

}  // namespace coopt
