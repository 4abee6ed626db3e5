#include "coopt/opt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coopt/errors.hpp"
#include "coopt/numerics.hpp"

namespace coopt {

BaseMeasure BaseMeasure::uniform() { return BaseMeasure(); }

BaseMeasure BaseMeasure::dyadic_grid(int dims, int depth, std::vector<double> cell_masses) {
  if (dims < 1 || depth < 0 || depth > 20)
    throw std::invalid_argument("dyadic_grid: dims must be >= 1 and depth in [0, 20]");
  double cells = 1.0;
  for (int d = 0; d < dims; ++d) cells *= static_cast<double>(1u << depth);
  if (cells > 16e6 || cell_masses.size() != static_cast<std::size_t>(cells))
    throw std::invalid_argument("dyadic_grid: cell count mismatch or grid too large");
  double total = 0.0;
  for (double m : cell_masses) {
    if (!(m >= 0.0) || !std::isfinite(m))
      throw std::invalid_argument("dyadic_grid: masses must be finite and >= 0");
    total += m;
  }
  if (!(total > 0.0)) throw std::invalid_argument("dyadic_grid: total mass must be positive");
  for (double& m : cell_masses) m /= total;
  BaseMeasure b;
  b.uniform_ = false;
  b.dims_ = dims;
  b.depth_ = depth;
  b.mass_ = std::move(cell_masses);
  return b;
}

void BaseMeasure::check_space(const SampleSpace& s) const {
  if (s.dims() != dims_) throw input_error("grid base measure dimension mismatch");
  // A table's cells form the depth-one grid, so a table base must be exactly
  // that deep.
  if (s.kind() == SpaceKind::kBinaryTable && depth_ != 1)
    throw input_error("grid base measure on a table must have depth 1");
}

double BaseMeasure::log_density(const SampleSpace& s, std::span<const double> x) const {
  if (uniform_) {
    return s.kind() == SpaceKind::kBinaryTable ? -static_cast<double>(s.dims()) * kLn2 : 0.0;
  }
  check_space(s);
  const std::uint32_t side = 1u << depth_;
  std::size_t flat = 0;
  for (int d = 0; d < dims_; ++d) {
    std::int64_t c;
    if (s.kind() == SpaceKind::kBinaryTable) {
      c = x[static_cast<std::size_t>(d)] == 0.0 ? 0 : 1;
    } else {
      const double t = (x[static_cast<std::size_t>(d)] - s.lo(d)) / (s.hi(d) - s.lo(d));
      c = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(t * side)), 0, side - 1);
    }
    flat = flat * side + static_cast<std::size_t>(c);
  }
  const double m = mass_[flat];
  if (m == 0.0) return kNegInf;
  // Density with respect to the reference measure: cells have measure one on
  // a table and relative volume 2^(-depth * dims) on a rectangle.
  if (s.kind() == SpaceKind::kBinaryTable) return std::log(m);
  return std::log(m) + static_cast<double>(depth_) * static_cast<double>(dims_) * kLn2;
}

double BaseMeasure::log_mass(const SampleSpace& s, const Node& n) const {
  if (uniform_) return log_relative_measure(n);
  check_space(s);
  const std::uint32_t side = 1u << depth_;
  // Per coordinate: grid cells overlapping the node's interval and the
  // overlapped fraction of each (1 when the node spans whole cells).
  struct Range {
    std::uint32_t first, last;
    double frac;
  };
  std::vector<Range> ranges(static_cast<std::size_t>(dims_));
  for (int d = 0; d < dims_; ++d) {
    const int k = n.depth(d);
    const std::uint32_t w = n.word(d);
    const std::uint32_t i = w - (1u << k);
    if (k <= depth_) {
      const int shift = depth_ - k;
      ranges[static_cast<std::size_t>(d)] = {i << shift, ((i + 1u) << shift) - 1u, 1.0};
    } else {
      const int shift = k - depth_;
      const std::uint32_t c = i >> shift;
      ranges[static_cast<std::size_t>(d)] = {c, c, std::ldexp(1.0, -shift)};
    }
  }
  double fracs = 1.0;
  for (const Range& r : ranges) fracs *= r.frac;
  double total = 0.0;
  // Accumulate over the cartesian product of per-coordinate cell ranges.
  std::vector<std::uint32_t> c(static_cast<std::size_t>(dims_));
  for (std::size_t d = 0; d < c.size(); ++d) c[d] = ranges[d].first;
  for (;;) {
    std::size_t flat = 0;
    for (std::size_t d = 0; d < c.size(); ++d) flat = flat * side + c[d];
    total += mass_[flat];
    std::size_t d = c.size();
    while (d > 0) {
      --d;
      if (c[d] < ranges[d].last) {
        ++c[d];
        break;
      }
      c[d] = ranges[d].first;
      if (d == 0) {
        total *= fracs;
        return total > 0.0 ? std::log(total) : kNegInf;
      }
    }
    if (c.size() == 1 && c[0] == ranges[0].first) {
      total *= fracs;
      return total > 0.0 ? std::log(total) : kNegInf;
    }
  }
}

void OptParams::validate() const {
  if (!(rho0 >= 0.0 && rho0 <= 1.0)) throw input_error("rho0 must be in [0, 1]");
  if (!(alpha_total > 0.0)) throw input_error("alpha_total must be > 0");
  if (!(cutoff > 0.0 && cutoff <= 1.0)) throw input_error("cutoff must be in (0, 1]");
  if (max_depth != 0 && (max_depth < 1 || max_depth > 30))
    throw input_error("max_depth must be 0 (derived) or in [1, 30]");
  if (max_nodes == 0) throw input_error("max_nodes must be positive");
}

int OptParams::effective_max_depth() const {
  if (max_depth != 0) return max_depth;
  const int d = static_cast<int>(std::ceil(std::log2(1.0 / cutoff)));
  return std::clamp(d, 1, 30);
}

bool OptParams::symmetric_defaults() const {
  return alpha_total == 1.0 && !center_on_base && !selector;
}

double log_split_ratio(int n_left, int n_right, double a_left, double a_right) {
  const double post[2] = {a_left + static_cast<double>(n_left),
                          a_right + static_cast<double>(n_right)};
  const double prior[2] = {a_left, a_right};
  return log_dirichlet_norm(post) - log_dirichlet_norm(prior);
}

std::array<double, 2> centered_pseudocounts(const SampleSpace& s, const Node& n, int dim,
                                            const BaseMeasure& base, double total) {
  const double parent = base.log_mass(s, n);
  if (parent == kNegInf) throw input_error("centered_pseudocounts: node has zero base mass");
  const Node left = n.child(dim, 0);
  const Node right = n.child(dim, 1);
  const double wl = std::exp(base.log_mass(s, left) - parent);
  const double wr = std::exp(base.log_mass(s, right) - parent);
  if (!(wl > 0.0) || !(wr > 0.0))
    throw input_error("centered_pseudocounts: child with zero base mass");
  const double norm = total / (wl + wr);
  return {wl * norm, wr * norm};
}

int forced_stop_depth(double cutoff) {
  return std::max(0, static_cast<int>(std::ceil(std::log2(1.0 / cutoff))));
}

namespace {

OptParams validated(OptParams p) {
  p.validate();
  return p;
}

}  // namespace

OptFit::OptFit(Dataset data, OptParams params, BaseMeasure base)
    : data_(std::move(data)),
      params_(validated(params)),
      base_(std::move(base)),
      rule_(data_.space(), params_.effective_max_depth()),
      root_(Node::root(data_.space())) {
  init();
}

OptFit::OptFit(Dataset data, OptParams params, BaseMeasure base, const Node& root)
    : data_(std::move(data)),
      params_(validated(params)),
      base_(std::move(base)),
      rule_(data_.space(), params_.effective_max_depth()),
      root_(root) {
  init();
}

void OptFit::init() {
  if (root_.dims() != space().dims())
    throw std::invalid_argument("OptFit: root node dimension mismatch");
  std::vector<std::uint32_t> idx;
  for (int i = 0; i < data_.size(); ++i)
    if (contains(space(), root_, data_.row(i))) idx.push_back(static_cast<std::uint32_t>(i));
  eval(root_, idx);
}

bool OptFit::forced(const Node& n) const {
  return rule_.is_atom(n) || n.total_depth() >= forced_stop_depth(params_.cutoff);
}

double OptFit::stopped_loglik(const Node& n, const std::vector<std::uint32_t>& idx) const {
  const double nn = static_cast<double>(idx.size());
  if (base_.is_uniform()) return -nn * log_measure(space(), n);
  double acc = 0.0;
  for (std::uint32_t i : idx) acc += base_.log_density(space(), data_.row(static_cast<int>(i)));
  return acc - nn * base_.log_mass(space(), n);
}

std::vector<double> OptFit::split_weights(const Node& n, const std::vector<int>& dims) const {
  const std::size_t m = dims.size();
  if (!params_.selector) {
    return std::vector<double>(m, 1.0 / static_cast<double>(m));
  }
  std::vector<double> w = params_.selector(n);
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

std::array<double, 2> OptFit::split_alpha(const Node& n, int dim) const {
  if (params_.center_on_base && !base_.is_uniform())
    return centered_pseudocounts(space(), n, dim, base_, params_.alpha_total);
  return {0.5 * params_.alpha_total, 0.5 * params_.alpha_total};
}

const OptEntry& OptFit::eval(const Node& n, const std::vector<std::uint32_t>& idx) {
  if (auto it = entries_.find(n); it != entries_.end()) return it->second;

  OptEntry e;
  e.n = static_cast<std::uint32_t>(idx.size());
  if (forced(n)) {
    const double stop = stopped_loglik(n, idx);
    e = OptEntry{e.n, stop, stop, NodeKind::kForcedTerminal};
  } else if (idx.empty()) {
    e = OptEntry{0, 0.0, 0.0, NodeKind::kEmpty};
  } else if (idx.size() == 1 && params_.symmetric_defaults() && base_.is_uniform()) {
    const double v = -log_measure(space(), n);
    e = OptEntry{1, v, v, NodeKind::kSingleObs};
  } else {
    const std::vector<int> dims = rule_.split_dims(n);
    const std::vector<double> lambda = split_weights(n, dims);
    const double stop = stopped_loglik(n, idx);
    std::vector<double> terms;
    terms.reserve(dims.size() + 1);
    terms.push_back(std::log(params_.rho0) + stop);
    const double log_cont = std::log1p(-params_.rho0);
    for (std::size_t j = 0; j < dims.size(); ++j) {
      const int d = dims[j];
      std::vector<std::uint32_t> left, right;
      for (std::uint32_t i : idx) {
        if (child_side(space(), n, d, data_.at(static_cast<int>(i), d)) == 0)
          left.push_back(i);
        else
          right.push_back(i);
      }
      const auto [cl, cr] = rule_.children(n, d);
      const std::array<double, 2> a = split_alpha(n, d);
      const double dm =
          log_split_ratio(static_cast<int>(left.size()), static_cast<int>(right.size()), a[0], a[1]);
      const double pl = eval(cl, left).log_p;
      const double pr = eval(cr, right).log_p;
      terms.push_back(log_cont + std::log(lambda[j]) + dm + pl + pr);
    }
    e = OptEntry{e.n, log_sum_exp(terms), stop, NodeKind::kInterior};
  }

  auto [it, inserted] = entries_.emplace(n, e);
  if (entries_.size() > params_.max_nodes)
    throw resource_limit_error("OptFit: node cache exceeded max_nodes");
  return it->second;
}

const OptEntry& OptFit::entry(const Node& n) const {
  auto it = entries_.find(n);
  if (it == entries_.end()) throw std::out_of_range("OptFit::entry: node not evaluated");
  return it->second;
}

OptEntry OptFit::entry_or_prior(const Node& n) const {
  if (auto it = entries_.find(n); it != entries_.end()) return it->second;
  OptEntry e;
  e.kind = forced(n) ? NodeKind::kForcedTerminal : NodeKind::kEmpty;
  return e;
}

double OptFit::log_marginal() const { return entry(root_).log_p; }

double OptFit::rho_post(const Node& n) const {
  const OptEntry e = entry_or_prior(n);
  switch (e.kind) {
    case NodeKind::kEmpty:
    case NodeKind::kSingleObs:
      return params_.rho0;
    case NodeKind::kForcedTerminal:
      return 1.0;
    case NodeKind::kInterior:
      break;
  }
  const double r = std::exp(std::log(params_.rho0) + e.log_stop - e.log_p);
  return std::clamp(r, 0.0, 1.0);
}

double OptFit::gof_statistic() const { return rho_post(root_); }

std::pair<int, int> OptFit::child_counts(const Node& n, int dim) const {
  const auto [cl, cr] = rule_.children(n, dim);
  const auto il = entries_.find(cl);
  const auto ir = entries_.find(cr);
  if (il != entries_.end() && ir != entries_.end())
    return {static_cast<int>(il->second.n), static_cast<int>(ir->second.n)};
  return {data_.count(cl), data_.count(cr)};
}

OptNodePosterior OptFit::node_posterior(const Node& n) const {
  const OptEntry e = entry_or_prior(n);
  OptNodePosterior out;
  out.log_p = e.log_p;
  out.rho_post = rho_post(n);
  out.split_dims = rule_.split_dims(n);
  const std::vector<double> lambda = split_weights(n, out.split_dims);
  out.lambda_post.resize(out.split_dims.size());
  out.alpha_post.resize(out.split_dims.size());
  std::vector<double> terms(out.split_dims.size());
  for (std::size_t j = 0; j < out.split_dims.size(); ++j) {
    const int d = out.split_dims[j];
    const std::array<double, 2> a = split_alpha(n, d);
    const auto [nl, nr] = child_counts(n, d);
    out.alpha_post[j] = {a[0] + static_cast<double>(nl), a[1] + static_cast<double>(nr)};
    if (e.kind == NodeKind::kInterior) {
      const auto [cl, cr] = rule_.children(n, d);
      terms[j] = std::log(lambda[j]) + log_split_ratio(nl, nr, a[0], a[1]) +
                 entry(cl).log_p + entry(cr).log_p;
    }
  }
  if (e.kind == NodeKind::kInterior && !terms.empty()) {
    const double norm = log_sum_exp(terms);
    for (std::size_t j = 0; j < terms.size(); ++j)
      out.lambda_post[j] = std::exp(terms[j] - norm);
  } else {
    out.lambda_post = lambda;
  }
  return out;
}

double opt_log_marginal(const Dataset& data, const OptParams& params, const BaseMeasure& base) {
  return OptFit(data, params, base).log_marginal();
}

OptNodePosterior opt_posterior(const Node& n, const Dataset& data, const OptParams& params,
                               const BaseMeasure& base) {
  return OptFit(data, params, base, n).node_posterior(n);
}

double gof_statistic(const Dataset& data, const OptParams& params, const BaseMeasure& base) {
  return OptFit(data, params, base).gof_statistic();
}

}  // namespace coopt
