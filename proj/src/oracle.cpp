#include "coopt/oracle.hpp"

#include <cmath>

#include "coopt/errors.hpp"
#include "coopt/numerics.hpp"

namespace coopt {

namespace {

void require_table(const SampleSpace& s, const char* what) {
  if (s.kind() != SpaceKind::kBinaryTable)
    throw input_error(std::string(what) + ": binary-table spaces only");
}

// Saturation at cap + 1 marks "over budget"; cap is small enough that the
// sums below cannot overflow size_t.
std::size_t saturating_add(std::size_t a, std::size_t b, std::size_t cap) {
  if (a > cap || b > cap || a + b > cap) return cap + 1;
  return a + b;
}

std::size_t saturating_mul(std::size_t a, std::size_t b, std::size_t cap) {
  if (a == 0 || b == 0) return 0;
  if (a > cap || b > cap || a > cap / b) return cap + 1;
  return a * b;
}

struct OptOracle {
  const Dataset& data;
  const OptParams& params;
  PartitionRule rule;
  int force_depth;

  bool terminal(const Node& n) const {
    return rule.is_atom(n) || n.total_depth() >= force_depth;
  }

  std::size_t count(const Node& n, std::size_t cap) const {
    if (terminal(n)) return 1;
    std::size_t total = 1;  // the stop configuration
    for (int d : rule.split_dims(n)) {
      const auto [cl, cr] = rule.children(n, d);
      const std::size_t sub =
          saturating_mul(count(cl, cap), count(cr, cap), cap);
      total = saturating_add(total, sub, cap);
      if (total > cap) return total;
    }
    return total;
  }

  std::vector<std::pair<double, double>> configs(const Node& n) const {
    const int nn = data.count(n);
    const double stop_lik = -static_cast<double>(nn) * log_measure(data.space(), n);
    if (terminal(n)) return {{0.0, stop_lik}};
    const std::vector<int> dims = rule.split_dims(n);
    const double log_lambda = -std::log(static_cast<double>(dims.size()));
    const double a = 0.5 * params.alpha_total;
    std::vector<std::pair<double, double>> out;
    out.emplace_back(std::log(params.rho0), stop_lik);
    for (int d : dims) {
      const auto [cl, cr] = rule.children(n, d);
      const double dm = log_split_ratio(data.count(cl), data.count(cr), a, a);
      const double w0 = std::log1p(-params.rho0) + log_lambda;
      for (const auto& [wl, ll] : configs(cl))
        for (const auto& [wr, lr] : configs(cr))
          out.emplace_back(w0 + wl + wr, dm + ll + lr);
    }
    return out;
  }
};

struct CooptOracle {
  const Dataset& s1;
  const Dataset& s2;
  const Dataset& pooled;
  const CooptParams& params;
  OptOracle base;
  PartitionRule rule;
  int force_depth;

  bool terminal(const Node& n) const {
    return rule.is_atom(n) || n.total_depth() >= force_depth;
  }

  std::size_t count(const Node& n, std::size_t cap) const {
    if (terminal(n)) return 1;
    std::size_t total = base.count(n, cap);
    for (int d : rule.split_dims(n)) {
      const auto [cl, cr] = rule.children(n, d);
      const std::size_t sub = saturating_mul(count(cl, cap), count(cr, cap), cap);
      total = saturating_add(total, sub, cap);
      if (total > cap) return total;
    }
    return total;
  }

  std::vector<OracleConfig> configs(const Node& n) const {
    if (terminal(n)) {
      const double lik = -static_cast<double>(pooled.count(n)) * log_measure(s1.space(), n);
      return {{0.0, lik, true}};
    }
    std::vector<OracleConfig> out;
    const double log_gamma = std::log(params.gamma0);
    for (const auto& [wb, lb] : base.configs(n)) out.push_back({log_gamma + wb, lb, true});
    const std::vector<int> dims = rule.split_dims(n);
    const double w0 = std::log1p(-params.gamma0) - std::log(static_cast<double>(dims.size()));
    for (int d : dims) {
      const auto [cl, cr] = rule.children(n, d);
      const double dm1 = log_split_ratio(s1.count(cl), s1.count(cr), params.alpha1, params.alpha1);
      const double dm2 = log_split_ratio(s2.count(cl), s2.count(cr), params.alpha2, params.alpha2);
      for (const OracleConfig& a : configs(cl))
        for (const OracleConfig& b : configs(cr))
          out.push_back({w0 + a.log_weight + b.log_weight,
                         dm1 + dm2 + a.log_lik + b.log_lik, false});
    }
    return out;
  }
};

Dataset pool(const Dataset& a, const Dataset& b) {
  std::vector<double> flat(a.flat().begin(), a.flat().end());
  flat.insert(flat.end(), b.flat().begin(), b.flat().end());
  return Dataset(a.space(), std::move(flat));
}

OptOracle make_opt_oracle(const Dataset& data, const OptParams& params) {
  require_table(data.space(), "oracle");
  params.validate();
  if (params.selector || params.center_on_base)
    throw input_error("oracle: split selectors and centered pseudo-counts unsupported");
  return OptOracle{data, params, PartitionRule(data.space(), params.effective_max_depth()),
                   forced_stop_depth(params.cutoff)};
}

}  // namespace

std::size_t count_oracle_opt_configs(const SampleSpace& s, const OptParams& params,
                                     std::size_t cap) {
  require_table(s, "oracle");
  const Dataset empty(s, {});
  OptOracle o{empty, params, PartitionRule(s, params.effective_max_depth()),
              forced_stop_depth(params.cutoff)};
  return o.count(Node::root(s), cap);
}

std::size_t count_oracle_coopt_configs(const SampleSpace& s, const CooptParams& params,
                                       std::size_t cap) {
  require_table(s, "oracle");
  const Dataset empty(s, {});
  const OptParams base_params = params.pooled_opt_params();
  CooptOracle o{empty,
                empty,
                empty,
                params,
                OptOracle{empty, base_params, PartitionRule(s, params.effective_max_depth()),
                          forced_stop_depth(params.cutoff)},
                PartitionRule(s, params.effective_max_depth()),
                forced_stop_depth(params.cutoff)};
  return o.count(Node::root(s), cap);
}

std::vector<std::pair<double, double>> oracle_opt_configs(const Dataset& data,
                                                          const OptParams& params,
                                                          const OracleLimits& limits) {
  OptOracle o = make_opt_oracle(data, params);
  if (o.count(Node::root(data.space()), limits.max_configs) > limits.max_configs)
    throw resource_limit_error("oracle: configuration count exceeds the budget");
  return o.configs(Node::root(data.space()));
}

std::vector<OracleConfig> oracle_coopt_configs(const Dataset& s1, const Dataset& s2,
                                               const CooptParams& params,
                                               const OracleLimits& limits) {
  require_table(s1.space(), "oracle");
  if (!(s1.space() == s2.space()))
    throw input_error("oracle: the two samples must share one sample space");
  params.validate();
  if (params.selector || params.base_selector)
    throw input_error("oracle: split selectors unsupported");
  const Dataset pooled = pool(s1, s2);
  const OptParams base_params = params.pooled_opt_params();
  CooptOracle o{s1,
                s2,
                pooled,
                params,
                make_opt_oracle(pooled, base_params),
                PartitionRule(s1.space(), params.effective_max_depth()),
                forced_stop_depth(params.cutoff)};
  const Node root = Node::root(s1.space());
  if (o.count(root, limits.max_configs) > limits.max_configs)
    throw resource_limit_error("oracle: configuration count exceeds the budget");
  return o.configs(root);
}

double oracle_opt_log_marginal(const Dataset& data, const OptParams& params,
                               const OracleLimits& limits) {
  std::vector<double> terms;
  for (const auto& [w, l] : oracle_opt_configs(data, params, limits)) terms.push_back(w + l);
  return log_sum_exp(terms);
}

double oracle_coopt_log_marginal(const Dataset& s1, const Dataset& s2,
                                 const CooptParams& params, const OracleLimits& limits) {
  std::vector<double> terms;
  for (const OracleConfig& c : oracle_coopt_configs(s1, s2, params, limits))
    terms.push_back(c.log_weight + c.log_lik);
  return log_sum_exp(terms);
}

double oracle_coupling_statistic(const Dataset& s1, const Dataset& s2,
                                 const CooptParams& params, const OracleLimits& limits) {
  std::vector<double> all, coupled;
  for (const OracleConfig& c : oracle_coopt_configs(s1, s2, params, limits)) {
    all.push_back(c.log_weight + c.log_lik);
    if (c.root_coupled) coupled.push_back(all.back());
  }
  return std::exp(log_sum_exp(coupled) - log_sum_exp(all));
}

}  // namespace coopt
