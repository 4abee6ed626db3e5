#include "coopt/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "coopt/errors.hpp"
#include "coopt/random.hpp"

namespace coopt {

double ks_statistic(std::span<const double> x1, std::span<const double> x2) {
  if (x1.empty() || x2.empty()) throw input_error("ks_statistic: empty sample");
  std::vector<double> a(x1.begin(), x1.end());
  std::vector<double> b(x2.begin(), x2.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() || j < b.size()) {
    double v;
    if (i == a.size())
      v = b[j];
    else if (j == b.size())
      v = a[i];
    else
      v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }
  return d;
}

void EpsilonGibbsConfig::validate() const {
  if (!(alpha_cell > 0.0)) throw input_error("epsilon_gibbs: alpha_cell must be > 0");
  if (!(a_eps > 0.0) || !(b_eps > 0.0)) throw input_error("epsilon_gibbs: Beta prior must be > 0");
  if (burn_in < 0 || keep < 1) throw input_error("epsilon_gibbs: need burn_in >= 0, keep >= 1");
}

namespace {

std::uint64_t cell_bits(const Dataset& d, int row) {
  std::uint64_t bits = 0;
  for (int c = 0; c < d.dims(); ++c)
    if (d.at(row, c) == 1.0) bits |= (1ull << c);
  return bits;
}

void check_simplex(std::span<const double> h) {
  double total = 0.0;
  for (double v : h) {
    if (!(v >= 0.0)) throw std::logic_error("epsilon_gibbs: negative mass");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::logic_error("epsilon_gibbs: simplex violated");
}

}  // namespace

EpsilonGibbsResult epsilon_gibbs(const Dataset& sample1, const Dataset& sample2,
                                 const EpsilonGibbsConfig& cfg) {
  cfg.validate();
  if (sample1.space().kind() != SpaceKind::kBinaryTable ||
      !(sample1.space() == sample2.space()))
    throw input_error("epsilon_gibbs: two samples on one binary table required");
  if (sample1.space().dims() > 62) throw input_error("epsilon_gibbs: at most 62 dimensions");

  // Support: cells observed in either sample, in first-appearance order.
  std::unordered_map<std::uint64_t, int> support;
  std::vector<int> obs1, obs2;
  auto index_rows = [&support](const Dataset& d, std::vector<int>& out) {
    for (int i = 0; i < d.size(); ++i) {
      const std::uint64_t bits = cell_bits(d, i);
      auto [it, inserted] = support.emplace(bits, static_cast<int>(support.size()));
      out.push_back(it->second);
    }
  };
  index_rows(sample1, obs1);
  index_rows(sample2, obs2);
  const std::size_t cells = std::max<std::size_t>(support.size(), 1);

  RandomStream rng(cfg.seed);
  const int n1 = sample1.size();
  const int n2 = sample2.size();
  const int n = n1 + n2;
  double eps = 0.5;
  std::vector<double> h0(cells, 1.0 / static_cast<double>(cells));
  std::vector<double> h1 = h0, h2 = h0;
  std::vector<int> j1(static_cast<std::size_t>(n1), 0);
  std::vector<int> j2(static_cast<std::size_t>(n2), 0);

  std::vector<double> conc(cells);
  auto draw_h = [&](std::vector<double>& h, const std::vector<int>& obs,
                    const std::vector<int>& jflags, int want_j,
                    const std::vector<int>* obs_b, const std::vector<int>* jflags_b) {
    std::fill(conc.begin(), conc.end(), cfg.alpha_cell);
    for (std::size_t i = 0; i < obs.size(); ++i)
      if (jflags[i] == want_j) conc[static_cast<std::size_t>(obs[i])] += 1.0;
    if (obs_b) {
      for (std::size_t i = 0; i < obs_b->size(); ++i)
        if ((*jflags_b)[i] == want_j) conc[static_cast<std::size_t>((*obs_b)[i])] += 1.0;
    }
    h = sample_dirichlet(conc, rng);
  };

  auto sweep = [&]() {
    draw_h(h0, obs1, j1, 1, &obs2, &j2);  // shared component owns the J = 1 points
    draw_h(h1, obs1, j1, 0, nullptr, nullptr);
    draw_h(h2, obs2, j2, 0, nullptr, nullptr);
    int sum_j = 0;
    auto update_j = [&](const std::vector<int>& obs, std::vector<int>& jflags,
                        const std::vector<double>& hi) {
      for (std::size_t i = 0; i < obs.size(); ++i) {
        const auto c = static_cast<std::size_t>(obs[i]);
        const double shared = eps * h0[c];
        const double own = (1.0 - eps) * hi[c];
        const double denom = shared + own;
        const double p = denom > 0.0 ? shared / denom : eps;
        jflags[i] = sample_bernoulli(p, rng);
        sum_j += jflags[i];
      }
    };
    update_j(obs1, j1, h1);
    update_j(obs2, j2, h2);
    const double ga = rng.gamma(cfg.a_eps + static_cast<double>(sum_j));
    const double gb = rng.gamma(cfg.b_eps + static_cast<double>(n - sum_j));
    eps = ga + gb > 0.0 ? ga / (ga + gb) : 0.5;
    if (cfg.check_invariants) {
      check_simplex(h0);
      check_simplex(h1);
      check_simplex(h2);
      if (!(eps >= 0.0 && eps <= 1.0)) throw std::logic_error("epsilon_gibbs: eps outside [0, 1]");
    }
  };

  for (int it = 0; it < cfg.burn_in; ++it) sweep();
  EpsilonGibbsResult out;
  out.draws.reserve(static_cast<std::size_t>(cfg.keep));
  double acc = 0.0;
  for (int it = 0; it < cfg.keep; ++it) {
    sweep();
    out.draws.push_back(eps);
    acc += eps;
  }
  out.mean_eps = acc / static_cast<double>(cfg.keep);
  return out;
}

}  // namespace coopt
