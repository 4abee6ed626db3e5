#include "coopt/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace coopt {

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: argument must be > 0");
  return std::lgamma(x);
}

double log_dirichlet_norm(std::span<const double> t) {
  if (t.empty()) throw std::domain_error("log_dirichlet_norm: empty vector");
  double sum = 0.0;
  double acc = 0.0;
  for (double ti : t) {
    if (!(ti > 0.0)) throw std::domain_error("log_dirichlet_norm: entries must be > 0");
    acc += log_gamma(ti);
    sum += ti;
  }
  return acc - log_gamma(sum);
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return kNegInf;
  const double m = *std::max_element(v.begin(), v.end());
  if (m == kNegInf) return kNegInf;
  // Accumulate in ascending value order so the result is invariant under any
  // permutation of the input terms.
  double buf[32];
  std::vector<double> heap;
  std::span<double> sorted;
  if (v.size() <= 32) {
    std::copy(v.begin(), v.end(), buf);
    sorted = std::span<double>(buf, v.size());
  } else {
    heap.assign(v.begin(), v.end());
    sorted = heap;
  }
  std::sort(sorted.begin(), sorted.end());
  double acc = 0.0;
  for (double vi : sorted) acc += std::exp(vi - m);
  return m + std::log(acc);
}

double log_add_exp(double a, double b) {
  const double v[2] = {a, b};
  return log_sum_exp(v);
}

}  // namespace coopt
