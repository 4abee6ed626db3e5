#pragma once
// Log-domain primitives used by every likelihood computation in the library.

#include <limits>
#include <span>

namespace coopt {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLn2 = 0.6931471805599453094172321;

// log Gamma(x) for x > 0. Throws std::domain_error otherwise.
double log_gamma(double x);

// log of the Dirichlet normalizing constant: sum_i log Gamma(t_i) - log Gamma(sum_i t_i).
// Requires a nonempty vector of strictly positive entries.
double log_dirichlet_norm(std::span<const double> t);

// log sum_i exp(v_i), max-shifted for stability. Empty or all -inf input
// yields -inf; never returns NaN for inputs that are finite or -inf.
double log_sum_exp(std::span<const double> v);

// log(exp(a) + exp(b)).
double log_add_exp(double a, double b);

}  // namespace coopt
