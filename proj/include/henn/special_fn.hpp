#pragma once

#include <span>

namespace henn::special {

// All functions require a finite, strictly positive argument and throw
// DomainError otherwise. Reflection formulas are intentionally absent.

/// ln Gamma(x).
double log_gamma(double x);

/// psi(x) = d/dx ln Gamma(x).
double digamma(double x);

/// psi_1(x) = d/dx psi(x); strictly positive and decreasing on (0, inf).
double trigamma(double x);

/// ln B(a_1..a_n) = sum ln Gamma(a_i) - ln Gamma(sum a_i). Requires n >= 1.
double log_beta_multi(std::span<const double> a);

}  // namespace henn::special
