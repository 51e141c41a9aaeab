#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sphere/kernel.hpp"

namespace sphere {

// Spectral machinery on [-1,1] for the sphere S^{d-1}: ultraspherical
// polynomials with parameter lambda = (d-2)/2, the associated Gauss rules,
// and kernel expansions
//
//   f(t) ~ sum_n fhat_n ((n+lambda)/lambda) C_n^lambda(t),
//
// where for d = 2 the degenerate factor is replaced by the Chebyshev
// convention f ~ fhat_0 + sum_{n>=1} fhat_n 2 T_n(t).  In both cases
// fhat_n is the integral of f against C_n(t)/C_n(1) under the normalized
// weight (1-t^2)^{lambda-1/2}, and the reconstruction weight in front of
// the normalized polynomial is dim H_n^d.

// C_n^lambda(t) by the three-term recurrence; for lambda == 0 returns the
// Chebyshev polynomial T_n(t), the normalized limit of ((n+lambda)/lambda)
// C_n^lambda / 2 as lambda -> 0.
double gegenbauer_eval(int n, double lambda, double t);

// dim H_n^d; throws std::overflow_error when the value exceeds 64 bits.
std::uint64_t harmonic_dim(int n, int d);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss rule for the weight (1-x)^alpha (1+x)^beta on [-1,1] (Golub-Welsch).
QuadratureRule gauss_jacobi_rule(int m, double alpha, double beta);

// Gauss rule for the ultraspherical weight nu(t) = (1-t^2)^{lambda-1/2};
// exact for polynomials of degree <= 2m-1, weights sum to B(1/2,lambda+1/2).
QuadratureRule gauss_gegenbauer_rule(int m, double lambda);

struct GegenbauerExpansion {
  int d = 3;
  double lambda = 0.5;  // (d-2)/2 always
  std::vector<double> coeffs;  // fhat_0 .. fhat_N
  double truncation_error_bound = 0.0;

  static GegenbauerExpansion from_coeffs(int d, std::vector<double> coeffs,
                                         double truncation_error_bound = 0.0);

  // partial sum sum_n fhat_n a_n^d C_n(t)/C_n(1); throws on |t| > 1
  double eval(double t) const;

  std::string to_json() const;
  static GegenbauerExpansion from_json(const std::string& json_text);
};

// Expansion coefficients of a kernel by quadrature.  m_quad <= 0 selects the
// default max(64, 2*n_max + 16).  Non-polynomial kernels are integrated on
// smooth sub-intervals split at their kink points; |t|^p additionally uses a
// Jacobi rule in u = t^2 that makes every coefficient a finite exact
// quadrature.  truncation_error_bound is the max reconstruction residual on
// a probe grid plus a doubled-node stability estimate.
GegenbauerExpansion expand_kernel(const Kernel& kernel, int d, int n_max, int m_quad = 0);

double expansion_eval(const GegenbauerExpansion& exp, double t);

struct PDClassification {
  std::vector<int> n_plus;   // { n : fhat_n > tol }
  std::vector<int> n_minus;  // { n : fhat_n < -tol }
  bool pd_up_to_constant = false;  // no n >= 1 in n_minus
  double tol = 0.0;          // resolved absolute threshold actually used
};

// tol <= 0 selects the default 1e-9 scaled by max(1, max |fhat_n|).
PDClassification classify_pd(const GegenbauerExpansion& exp, double tol = 0.0);

// I_f(sigma) as the 1-D integral of f under the normalized weight
// (1-t^2)^{(d-3)/2}; m_quad <= 0 selects a default.  Computed on kink-split
// sub-intervals under the substitution t = cos(theta), which removes the
// d = 2 endpoint singularity; a doubled-node check guards convergence.
double sigma_energy(const Kernel& kernel, int d, int m_quad = 0);

// Monomial coefficients of the polynomial sum_n fhat_n a_n C_n(t)/C_n(1).
// Exact for any finite expansion; used to turn synthetic coefficient
// sequences into evaluable kernels.
PolynomialT expansion_to_polynomial(const GegenbauerExpansion& exp);

}  // namespace sphere
