#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sphere/config.hpp"

namespace sphere {

// Constructive refutation of positive definiteness of |t|^p on point sets:
// 2k+1 points equally spaced on a great circle through z plus an orthogonal
// point y; the test vector combines the Vandermonde kernel vector v with a
// weight on y.  The quadratic form is evaluated on the analytic great-circle
// Gram (cos((i-j) eps), sin((j-k) eps)) in extended precision, because near
// the working epsilon the form value sits far below double-precision noise.

// v_j = (-1)^j / ((2k-j)! j!), j = 0..2k; annihilates j^m for m <= 2k-1.
// Throws for k > 85 (the entries leave the normal double range).
std::vector<double> vandermonde_kernel_vector(int k);

// b_p = 2 sum_{j<k} (-1)^j (k-j)^p / ((2k-j)! j!); equals sum_j v_j |k-j|^p.
double bp_coefficient(int k, double p);

// x_j = cos((j-k) eps) z + sin((j-k) eps) y for j = 0..2k, then y itself.
// Requires <z,y> ~ 0 and eps in (0, pi/(4k)).
std::vector<double> build_witness_points(std::span<const double> z, std::span<const double> y,
                                         int k, double eps);  // (2k+2) x d row-major

struct WitnessReport {
  int k = 0;
  double p = 0.0;
  double eps = 0.0;            // final epsilon after shrinking
  int shrink_steps = 0;
  int d = 0;
  std::vector<double> points;  // (2k+2) x d row-major
  std::vector<double> u;       // test vector (alpha v_0..alpha v_2k, beta)
  double alpha = 1.0;
  double beta = 0.0;
  double quadratic_form_value = 0.0;  // u^T [ |<x_i,x_j>|^p ] u
  double first_block_term = 0.0;      // v^T A_11 v at the final epsilon
  double cross_term = 0.0;            // v^T a_{1,y}
};

// Assembles the construction and minimizes the quadratic form over beta in
// closed form (alpha fixed by the certified direction, then rescaled so the
// reported value is comfortably negative).  eps <= 0 starts the shrink
// schedule at 0.8 pi / (4k).  Throws std::domain_error when p is within
// 1e-9 of an even integer and numerical_error when 20 halvings never
// produce a certified negative value.
WitnessReport non_pd_witness(double p, int d, double eps = 0.0,
                             std::span<const double> z = {}, std::span<const double> y = {});

// Minimal witness cardinality ceil(2 + p/2) implied by the positivity of
// Hadamard powers of PSD matrices with alpha >= N-2; second value reports
// whether the 2k+2-point construction satisfies it.
std::pair<int, bool> hadamard_power_bound(double p);

// Recomputes u^T [ |<x_i,x_j>|^p ] u for the report's construction from the
// analytic great-circle Gram, in the same extended precision used to build
// it.  Agrees with report.quadratic_form_value to machine scale; double
// precision cannot resolve the form near the working epsilon, which is why
// the points themselves are not the ground truth here.
double witness_recompute_form(const WitnessReport& report);

// sum_{i,j} v_i v_j |cos((i-j) eps)|^p in extended precision; the first
// block of the witness form, used to observe its O(eps^{4k}) flatness.
double witness_first_block_sum(double p, int k, double eps);

// All witness points within tol (geodesic) of some support atom, while the
// form is negative, contradicts positive definiteness on the support; the
// returned indices pair each witness point with its nearest support atom.
std::optional<std::vector<int>> witness_support_conflict(const SphericalConfig& config,
                                                         const WitnessReport& report,
                                                         double tol);

}  // namespace sphere
