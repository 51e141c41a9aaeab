#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sphere/config.hpp"
#include "sphere/gegenbauer.hpp"
#include "sphere/harmonics.hpp"

namespace sphere {

// Finite list of constraint functionals g_i with targets c_i; g_0 is always
// the constant 1 with target 1 (probability normalization).
struct MomentSystem {
  int d = 0;
  std::vector<SphereFunction> constraints;
  std::vector<double> targets;

  int size() const { return static_cast<int>(constraints.size()); }
  void validate() const;  // throws unless g_0 targets the mass constraint
};

// Constraints {1} plus orthonormal harmonic bases for every degree in
// `degrees` (degree 0 entries are skipped; the mass row covers them).
// Targets are the moments of `reference`.
MomentSystem harmonic_moment_system(const SphericalConfig& reference,
                                    const std::vector<int>& degrees, std::uint64_t seed = 0);

// [g_i(x_j)]: one row per constraint, one column per atom.
std::vector<std::vector<double>> moment_matrix(const SphericalConfig& config,
                                               const MomentSystem& sys);

// residuals A w - c, one entry per constraint
std::vector<double> moment_residuals(const SphericalConfig& config, const MomentSystem& sys);

// True iff N <= #constraints and the atom columns are linearly independent
// (smallest singular value > tol * largest).  Requires all weights > tol.
bool verify_extreme(const SphericalConfig& config, const MomentSystem& sys, double tol = 1e-9);

struct ReductionReport {
  int steps = 0;
  int dropped_atoms = 0;
  int final_support = 0;
  double moment_residual = 0.0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double g_before = 0.0;
  double g_after = 0.0;
  std::vector<double> g_trace;  // G value after every step
  std::string to_json() const;
};

// Null-space walk: while the atom columns are dependent, move the weights
// along a null vector of the moment matrix until one hits zero, drop it,
// repeat.  Preserves every constrained moment to machine scale; terminates
// with at most #constraints atoms.  Throws std::domain_error when the
// input violates the targets beyond tol and numerical_error on a stall.
SphericalConfig caratheodory_reduce(const SphericalConfig& config, const MomentSystem& sys,
                                    double tol = 1e-9, ReductionReport* report = nullptr);

// The discrete-minimizer construction: constraints are the harmonics over
// the positive-coefficient degrees of `exp` (plus mass); each null step
// picks the sign that does not decrease the convex functional
//   G(mu) = sum_{n: fhat_n < 0} (-fhat_n) * (harmonic moment norm)^2,
// so the truncated-kernel energy never increases.  Support bound:
// sum_{n in N_+ u {0}} dim H_n^d.
SphericalConfig discrete_minimizer_reduce(const SphericalConfig& config,
                                          const GegenbauerExpansion& exp, double tol = 1e-9,
                                          ReductionReport* report = nullptr,
                                          std::uint64_t seed = 0);

// The Theorem support bound for a given expansion.
std::uint64_t support_bound(const GegenbauerExpansion& exp, double tol = 0.0);

}  // namespace sphere
