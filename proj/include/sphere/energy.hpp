#pragma once

#include <cstdint>
#include <span>

#include "sphere/config.hpp"
#include "sphere/gegenbauer.hpp"
#include "sphere/kernel.hpp"

namespace sphere {

// Pairwise-energy kernels.  The parallel variants split work over atoms
// (one row of the Gram matrix per task); each row is summed serially and
// rows are reduced in index order, so results are bit-identical to the
// serial reference for any thread count.

// sum_{i,j} w_i w_j f(<x_i,x_j>), diagonal included
double discrete_energy(const SphericalConfig& config, const Kernel& kernel);
double discrete_energy_serial(const SphericalConfig& config, const Kernel& kernel);

// raw-array forms used by the optimizer and the benchmark
double pair_energy(const double* points, const double* weights, int n, int d,
                   const Kernel& kernel, bool parallel);

// F_mu(x) = sum_j w_j f(<x,x_j>); x must be unit within 1e-12
double potential(const SphericalConfig& config, const Kernel& kernel,
                 std::span<const double> x);

// batch potential over many probe points (row-major n x d); deterministic
void potential_batch(const SphericalConfig& config, const Kernel& kernel,
                     const double* probes, int n_probes, double* out, bool parallel);

struct PotentialReport {
  double support_min = 0.0;
  double support_max = 0.0;
  double grid_min = 0.0;
  double constancy_gap = 0.0;  // support_max - support_min
  int grid_size = 0;
  std::uint64_t seed = 0;
};

// Potential extremes over the support atoms and over a quasi-uniform probe
// grid (deterministic spiral for d <= 3 plus seeded random points).
PotentialReport potential_report(const SphericalConfig& config, const Kernel& kernel,
                                 int grid_size, std::uint64_t seed);

// Truncated-kernel energy sum_n fhat_n ((n+lambda)/lambda) sum_{ij}
// C_n(<x_i,x_j>) w_i w_j; requires exp.d == config.d.
double spectral_energy(const SphericalConfig& config, const GegenbauerExpansion& exp);

// Reflects every atom with <z,x_i> < 0 to its antipode and merges atoms
// that land within 1e-9 of an existing one.  Atoms on the equator z^perp
// (|<z,x>| < 1e-12) are rejected with their index in the error message.
// For even kernels the energy is unchanged.
SphericalConfig symmetrize(const SphericalConfig& config, std::span<const double> z);

// (mu + mu о (-id))/2: every atom is paired with its antipode at half
// weight, coincident atoms merged.  Energy-preserving for even kernels;
// canonicalizes minimizers that are unique only up to antipodal mass splits.
SphericalConfig antipodal_symmetrize(const SphericalConfig& config);

}  // namespace sphere
