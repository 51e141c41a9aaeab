#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace sphere {

using SphereFunction = std::function<double(std::span<const double>)>;

// Orthonormal basis of the degree-n spherical harmonics H_n^d with respect
// to the normalized surface measure.  Closed forms for d = 2 (scaled
// cos/sin of multiples of the angle) and d = 3 (real spherical harmonics);
// for d >= 4 a frame of zonal kernels ((n+lambda)/lambda) C_n(<z_r, .>) at
// seeded random nodes is reduced to dim H_n^d members by pivoted Cholesky
// on its exact Gram (the addition formula gives the Gram in closed form)
// and then orthonormalized through the Cholesky factor.
struct HarmonicBasis {
  int d = 0;
  int degree = 0;
  std::vector<SphereFunction> functions;  // size dim H_n^d, orthonormal in L2(sigma)
};

// Throws numerical_error if the d >= 4 node draw stays rank-deficient after
// 3 retries.  seed only affects d >= 4.
HarmonicBasis harmonic_basis(int n, int d, std::uint64_t seed = 0);

}  // namespace sphere
