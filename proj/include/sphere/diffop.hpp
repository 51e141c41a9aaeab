#pragma once

#include <span>
#include <string>
#include <vector>

namespace sphere {

// Verification of the closed forms for the Laplace-Beltrami operator and
// the iterated shifted operators D^(k) acting on g(x) = <x,y>^p.
//
// Dimension convention: the closed forms carry a latitudinal weight
// sin^{d-1}(theta), i.e. they describe the Laplacian of a sphere with d
// tangential directions.  The finite-difference stencils therefore act on
// S^d embedded in R^{d+1}; x and y are unit vectors with d+1 components.
// Under this convention every closed form below matches its stencil.

// Delta <x,y>^p = p(p-1) t^{p-2} - p(p+d-1) t^p at t = <x,y> > 0.
double lb_closed_form(double p, int d, double t);

// Second-order intrinsic stencil: geodesic second differences along an
// orthonormal tangent frame at x.  Requires <x,y> > h and h in [1e-4,1e-2].
double lb_finite_difference(double p, int d, std::span<const double> y,
                            std::span<const double> x, double h);

// D^(k) <x,y>^p = (prod_{j=0}^{2k} (p-j)) t^{p-2k-2}
//                 ((p-2k-1) - (p+d-2k-1) t^2); k = 0 reduces to the form
// above.  The shift constants are the ones that reproduce this display
// under the recursion Delta t^q -> q(q-1) t^{q-2} - q(q+d-1) t^q, namely
// shift_i = (p-2i+2)(p+d-2i+1) for the i-th factor from the inside.
double dk_closed_form(int k, double p, int d, double t);

struct DkValue {
  double value = 0.0;                // composed semi-analytic operator value
  double innermost_fd = 0.0;         // stencil value of the innermost Delta
  double innermost_closed = 0.0;     // its closed form
  double innermost_rel_residual = 0.0;
};

// Semi-analytic application: the factors act on the span of powers t^q
// through the recursion, which is exact; the innermost Delta application is
// additionally evaluated by the stencil and the residual reported.
DkValue dk_finite_difference(int k, double p, int d, std::span<const double> y,
                             std::span<const double> x, double h);

// Fully nested stencil path, provided for k <= 1 only (order-6 stencils
// lose all precision in doubles).
double dk_nested_fd(int k, double p, int d, std::span<const double> y,
                    std::span<const double> x, double h);

enum class SignVerdict { kNegative, kPositive, kIndeterminate };

struct SignScanCell {
  double p = 0.0;
  double t = 0.0;
  double closed_form = 0.0;
  double fd_value = 0.0;  // k <= 1: stencil; k >= 2: composed semi-analytic
  double rel_residual = 0.0;
  SignVerdict verdict = SignVerdict::kIndeterminate;
};

struct SignScanReport {
  int k = 0;
  int d = 0;
  double h = 0.0;
  double tol = 0.0;
  std::vector<SignScanCell> cells;
  double max_rel_residual = 0.0;
  int indeterminate_cells = 0;
  // sign claims: negative on p in (2k, 2k+1], positive on p in (2k-1, 2k)
  bool claims_hold = true;
  std::string to_json() const;
  std::string to_csv() const;
};

// Evaluates every (p, t) cell, takes the verdict from the closed form at
// absolute threshold tol, cross-checks against the fd/composed value, and
// validates the sign claims for the p ranges above.  Cells are independent
// and evaluated in parallel; assembly order is by cell index.
SignScanReport dk_sign_scan(int k, int d, const std::vector<double>& p_grid,
                            const std::vector<double>& t_grid, double tol, double h = 1e-3);

// Places x, y in R^{d+1} with <x,y> = t (deterministic coordinates).
std::vector<double> embedded_pair(int d, double t);  // 2 x (d+1) row-major

}  // namespace sphere
