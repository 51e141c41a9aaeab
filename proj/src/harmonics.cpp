#include "sphere/harmonics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "sphere/common.hpp"
#include "sphere/gegenbauer.hpp"

namespace sphere {

namespace {

// ---- d = 2: sqrt(2) cos(n theta), sqrt(2) sin(n theta) ----

std::vector<SphereFunction> circle_basis(int n) {
  if (n == 0) return {[](std::span<const double>) { return 1.0; }};
  return {
      [n](std::span<const double> x) {
        return std::sqrt(2.0) * std::cos(n * std::atan2(x[1], x[0]));
      },
      [n](std::span<const double> x) {
        return std::sqrt(2.0) * std::sin(n * std::atan2(x[1], x[0]));
      },
  };
}

// ---- d = 3: real spherical harmonics, orthonormal under sigma ----
//
// With z = cos(theta), the normalized associated Legendre function
// Pbar_n^m = sqrt((2n+1)(n-m)!/(n+m)!) P_n^m (no Condon-Shortley phase)
// gives Y_{n,0} = Pbar_n^0 and Y_{n,m} = sqrt(2) Pbar_n^m {cos,sin}(m phi).
// Then sum_j Y_j(x) Y_j(y) = (2n+1) P_n(<x,y>).

double assoc_legendre_norm(int n, int m, double z) {
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  double pmm = 1.0;  // Pbar_0^0
  for (int k = 1; k <= m; ++k) pmm *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s;
  if (n == m) return pmm;
  double pl_m1 = pmm;
  double pl = std::sqrt(2.0 * m + 3.0) * z * pmm;  // Pbar_{m+1}^m
  for (int l = m + 2; l <= n; ++l) {
    const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
    const double b = std::sqrt(((l - 1.0) * (l - 1.0) - static_cast<double>(m) * m) /
                               (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
    const double next = a * (z * pl - b * pl_m1);
    pl_m1 = pl;
    pl = next;
  }
  return pl;
}

std::vector<SphereFunction> s2_basis(int n) {
  std::vector<SphereFunction> fs;
  fs.reserve(2 * n + 1);
  fs.push_back([n](std::span<const double> x) { return assoc_legendre_norm(n, 0, x[2]); });
  for (int m = 1; m <= n; ++m) {
    fs.push_back([n, m](std::span<const double> x) {
      const double rxy = std::hypot(x[0], x[1]);
      if (rxy < 1e-300) return 0.0;
      return std::sqrt(2.0) * assoc_legendre_norm(n, m, x[2]) *
             std::cos(m * std::atan2(x[1], x[0]));
    });
    fs.push_back([n, m](std::span<const double> x) {
      const double rxy = std::hypot(x[0], x[1]);
      if (rxy < 1e-300) return 0.0;
      return std::sqrt(2.0) * assoc_legendre_norm(n, m, x[2]) *
             std::sin(m * std::atan2(x[1], x[0]));
    });
  }
  return fs;
}

// ---- d >= 4: orthonormalized zonal frame ----

struct ZonalFrame {
  int d, n;
  double lambda;
  std::vector<double> nodes;        // a_n selected nodes, row-major
  Eigen::MatrixXd linv;             // inverse Cholesky factor of their Gram

  double zonal(std::span<const double> y, int r) const {
    const double* z = nodes.data() + static_cast<std::size_t>(r) * d;
    double g = 0.0;
    for (int k = 0; k < d; ++k) g += z[k] * y[k];
    return ((n + lambda) / lambda) * gegenbauer_eval(n, lambda, clamp_to_interval(g));
  }

  double eval(std::span<const double> y, int j) const {
    // psi_j = sum_r linv(j,r) phi_r, orthonormal because the Gram is exact
    double s = 0.0;
    for (int r = 0; r < linv.cols(); ++r) s += linv(j, r) * zonal(y, r);
    return s;
  }
};

std::vector<SphereFunction> frame_basis(int n, int d, std::uint64_t seed) {
  const double lambda = (d - 2) / 2.0;
  const int dim = static_cast<int>(harmonic_dim(n, d));
  const int n_draw = 2 * dim;

  for (int attempt = 0; attempt < 3; ++attempt) {
    Rng rng = Rng::for_stream(seed, 7000 + attempt);
    std::vector<double> draw(static_cast<std::size_t>(n_draw) * d);
    for (int r = 0; r < n_draw; ++r)
      rng.sphere_point({draw.data() + static_cast<std::size_t>(r) * d, static_cast<std::size_t>(d)});

    // exact Gram from the addition formula: <phi_r, phi_s> = a_n Q_n(<z_r,z_s>)
    auto gram_entry = [&](int r, int s) {
      const double* zr = draw.data() + static_cast<std::size_t>(r) * d;
      const double* zs = draw.data() + static_cast<std::size_t>(s) * d;
      double g = 0.0;
      for (int k = 0; k < d; ++k) g += zr[k] * zs[k];
      return ((n + lambda) / lambda) * gegenbauer_eval(n, lambda, clamp_to_interval(g));
    };
    Eigen::MatrixXd G(n_draw, n_draw);
    for (int r = 0; r < n_draw; ++r)
      for (int s = 0; s < n_draw; ++s) G(r, s) = gram_entry(r, s);

    // pivoted Cholesky to select dim well-conditioned nodes
    std::vector<int> pivot(n_draw);
    for (int i = 0; i < n_draw; ++i) pivot[i] = i;
    Eigen::MatrixXd A = G;
    std::vector<int> chosen;
    for (int step = 0; step < dim; ++step) {
      int best = step;
      for (int i = step + 1; i < n_draw; ++i)
        if (A(pivot[i], pivot[i]) > A(pivot[best], pivot[best])) best = i;
      std::swap(pivot[step], pivot[best]);
      const int pk = pivot[step];
      if (A(pk, pk) < 1e-10 * G.diagonal().maxCoeff()) break;
      chosen.push_back(pk);
      for (int i = step + 1; i < n_draw; ++i) {
        const int pi = pivot[i];
        for (int j = step + 1; j < n_draw; ++j) {
          const int pj = pivot[j];
          A(pi, pj) -= A(pi, pk) * A(pj, pk) / A(pk, pk);
        }
      }
    }
    if (static_cast<int>(chosen.size()) < dim) continue;

    auto frame = std::make_shared<ZonalFrame>();
    frame->d = d;
    frame->n = n;
    frame->lambda = lambda;
    for (int r : chosen) {
      const double* z = draw.data() + static_cast<std::size_t>(r) * d;
      frame->nodes.insert(frame->nodes.end(), z, z + d);
    }
    Eigen::MatrixXd Gs(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int s = 0; s < dim; ++s) Gs(r, s) = gram_entry(chosen[r], chosen[s]);
    Eigen::LLT<Eigen::MatrixXd> llt(Gs);
    if (llt.info() != Eigen::Success) continue;
    frame->linv =
        llt.matrixL().solve(Eigen::MatrixXd::Identity(dim, dim));  // L^{-1}

    std::vector<SphereFunction> fs;
    fs.reserve(dim);
    for (int j = 0; j < dim; ++j)
      fs.push_back([frame, j](std::span<const double> y) { return frame->eval(y, j); });
    return fs;
  }
  throw numerical_error("harmonic_basis: node sampling stayed rank-deficient after 3 retries");
}

}  // namespace

HarmonicBasis harmonic_basis(int n, int d, std::uint64_t seed) {
  if (n < 0 || d < 2) throw std::domain_error("harmonic_basis: need n >= 0, d >= 2");
  HarmonicBasis basis;
  basis.d = d;
  basis.degree = n;
  if (n == 0) {
    basis.functions = {[](std::span<const double>) { return 1.0; }};
    return basis;
  }
  if (d == 2)
    basis.functions = circle_basis(n);
  else if (d == 3)
    basis.functions = s2_basis(n);
  else
    basis.functions = frame_basis(n, d, seed);
  return basis;
}

}  // namespace sphere
