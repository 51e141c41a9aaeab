#include "sphere/witness.hpp"

#include <quadmath.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "sphere/common.hpp"

namespace sphere {

namespace {

constexpr int kMaxK = 85;  // beyond this 1/(2k)! leaves the normal double range

std::vector<__float128> kernel_vector_quad(int k) {
  if (k < 1) throw std::domain_error("witness: k must be >= 1");
  if (k > kMaxK)
    throw std::domain_error("witness: k > " + std::to_string(kMaxK) +
                            " exceeds the double-precision factorial range");
  std::vector<__float128> fact(2 * k + 1);
  fact[0] = 1;
  for (int i = 1; i <= 2 * k; ++i) fact[i] = fact[i - 1] * i;
  std::vector<__float128> v(2 * k + 1);
  for (int j = 0; j <= 2 * k; ++j) {
    v[j] = 1 / (fact[2 * k - j] * fact[j]);
    if (j % 2 == 1) v[j] = -v[j];
  }
  return v;
}

struct QuadForm {
  __float128 q;  // v^T A_11 v on the great-circle block
  __float128 c;  // v^T [ |<x_j, y>|^p ]_j
};

QuadForm evaluate_form(double p, int k, double eps) {
  const std::vector<__float128> v = kernel_vector_quad(k);
  const __float128 pe = p;
  const __float128 e = eps;
  // the construction's Gram is known in closed form on the great circle
  std::vector<__float128> cospow(2 * k + 1), sinpow(2 * k + 1);
  for (int delta = 0; delta <= 2 * k; ++delta) {
    cospow[delta] = powq(fabsq(cosq(delta * e)), pe);
    sinpow[delta] = powq(fabsq(sinq(delta * e)), pe);
  }
  QuadForm f{0, 0};
  for (int i = 0; i <= 2 * k; ++i)
    for (int j = 0; j <= 2 * k; ++j) f.q += v[i] * v[j] * cospow[std::abs(i - j)];
  for (int j = 0; j <= 2 * k; ++j) f.c += v[j] * sinpow[std::abs(j - k)];
  return f;
}

// conservative absolute noise bound for the extended-precision form value
double form_noise_bound(int k) {
  double sum_abs_v = 0.0;
  const auto v = vandermonde_kernel_vector(k);
  for (double x : v) sum_abs_v += std::fabs(x);
  const double n = 2.0 * k + 1.0;
  return sum_abs_v * sum_abs_v * n * n * 1e-32;
}

}  // namespace

std::vector<double> vandermonde_kernel_vector(int k) {
  const auto vq = kernel_vector_quad(k);
  std::vector<double> v(vq.size());
  for (std::size_t i = 0; i < vq.size(); ++i) v[i] = static_cast<double>(vq[i]);
  return v;
}

double bp_coefficient(int k, double p) {
  if (k < 1) throw std::domain_error("bp_coefficient: k must be >= 1");
  if (!(p > 0.0)) throw std::domain_error("bp_coefficient: p must be > 0");
  const auto v = kernel_vector_quad(k);
  __float128 b = 0;
  for (int j = 0; j < k; ++j) b += v[j] * powq(static_cast<__float128>(k - j), p);
  return static_cast<double>(2 * b);
}

std::vector<double> build_witness_points(std::span<const double> z, std::span<const double> y,
                                         int k, double eps) {
  const int d = static_cast<int>(z.size());
  if (static_cast<int>(y.size()) != d)
    throw std::domain_error("witness points: z and y dimensions differ");
  if (std::fabs(dot(z, y)) >= 1e-12)
    throw std::domain_error("witness points: z and y must be orthogonal");
  if (std::fabs(norm(z) - 1.0) > kUnitTol || std::fabs(norm(y) - 1.0) > kUnitTol)
    throw std::domain_error("witness points: z and y must be unit vectors");
  if (k < 1) throw std::domain_error("witness points: k must be >= 1");
  if (!(eps > 0.0 && eps < M_PI / (4.0 * k)))
    throw std::domain_error("witness points: eps must lie in (0, pi/(4k))");

  std::vector<double> pts(static_cast<std::size_t>(2 * k + 2) * d);
  for (int j = 0; j <= 2 * k; ++j) {
    const double a = (j - k) * eps;
    const double ca = std::cos(a), sa = std::sin(a);
    for (int m = 0; m < d; ++m)
      pts[static_cast<std::size_t>(j) * d + m] = ca * z[m] + sa * y[m];
  }
  for (int m = 0; m < d; ++m) pts[static_cast<std::size_t>(2 * k + 1) * d + m] = y[m];
  return pts;
}

WitnessReport non_pd_witness(double p, int d, double eps, std::span<const double> z,
                             std::span<const double> y) {
  if (!(p > 0.0)) throw std::domain_error("witness: p must be > 0");
  if (d < 2) throw std::domain_error("witness: d must be >= 2");
  const double nearest_even = 2.0 * std::round(p / 2.0);
  if (std::fabs(p - nearest_even) <= 1e-9)
    throw std::domain_error("witness: p is an even integer; |t|^p is positive definite");

  const int k = static_cast<int>(std::ceil(p / 2.0));  // 2k-2 < p < 2k

  std::vector<double> zv(d, 0.0), yv(d, 0.0);
  if (!z.empty()) {
    zv.assign(z.begin(), z.end());
    yv.assign(y.begin(), y.end());
    if (static_cast<int>(zv.size()) != d || static_cast<int>(yv.size()) != d)
      throw std::domain_error("witness: z/y dimension mismatch");
  } else {
    zv[0] = 1.0;
    yv[1] = 1.0;
  }

  const double eps_hi = M_PI / (4.0 * k);
  double eps0 = eps > 0.0 ? eps : 0.8 * eps_hi;
  if (!(eps0 > 0.0 && eps0 < eps_hi))
    throw std::domain_error("witness: eps must lie in (0, pi/(4k))");

  const double noise = form_noise_bound(k);
  const int max_shrinks = 20;
  for (int shrink = 0; shrink <= max_shrinks; ++shrink) {
    const double e = eps0 * std::pow(0.5, shrink);
    const QuadForm f = evaluate_form(p, k, e);
    const __float128 val = f.q - f.c * f.c;
    const double val_d = static_cast<double>(val);
    // sign certification against the extended-precision noise floor; the
    // magnitude is restored by rescaling the test vector afterwards
    if (val_d < 0.0 && std::fabs(val_d) > 64.0 * noise) {
      WitnessReport rep;
      rep.k = k;
      rep.p = p;
      rep.d = d;
      rep.eps = e;
      rep.shrink_steps = shrink;
      rep.points = build_witness_points(zv, yv, k, e);
      rep.first_block_term = static_cast<double>(f.q);
      rep.cross_term = static_cast<double>(f.c);
      // amplify the certified direction so the certificate is robustly
      // negative; scaling (alpha, beta) leaves the sign unchanged
      double alpha = 1.0;
      if (val_d > -1e-8) alpha = std::min(std::sqrt(1e-8 / -val_d), 1e10);
      const double beta = -static_cast<double>(f.c) * alpha;
      rep.alpha = alpha;
      rep.beta = beta;
      const auto v = vandermonde_kernel_vector(k);
      rep.u.resize(2 * k + 2);
      for (int j = 0; j <= 2 * k; ++j) rep.u[j] = alpha * v[j];
      rep.u[2 * k + 1] = beta;
      // u^T A u = alpha^2 q + 2 alpha beta c + beta^2, on the analytic Gram
      const __float128 a = alpha, b = beta;
      rep.quadratic_form_value = static_cast<double>(a * a * f.q + 2 * a * b * f.c + b * b);
      return rep;
    }
  }
  throw numerical_error(
      "witness: no certified negative form value after " + std::to_string(max_shrinks) +
      " halvings (p = " + std::to_string(p) + ", k = " + std::to_string(k) + ")");
}

double witness_recompute_form(const WitnessReport& report) {
  const QuadForm f = evaluate_form(report.p, report.k, report.eps);
  const __float128 a = report.alpha, b = report.beta;
  return static_cast<double>(a * a * f.q + 2 * a * b * f.c + b * b);
}

std::pair<int, bool> hadamard_power_bound(double p) {
  if (p < 0.0) throw std::domain_error("hadamard_power_bound: p must be >= 0");
  const int n_min = static_cast<int>(std::ceil(2.0 + p / 2.0 - 1e-12));
  const int k = std::max(1, static_cast<int>(std::ceil(p / 2.0)));
  return {n_min, 2 * k + 2 >= n_min};
}

double witness_first_block_sum(double p, int k, double eps) {
  return static_cast<double>(evaluate_form(p, k, eps).q);
}

std::optional<std::vector<int>> witness_support_conflict(const SphericalConfig& config,
                                                         const WitnessReport& report,
                                                         double tol) {
  if (report.quadratic_form_value >= 0.0) return std::nullopt;
  if (config.d != report.d) throw std::domain_error("witness_support_conflict: dimension mismatch");
  const int n_pts = static_cast<int>(report.u.size());
  std::vector<int> nearest(n_pts, -1);
  for (int i = 0; i < n_pts; ++i) {
    std::span<const double> x{report.points.data() + static_cast<std::size_t>(i) * config.d,
                              static_cast<std::size_t>(config.d)};
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < config.size(); ++j) {
      const double dist = geodesic_distance(x, config.point(j));
      if (dist < best) {
        best = dist;
        nearest[i] = j;
      }
    }
    if (best > tol) return std::nullopt;  // some witness point escapes the support
  }
  return nearest;
}

}  // namespace sphere
