#include "sphere/gegenbauer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nlohmann/json.hpp"
#include "sphere/common.hpp"

namespace sphere {

namespace {

double lambda_of(int d) {
  if (d < 2) throw std::domain_error("dimension d must be >= 2");
  return (d - 2) / 2.0;
}

// C_n(t)/C_n(1) with the Chebyshev convention at lambda = 0; Q_n(1) = 1.
double normalized_gegenbauer(int n, double lambda, double t) {
  if (lambda == 0.0) return gegenbauer_eval(n, 0.0, t);
  return gegenbauer_eval(n, lambda, t) / gegenbauer_eval(n, lambda, 1.0);
}

// log of integral of (1-t^2)^{lambda-1/2} over [-1,1] = B(1/2, lambda+1/2)
double log_weight_mass(double lambda) {
  return std::lgamma(0.5) + std::lgamma(lambda + 0.5) - std::lgamma(lambda + 1.0);
}

}  // namespace

double gegenbauer_eval(int n, double lambda, double t) {
  if (n < 0) throw std::domain_error("gegenbauer_eval: n must be >= 0");
  if (lambda < 0.0) throw std::domain_error("gegenbauer_eval: lambda must be >= 0");
  if (std::fabs(t) > 1.0 + 1e-15) throw std::domain_error("gegenbauer_eval: |t| > 1");
  t = clamp_to_interval(t);
  if (n == 0) return 1.0;
  if (lambda == 0.0) {
    // T_n via the same recurrence shape
    double pm1 = 1.0, p = t;
    for (int k = 2; k <= n; ++k) {
      const double next = 2.0 * t * p - pm1;
      pm1 = p;
      p = next;
    }
    return p;
  }
  double pm1 = 1.0, p = 2.0 * lambda * t;
  for (int k = 2; k <= n; ++k) {
    const double next = (2.0 * (k + lambda - 1.0) * t * p - (k + 2.0 * lambda - 2.0) * pm1) / k;
    pm1 = p;
    p = next;
  }
  return p;
}

std::uint64_t harmonic_dim(int n, int d) {
  if (n < 0 || d < 2) throw std::domain_error("harmonic_dim: need n >= 0, d >= 2");
  if (n == 0) return 1;
  // binom(n+d-1, d-1) - binom(n+d-3, d-1), computed with overflow checks;
  // equals ((2n+d-2)/(n+d-2)) binom(n+d-2, d-2)
  auto binom = [](std::uint64_t n_, std::uint64_t k_) -> std::uint64_t {
    if (k_ > n_) return 0;
    k_ = std::min(k_, n_ - k_);
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k_; ++i) {
      std::uint64_t num = n_ - k_ + i, den = i;
      std::uint64_t g = std::gcd(r, den);
      r /= g;
      den /= g;
      g = std::gcd(num, den);
      num /= g;
      den /= g;  // r*num/i is an exact binomial, so den is now 1
      std::uint64_t t;
      if (den != 1 || __builtin_mul_overflow(r, num, &t))
        throw std::overflow_error("harmonic_dim: 64-bit overflow at n=" + std::to_string(n_));
      r = t;
    }
    return r;
  };
  const std::uint64_t a = binom(static_cast<std::uint64_t>(n) + d - 1, d - 1);
  const std::uint64_t b = binom(static_cast<std::uint64_t>(n) + d - 3, d - 1);
  return a - b;
}

QuadratureRule gauss_jacobi_rule(int m, double alpha, double beta) {
  if (m < 1) throw std::domain_error("gauss rule: m must be >= 1");
  if (alpha <= -1.0 || beta <= -1.0)
    throw std::domain_error("gauss rule: Jacobi parameters must exceed -1");

  // Golub-Welsch on the symmetric tridiagonal of the orthonormal recurrence
  const double ab = alpha + beta;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    double diag;
    if (k == 0)
      diag = (beta - alpha) / (ab + 2.0);
    else {
      const double den = (2.0 * k + ab) * (2.0 * k + ab + 2.0);
      diag = den == 0.0 ? 0.0 : (beta * beta - alpha * alpha) / den;
    }
    J(k, k) = diag;
    if (k >= 1) {
      double bk;
      if (k == 1)
        bk = 4.0 * (alpha + 1.0) * (beta + 1.0) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0));
      else {
        const double two = 2.0 * k + ab;
        bk = 4.0 * k * (k + alpha) * (k + beta) * (k + ab) /
             (two * two * (two + 1.0) * (two - 1.0));
      }
      J(k, k - 1) = J(k - 1, k) = std::sqrt(bk);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success) throw numerical_error("gauss rule: eigensolver failed");

  const double log_mu0 = (ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) +
                         std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0);
  const double mu0 = std::exp(log_mu0);

  QuadratureRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (int i = 0; i < m; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    const double q = es.eigenvectors()(0, i);
    rule.weights[i] = mu0 * q * q;
  }
  return rule;
}

QuadratureRule gauss_gegenbauer_rule(int m, double lambda) {
  if (lambda < 0.0) throw std::domain_error("gauss_gegenbauer_rule: lambda must be >= 0");
  return gauss_jacobi_rule(m, lambda - 0.5, lambda - 0.5);
}

GegenbauerExpansion GegenbauerExpansion::from_coeffs(int d, std::vector<double> coeffs,
                                                     double truncation_error_bound) {
  GegenbauerExpansion e;
  e.d = d;
  e.lambda = lambda_of(d);
  e.coeffs = std::move(coeffs);
  e.truncation_error_bound = truncation_error_bound;
  for (double c : e.coeffs)
    if (!std::isfinite(c)) throw std::domain_error("expansion: non-finite coefficient");
  return e;
}

double GegenbauerExpansion::eval(double t) const { return expansion_eval(*this, t); }

double expansion_eval(const GegenbauerExpansion& exp, double t) {
  if (std::fabs(t) > 1.0 + 1e-15) throw std::domain_error("expansion_eval: |t| > 1");
  t = clamp_to_interval(t);
  if (exp.coeffs.empty()) return 0.0;
  double acc = exp.coeffs[0];
  if (exp.coeffs.size() == 1) return acc;
  if (exp.lambda == 0.0) {
    double pm1 = 1.0, p = t;
    for (std::size_t n = 1; n < exp.coeffs.size(); ++n) {
      acc += exp.coeffs[n] * 2.0 * p;
      const double next = 2.0 * t * p - pm1;
      pm1 = p;
      p = next;
    }
    return acc;
  }
  const double lam = exp.lambda;
  double pm1 = 1.0, p = 2.0 * lam * t;  // C_n^lambda(t)
  for (std::size_t n = 1; n < exp.coeffs.size(); ++n) {
    acc += exp.coeffs[n] * ((static_cast<double>(n) + lam) / lam) * p;
    const double k = static_cast<double>(n + 1);
    const double next = (2.0 * (k + lam - 1.0) * t * p - (k + 2.0 * lam - 2.0) * pm1) / k;
    pm1 = p;
    p = next;
  }
  return acc;
}

namespace {

// integral of f(t) Q_n(t) nu(t) dt / integral of nu, on theta sub-intervals
// split at the kernel's kink points (t = cos theta).  Exponentially accurate
// on each smooth piece for every kernel variant.
std::vector<double> coeffs_by_theta_split(const Kernel& kernel, int d, int n_max, int m_quad) {
  const double lambda = lambda_of(d);
  std::vector<double> cuts_t = kernel.breakpoints();
  std::vector<double> theta_cuts{0.0};
  for (auto it = cuts_t.rbegin(); it != cuts_t.rend(); ++it) theta_cuts.push_back(std::acos(*it));
  theta_cuts.push_back(M_PI);

  const QuadratureRule gl = gauss_jacobi_rule(m_quad, 0.0, 0.0);  // Legendre on [-1,1]

  std::vector<double> num(static_cast<std::size_t>(n_max) + 1, 0.0);
  double den = 0.0;
  std::vector<double> qvals(static_cast<std::size_t>(n_max) + 1);
  for (std::size_t piece = 0; piece + 1 < theta_cuts.size(); ++piece) {
    const double a = theta_cuts[piece], b = theta_cuts[piece + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (b + a);
    for (int i = 0; i < m_quad; ++i) {
      const double theta = mid + half * gl.nodes[i];
      const double t = std::cos(theta);
      const double w = half * gl.weights[i] * std::pow(std::sin(theta), d - 2);
      const double fv = kernel(t);
      if (!std::isfinite(fv))
        throw numerical_error("expand_kernel: kernel not evaluable at t = " + std::to_string(t));
      for (int n = 0; n <= n_max; ++n) qvals[n] = normalized_gegenbauer(n, lambda, t);
      for (int n = 0; n <= n_max; ++n) num[n] += w * fv * qvals[n];
      den += w;
    }
  }
  for (auto& c : num) c /= den;
  return num;
}

// |t|^p route: substitute u = t^2, so that every even coefficient becomes a
// Gauss-Jacobi integral of a degree n/2 polynomial (odd coefficients vanish).
std::vector<double> coeffs_pframe(double p, int d, int n_max, int m_quad) {
  const double lambda = lambda_of(d);
  const double alpha = lambda - 0.5, beta = 0.5 * (p - 1.0);
  const int m = std::max(m_quad, n_max / 4 + 4);
  // rule for u^beta (1-u)^alpha on [0,1] via x = 2u-1
  const QuadratureRule jr = gauss_jacobi_rule(m, alpha, beta);
  std::vector<double> coeffs(static_cast<std::size_t>(n_max) + 1, 0.0);
  const double log_scale = -(alpha + beta + 1.0) * std::log(2.0);  // map [-1,1] -> [0,1]
  const double log_norm = log_weight_mass(lambda);
  for (int i = 0; i < m; ++i) {
    const double u = 0.5 * (jr.nodes[i] + 1.0);
    const double t = std::sqrt(u);
    const double w = jr.weights[i] * std::exp(log_scale - log_norm);
    for (int n = 0; n <= n_max; n += 2)
      coeffs[n] += w * normalized_gegenbauer(n, lambda, t);
  }
  return coeffs;
}

}  // namespace

GegenbauerExpansion expand_kernel(const Kernel& kernel, int d, int n_max, int m_quad) {
  if (n_max < 0) throw std::domain_error("expand_kernel: n_max must be >= 0");
  const int m = m_quad > 0 ? m_quad : std::max(64, 2 * n_max + 16);

  std::vector<double> coeffs;
  std::vector<double> coeffs_check;
  if (auto p = kernel.pframe_exponent()) {
    coeffs = coeffs_pframe(*p, d, n_max, m);
    coeffs_check = coeffs_pframe(*p, d, n_max, 2 * m);
  } else {
    coeffs = coeffs_by_theta_split(kernel, d, n_max, m);
    coeffs_check = coeffs_by_theta_split(kernel, d, n_max, 2 * m);
  }

  double stability = 0.0;
  for (std::size_t n = 0; n < coeffs.size(); ++n)
    stability = std::max(stability, std::fabs(coeffs[n] - coeffs_check[n]));

  GegenbauerExpansion e = GegenbauerExpansion::from_coeffs(d, std::move(coeffs_check));

  // reconstruction residual on a probe grid (includes the endpoints)
  double resid = 0.0;
  const int probes = 257;
  for (int i = 0; i < probes; ++i) {
    const double t = -1.0 + 2.0 * i / (probes - 1);
    resid = std::max(resid, std::fabs(kernel(t) - e.eval(t)));
  }
  e.truncation_error_bound = resid + stability;
  return e;
}

PDClassification classify_pd(const GegenbauerExpansion& exp, double tol) {
  double scale = 0.0;
  for (double c : exp.coeffs) scale = std::max(scale, std::fabs(c));
  const double resolved = tol > 0.0 ? tol : 1e-9 * std::max(1.0, scale);
  PDClassification out;
  out.tol = resolved;
  for (std::size_t n = 0; n < exp.coeffs.size(); ++n) {
    if (exp.coeffs[n] > resolved) out.n_plus.push_back(static_cast<int>(n));
    if (exp.coeffs[n] < -resolved) out.n_minus.push_back(static_cast<int>(n));
  }
  out.pd_up_to_constant = std::none_of(out.n_minus.begin(), out.n_minus.end(),
                                       [](int n) { return n >= 1; });
  return out;
}

double sigma_energy(const Kernel& kernel, int d, int m_quad) {
  if (d < 2) throw std::domain_error("sigma_energy: d must be >= 2");
  const int m = m_quad > 0 ? m_quad : 96;

  auto integrate = [&](int nodes) -> double {
    if (auto p = kernel.pframe_exponent()) {
      // closed-form-quality Jacobi quadrature in u = t^2
      const double lambda = lambda_of(d);
      const double alpha = lambda - 0.5, beta = 0.5 * (*p - 1.0);
      const QuadratureRule jr = gauss_jacobi_rule(std::max(nodes / 8, 4), alpha, beta);
      double s = 0.0;
      for (double w : jr.weights) s += w;
      const double log_scale = -(alpha + beta + 1.0) * std::log(2.0);
      return s * std::exp(log_scale - log_weight_mass(lambda));
    }
    std::vector<double> cuts_t = kernel.breakpoints();
    std::vector<double> theta{0.0};
    for (auto it = cuts_t.rbegin(); it != cuts_t.rend(); ++it) theta.push_back(std::acos(*it));
    theta.push_back(M_PI);
    const QuadratureRule gl = gauss_jacobi_rule(nodes, 0.0, 0.0);
    double num = 0.0, den = 0.0;
    for (std::size_t piece = 0; piece + 1 < theta.size(); ++piece) {
      const double half = 0.5 * (theta[piece + 1] - theta[piece]);
      const double mid = 0.5 * (theta[piece + 1] + theta[piece]);
      for (int i = 0; i < nodes; ++i) {
        const double th = mid + half * gl.nodes[i];
        const double w = half * gl.weights[i] * std::pow(std::sin(th), d - 2);
        num += w * kernel(std::cos(th));
        den += w;
      }
    }
    return num / den;
  };

  const double v1 = integrate(m);
  const double v2 = integrate(2 * m);
  if (std::fabs(v1 - v2) > std::max(1e-10, 1e-10 * std::fabs(v2)) * 100.0)
    throw numerical_error("sigma_energy: quadrature did not converge; estimate " +
                          std::to_string(v2) + ", doubled-node delta " +
                          std::to_string(std::fabs(v1 - v2)));
  return v2;
}

PolynomialT expansion_to_polynomial(const GegenbauerExpansion& exp) {
  const std::size_t n_terms = std::max<std::size_t>(exp.coeffs.size(), 1);
  std::vector<double> out(n_terms, 0.0);
  const double lam = exp.lambda;
  std::vector<double> cm1{1.0};                              // C_0
  std::vector<double> c{0.0, lam == 0.0 ? 1.0 : 2.0 * lam};  // C_1 (T_1 for d=2)
  for (std::size_t n = 0; n < exp.coeffs.size(); ++n) {
    double w;
    if (n == 0)
      w = exp.coeffs[0];
    else if (lam == 0.0)
      w = 2.0 * exp.coeffs[n];
    else
      w = exp.coeffs[n] * (static_cast<double>(n) + lam) / lam;
    const std::vector<double>& cn = (n == 0) ? cm1 : c;
    for (std::size_t i = 0; i < cn.size(); ++i) out[i] += w * cn[i];
    if (n >= 1 && n + 1 < exp.coeffs.size()) {
      const double k = static_cast<double>(n + 1);
      std::vector<double> next(n + 2, 0.0);
      const double a = lam == 0.0 ? 2.0 : 2.0 * (k + lam - 1.0) / k;
      const double b = lam == 0.0 ? 1.0 : (k + 2.0 * lam - 2.0) / k;
      for (std::size_t i = 0; i < c.size(); ++i) next[i + 1] += a * c[i];
      for (std::size_t i = 0; i < cm1.size(); ++i) next[i] -= b * cm1[i];
      cm1 = std::move(c);
      c = std::move(next);
    }
  }
  while (out.size() > 1 && out.back() == 0.0) out.pop_back();
  return PolynomialT{std::move(out)};
}

std::string GegenbauerExpansion::to_json() const {
  nlohmann::json j;
  j["d"] = d;
  j["lambda"] = lambda;
  j["coeffs"] = coeffs;
  j["tol"] = truncation_error_bound;
  j["normalization"] = d == 2 ? "chebyshev-d2" : "paper";
  return j.dump();
}

GegenbauerExpansion GegenbauerExpansion::from_json(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  GegenbauerExpansion e = from_coeffs(j.at("d").get<int>(),
                                      j.at("coeffs").get<std::vector<double>>(),
                                      j.value("tol", 0.0));
  return e;
}

}  // namespace sphere
