#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "sphere/common.hpp"
#include "sphere/config.hpp"
#include "sphere/witness.hpp"

using namespace sphere;

namespace {

Eigen::MatrixXd assemble_matrix(const WitnessReport& rep) {
  const int n = static_cast<int>(rep.u.size());
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double g = 0.0;
      for (int k = 0; k < rep.d; ++k)
        g += rep.points[static_cast<std::size_t>(i) * rep.d + k] *
             rep.points[static_cast<std::size_t>(j) * rep.d + k];
      a(i, j) = std::pow(std::fabs(clamp_to_interval(g)), rep.p);
    }
  return a;
}

}  // namespace

TEST_CASE("vandermonde kernel vector values") {
  const auto v1 = vandermonde_kernel_vector(1);
  REQUIRE(v1.size() == 3);
  CHECK(v1[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(v1[1] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(v1[2] == doctest::Approx(0.5).epsilon(1e-15));

  const auto v2 = vandermonde_kernel_vector(2);
  REQUIRE(v2.size() == 5);
  CHECK(v2[0] == doctest::Approx(1.0 / 24.0).epsilon(1e-15));
  CHECK(v2[1] == doctest::Approx(-1.0 / 6.0).epsilon(1e-15));
  CHECK(v2[2] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(v2[3] == doctest::Approx(-1.0 / 6.0).epsilon(1e-15));
  CHECK(v2[4] == doctest::Approx(1.0 / 24.0).epsilon(1e-15));

  CHECK_THROWS_AS(vandermonde_kernel_vector(0), std::domain_error);
  CHECK_THROWS_AS(vandermonde_kernel_vector(86), std::domain_error);
}

TEST_CASE("kernel vector annihilates low power sums") {
  for (int k = 1; k <= 10; ++k) {
    const auto v = vandermonde_kernel_vector(k);
    double sum_abs = 0.0;
    for (double x : v) sum_abs += std::fabs(x);
    for (int m = 0; m <= 2 * k - 1; ++m) {
      double s = 0.0;
      for (int j = 0; j <= 2 * k; ++j) s += std::pow(static_cast<double>(j), m) * v[j];
      CHECK(std::fabs(s) <= 1e-12 * sum_abs * std::pow(2.0 * k, m));
    }
    // the first non-annihilated moment is exactly 1; the cancellation noise
    // grows with the (2k)^2k-sized summands
    double s2k = 0.0;
    for (int j = 0; j <= 2 * k; ++j) s2k += std::pow(static_cast<double>(j), 2 * k) * v[j];
    CHECK(s2k == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("bp coefficient values and roots") {
  for (double p : {0.5, 1.0, 2.7, 5.5}) CHECK(bp_coefficient(1, p) == doctest::Approx(1.0));
  CHECK(std::fabs(bp_coefficient(2, 2.0)) < 1e-14);
  CHECK(bp_coefficient(2, 3.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  // closed form for k = 2: (2^p - 4) / 12
  for (double p : {0.5, 1.5, 3.5, 2.0})
    CHECK(bp_coefficient(2, p) ==
          doctest::Approx((std::pow(2.0, p) - 4.0) / 12.0).epsilon(1e-12));

  // identity with the kernel vector sum
  for (int k : {1, 2, 3, 5})
    for (double p : {0.75, 2.5, 4.25}) {
      const auto v = vandermonde_kernel_vector(k);
      double s = 0.0;
      for (int j = 0; j <= 2 * k; ++j)
        s += v[j] * std::pow(std::fabs(static_cast<double>(k - j)), p);
      CHECK(bp_coefficient(k, p) == doctest::Approx(s).epsilon(1e-12));
    }
}

TEST_CASE("bp root structure on the quarter grid") {
  for (int k = 1; k <= 5; ++k) {
    for (int i = 1; i < 8 * k; ++i) {
      const double p = 0.25 * i;
      const double b = bp_coefficient(k, p);
      const bool at_even_root =
          std::fabs(p - std::round(p)) < 1e-12 && static_cast<int>(std::round(p)) % 2 == 0 &&
          p >= 2.0 && p <= 2.0 * k - 2.0;
      if (at_even_root)
        CHECK(std::fabs(b) < 1e-9);
      else
        CHECK(std::fabs(b) > 1e-6);
    }
  }
}

TEST_CASE("witness points geometry") {
  const std::vector<double> z{1.0, 0.0, 0.0}, y{0.0, 1.0, 0.0};
  const double eps = 0.1;
  const auto pts = build_witness_points(z, y, 1, eps);
  REQUIRE(pts.size() == 4 * 3);
  // x_1 = z; <x_0, x_2> = cos(2 eps)
  CHECK(pts[3] == doctest::Approx(1.0));
  CHECK(pts[4] == doctest::Approx(0.0));
  double g02 = 0.0;
  for (int k = 0; k < 3; ++k) g02 += pts[k] * pts[6 + k];
  CHECK(g02 == doctest::Approx(std::cos(0.2)).epsilon(1e-14));
  // <y, x_j> = sin((j-k) eps), all atoms unit
  for (int j = 0; j <= 2; ++j) {
    double gy = 0.0, n2 = 0.0;
    for (int k = 0; k < 3; ++k) {
      gy += pts[static_cast<std::size_t>(j) * 3 + k] * y[k];
      n2 += pts[static_cast<std::size_t>(j) * 3 + k] * pts[static_cast<std::size_t>(j) * 3 + k];
    }
    CHECK(gy == doctest::Approx(std::sin((j - 1) * eps)).epsilon(1e-14));
    CHECK(std::sqrt(n2) == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(build_witness_points(z, z, 1, 0.1), std::domain_error);
  CHECK_THROWS_AS(build_witness_points(z, y, 1, 1.0), std::domain_error);  // >= pi/4
}

TEST_CASE("non_pd_witness succeeds off the even integers") {
  for (double p : {0.5, 1.0, 1.5, 3.0, 5.0, 6.5}) {
    for (int d : {2, 3}) {
      const auto rep = non_pd_witness(p, d);
      CHECK(rep.quadratic_form_value < -1e-12);
      CHECK(rep.k == static_cast<int>(std::ceil(p / 2.0)));
      CHECK(rep.eps > 0.0);
      CHECK(rep.eps < M_PI / (4.0 * rep.k));
      REQUIRE(rep.points.size() == static_cast<std::size_t>(2 * rep.k + 2) * d);
      REQUIRE(rep.u.size() == static_cast<std::size_t>(2 * rep.k + 2));

      // the report's value must be reproducible from its construction
      CHECK(std::fabs(witness_recompute_form(rep) - rep.quadratic_form_value) <
            1e-12 * std::max(1.0, std::fabs(rep.quadratic_form_value)));

      // for unamplified certificates the double-precision points recompute
      // the form directly; amplified ones sit below double resolution
      if (rep.alpha == 1.0) {
        const Eigen::MatrixXd a = assemble_matrix(rep);
        Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(rep.u.data(), rep.u.size());
        const double recomputed = u.dot(a * u);
        CHECK(std::fabs(recomputed - rep.quadratic_form_value) < 1e-12);
      }
    }
  }
}

TEST_CASE("non_pd_witness rejects even integer exponents") {
  for (double p : {2.0, 4.0, 6.0}) CHECK_THROWS_AS(non_pd_witness(p, 3), std::domain_error);
  CHECK_THROWS_AS(non_pd_witness(4.0 + 5e-10, 3), std::domain_error);
}

TEST_CASE("witness matrices for even powers are PSD") {
  const std::vector<double> z{1.0, 0.0}, y{0.0, 1.0};
  for (double p : {2.0, 4.0}) {
    const int k = static_cast<int>(p / 2) + 1;
    WitnessReport fake;
    fake.d = 2;
    fake.p = p;
    fake.u.assign(2 * k + 2, 0.0);
    fake.points = build_witness_points(z, y, k, 0.05);
    const Eigen::MatrixXd a = assemble_matrix(fake);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("first block flatness is O(eps^4k)") {
  // halving eps divides the block sum by at least 2^(4k-1)
  const std::vector<std::pair<int, double>> cases{{1, 1.5}, {2, 3.0}, {3, 5.0}};
  const std::vector<double> eps0{0.1, 0.1, 0.05};
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto [k, p] = cases[i];
    const double q1 = witness_first_block_sum(p, k, eps0[i]);
    const double q2 = witness_first_block_sum(p, k, eps0[i] / 2.0);
    CHECK(std::fabs(q1) / std::fabs(q2) >= std::pow(2.0, 4 * k - 1));
  }
}

TEST_CASE("hadamard power bound") {
  {
    const auto [n_min, ok] = hadamard_power_bound(3.0);
    CHECK(n_min == 4);
    CHECK(ok);  // construction uses 2k+2 = 6 >= 4
  }
  {
    const auto [n_min, ok] = hadamard_power_bound(1.0);
    CHECK(n_min == 3);
    CHECK(ok);  // 4 >= 3
  }
  {
    const auto [n_min, ok] = hadamard_power_bound(0.0);
    CHECK(n_min == 2);  // boundary value of the formula
    CHECK(ok);
  }
}

TEST_CASE("witness-support conflict detection") {
  const auto rep = non_pd_witness(3.0, 2);
  SUBCASE("a genuine minimizer never contains the witness points") {
    const auto hexagon = builtin_config("ngon:6", 2);
    CHECK_FALSE(witness_support_conflict(hexagon, rep, 1e-6).has_value());
  }
  SUBCASE("a fake support holding all witness points is flagged") {
    std::vector<double> pts = rep.points;
    const int n = static_cast<int>(rep.u.size());
    const auto fake =
        SphericalConfig::create(2, std::move(pts), std::vector<double>(n, 1.0 / n));
    // geodesic distances of coincident unit doubles resolve to ~sqrt(eps)
    const auto conflict = witness_support_conflict(fake, rep, 1e-6);
    REQUIRE(conflict.has_value());
    CHECK(static_cast<int>(conflict->size()) == n);
  }
}
