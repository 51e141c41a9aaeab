#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "sphere/common.hpp"
#include "sphere/diffop.hpp"

using namespace sphere;

namespace {

struct Pair {
  std::vector<double> x, y;
};

Pair pair_at(int d, double t) {
  const auto flat = embedded_pair(d, t);
  Pair out;
  out.x.assign(flat.begin(), flat.begin() + d + 1);
  out.y.assign(flat.begin() + d + 1, flat.end());
  return out;
}

}  // namespace

TEST_CASE("lb_closed_form reference values") {
  CHECK(lb_closed_form(2.0, 3, 0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(lb_closed_form(1.0, 3, 0.4) == doctest::Approx(-1.2).epsilon(1e-14));
  for (int d : {2, 3, 5, 9})
    CHECK(lb_closed_form(2.0, d, 1.0) == doctest::Approx(-2.0 * d).epsilon(1e-14));
  CHECK_THROWS_AS(lb_closed_form(2.0, 3, 0.0), std::domain_error);
  CHECK_THROWS_AS(lb_closed_form(2.0, 3, -0.5), std::domain_error);
}

TEST_CASE("stencil matches the closed form") {
  // the frozen convention: d tangential directions, so FD lives on S^d
  const auto [x, y] = pair_at(3, 0.6);
  const double fd = lb_finite_difference(3.0, 3, y, x, 1e-3);
  const double cf = lb_closed_form(3.0, 3, 0.6);
  CHECK(std::fabs(fd - cf) / std::fabs(cf) < 5e-3);

  Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 4);
    const double p = rng.uniform(0.5, 6.0);
    const double t = rng.uniform(0.15, 0.95);
    const auto pr = pair_at(d, t);
    const double v_fd = lb_finite_difference(p, d, pr.y, pr.x, 1e-3);
    const double v_cf = lb_closed_form(p, d, t);
    CHECK(std::fabs(v_fd - v_cf) / std::max(1.0, std::fabs(v_cf)) < 5e-3);
  }
}

TEST_CASE("stencil annihilates constants and reproduces the degree-1 eigenvalue") {
  const auto [x, y] = pair_at(3, 0.5);
  // p = 0 is the constant function
  CHECK(std::fabs(lb_finite_difference(0.0, 3, y, x, 1e-3)) < 1e-10);
  // linear g = <x,y>: eigenfunction of the operator with eigenvalue -d in
  // this convention, matching the closed form at p = 1
  for (int d : {2, 3, 4}) {
    const auto pr = pair_at(d, 0.5);
    const double fd = lb_finite_difference(1.0, d, pr.y, pr.x, 1e-3);
    CHECK(fd == doctest::Approx(-d * 0.5).epsilon(5e-3));
    CHECK(fd == doctest::Approx(lb_closed_form(1.0, d, 0.5)).epsilon(5e-3));
  }
}

TEST_CASE("stencil is second order in h") {
  const std::vector<std::tuple<double, int, double>> cells{
      {3.5, 3, 0.6}, {2.5, 4, 0.5}, {4.5, 2, 0.7}, {1.5, 5, 0.4}};
  for (const auto& [p, d, t] : cells) {
    const auto pr = pair_at(d, t);
    const double cf = lb_closed_form(p, d, t);
    const double r1 = std::fabs(lb_finite_difference(p, d, pr.y, pr.x, 1e-3) - cf);
    const double r2 = std::fabs(lb_finite_difference(p, d, pr.y, pr.x, 2.5e-4) - cf);
    const double factor = r1 / r2;
    CHECK(factor >= 8.0);
    CHECK(factor <= 32.0);
  }
}

TEST_CASE("preconditions of the stencil") {
  const auto [x, y] = pair_at(3, 0.5);
  CHECK_THROWS_AS(lb_finite_difference(3.0, 3, y, x, 1e-5), std::domain_error);
  CHECK_THROWS_AS(lb_finite_difference(3.0, 3, y, x, 0.5), std::domain_error);
  const auto close = pair_at(3, 0.0005);
  CHECK_THROWS_AS(lb_finite_difference(3.0, 3, close.y, close.x, 1e-3), std::domain_error);
  std::vector<double> bad = x;
  bad[0] += 0.1;
  CHECK_THROWS_AS(lb_finite_difference(3.0, 3, y, bad, 1e-3), std::domain_error);
}

TEST_CASE("dk_closed_form") {
  SUBCASE("k = 0 reduces to the single Laplacian") {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
      const double p = rng.uniform(0.2, 7.0);
      const int d = 2 + static_cast<int>(rng.next_u64() % 5);
      const double t = rng.uniform(0.05, 1.0);
      CHECK(dk_closed_form(0, p, d, t) ==
            doctest::Approx(lb_closed_form(p, d, t)).epsilon(1e-12));
    }
  }
  SUBCASE("k = 1, p = 3, d = 3 gives -18t") {
    for (double t : {0.2, 0.5, 0.9, 1.0})
      CHECK(dk_closed_form(1, 3.0, 3, t) == doctest::Approx(-18.0 * t).epsilon(1e-12));
  }
  SUBCASE("integer p in 0..2k zeroes the product factor") {
    for (int k : {1, 2, 3})
      for (int p = 0; p <= 2 * k; ++p)
        CHECK(dk_closed_form(k, static_cast<double>(p), 3, 0.7) == doctest::Approx(0.0));
  }
  SUBCASE("boundary values of the bracket: value at t=1 is -d times the product") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      const int k = static_cast<int>(rng.next_u64() % 4);
      const double p = rng.uniform(0.3, 2.0 * k + 1.5);
      const int d = 2 + static_cast<int>(rng.next_u64() % 4);
      double prod = 1.0;
      for (int j = 0; j <= 2 * k; ++j) prod *= (p - j);
      CHECK(dk_closed_form(k, p, d, 1.0) == doctest::Approx(-d * prod).epsilon(1e-11));
    }
  }
}

TEST_CASE("composed semi-analytic operator equals the closed form") {
  Rng rng(9);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = static_cast<int>(rng.next_u64() % 4);
    const double p = rng.uniform(0.5, 7.5);
    const int d = 2 + static_cast<int>(rng.next_u64() % 4);
    const double t = rng.uniform(0.2, 0.95);
    const auto pr = pair_at(d, t);
    const auto dk = dk_finite_difference(k, p, d, pr.y, pr.x, 1e-3);
    CHECK(dk.value ==
          doctest::Approx(dk_closed_form(k, p, d, t)).epsilon(1e-10));
    CHECK(dk.innermost_rel_residual < 5e-3);
  }
}

TEST_CASE("nested stencil paths") {
  const auto [x, y] = pair_at(3, 0.6);
  // k = 0 nested path is the plain stencil
  CHECK(dk_nested_fd(0, 3.0, 3, y, x, 1e-3) ==
        doctest::Approx(lb_finite_difference(3.0, 3, y, x, 1e-3)).epsilon(1e-14));
  // k = 1 nested stencil approaches the closed form (noisier by h^-2)
  const double nested = dk_nested_fd(1, 3.5, 3, y, x, 2e-3);
  const double cf = dk_closed_form(1, 3.5, 3, 0.6);
  CHECK(std::fabs(nested - cf) / std::fabs(cf) < 5e-2);
  CHECK_THROWS_AS(dk_nested_fd(2, 5.0, 3, y, x, 1e-3), std::domain_error);
}

TEST_CASE("k = 2 sign sample") {
  CHECK(dk_finite_difference(2, 4.5, 3, pair_at(3, 0.7).y, pair_at(3, 0.7).x, 1e-3).value < 0.0);
}

TEST_CASE("dk_sign_scan verdicts") {
  std::vector<double> ts;
  for (int i = 1; i <= 10; ++i) ts.push_back(0.1 * i);

  SUBCASE("k = 1 negative band") {
    const auto rep = dk_sign_scan(1, 3, {2.25, 2.5, 3.0}, ts, 1e-12);
    CHECK(rep.claims_hold);
    CHECK(rep.indeterminate_cells == 0);
    for (const auto& cell : rep.cells) CHECK(cell.verdict == SignVerdict::kNegative);
  }
  SUBCASE("k = 1 positive band") {
    const auto rep = dk_sign_scan(1, 3, {1.25, 1.75}, ts, 1e-12);
    CHECK(rep.claims_hold);
    for (const auto& cell : rep.cells) CHECK(cell.verdict == SignVerdict::kPositive);
  }
  SUBCASE("k = 0 band is negative for every d") {
    for (int d : {2, 3, 4, 5}) {
      const auto rep = dk_sign_scan(0, d, {0.25, 0.5, 0.75, 1.0}, ts, 1e-12);
      CHECK(rep.claims_hold);
      CHECK(rep.indeterminate_cells == 0);
      for (const auto& cell : rep.cells) CHECK(cell.verdict == SignVerdict::kNegative);
    }
  }
  SUBCASE("csv and json render") {
    const auto rep = dk_sign_scan(1, 3, {2.5}, {0.5}, 1e-12);
    CHECK(rep.to_csv().find("negative") != std::string::npos);
    CHECK(rep.to_json().find("\"claims_hold\":true") != std::string::npos);
  }
}
