#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "sphere/common.hpp"
#include "sphere/config.hpp"
#include "sphere/energy.hpp"

using namespace sphere;

namespace {

SphericalConfig random_config(int d, int n, Rng& rng) {
  std::vector<double> pts(static_cast<std::size_t>(n) * d);
  std::vector<double> ws(n);
  double mass = 0.0;
  for (int i = 0; i < n; ++i) {
    rng.sphere_point({pts.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)});
    ws[i] = rng.uniform();
    mass += ws[i];
  }
  for (double& w : ws) w /= mass;
  return SphericalConfig::create(d, std::move(pts), std::move(ws));
}

// random rotation by QR of a Gaussian matrix (oracle helper)
std::vector<double> random_rotation(int d, Rng& rng) {
  // Gram-Schmidt on Gaussian columns
  std::vector<std::vector<double>> cols(d, std::vector<double>(d));
  for (auto& c : cols) {
    for (double& x : c) x = rng.gaussian();
  }
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < i; ++j) {
      double ip = 0.0;
      for (int k = 0; k < d; ++k) ip += cols[i][k] * cols[j][k];
      for (int k = 0; k < d; ++k) cols[i][k] -= ip * cols[j][k];
    }
    double n2 = 0.0;
    for (double x : cols[i]) n2 += x * x;
    for (double& x : cols[i]) x /= std::sqrt(n2);
  }
  std::vector<double> rot(static_cast<std::size_t>(d) * d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) rot[static_cast<std::size_t>(r) * d + c] = cols[c][r];
  return rot;
}

SphericalConfig rotate(const SphericalConfig& cfg, const std::vector<double>& rot) {
  SphericalConfig out = cfg;
  for (int i = 0; i < cfg.size(); ++i) {
    const auto x = cfg.point(i);
    auto y = out.point_mut(i);
    for (int r = 0; r < cfg.d; ++r) {
      double s = 0.0;
      for (int c = 0; c < cfg.d; ++c) s += rot[static_cast<std::size_t>(r) * cfg.d + c] * x[c];
      y[r] = s;
    }
    // renormalize against rotation roundoff
    const double n = norm(y);
    for (double& v : y) v /= n;
  }
  return out;
}

}  // namespace

TEST_CASE("config invariants enforced") {
  CHECK_THROWS_AS(SphericalConfig::create(3, {1.0, 0.0, 0.0}, {0.5}), std::domain_error);
  CHECK_THROWS_AS(SphericalConfig::create(3, {2.0, 0.0, 0.0}, {1.0}), std::domain_error);
  CHECK_THROWS_AS(SphericalConfig::create(3, {}, {}), std::domain_error);
  CHECK_THROWS_AS(SphericalConfig::create(3, {1.0, 0.0, 0.0, 0.0, 1.0, 0.0}, {1.5, -0.5}),
                  std::domain_error);
  CHECK_NOTHROW(SphericalConfig::create(2, {1.0, 0.0, 0.0, 1.0}, {0.25, 0.75}));
}

TEST_CASE("builtin configurations") {
  SUBCASE("cross-polytope in R^4") {
    const auto c = builtin_config("cross-polytope", 4);
    REQUIRE(c.size() == 8);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < i; ++j) {
        const double g = dot(c.point(i), c.point(j));
        CHECK((std::fabs(g) < 1e-15 || std::fabs(g + 1.0) < 1e-15));
      }
  }
  SUBCASE("simplex Gram is -1/d") {
    for (int d : {2, 3, 5}) {
      const auto c = builtin_config("simplex", d);
      REQUIRE(c.size() == d + 1);
      for (int i = 0; i < c.size(); ++i)
        for (int j = 0; j < i; ++j)
          CHECK(dot(c.point(i), c.point(j)) == doctest::Approx(-1.0 / d).epsilon(1e-14));
    }
  }
  SUBCASE("hexagon Gram values") {
    const auto c = builtin_config("ngon:6", 2);
    REQUIRE(c.size() == 6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < i; ++j) {
        const double g = dot(c.point(i), c.point(j));
        const bool ok = std::fabs(g - 1.0) < 1e-12 || std::fabs(g + 1.0) < 1e-12 ||
                        std::fabs(g - 0.5) < 1e-12 || std::fabs(g + 0.5) < 1e-12;
        CHECK(ok);
      }
  }
  SUBCASE("icosahedron |Gram| values") {
    const auto c = builtin_config("icosahedron", 3);
    REQUIRE(c.size() == 12);
    const double inv_sqrt5 = 1.0 / std::sqrt(5.0);
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < i; ++j) {
        const double g = std::fabs(dot(c.point(i), c.point(j)));
        CHECK((std::fabs(g - 1.0) < 1e-12 || std::fabs(g - inv_sqrt5) < 1e-12));
      }
  }
  SUBCASE("unknown or incompatible names throw") {
    CHECK_THROWS_AS(builtin_config("dodecahedron", 3), std::domain_error);
    CHECK_THROWS_AS(builtin_config("icosahedron", 4), std::domain_error);
    CHECK_THROWS_AS(builtin_config("ngon:6", 3), std::domain_error);
  }
}

TEST_CASE("discrete_energy reference values") {
  // orthonormal basis of R^3 under t^2: only the d diagonal terms survive
  CHECK(discrete_energy(builtin_config("onb", 3), Kernel::parse("poly:0,0,1")) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  // single atom: the energy is f(1)
  const auto dirac = SphericalConfig::create(3, {0.0, 0.0, 1.0}, {1.0});
  CHECK(discrete_energy(dirac, Kernel::parse("pframe:3")) == doctest::Approx(1.0));
  CHECK(discrete_energy(dirac, Kernel::parse("causal:1.5")) ==
        doctest::Approx(Kernel::parse("causal:1.5")(1.0)));
  // regular hexagon under |t|^3: Gram values {1, +-1/2, -1}
  CHECK(discrete_energy(builtin_config("ngon:6", 2), Kernel::parse("pframe:3")) ==
        doctest::Approx(5.0 / 12.0).epsilon(1e-12));
}

TEST_CASE("serial and parallel energies agree bitwise") {
  Rng rng(11);
  for (int d : {2, 3, 4}) {
    for (int n : {1, 7, 33, 128}) {
      const auto cfg = random_config(d, n, rng);
      for (const char* lit : {"pframe:3", "pframe:2", "pframe:0.5", "poly:0.2,-1,0.3", "acute"}) {
        const Kernel kernel = Kernel::parse(lit);
        const double serial = discrete_energy_serial(cfg, kernel);
        const double parallel = discrete_energy(cfg, kernel);
        CHECK(serial == parallel);  // bit-identical by the row-sum contract
      }
    }
  }
}

TEST_CASE("energy is rotation invariant") {
  Rng rng(13);
  const Kernel kernel = Kernel::parse("pframe:3");
  for (int d : {2, 3, 4}) {
    const auto cfg = random_config(d, 20, rng);
    const double base = discrete_energy(cfg, kernel);
    for (int trial = 0; trial < 5; ++trial) {
      const auto rot = random_rotation(d, rng);
      CHECK(discrete_energy(rotate(cfg, rot), kernel) == doctest::Approx(base).epsilon(1e-12));
    }
  }
}

TEST_CASE("energy-potential identity") {
  Rng rng(17);
  for (const char* lit : {"pframe:3", "poly:1,-2,0,1"}) {
    const Kernel kernel = Kernel::parse(lit);
    const auto cfg = random_config(3, 25, rng);
    double via_potential = 0.0;
    for (int i = 0; i < cfg.size(); ++i)
      via_potential += cfg.weights[i] * potential(cfg, kernel, cfg.point(i));
    CHECK(via_potential == doctest::Approx(discrete_energy(cfg, kernel)).epsilon(1e-12));
  }
}

TEST_CASE("potential reference values") {
  const auto square = builtin_config("cross-polytope", 2);  // {+-e1, +-e2}
  const Kernel t2 = Kernel::parse("poly:0,0,1");
  Rng rng(23);
  std::vector<double> x(2);
  for (int trial = 0; trial < 10; ++trial) {
    rng.sphere_point(x);
    CHECK(potential(square, t2, x) == doctest::Approx(0.5).epsilon(1e-13));
  }
  const auto dirac = SphericalConfig::create(3, {0.0, 0.0, 1.0}, {1.0});
  CHECK(potential(dirac, Kernel::parse("pframe:2.5"), std::vector<double>{0.0, 0.0, 1.0}) ==
        doctest::Approx(1.0));
  CHECK(potential(dirac, Kernel::parse("pframe:2.5"), std::vector<double>{1.0, 0.0, 0.0}) ==
        doctest::Approx(0.0));
  CHECK_THROWS_AS(potential(dirac, t2, std::vector<double>{0.0, 0.0, 1.5}), std::domain_error);
}

TEST_CASE("potential_report") {
  const Kernel t2 = Kernel::parse("poly:0,0,1");
  SUBCASE("square potential is constant") {
    const auto rep = potential_report(builtin_config("cross-polytope", 2), t2, 500, 1);
    CHECK(rep.constancy_gap == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(rep.grid_min == doctest::Approx(0.5).epsilon(1e-13));
  }
  SUBCASE("dirac under |t|^3") {
    const auto dirac = SphericalConfig::create(3, {0.0, 0.0, 1.0}, {1.0});
    const auto rep = potential_report(dirac, Kernel::parse("pframe:3"), 20000, 2);
    CHECK(rep.support_max == doctest::Approx(1.0));
    CHECK(rep.grid_min < 1e-3);
    CHECK(rep.grid_min >= 0.0);
  }
  SUBCASE("constant kernel") {
    Rng rng(29);
    const auto cfg = random_config(3, 8, rng);
    const auto rep = potential_report(cfg, Kernel::parse("poly:1"), 100, 3);
    CHECK(rep.constancy_gap == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(rep.grid_min == doctest::Approx(1.0).epsilon(1e-13));
  }
  SUBCASE("deterministic given seed") {
    Rng rng(31);
    const auto cfg = random_config(4, 9, rng);
    const auto a = potential_report(cfg, t2, 333, 77);
    const auto b = potential_report(cfg, t2, 333, 77);
    CHECK(a.grid_min == b.grid_min);
    CHECK(a.support_min == b.support_min);
  }
}

TEST_CASE("spectral energy matches pairwise energy") {
  Rng rng(37);
  const Kernel t2 = Kernel::parse("poly:0,0,1");
  SUBCASE("t^2 on the orthonormal basis") {
    const auto exp = expand_kernel(t2, 3, 4);
    CHECK(spectral_energy(builtin_config("onb", 3), exp) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  }
  SUBCASE("matches discrete energy for polynomial kernels") {
    for (int d : {2, 3, 4}) {
      const Kernel kernel = Kernel::parse("poly:0.5,0,-1,0.25,0.7");
      const auto exp = expand_kernel(kernel, d, 6);
      const auto cfg = random_config(d, 15, rng);
      CHECK(spectral_energy(cfg, exp) ==
            doctest::Approx(discrete_energy(cfg, kernel)).epsilon(1e-10));
    }
  }
  SUBCASE("zero expansion and mass-only expansion") {
    const auto cfg = random_config(3, 6, rng);
    CHECK(spectral_energy(cfg, GegenbauerExpansion::from_coeffs(3, {0.0, 0.0})) == 0.0);
    CHECK(spectral_energy(cfg, GegenbauerExpansion::from_coeffs(3, {0.7})) ==
          doctest::Approx(0.7).epsilon(1e-14));
  }
  SUBCASE("dimension mismatch throws") {
    const auto cfg = random_config(3, 4, rng);
    CHECK_THROWS_AS(spectral_energy(cfg, GegenbauerExpansion::from_coeffs(4, {1.0})),
                    std::domain_error);
  }
}

TEST_CASE("symmetrize") {
  SUBCASE("antipodal pair folds to one atom") {
    const auto pair = SphericalConfig::create(3, {0.0, 0.0, 1.0, 0.0, 0.0, -1.0}, {0.5, 0.5});
    const std::vector<double> z{0.0, 0.0, 1.0};
    const auto folded = symmetrize(pair, z);
    REQUIRE(folded.size() == 1);
    CHECK(folded.weights[0] == doctest::Approx(1.0));
    CHECK(folded.point(0)[2] == doctest::Approx(1.0));
  }
  SUBCASE("open-hemisphere config is unchanged") {
    Rng rng(41);
    std::vector<double> pts;
    for (int i = 0; i < 6; ++i) {
      std::vector<double> x(3);
      rng.sphere_point(x);
      x[2] = std::fabs(x[2]) + 0.1;
      const double n = norm(x);
      for (double& v : x) v /= n;
      pts.insert(pts.end(), x.begin(), x.end());
    }
    const auto cfg = SphericalConfig::equal_weights(3, pts);
    const std::vector<double> z{0.0, 0.0, 1.0};
    const auto folded = symmetrize(cfg, z);
    REQUIRE(folded.size() == cfg.size());
    for (int i = 0; i < cfg.size(); ++i)
      CHECK(dot(folded.point(i), cfg.point(i)) == doctest::Approx(1.0));
  }
  SUBCASE("even kernels preserve energy") {
    const auto ico = builtin_config("icosahedron", 3);
    const Kernel p3 = Kernel::parse("pframe:3");
    const std::vector<double> z{ico.point(0).begin(), ico.point(0).end()};
    const auto folded = symmetrize(ico, z);
    CHECK(folded.size() == 6);  // antipodal pairs merge
    CHECK(discrete_energy(folded, p3) ==
          doctest::Approx(discrete_energy(ico, p3)).epsilon(1e-12));
    double mass = 0.0;
    for (double w : folded.weights) mass += w;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("equator atom is rejected with its index") {
    const auto cfg = SphericalConfig::create(3, {1.0, 0.0, 0.0, 0.0, 0.0, 1.0}, {0.5, 0.5});
    const std::vector<double> z{0.0, 0.0, 1.0};
    try {
      symmetrize(cfg, z);
      FAIL("expected domain_error");
    } catch (const std::domain_error& e) {
      CHECK(std::string(e.what()).find("atom 0") != std::string::npos);
    }
  }
}

TEST_CASE("antipodal symmetrization doubles hemispheric support") {
  const auto half = SphericalConfig::create(2, {1.0, 0.0, -0.5, std::sqrt(3.0) / 2.0},
                                            {2.0 / 3.0, 1.0 / 3.0});
  const auto full = antipodal_symmetrize(half);
  REQUIRE(full.size() == 4);
  const Kernel p3 = Kernel::parse("pframe:3");
  CHECK(discrete_energy(full, p3) == doctest::Approx(discrete_energy(half, p3)).epsilon(1e-12));
}

TEST_CASE("dirac bound for kernels minimized at t=1") {
  // f(t) = -t has min at t = 1 and every expansion coefficient below zero
  Rng rng(43);
  const Kernel neg_t = Kernel::parse("poly:0,-1");
  const auto dirac = SphericalConfig::create(3, {1.0, 0.0, 0.0}, {1.0});
  const double dirac_energy = discrete_energy(dirac, neg_t);
  CHECK(dirac_energy == doctest::Approx(-1.0));
  for (int trial = 0; trial < 60; ++trial) {
    const auto cfg = random_config(3, 2 + trial % 12, rng);
    CHECK(discrete_energy(cfg, neg_t) >= dirac_energy - 1e-12);
  }
}

TEST_CASE("two-point minimizer for alternating-sign expansions") {
  // synthetic coefficients with (-1)^(n+1) fhat_n > 0 for n >= 1
  const auto exp = GegenbauerExpansion::from_coeffs(3, {0.2, 0.5, -0.3, 0.2, -0.1});
  const Kernel kernel{expansion_to_polynomial(exp)};
  const double f1 = kernel(1.0), fm1 = kernel(-1.0);
  const auto pair =
      SphericalConfig::create(3, {0.0, 1.0, 0.0, 0.0, -1.0, 0.0}, {0.5, 0.5});
  const double pair_energy_value = discrete_energy(pair, kernel);
  CHECK(pair_energy_value == doctest::Approx((f1 + fm1) / 2.0).epsilon(1e-12));
  Rng rng(47);
  for (int trial = 0; trial < 60; ++trial) {
    const auto cfg = random_config(3, 2 + trial % 10, rng);
    CHECK(discrete_energy(cfg, kernel) >= pair_energy_value - 1e-12);
  }
}

TEST_CASE("config CSV and JSON round trips") {
  Rng rng(53);
  const auto cfg = random_config(3, 7, rng);
  const std::string path = "/tmp/sphere_test_config.csv";
  save_config_csv(cfg, path);
  const auto back = load_config(path);
  REQUIRE(back.size() == cfg.size());
  for (int i = 0; i < cfg.size(); ++i) {
    CHECK(back.weights[i] == cfg.weights[i]);
    for (int k = 0; k < 3; ++k) CHECK(back.point(i)[k] == cfg.point(i)[k]);
  }
  const auto back2 = config_from_json(config_to_json(cfg));
  CHECK(back2.size() == cfg.size());
  CHECK(load_config("builtin:icosahedron").size() == 12);
  CHECK(load_config("builtin:ngon:5").size() == 5);
}
