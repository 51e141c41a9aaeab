#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sphere {

// Thrown when an algorithm fails numerically (stalls, non-finite values,
// failed convergence) as opposed to being fed invalid input.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kUnitTol = 1e-12;     // unit-norm slack for sphere points
inline constexpr double kWeightTol = 1e-12;   // simplex feasibility slack
inline constexpr double kCoincideTol = 1e-9;  // atoms closer than this merge

inline double clamp_to_interval(double t, double lo = -1.0, double hi = 1.0) {
  return t < lo ? lo : (t > hi ? hi : t);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double geodesic_distance(std::span<const double> a, std::span<const double> b) {
  return std::acos(clamp_to_interval(dot(a, b)));
}

// Deterministic RNG used everywhere seeds appear in a contract.  We avoid
// std::normal_distribution because its output sequence is
// implementation-defined; Box-Muller over a fixed integer engine is not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ull) {
    // warm up so nearby seeds decorrelate
    next_u64();
    next_u64();
  }

  static Rng for_stream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(seed + 0x9e3779b97f4a7c15ull * (stream + 1));
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in (0,1]
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // uniform point on S^{d-1}, written into out (size d)
  void sphere_point(std::span<double> out) {
    for (;;) {
      double n2 = 0.0;
      for (auto& x : out) {
        x = gaussian();
        n2 += x * x;
      }
      if (n2 > 1e-24) {
        const double inv = 1.0 / std::sqrt(n2);
        for (auto& x : out) x *= inv;
        return;
      }
    }
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace sphere
