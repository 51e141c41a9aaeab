#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sphere {

// Pairwise interaction potentials f : [-1,1] -> R, evaluated on inner
// products of unit vectors.  All variants are bounded below on [-1,1].

struct PFrame {
  double p;  // f(t) = |t|^p, p > 0
};

struct PolynomialT {
  std::vector<double> coeffs;  // monomial coefficients in t, low to high
};

struct Causal {
  double tau;  // f(t) = max{0, 2 tau^2 (1+t) (2 - tau^2 (1-t))}, tau > 0
};

struct AcuteAngle {};  // f(t) = arccos|t|

struct Tabulated {
  std::vector<double> t;  // strictly increasing abscissae in [-1,1]
  std::vector<double> v;  // samples
  int order = 3;          // 1 = linear, 3 = monotone cubic (pchip)
};

class Kernel {
 public:
  using Variant = std::variant<PFrame, PolynomialT, Causal, AcuteAngle, Tabulated>;

  explicit Kernel(Variant k);  // validates parameters, throws std::domain_error

  double operator()(double t) const;

  // df/dt where defined; at kinks returns the subgradient choice documented
  // per variant (0 at t=0 for |t|^p, one-sided for causal/tabulated).
  double derivative(double t) const;

  // Interior points of [-1,1] where f is not smooth (used to split
  // quadrature intervals).  Sorted, strictly inside (-1,1).
  std::vector<double> breakpoints() const;

  const Variant& variant() const { return k_; }

  bool is_pframe() const { return std::holds_alternative<PFrame>(k_); }
  std::optional<double> pframe_exponent() const;

  // Literal syntax: "pframe:3.0", "poly:1,0,-2" (low-to-high in t),
  // "causal:1.5", "acute", "table:path.csv".
  static Kernel parse(const std::string& literal);
  std::string to_string() const;

 private:
  Variant k_;
};

}  // namespace sphere
