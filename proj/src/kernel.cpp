#include "sphere/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sphere {

namespace {

void validate(const PFrame& k) {
  if (!(k.p > 0.0)) throw std::domain_error("pframe: exponent p must be > 0");
}

void validate(const PolynomialT& k) {
  if (k.coeffs.empty()) throw std::domain_error("poly: empty coefficient list");
  for (double c : k.coeffs)
    if (!std::isfinite(c)) throw std::domain_error("poly: non-finite coefficient");
}

void validate(const Causal& k) {
  if (!(k.tau > 0.0)) throw std::domain_error("causal: tau must be > 0");
}

void validate(const AcuteAngle&) {}

void validate(const Tabulated& k) {
  if (k.t.size() < 2 || k.t.size() != k.v.size())
    throw std::domain_error("table: need at least two (t,value) samples");
  if (k.order != 1 && k.order != 3)
    throw std::domain_error("table: interpolation order must be 1 or 3");
  if (k.t.front() < -1.0 || k.t.back() > 1.0)
    throw std::domain_error("table: abscissae must lie in [-1,1]");
  for (std::size_t i = 1; i < k.t.size(); ++i)
    if (!(k.t[i] > k.t[i - 1]))
      throw std::domain_error("table: abscissae must be strictly increasing");
}

// Fritsch-Carlson slopes: monotone on monotone data, local, order <= 3.
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> h(n - 1), delta(n - 1), m(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    delta[i] = (y[i + 1] - y[i]) / h[i];
  }
  if (n == 2) {
    m[0] = m[1] = delta[0];
    return m;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      m[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  auto endpoint = [](double h0, double h1, double d0, double d1) {
    double m0 = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m0 * d0 <= 0.0)
      m0 = 0.0;
    else if (d0 * d1 <= 0.0 && std::fabs(m0) > 3.0 * std::fabs(d0))
      m0 = 3.0 * d0;
    return m0;
  };
  m[0] = endpoint(h[0], h[1], delta[0], delta[1]);
  m[n - 1] = endpoint(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  return m;
}

struct TabulatedEval {
  const Tabulated& k;
  std::vector<double> slopes;

  explicit TabulatedEval(const Tabulated& kk) : k(kk) {
    if (k.order == 3) slopes = pchip_slopes(k.t, k.v);
  }

  std::size_t segment(double t) const {
    auto it = std::upper_bound(k.t.begin(), k.t.end(), t);
    std::size_t i = (it == k.t.begin()) ? 0 : static_cast<std::size_t>(it - k.t.begin()) - 1;
    if (i + 1 >= k.t.size()) i = k.t.size() - 2;
    return i;
  }

  double value(double t) const {
    // clamp to the sampled range; constant extrapolation keeps the kernel
    // bounded below on all of [-1,1]
    if (t <= k.t.front()) return k.v.front();
    if (t >= k.t.back()) return k.v.back();
    const std::size_t i = segment(t);
    const double h = k.t[i + 1] - k.t[i];
    const double s = (t - k.t[i]) / h;
    if (k.order == 1) return k.v[i] + s * (k.v[i + 1] - k.v[i]);
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * k.v[i] + (s3 - 2 * s2 + s) * h * slopes[i] +
           (-2 * s3 + 3 * s2) * k.v[i + 1] + (s3 - s2) * h * slopes[i + 1];
  }

  double deriv(double t) const {
    if (t < k.t.front() || t > k.t.back()) return 0.0;
    const std::size_t i = segment(t);
    const double h = k.t[i + 1] - k.t[i];
    const double s = (t - k.t[i]) / h;
    if (k.order == 1) return (k.v[i + 1] - k.v[i]) / h;
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * k.v[i] + (3 * s2 - 4 * s + 1) * h * slopes[i] +
            (-6 * s2 + 6 * s) * k.v[i + 1] + (3 * s2 - 2 * s) * h * slopes[i + 1]) /
           h;
  }
};

double causal_raw(double t, double tau) {
  return 2.0 * tau * tau * (1.0 + t) * (2.0 - tau * tau * (1.0 - t));
}

}  // namespace

Kernel::Kernel(Variant k) : k_(std::move(k)) {
  std::visit([](const auto& v) { validate(v); }, k_);
}

double Kernel::operator()(double t) const {
  return std::visit(
      [t](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, PFrame>) {
          return std::pow(std::fabs(t), k.p);
        } else if constexpr (std::is_same_v<T, PolynomialT>) {
          double s = 0.0;
          for (std::size_t i = k.coeffs.size(); i-- > 0;) s = s * t + k.coeffs[i];
          return s;
        } else if constexpr (std::is_same_v<T, Causal>) {
          return std::max(0.0, causal_raw(t, k.tau));
        } else if constexpr (std::is_same_v<T, AcuteAngle>) {
          return std::acos(std::min(1.0, std::fabs(t)));
        } else {
          return TabulatedEval(k).value(t);
        }
      },
      k_);
}

double Kernel::derivative(double t) const {
  return std::visit(
      [t](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, PFrame>) {
          if (t == 0.0) return 0.0;  // subgradient choice at the kink
          const double a = std::fabs(t);
          return k.p * std::pow(a, k.p - 1.0) * (t > 0 ? 1.0 : -1.0);
        } else if constexpr (std::is_same_v<T, PolynomialT>) {
          double s = 0.0;
          for (std::size_t i = k.coeffs.size(); i-- > 1;)
            s = s * t + k.coeffs[i] * static_cast<double>(i);
          return s;
        } else if constexpr (std::is_same_v<T, Causal>) {
          if (causal_raw(t, k.tau) <= 0.0) return 0.0;
          const double tau2 = k.tau * k.tau;
          return 2.0 * tau2 * (2.0 + 2.0 * tau2 * t);
        } else if constexpr (std::is_same_v<T, AcuteAngle>) {
          if (t == 0.0) return 0.0;
          const double a = std::fabs(t);
          if (a >= 1.0) return 0.0;
          return -(t > 0 ? 1.0 : -1.0) / std::sqrt(1.0 - t * t);
        } else {
          return TabulatedEval(k).deriv(t);
        }
      },
      k_);
}

std::vector<double> Kernel::breakpoints() const {
  return std::visit(
      [](const auto& k) -> std::vector<double> {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, PFrame>) {
          // |t|^p is smooth at 0 only for even integer p
          const double r = std::round(k.p);
          if (std::fabs(k.p - r) < 1e-12 && std::fmod(r, 2.0) == 0.0) return {};
          return {0.0};
        } else if constexpr (std::is_same_v<T, Causal>) {
          const double t0 = 1.0 - 2.0 / (k.tau * k.tau);
          if (t0 > -1.0 && t0 < 1.0) return {t0};
          return {};
        } else if constexpr (std::is_same_v<T, AcuteAngle>) {
          return {0.0};
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          std::vector<double> b;
          for (double x : k.t)
            if (x > -1.0 && x < 1.0) b.push_back(x);
          return b;
        } else {
          return {};
        }
      },
      k_);
}

std::optional<double> Kernel::pframe_exponent() const {
  if (const auto* pf = std::get_if<PFrame>(&k_)) return pf->p;
  return std::nullopt;
}

namespace {

std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw std::domain_error("kernel literal: empty number in list");
    std::size_t pos = 0;
    out.push_back(std::stod(item, &pos));
    if (pos != item.size()) throw std::domain_error("kernel literal: bad number '" + item + "'");
  }
  return out;
}

Tabulated load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::domain_error("table: cannot open '" + path + "'");
  Tabulated tab;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line.find_first_of("0123456789+-.") != 0 && tab.t.empty()) continue;  // header
    std::stringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
      throw std::domain_error("table: expected 't,value' rows in '" + path + "'");
    tab.t.push_back(std::stod(a));
    tab.v.push_back(std::stod(b));
  }
  return tab;
}

}  // namespace

Kernel Kernel::parse(const std::string& literal) {
  const auto colon = literal.find(':');
  const std::string head = literal.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : literal.substr(colon + 1);
  try {
    if (head == "pframe") return Kernel(PFrame{std::stod(rest)});
    if (head == "poly") return Kernel(PolynomialT{parse_number_list(rest)});
    if (head == "causal") return Kernel(Causal{std::stod(rest)});
    if (head == "acute") return Kernel(AcuteAngle{});
    if (head == "table") return Kernel(load_table(rest));
  } catch (const std::invalid_argument&) {
    throw std::domain_error("kernel literal: bad parameter in '" + literal + "'");
  }
  throw std::domain_error("unknown kernel literal '" + literal + "'");
}

std::string Kernel::to_string() const {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        std::ostringstream os;
        os.precision(17);
        if constexpr (std::is_same_v<T, PFrame>) {
          os << "pframe:" << k.p;
        } else if constexpr (std::is_same_v<T, PolynomialT>) {
          os << "poly:";
          for (std::size_t i = 0; i < k.coeffs.size(); ++i)
            os << (i ? "," : "") << k.coeffs[i];
        } else if constexpr (std::is_same_v<T, Causal>) {
          os << "causal:" << k.tau;
        } else if constexpr (std::is_same_v<T, AcuteAngle>) {
          os << "acute";
        } else {
          os << "table:<" << k.t.size() << " samples>";
        }
        return os.str();
      },
      k_);
}

}  // namespace sphere
