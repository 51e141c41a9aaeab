#include "sphere/diffop.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "nlohmann/json.hpp"
#include "sphere/common.hpp"

namespace sphere {

namespace {

void check_t(double t) {
  if (!(t > 0.0)) throw std::domain_error("diffop: requires t = <x,y> > 0");
  if (t > 1.0 + 1e-12) throw std::domain_error("diffop: t exceeds 1");
}

void check_unit(std::span<const double> v, const char* name) {
  if (std::fabs(norm(v) - 1.0) > kUnitTol)
    throw std::domain_error(std::string("diffop: ") + name + " is not a unit vector");
}

// orthonormal tangent frame at x via a Householder reflection mapping e_1 -> x
std::vector<double> tangent_frame(std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  std::vector<double> frame(static_cast<std::size_t>(n - 1) * n);
  std::vector<double> v(x.begin(), x.end());
  v[0] -= 1.0;
  const double vn = norm(v);
  for (int c = 1; c < n; ++c) {
    double* e = frame.data() + static_cast<std::size_t>(c - 1) * n;
    for (int r = 0; r < n; ++r) e[r] = (r == c) ? 1.0 : 0.0;
    if (vn > 1e-12) {
      double coef = 2.0 * v[c] / (vn * vn);
      for (int r = 0; r < n; ++r) e[r] -= coef * v[r];
    }
  }
  return frame;
}

// sum over tangent directions of geodesic second differences of t -> t^p
double laplace_stencil(double p, std::span<const double> y, std::span<const double> x,
                       double h) {
  const int n = static_cast<int>(x.size());
  const std::vector<double> frame = tangent_frame(x);
  const double t0 = dot(x, y);
  const double g0 = std::pow(t0, p);
  const double ch = std::cos(h), sh = std::sin(h);
  double acc = 0.0;
  for (int m = 0; m + 1 < n; ++m) {
    const double* e = frame.data() + static_cast<std::size_t>(m) * n;
    double te = 0.0;
    for (int r = 0; r < n; ++r) te += e[r] * y[r];
    const double t_plus = ch * t0 + sh * te;
    const double t_minus = ch * t0 - sh * te;
    acc += (std::pow(t_plus, p) + std::pow(t_minus, p) - 2.0 * g0) / (h * h);
  }
  return acc;
}

void check_fd_args(double p, int d, std::span<const double> y, std::span<const double> x,
                   double h, double min_t_over_h) {
  if (!(p >= 0.0)) throw std::domain_error("diffop: p must be >= 0");
  if (d < 2) throw std::domain_error("diffop: d must be >= 2");
  if (static_cast<int>(x.size()) != d + 1 || static_cast<int>(y.size()) != d + 1)
    throw std::domain_error("diffop: x and y must have d+1 components (points of S^d)");
  check_unit(x, "x");
  check_unit(y, "y");
  if (!(h >= 1e-4 && h <= 1e-2)) throw std::domain_error("diffop: h must lie in [1e-4, 1e-2]");
  const double t = dot(x, y);
  if (!(t > min_t_over_h * h))
    throw std::domain_error("diffop: <x,y> too close to the |t|^p singularity for this h");
}

// one application of Delta on a power sum: t^q -> q(q-1) t^{q-2} - q(q+d-1) t^q
std::map<double, double> apply_delta(const std::map<double, double>& f, int d) {
  std::map<double, double> out;
  for (const auto& [q, c] : f) {
    out[q - 2.0] += c * q * (q - 1.0);
    out[q] -= c * q * (q + d - 1.0);
  }
  return out;
}

double eval_powers(const std::map<double, double>& f, double t) {
  double s = 0.0;
  for (const auto& [q, c] : f) s += c * std::pow(t, q);
  return s;
}

}  // namespace

double lb_closed_form(double p, int d, double t) {
  if (!(p >= 0.0)) throw std::domain_error("diffop: p must be >= 0");
  if (d < 2) throw std::domain_error("diffop: d must be >= 2");
  check_t(t);
  return p * (p - 1.0) * std::pow(t, p - 2.0) - p * (p + d - 1.0) * std::pow(t, p);
}

double lb_finite_difference(double p, int d, std::span<const double> y,
                            std::span<const double> x, double h) {
  check_fd_args(p, d, y, x, h, 1.0);
  return laplace_stencil(p, y, x, h);
}

double dk_closed_form(int k, double p, int d, double t) {
  if (k < 0) throw std::domain_error("diffop: k must be >= 0");
  if (!(p >= 0.0)) throw std::domain_error("diffop: p must be >= 0");
  if (d < 2) throw std::domain_error("diffop: d must be >= 2");
  check_t(t);
  double prod = 1.0;
  for (int j = 0; j <= 2 * k; ++j) prod *= (p - j);
  return prod * std::pow(t, p - 2.0 * k - 2.0) *
         ((p - 2.0 * k - 1.0) - (p + d - 2.0 * k - 1.0) * t * t);
}

DkValue dk_finite_difference(int k, double p, int d, std::span<const double> y,
                             std::span<const double> x, double h) {
  if (k < 0) throw std::domain_error("diffop: k must be >= 0");
  check_fd_args(p, d, y, x, h, k + 1.0);
  const double t = dot(x, y);

  DkValue out;
  out.innermost_fd = laplace_stencil(p, y, x, h);
  out.innermost_closed = lb_closed_form(p, d, t);
  out.innermost_rel_residual = std::fabs(out.innermost_fd - out.innermost_closed) /
                               std::max(1.0, std::fabs(out.innermost_closed));

  // compose analytically on the power family; factor i (from the inside)
  // is Delta + (p-2i+2)(p+d-2i+1)
  std::map<double, double> f{{p, 1.0}};
  for (int i = 1; i <= k; ++i) {
    const double shift = (p - 2.0 * i + 2.0) * (p + d - 2.0 * i + 1.0);
    std::map<double, double> next = apply_delta(f, d);
    for (const auto& [q, c] : f) next[q] += shift * c;
    // prune exact cancellations so the family stays the expected single power
    for (auto it = next.begin(); it != next.end();) {
      if (std::fabs(it->second) < 1e-300)
        it = next.erase(it);
      else
        ++it;
    }
    f = std::move(next);
  }
  f = apply_delta(f, d);
  out.value = eval_powers(f, t);
  return out;
}

double dk_nested_fd(int k, double p, int d, std::span<const double> y,
                    std::span<const double> x, double h) {
  if (k < 0 || k > 1)
    throw std::domain_error("diffop: the nested stencil path is provided for k <= 1 only");
  check_fd_args(p, d, y, x, h, k + 1.0);
  if (k == 0) return laplace_stencil(p, y, x, h);

  const double shift = p * (p + d - 1.0);
  const int n = d + 1;
  const std::vector<double> frame = tangent_frame(x);
  auto inner = [&](std::span<const double> xp) {
    return laplace_stencil(p, y, xp, h) + shift * std::pow(dot(xp, y), p);
  };
  const double g0 = inner(x);
  const double ch = std::cos(h), sh = std::sin(h);
  std::vector<double> xp(n);
  double acc = 0.0;
  for (int m = 0; m < d; ++m) {
    const double* e = frame.data() + static_cast<std::size_t>(m) * n;
    for (int r = 0; r < n; ++r) xp[r] = ch * x[r] + sh * e[r];
    const double gp = inner(xp);
    for (int r = 0; r < n; ++r) xp[r] = ch * x[r] - sh * e[r];
    const double gm = inner(xp);
    acc += (gp + gm - 2.0 * g0) / (h * h);
  }
  return acc;
}

std::vector<double> embedded_pair(int d, double t) {
  check_t(t);
  std::vector<double> out(2 * (d + 1), 0.0);
  out[0] = 1.0;                                 // x = e_1
  out[d + 1] = t;                               // y = t e_1 + sqrt(1-t^2) e_2
  out[d + 2] = std::sqrt(std::max(0.0, 1.0 - t * t));
  return out;
}

SignScanReport dk_sign_scan(int k, int d, const std::vector<double>& p_grid,
                            const std::vector<double>& t_grid, double tol, double h) {
  if (tol <= 0.0) throw std::domain_error("dk_sign_scan: tol must be > 0");
  SignScanReport rep;
  rep.k = k;
  rep.d = d;
  rep.h = h;
  rep.tol = tol;
  const int np = static_cast<int>(p_grid.size());
  const int nt = static_cast<int>(t_grid.size());
  rep.cells.resize(static_cast<std::size_t>(np) * nt);
  std::vector<std::string> errors(rep.cells.size());

#pragma omp parallel for schedule(dynamic) collapse(2)
  for (int ip = 0; ip < np; ++ip) {
    for (int it = 0; it < nt; ++it) {
      const std::size_t idx = static_cast<std::size_t>(ip) * nt + it;
      try {
        const double p = p_grid[ip];
        const double t = t_grid[it];
        SignScanCell cell;
        cell.p = p;
        cell.t = t;
        cell.closed_form = dk_closed_form(k, p, d, t);
        const std::vector<double> pair = embedded_pair(d, t);
        std::span<const double> x{pair.data(), static_cast<std::size_t>(d + 1)};
        std::span<const double> y{pair.data() + d + 1, static_cast<std::size_t>(d + 1)};
        if (k == 0)
          cell.fd_value = lb_finite_difference(p, d, y, x, h);
        else if (k == 1)
          cell.fd_value = dk_nested_fd(k, p, d, y, x, h);
        else
          cell.fd_value = dk_finite_difference(k, p, d, y, x, h).value;
        cell.rel_residual = std::fabs(cell.fd_value - cell.closed_form) /
                            std::max(1.0, std::fabs(cell.closed_form));
        if (cell.closed_form > tol)
          cell.verdict = SignVerdict::kPositive;
        else if (cell.closed_form < -tol)
          cell.verdict = SignVerdict::kNegative;
        else
          cell.verdict = SignVerdict::kIndeterminate;
        rep.cells[idx] = cell;
      } catch (const std::exception& e) {
        errors[idx] = e.what();
      }
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw std::domain_error("dk_sign_scan: " + e);

  for (const auto& cell : rep.cells) {
    rep.max_rel_residual = std::max(rep.max_rel_residual, cell.rel_residual);
    if (cell.verdict == SignVerdict::kIndeterminate) ++rep.indeterminate_cells;
    const bool in_negative_range = cell.p > 2.0 * k && cell.p <= 2.0 * k + 1.0;
    const bool in_positive_range = cell.p > 2.0 * k - 1.0 && cell.p < 2.0 * k;
    if (in_negative_range && cell.verdict != SignVerdict::kNegative) rep.claims_hold = false;
    if (in_positive_range && cell.verdict != SignVerdict::kPositive) rep.claims_hold = false;
  }
  return rep;
}

std::string SignScanReport::to_json() const {
  nlohmann::json j;
  j["k"] = k;
  j["d"] = d;
  j["h"] = h;
  j["tol"] = tol;
  j["max_rel_residual"] = max_rel_residual;
  j["indeterminate_cells"] = indeterminate_cells;
  j["claims_hold"] = claims_hold;
  auto cells_json = nlohmann::json::array();
  for (const auto& c : cells) {
    cells_json.push_back({{"p", c.p},
                          {"t", c.t},
                          {"closed_form", c.closed_form},
                          {"fd_value", c.fd_value},
                          {"rel_residual", c.rel_residual},
                          {"verdict", c.verdict == SignVerdict::kNegative   ? "negative"
                                      : c.verdict == SignVerdict::kPositive ? "positive"
                                                                            : "indeterminate"}});
  }
  j["cells"] = std::move(cells_json);
  return j.dump();
}

std::string SignScanReport::to_csv() const {
  std::string out = "p,t,closed_form,fd_value,rel_residual,verdict\n";
  char buf[256];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%s\n", c.p, c.t, c.closed_form,
                  c.fd_value, c.rel_residual,
                  c.verdict == SignVerdict::kNegative   ? "negative"
                  : c.verdict == SignVerdict::kPositive ? "positive"
                                                        : "indeterminate");
    out += buf;
  }
  return out;
}

}  // namespace sphere
