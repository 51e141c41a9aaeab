#include "sphere/energy.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sphere/common.hpp"

namespace sphere {

namespace {

// one Gram row: sum_j w_j f(<x_i, x_j>)
template <class F>
double row_sum(const double* pts, const double* w, int n, int d, int i, F&& f) {
  const double* xi = pts + static_cast<std::size_t>(i) * d;
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    const double* xj = pts + static_cast<std::size_t>(j) * d;
    double g = 0.0;
    for (int k = 0; k < d; ++k) g += xi[k] * xj[k];
    s += w[j] * f(clamp_to_interval(g));
  }
  return s;
}

template <class F>
double pair_energy_impl(const double* pts, const double* w, int n, int d, F&& f, bool parallel) {
  std::vector<double> rows(n);
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) rows[i] = row_sum(pts, w, n, d, i, f);
  } else {
    for (int i = 0; i < n; ++i) rows[i] = row_sum(pts, w, n, d, i, f);
  }
  double e = 0.0;
  for (int i = 0; i < n; ++i) e += w[i] * rows[i];
  return e;
}

// dispatch once so the pairwise loop sees a concrete callable
template <class Fn>
double with_fast_kernel(const Kernel& kernel, Fn&& run) {
  if (auto p = kernel.pframe_exponent()) {
    const double pv = *p;
    if (pv == 2.0) return run([](double t) { return t * t; });
    if (pv == 3.0) return run([](double t) { return std::fabs(t) * t * t; });
    if (pv == 4.0) return run([](double t) { return (t * t) * (t * t); });
    return run([pv](double t) { return std::pow(std::fabs(t), pv); });
  }
  return run([&kernel](double t) { return kernel(t); });
}

}  // namespace

double pair_energy(const double* points, const double* weights, int n, int d,
                   const Kernel& kernel, bool parallel) {
  return with_fast_kernel(kernel, [&](auto&& f) {
    return pair_energy_impl(points, weights, n, d, f, parallel);
  });
}

double discrete_energy(const SphericalConfig& config, const Kernel& kernel) {
  return pair_energy(config.points.data(), config.weights.data(), config.size(), config.d,
                     kernel, true);
}

double discrete_energy_serial(const SphericalConfig& config, const Kernel& kernel) {
  return pair_energy(config.points.data(), config.weights.data(), config.size(), config.d,
                     kernel, false);
}

double potential(const SphericalConfig& config, const Kernel& kernel,
                 std::span<const double> x) {
  if (static_cast<int>(x.size()) != config.d)
    throw std::domain_error("potential: probe dimension mismatch");
  if (std::fabs(norm(x) - 1.0) > kUnitTol)
    throw std::domain_error("potential: probe point is not a unit vector");
  double s = 0.0;
  for (int j = 0; j < config.size(); ++j)
    s += config.weights[j] * kernel(clamp_to_interval(dot(x, config.point(j))));
  return s;
}

void potential_batch(const SphericalConfig& config, const Kernel& kernel,
                     const double* probes, int n_probes, double* out, bool parallel) {
  const int n = config.size(), d = config.d;
  const double* pts = config.points.data();
  const double* w = config.weights.data();
  with_fast_kernel(kernel, [&](auto&& f) {
    auto eval_probe = [&](int i) {
      const double* x = probes + static_cast<std::size_t>(i) * d;
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        const double* xj = pts + static_cast<std::size_t>(j) * d;
        double g = 0.0;
        for (int k = 0; k < d; ++k) g += x[k] * xj[k];
        s += w[j] * f(clamp_to_interval(g));
      }
      return s;
    };
    if (parallel) {
#pragma omp parallel for schedule(static)
      for (int i = 0; i < n_probes; ++i) out[i] = eval_probe(i);
    } else {
      for (int i = 0; i < n_probes; ++i) out[i] = eval_probe(i);
    }
    return 0.0;
  });
}

namespace {

// deterministic quasi-uniform probes: closed-form spiral for d <= 3, topped
// up with seeded random points (all of them for d >= 4)
std::vector<double> probe_grid(int d, int grid_size, std::uint64_t seed) {
  std::vector<double> pts(static_cast<std::size_t>(grid_size) * d);
  int n_structured = 0;
  if (d == 2) {
    n_structured = grid_size / 2;
    for (int i = 0; i < n_structured; ++i) {
      const double a = 2.0 * M_PI * i / n_structured;
      pts[2 * static_cast<std::size_t>(i)] = std::cos(a);
      pts[2 * static_cast<std::size_t>(i) + 1] = std::sin(a);
    }
  } else if (d == 3) {
    n_structured = grid_size / 2;
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n_structured; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / n_structured;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double a = golden * i;
      double* p = pts.data() + 3 * static_cast<std::size_t>(i);
      p[0] = r * std::cos(a);
      p[1] = r * std::sin(a);
      p[2] = z;
    }
  }
  Rng rng(seed);
  for (int i = n_structured; i < grid_size; ++i)
    rng.sphere_point({pts.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)});
  return pts;
}

}  // namespace

PotentialReport potential_report(const SphericalConfig& config, const Kernel& kernel,
                                 int grid_size, std::uint64_t seed) {
  if (grid_size < 1) throw std::domain_error("potential_report: grid_size must be >= 1");
  PotentialReport rep;
  rep.grid_size = grid_size;
  rep.seed = seed;

  std::vector<double> on_support(config.size());
  potential_batch(config, kernel, config.points.data(), config.size(), on_support.data(), true);
  rep.support_min = on_support[0];
  rep.support_max = on_support[0];
  for (double v : on_support) {
    rep.support_min = std::min(rep.support_min, v);
    rep.support_max = std::max(rep.support_max, v);
  }
  rep.constancy_gap = rep.support_max - rep.support_min;

  const std::vector<double> grid = probe_grid(config.d, grid_size, seed);
  std::vector<double> on_grid(grid_size);
  potential_batch(config, kernel, grid.data(), grid_size, on_grid.data(), true);
  rep.grid_min = on_grid[0];
  for (double v : on_grid) rep.grid_min = std::min(rep.grid_min, v);
  return rep;
}

double spectral_energy(const SphericalConfig& config, const GegenbauerExpansion& exp) {
  if (exp.d != config.d)
    throw std::domain_error("spectral_energy: expansion dimension mismatch");
  const int n = config.size(), d = config.d;
  const double* pts = config.points.data();
  const double* w = config.weights.data();
  std::vector<double> rows(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const double* xi = pts + static_cast<std::size_t>(i) * d;
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      const double* xj = pts + static_cast<std::size_t>(j) * d;
      double g = 0.0;
      for (int k = 0; k < d; ++k) g += xi[k] * xj[k];
      s += w[j] * expansion_eval(exp, clamp_to_interval(g));
    }
    rows[i] = s;
  }
  double e = 0.0;
  for (int i = 0; i < n; ++i) e += w[i] * rows[i];
  return e;
}

namespace {

void merge_into(std::vector<double>& pts, std::vector<double>& ws, int d,
                std::span<const double> x, double w) {
  const int n = static_cast<int>(ws.size());
  for (int i = 0; i < n; ++i) {
    double dist2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const double diff = pts[static_cast<std::size_t>(i) * d + k] - x[k];
      dist2 += diff * diff;
    }
    if (std::sqrt(dist2) <= kCoincideTol) {
      ws[i] += w;
      return;
    }
  }
  pts.insert(pts.end(), x.begin(), x.end());
  ws.push_back(w);
}

}  // namespace

SphericalConfig symmetrize(const SphericalConfig& config, std::span<const double> z) {
  if (static_cast<int>(z.size()) != config.d)
    throw std::domain_error("symmetrize: z dimension mismatch");
  if (std::fabs(norm(z) - 1.0) > kUnitTol)
    throw std::domain_error("symmetrize: z is not a unit vector");
  std::vector<double> pts, ws;
  std::vector<double> flipped(config.d);
  for (int i = 0; i < config.size(); ++i) {
    const auto x = config.point(i);
    const double s = dot(z, x);
    if (std::fabs(s) < kUnitTol)
      throw std::domain_error("symmetrize: atom " + std::to_string(i) +
                              " lies on the equator z^perp");
    if (s > 0.0) {
      merge_into(pts, ws, config.d, x, config.weights[i]);
    } else {
      for (int k = 0; k < config.d; ++k) flipped[k] = -x[k];
      merge_into(pts, ws, config.d, flipped, config.weights[i]);
    }
  }
  return SphericalConfig::create(config.d, std::move(pts), std::move(ws));
}

SphericalConfig antipodal_symmetrize(const SphericalConfig& config) {
  std::vector<double> pts, ws;
  std::vector<double> flipped(config.d);
  for (int i = 0; i < config.size(); ++i) {
    const auto x = config.point(i);
    merge_into(pts, ws, config.d, x, 0.5 * config.weights[i]);
    for (int k = 0; k < config.d; ++k) flipped[k] = -x[k];
    merge_into(pts, ws, config.d, flipped, 0.5 * config.weights[i]);
  }
  return SphericalConfig::create(config.d, std::move(pts), std::move(ws));
}

}  // namespace sphere
