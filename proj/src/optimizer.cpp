#include "sphere/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sphere/common.hpp"
#include "sphere/energy.hpp"

namespace sphere {

void OptimizerParams::validate() const {
  if (n_atoms < 1 || n_starts < 1 || max_iters < 1)
    throw std::domain_error("optimizer: n_atoms, n_starts, max_iters must be >= 1");
  if (!(grad_tol > 0.0) || !(initial_step > 0.0))
    throw std::domain_error("optimizer: tolerances and steps must be > 0");
  if (!(backtrack > 0.0 && backtrack < 1.0))
    throw std::domain_error("optimizer: backtrack factor must lie in (0,1)");
  if (merge_radius < 0.0) throw std::domain_error("optimizer: merge_radius must be >= 0");
}

std::vector<double> project_to_simplex(std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0, theta = 0.0;
  int rho = 0;
  for (int i = 0; i < n; ++i) {
    css += u[i];
    const double t = (css - 1.0) / (i + 1);
    if (u[i] - t > 0.0) {
      rho = i;
      theta = t;
    }
  }
  (void)rho;
  for (double& x : v) x = std::max(x - theta, 0.0);
  return v;
}

void energy_gradient(const SphericalConfig& config, const Kernel& kernel,
                     std::vector<double>* position_grad, std::vector<double>* weight_grad) {
  const int n = config.size(), d = config.d;
  const double* pts = config.points.data();
  const double* w = config.weights.data();
  if (position_grad) {
    position_grad->assign(static_cast<std::size_t>(n) * d, 0.0);
    for (int i = 0; i < n; ++i) {
      const double* xi = pts + static_cast<std::size_t>(i) * d;
      double* gi = position_grad->data() + static_cast<std::size_t>(i) * d;
      for (int j = 0; j < n; ++j) {
        const double* xj = pts + static_cast<std::size_t>(j) * d;
        double g = 0.0;
        for (int k = 0; k < d; ++k) g += xi[k] * xj[k];
        const double c = 2.0 * w[i] * w[j] * kernel.derivative(clamp_to_interval(g));
        for (int k = 0; k < d; ++k) gi[k] += c * xj[k];
      }
      // tangential projection at x_i
      double radial = 0.0;
      for (int k = 0; k < d; ++k) radial += gi[k] * xi[k];
      for (int k = 0; k < d; ++k) gi[k] -= radial * xi[k];
    }
  }
  if (weight_grad) {
    weight_grad->assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      const double* xi = pts + static_cast<std::size_t>(i) * d;
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        const double* xj = pts + static_cast<std::size_t>(j) * d;
        double g = 0.0;
        for (int k = 0; k < d; ++k) g += xi[k] * xj[k];
        s += w[j] * kernel(clamp_to_interval(g));
      }
      (*weight_grad)[i] = 2.0 * s;
    }
  }
}

namespace {

struct StartResult {
  SphericalConfig config;
  StartSummary summary;
  int merged = 0;
  std::vector<IterationTraceRow> trace;
};

double raw_energy(const std::vector<double>& pts, const std::vector<double>& w, int n, int d,
                  const Kernel& kernel) {
  return pair_energy(pts.data(), w.data(), n, d, kernel, /*parallel=*/false);
}

StartResult run_single_start(const Kernel& kernel, int d, const OptimizerParams& params,
                             int start_index, bool keep_trace) {
  StartResult res;
  res.summary.start = start_index;
  const int n = params.n_atoms;

  Rng rng = Rng::for_stream(params.seed, static_cast<std::uint64_t>(start_index));
  std::vector<double> pts(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < n; ++i)
    rng.sphere_point({pts.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)});
  std::vector<double> w(n, 1.0 / n);

  SphericalConfig cur{d, pts, w};
  double energy = raw_energy(cur.points, cur.weights, n, d, kernel);
  if (!std::isfinite(energy)) {
    res.summary.failed = true;
    return res;
  }

  const bool damp_kinks =
      kernel.pframe_exponent().has_value() && *kernel.pframe_exponent() <= 1.0;

  double step_pos = params.initial_step;
  double step_w = params.initial_step;
  std::vector<double> pos_grad, w_grad;
  std::vector<double> trial_pts(pts.size()), trial_w(w.size());
  double grad_norm = 0.0;
  int iter = 0;

  for (iter = 0; iter < params.max_iters; ++iter) {
    energy_gradient(cur, kernel, &pos_grad, params.optimize_weights ? &w_grad : nullptr);

    grad_norm = 0.0;
    for (double g : pos_grad) grad_norm += g * g;
    grad_norm = std::sqrt(grad_norm);
    bool finite = std::isfinite(grad_norm);
    if (params.optimize_weights)
      for (double g : w_grad) finite = finite && std::isfinite(g);
    if (!finite) {
      res.summary.failed = true;
      return res;
    }

    double step_cap = std::numeric_limits<double>::infinity();
    if (damp_kinks) {
      // near-orthogonal pairs make |t|^p subgradients chatter for p <= 1
      for (int i = 0; i < n && step_cap > 0.01; ++i)
        for (int j = i + 1; j < n; ++j) {
          double g = 0.0;
          for (int k = 0; k < d; ++k)
            g += cur.points[static_cast<std::size_t>(i) * d + k] *
                 cur.points[static_cast<std::size_t>(j) * d + k];
          if (std::fabs(g) < 1e-8) {
            step_cap = 0.01;
            break;
          }
        }
    }

    // position step with backtracking
    bool moved = false;
    double used_step = 0.0;
    step_pos = std::min(step_pos, step_cap);
    for (int bt = 0; bt < 60 && step_pos > 1e-17; ++bt) {
      for (int i = 0; i < n; ++i) {
        double norm2 = 0.0;
        for (int k = 0; k < d; ++k) {
          const std::size_t idx = static_cast<std::size_t>(i) * d + k;
          trial_pts[idx] = cur.points[idx] - step_pos * pos_grad[idx];
          norm2 += trial_pts[idx] * trial_pts[idx];
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (int k = 0; k < d; ++k) trial_pts[static_cast<std::size_t>(i) * d + k] *= inv;
      }
      const double trial_energy = raw_energy(trial_pts, cur.weights, n, d, kernel);
      if (std::isfinite(trial_energy) && trial_energy <= energy) {
        cur.points = trial_pts;
        energy = trial_energy;
        moved = true;
        used_step = step_pos;
        step_pos = std::min(step_pos * 1.5, 1.0);
        break;
      }
      step_pos *= params.backtrack;
    }

    // weight step: projected gradient with its own backtracking
    if (params.optimize_weights) {
      for (int bt = 0; bt < 60 && step_w > 1e-17; ++bt) {
        for (int i = 0; i < n; ++i) trial_w[i] = cur.weights[i] - step_w * w_grad[i];
        trial_w = project_to_simplex(trial_w);
        const double trial_energy = raw_energy(cur.points, trial_w, n, d, kernel);
        if (std::isfinite(trial_energy) && trial_energy <= energy) {
          cur.weights = trial_w;
          energy = trial_energy;
          moved = true;
          step_w = std::min(step_w * 1.5, 1.0);
          break;
        }
        step_w *= params.backtrack;
      }
    }

    if (keep_trace) res.trace.push_back({iter, energy, grad_norm, used_step});
    if (grad_norm < params.grad_tol) {
      res.summary.converged = true;
      break;
    }
    if (!moved) break;  // no feasible descent step at machine scale
  }

  // finalize: drop exactly-zeroed weights, merge coincident clusters
  SphericalConfig pruned = cur.without_zero_weights();
  res.config = merge_clusters(pruned, params.merge_radius, &res.merged);
  res.summary.energy = discrete_energy_serial(res.config, kernel);
  res.summary.iterations = iter;
  res.summary.grad_norm = grad_norm;
  return res;
}

}  // namespace

OptimizerReport minimize_energy(const Kernel& kernel, int d, const OptimizerParams& params,
                                bool keep_trace) {
  params.validate();
  if (d < 2) throw std::domain_error("minimize_energy: d must be >= 2");

  std::vector<StartResult> results(params.n_starts);
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < params.n_starts; ++s)
    results[s] = run_single_start(kernel, d, params, s, keep_trace);

  OptimizerReport report;
  report.starts.reserve(params.n_starts);
  int best = -1;
  for (int s = 0; s < params.n_starts; ++s) {
    report.starts.push_back(results[s].summary);
    if (results[s].summary.failed) continue;
    if (best < 0 || results[s].summary.energy < results[best].summary.energy) best = s;
  }
  if (best < 0) throw numerical_error("minimize_energy: every start failed");

  report.best_start = best;
  report.best_energy = results[best].summary.energy;
  report.best_config = std::move(results[best].config);
  report.iterations = results[best].summary.iterations;
  report.grad_norm = results[best].summary.grad_norm;
  report.merged_atom_count = results[best].merged;
  report.trace = std::move(results[best].trace);
  return report;
}

LocalMinProbeReport local_min_probe(const SphericalConfig& config, const Kernel& kernel,
                                    int n_probes, const std::vector<double>& tau_grid,
                                    std::uint64_t seed, double tol) {
  for (double tau : tau_grid)
    if (!(tau > 0.0 && tau < 1.0))
      throw std::domain_error("local_min_probe: tau values must lie in (0,1)");

  LocalMinProbeReport rep;
  const double i_xi = discrete_energy(config, kernel);
  rep.margin = std::numeric_limits<double>::infinity();

  Rng rng(seed);
  const int d = config.d;
  std::vector<double> buf(static_cast<std::size_t>(3) * d);

  auto consider = [&](const SphericalConfig& probe) {
    double linear = 0.0;  // sum_i w_i^mu F_xi(y_i)
    for (int i = 0; i < probe.size(); ++i)
      linear += probe.weights[i] * potential(config, kernel, probe.point(i));
    rep.margin = std::min(rep.margin, linear - i_xi);
    const double i_mu = discrete_energy_serial(probe, kernel);
    for (double tau : tau_grid) {
      const double mix = (1.0 - tau) * (1.0 - tau) * i_xi +
                         2.0 * tau * (1.0 - tau) * linear + tau * tau * i_mu;
      const double drop = mix - i_xi;
      rep.worst_mixture_drop = std::min(rep.worst_mixture_drop, drop);
      if (drop < -tol && rep.no_violation) {
        rep.no_violation = false;
        rep.violating_probe = probe;
        rep.violating_tau = tau;
      }
    }
  };

  for (int p = 0; p < n_probes; ++p) {
    // Dirac probe
    rng.sphere_point({buf.data(), static_cast<std::size_t>(d)});
    consider(SphericalConfig::create(d, std::vector<double>(buf.begin(), buf.begin() + d), {1.0}));
    // few-atom probe
    for (int i = 0; i < 3; ++i)
      rng.sphere_point({buf.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)});
    consider(SphericalConfig::equal_weights(d, buf));
  }
  return rep;
}

SphericalConfig merge_clusters(const SphericalConfig& config, double radius, int* merged_count) {
  if (radius < 0.0) throw std::domain_error("merge_clusters: radius must be >= 0");
  std::vector<double> pts = config.points;
  std::vector<double> ws = config.weights;
  const int d = config.d;
  int merges = 0;
  if (radius > 0.0) {
    bool changed = true;
    while (changed) {
      changed = false;
      const int n = static_cast<int>(ws.size());
      for (int i = 0; i < n && !changed; ++i) {
        for (int j = i + 1; j < n && !changed; ++j) {
          std::span<const double> xi{pts.data() + static_cast<std::size_t>(i) * d,
                                     static_cast<std::size_t>(d)};
          std::span<const double> xj{pts.data() + static_cast<std::size_t>(j) * d,
                                     static_cast<std::size_t>(d)};
          if (geodesic_distance(xi, xj) > radius) continue;
          // weight-weighted normalized mean; a degenerate (antipodal) mean
          // keeps the heavier atom's position
          std::vector<double> mean(d);
          for (int k = 0; k < d; ++k) mean[k] = ws[i] * xi[k] + ws[j] * xj[k];
          const double mn = norm(mean);
          if (mn > 1e-14) {
            for (int k = 0; k < d; ++k) pts[static_cast<std::size_t>(i) * d + k] = mean[k] / mn;
          } else if (ws[j] > ws[i]) {
            for (int k = 0; k < d; ++k) pts[static_cast<std::size_t>(i) * d + k] = xj[k];
          }
          ws[i] += ws[j];
          pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(j) * d,
                    pts.begin() + static_cast<std::ptrdiff_t>(j + 1) * d);
          ws.erase(ws.begin() + j);
          ++merges;
          changed = true;
        }
      }
    }
  }
  if (merged_count) *merged_count = merges;
  return SphericalConfig::create(d, std::move(pts), std::move(ws));
}

}  // namespace sphere
