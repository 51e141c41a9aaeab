#include "sphere/moments.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nlohmann/json.hpp"
#include "sphere/common.hpp"
#include "sphere/energy.hpp"

namespace sphere {

void MomentSystem::validate() const {
  if (constraints.empty() || constraints.size() != targets.size())
    throw std::domain_error("moment system: constraints/targets mismatch");
  if (std::fabs(targets[0] - 1.0) > 1e-12)
    throw std::domain_error("moment system: first target must be the unit mass");
}

MomentSystem harmonic_moment_system(const SphericalConfig& reference,
                                    const std::vector<int>& degrees, std::uint64_t seed) {
  MomentSystem sys;
  sys.d = reference.d;
  sys.constraints.push_back([](std::span<const double>) { return 1.0; });
  sys.targets.push_back(1.0);
  for (int n : degrees) {
    if (n <= 0) continue;
    HarmonicBasis basis = harmonic_basis(n, reference.d, seed);
    for (auto& f : basis.functions) {
      double moment = 0.0;
      for (int i = 0; i < reference.size(); ++i)
        moment += reference.weights[i] * f(reference.point(i));
      sys.constraints.push_back(std::move(f));
      sys.targets.push_back(moment);
    }
  }
  return sys;
}

std::vector<std::vector<double>> moment_matrix(const SphericalConfig& config,
                                               const MomentSystem& sys) {
  if (sys.d != config.d) throw std::domain_error("moment_matrix: dimension mismatch");
  std::vector<std::vector<double>> rows(sys.constraints.size());
  for (std::size_t i = 0; i < sys.constraints.size(); ++i) {
    rows[i].resize(config.size());
    for (int j = 0; j < config.size(); ++j) rows[i][j] = sys.constraints[i](config.point(j));
  }
  return rows;
}

namespace {

Eigen::MatrixXd moment_matrix_eigen(const SphericalConfig& config, const MomentSystem& sys) {
  Eigen::MatrixXd A(sys.size(), config.size());
  for (int i = 0; i < sys.size(); ++i)
    for (int j = 0; j < config.size(); ++j) A(i, j) = sys.constraints[i](config.point(j));
  return A;
}

}  // namespace

std::vector<double> moment_residuals(const SphericalConfig& config, const MomentSystem& sys) {
  const Eigen::MatrixXd A = moment_matrix_eigen(config, sys);
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(config.weights.data(), config.size());
  Eigen::VectorXd r = A * w;
  std::vector<double> out(sys.size());
  for (int i = 0; i < sys.size(); ++i) out[i] = r(i) - sys.targets[i];
  return out;
}

bool verify_extreme(const SphericalConfig& config, const MomentSystem& sys, double tol) {
  sys.validate();
  for (double w : config.weights)
    if (w <= tol) throw std::domain_error("verify_extreme: needs strictly supported atoms");
  if (config.size() > sys.size()) return false;
  const Eigen::MatrixXd A = moment_matrix_eigen(config, sys);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) > tol * s(0);
}

namespace {

struct GEvaluator {
  // per negative degree: weight -fhat_n and the (dim x N) matrix of basis
  // values at the atoms
  std::vector<double> coefficients;
  std::vector<Eigen::MatrixXd> tables;

  double value(const Eigen::VectorXd& w) const {
    double g = 0.0;
    for (std::size_t k = 0; k < tables.size(); ++k)
      g += coefficients[k] * (tables[k] * w).squaredNorm();
    return g;
  }

  void drop_column(int j) {
    for (auto& t : tables) {
      Eigen::MatrixXd next(t.rows(), t.cols() - 1);
      next << t.leftCols(j), t.rightCols(t.cols() - 1 - j);
      t = std::move(next);
    }
  }

  bool empty() const { return tables.empty(); }
};

// Shared walk.  choose_by_g == false reproduces the plain Caratheodory
// pivot (always step in the +eta direction); otherwise both endpoints of
// the feasible segment are compared through G.
SphericalConfig null_space_walk(const SphericalConfig& input, const MomentSystem& sys,
                                double tol, GEvaluator* g_eval, ReductionReport* report) {
  sys.validate();
  {
    SphericalConfig probe = input;
    double max_resid = 0.0;
    for (double r : moment_residuals(probe, sys)) max_resid = std::max(max_resid, std::fabs(r));
    if (max_resid > tol)
      throw std::domain_error("reduce: input violates the moment targets (residual " +
                              std::to_string(max_resid) + " > tol)");
  }

  const int d = input.d;
  std::vector<double> pts = input.points;
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(input.weights.data(), input.size());
  Eigen::MatrixXd A = moment_matrix_eigen(input, sys);

  const int initial_n = input.size();
  int steps = 0;
  if (report) {
    report->g_trace.clear();
    if (g_eval) report->g_trace.push_back(g_eval->value(w));
  }

  for (int iter = 0; iter <= initial_n; ++iter) {
    const int n = static_cast<int>(w.size());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double smax = s(0);
    const double smin = (n <= sys.size()) ? s(s.size() - 1) : 0.0;
    const bool independent = n <= sys.size() && smin > 1e-11 * std::max(smax, 1.0);
    if (independent) break;
    if (iter == initial_n)
      throw numerical_error("reduce: walk failed to terminate");

    // null direction: right singular vector of the smallest singular value
    Eigen::VectorXd eta = svd.matrixV().col(n - 1);
    // deterministic orientation: first non-negligible entry positive
    for (int i = 0; i < n; ++i) {
      if (std::fabs(eta(i)) > 1e-12) {
        if (eta(i) < 0.0) eta = -eta;
        break;
      }
    }
    const double eta_inf = eta.cwiseAbs().maxCoeff();
    if (eta_inf < 1e-15 || (A * eta).cwiseAbs().maxCoeff() > 1e-8 * std::max(smax, 1.0))
      throw numerical_error("reduce: numerical stall, null direction residual too large");

    // feasible segment w + s*eta, s in [-s_minus, s_plus]
    double s_plus = std::numeric_limits<double>::infinity();
    double s_minus = std::numeric_limits<double>::infinity();
    int arg_plus = -1, arg_minus = -1;
    for (int i = 0; i < n; ++i) {
      if (eta(i) < -1e-15) {
        const double cap = w(i) / (-eta(i));
        if (cap < s_plus) {
          s_plus = cap;
          arg_plus = i;
        }
      } else if (eta(i) > 1e-15) {
        const double cap = w(i) / eta(i);
        if (cap < s_minus) {
          s_minus = cap;
          arg_minus = i;
        }
      }
    }
    if (arg_plus < 0 || arg_minus < 0)
      throw numerical_error("reduce: null direction is one-sided (mass row missing?)");
    if (std::min(s_plus, s_minus) < 1e-15 && std::max(s_plus, s_minus) < 1e-15)
      throw numerical_error("reduce: numerical stall, step below 1e-15");

    double step;
    int drop;
    if (g_eval && !g_eval->empty()) {
      // convexity of G along the line: max at an endpoint, never below G(w)
      const double g_plus = g_eval->value(w + s_plus * eta);
      const double g_minus = g_eval->value(w - s_minus * eta);
      if (g_plus >= g_minus) {
        step = s_plus;
        drop = arg_plus;
      } else {
        step = -s_minus;
        drop = arg_minus;
      }
    } else {
      step = s_plus;
      drop = arg_plus;
    }

    w += step * eta;
    w = w.cwiseMax(0.0);
    w(drop) = 0.0;
    ++steps;

    // remove the zeroed atom (and any weight that collapsed with it)
    std::vector<int> keep;
    for (int i = 0; i < n; ++i)
      if (i != drop && w(i) > 1e-15) keep.push_back(i);
    Eigen::VectorXd w_next(keep.size());
    Eigen::MatrixXd a_next(A.rows(), keep.size());
    std::vector<double> pts_next;
    pts_next.reserve(keep.size() * static_cast<std::size_t>(d));
    std::vector<int> dropped;
    for (int i = 0; i < n; ++i)
      if (i == drop || w(i) <= 1e-15) dropped.push_back(i);
    for (std::size_t k = 0; k < keep.size(); ++k) {
      w_next(k) = w(keep[k]);
      a_next.col(k) = A.col(keep[k]);
      const double* p = pts.data() + static_cast<std::size_t>(keep[k]) * d;
      pts_next.insert(pts_next.end(), p, p + d);
    }
    if (g_eval)
      for (auto it = dropped.rbegin(); it != dropped.rend(); ++it) g_eval->drop_column(*it);
    w = std::move(w_next);
    A = std::move(a_next);
    pts = std::move(pts_next);
    if (report && g_eval) report->g_trace.push_back(g_eval->value(w));
  }

  // renormalize the conserved unit mass against accumulated roundoff
  const double mass = w.sum();
  w /= mass;
  SphericalConfig out = SphericalConfig::create(d, std::move(pts),
                                                std::vector<double>(w.data(), w.data() + w.size()));
  if (report) {
    report->steps = steps;
    report->dropped_atoms = initial_n - out.size();
    report->final_support = out.size();
    double max_resid = 0.0;
    for (double r : moment_residuals(out, sys)) max_resid = std::max(max_resid, std::fabs(r));
    report->moment_residual = max_resid;
    if (g_eval) {
      report->g_before = report->g_trace.empty() ? 0.0 : report->g_trace.front();
      report->g_after = report->g_trace.empty() ? 0.0 : report->g_trace.back();
    }
  }
  return out;
}

}  // namespace

SphericalConfig caratheodory_reduce(const SphericalConfig& config, const MomentSystem& sys,
                                    double tol, ReductionReport* report) {
  return null_space_walk(config, sys, tol, nullptr, report);
}

SphericalConfig discrete_minimizer_reduce(const SphericalConfig& config,
                                          const GegenbauerExpansion& exp, double tol,
                                          ReductionReport* report, std::uint64_t seed) {
  if (exp.d != config.d)
    throw std::domain_error("discrete_minimizer_reduce: dimension mismatch");
  const PDClassification cls = classify_pd(exp);

  std::vector<int> plus_degrees;
  for (int n : cls.n_plus)
    if (n >= 1) plus_degrees.push_back(n);
  MomentSystem sys = harmonic_moment_system(config, plus_degrees, seed);

  GEvaluator g_eval;
  for (int n : cls.n_minus) {
    if (n < 1) continue;
    HarmonicBasis basis = harmonic_basis(n, config.d, seed);
    Eigen::MatrixXd table(basis.functions.size(), config.size());
    for (std::size_t r = 0; r < basis.functions.size(); ++r)
      for (int j = 0; j < config.size(); ++j)
        table(static_cast<int>(r), j) = basis.functions[r](config.point(j));
    g_eval.coefficients.push_back(-exp.coeffs[n]);
    g_eval.tables.push_back(std::move(table));
  }

  const double energy_before = spectral_energy(config, exp);
  SphericalConfig out = null_space_walk(config, sys, tol, &g_eval, report);
  if (report) {
    report->energy_before = energy_before;
    report->energy_after = spectral_energy(out, exp);
  }
  return out;
}

std::uint64_t support_bound(const GegenbauerExpansion& exp, double tol) {
  const PDClassification cls = classify_pd(exp, tol);
  std::uint64_t bound = 1;  // degree 0 always counts
  for (int n : cls.n_plus)
    if (n >= 1) bound += harmonic_dim(n, exp.d);
  return bound;
}

std::string ReductionReport::to_json() const {
  nlohmann::json j;
  j["steps"] = steps;
  j["dropped_atoms"] = dropped_atoms;
  j["final_support"] = final_support;
  j["moment_residual"] = moment_residual;
  j["energy_before"] = energy_before;
  j["energy_after"] = energy_after;
  j["g_before"] = g_before;
  j["g_after"] = g_after;
  return j.dump();
}

}  // namespace sphere
