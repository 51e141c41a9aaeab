#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sphere/config.hpp"
#include "sphere/kernel.hpp"

namespace sphere {

struct OptimizerParams {
  int n_atoms = 12;
  int n_starts = 20;
  int max_iters = 2000;
  double initial_step = 0.1;
  double backtrack = 0.5;       // step shrink factor inside the line search
  double grad_tol = 1e-10;
  double merge_radius = 1e-3;   // geodesic; applied after convergence
  bool optimize_weights = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct IterationTraceRow {
  int iter;
  double energy;
  double grad_norm;
  double step;
};

struct StartSummary {
  int start = 0;
  double energy = 0.0;       // post-merge energy of this start's result
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  bool failed = false;       // non-finite energy/gradient; start abandoned
};

struct OptimizerReport {
  double best_energy = 0.0;
  SphericalConfig best_config;        // zero-weight atoms dropped, clusters merged
  int best_start = -1;
  int iterations = 0;                 // of the best start
  double grad_norm = 0.0;             // of the best start at exit
  int merged_atom_count = 0;          // atoms removed by merging in the best start
  std::vector<StartSummary> starts;
  std::vector<IterationTraceRow> trace;  // best start, when tracing enabled
};

// Multi-start projected gradient descent over atom positions (tangential
// step + renormalization) and, optionally, weights (Euclidean projection
// onto the simplex), with a backtracking line search that never accepts an
// energy increase.  Starts run independently (in parallel when OpenMP is
// enabled) and are reduced by start index, so reports are deterministic
// for a fixed seed.  Throws numerical_error if every start fails.
OptimizerReport minimize_energy(const Kernel& kernel, int d, const OptimizerParams& params,
                                bool keep_trace = false);

// Analytic gradients: position gradient of atom i is the tangential part of
// sum_j 2 w_i w_j f'(<x_i,x_j>) x_j; weight gradient is 2 F_mu(x_i).
void energy_gradient(const SphericalConfig& config, const Kernel& kernel,
                     std::vector<double>* position_grad, std::vector<double>* weight_grad);

// Euclidean projection onto the probability simplex (sort-based, exact).
std::vector<double> project_to_simplex(std::vector<double> v);

struct LocalMinProbeReport {
  bool no_violation = true;
  double margin = 0.0;  // min over probes of (linear mixture coefficient - I(xi))
  double worst_mixture_drop = 0.0;  // most negative I(mix) - I(xi) found
  std::optional<SphericalConfig> violating_probe;
  double violating_tau = 0.0;
};

// Mixture probe of local minimality: for random Dirac and few-atom probe
// measures mu and each tau, evaluates I((1-tau) xi + tau mu) through the
// bilinear expansion and reports any strict decrease.  A `true` result
// means "no violation found", never a certificate.
LocalMinProbeReport local_min_probe(const SphericalConfig& config, const Kernel& kernel,
                                    int n_probes, const std::vector<double>& tau_grid,
                                    std::uint64_t seed, double tol = 1e-9);

// Greedy agglomeration of atoms within a geodesic radius; merged atoms move
// to their weight-weighted normalized mean and weights add.
SphericalConfig merge_clusters(const SphericalConfig& config, double radius,
                               int* merged_count = nullptr);

}  // namespace sphere
