// Command-line front end: reproducible experiments over the library with
// machine-readable JSON reports (schemas under schemas/).

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlohmann/json.hpp"
#include "sphere/common.hpp"
#include "sphere/config.hpp"
#include "sphere/diffop.hpp"
#include "sphere/energy.hpp"
#include "sphere/gegenbauer.hpp"
#include "sphere/kernel.hpp"
#include "sphere/moments.hpp"
#include "sphere/optimizer.hpp"
#include "sphere/witness.hpp"

using json = nlohmann::ordered_json;
using namespace sphere;

namespace {

constexpr const char* kVersion = "0.1.0";

struct OutputOptions {
  std::string out_path;  // empty = stdout
  bool no_meta = false;
};

void attach_output_flags(CLI::App* cmd, OutputOptions* opts) {
  cmd->add_option("--out", opts->out_path, "write the JSON report to this path");
  cmd->add_flag("--no-meta", opts->no_meta,
                "omit the meta block (timestamps) for byte-stable output");
}

void emit(const json& report, const OutputOptions& opts) {
  json out = report;
  if (!opts.no_meta) {
    const auto now = std::chrono::system_clock::now();
    out["meta"] = {{"version", kVersion},
                   {"unix_time", std::chrono::duration_cast<std::chrono::seconds>(
                                     now.time_since_epoch())
                                     .count()}};
  }
  const std::string text = out.dump(2) + "\n";
  if (opts.out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(opts.out_path);
    if (!f) throw std::runtime_error("cannot write '" + opts.out_path + "'");
    f << text;
  }
}

json expansion_json(const GegenbauerExpansion& exp) {
  return json{{"d", exp.d},
              {"lambda", exp.lambda},
              {"coeffs", exp.coeffs},
              {"tol", exp.truncation_error_bound},
              {"normalization", exp.d == 2 ? "chebyshev-d2" : "paper"}};
}

json config_json(const SphericalConfig& config) {
  json points = json::array();
  for (int i = 0; i < config.size(); ++i) {
    const auto p = config.point(i);
    points.push_back(std::vector<double>(p.begin(), p.end()));
  }
  return json{{"d", config.d}, {"points", std::move(points)}, {"weights", config.weights}};
}

json classification_json(const GegenbauerExpansion& exp, const PDClassification& cls) {
  json j{{"n_plus", cls.n_plus},
         {"n_minus", cls.n_minus},
         {"pd_up_to_constant", cls.pd_up_to_constant},
         {"tol", cls.tol}};
  double most_negative = 0.0;
  int arg = -1;
  for (int n : cls.n_minus)
    if (n >= 1 && exp.coeffs[n] < most_negative) {
      most_negative = exp.coeffs[n];
      arg = n;
    }
  if (arg >= 0)
    j["max_negative"] = {{"n", arg}, {"value", most_negative}};
  else
    j["max_negative"] = nullptr;
  return j;
}

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"pairwise-interaction energies of measures on the unit sphere"};
  app.require_subcommand(1);

  // ---- expand ----
  auto* expand_cmd = app.add_subcommand("expand", "ultraspherical expansion of a kernel");
  std::string kernel_lit;
  int d = 3, nmax = 12, mquad = 0;
  OutputOptions expand_out;
  expand_cmd->add_option("--kernel", kernel_lit, "kernel literal")->required();
  expand_cmd->add_option("--d", d, "ambient dimension (sphere S^{d-1})");
  expand_cmd->add_option("--nmax", nmax, "highest expansion degree");
  expand_cmd->add_option("--mquad", mquad, "quadrature nodes (0 = default)");
  attach_output_flags(expand_cmd, &expand_out);
  expand_cmd->callback([&] {
    const Kernel kernel = Kernel::parse(kernel_lit);
    const auto exp = expand_kernel(kernel, d, nmax, mquad);
    emit(json{{"command", "expand"},
              {"kernel", kernel_lit},
              {"d", d},
              {"nmax", nmax},
              {"expansion", expansion_json(exp)}},
         expand_out);
  });

  // ---- classify ----
  auto* classify_cmd = app.add_subcommand("classify", "positive-definiteness classification");
  std::string cls_kernel;
  int cls_d = 3, cls_nmax = 12;
  double cls_tol = 0.0;
  OutputOptions cls_out;
  classify_cmd->add_option("--kernel", cls_kernel, "kernel literal")->required();
  classify_cmd->add_option("--d", cls_d, "ambient dimension");
  classify_cmd->add_option("--nmax", cls_nmax, "highest expansion degree");
  classify_cmd->add_option("--tol", cls_tol, "coefficient threshold (0 = scaled default)");
  attach_output_flags(classify_cmd, &cls_out);
  classify_cmd->callback([&] {
    const auto exp = expand_kernel(Kernel::parse(cls_kernel), cls_d, cls_nmax);
    const auto cls = classify_pd(exp, cls_tol);
    json j{{"command", "classify"}, {"kernel", cls_kernel}, {"d", cls_d}, {"nmax", cls_nmax}};
    j.update(classification_json(exp, cls));
    j["coeffs"] = exp.coeffs;
    emit(j, cls_out);
  });

  // ---- energy ----
  auto* energy_cmd = app.add_subcommand("energy", "discrete energy of a configuration");
  std::string en_config, en_kernel;
  OutputOptions en_out;
  energy_cmd->add_option("--config", en_config, "config path, JSON path, or builtin:NAME")
      ->required();
  energy_cmd->add_option("--kernel", en_kernel, "kernel literal")->required();
  attach_output_flags(energy_cmd, &en_out);
  energy_cmd->callback([&] {
    const auto cfg = load_config(en_config);
    const Kernel kernel = Kernel::parse(en_kernel);
    emit(json{{"command", "energy"},
              {"config", en_config},
              {"kernel", en_kernel},
              {"d", cfg.d},
              {"n_atoms", cfg.size()},
              {"energy", discrete_energy(cfg, kernel)}},
         en_out);
  });

  // ---- potential ----
  auto* pot_cmd = app.add_subcommand("potential", "potential extremes over support and grid");
  std::string pot_config, pot_kernel;
  int pot_grid = 10000;
  std::uint64_t pot_seed = 0;
  OutputOptions pot_out;
  pot_cmd->add_option("--config", pot_config, "config path or builtin:NAME")->required();
  pot_cmd->add_option("--kernel", pot_kernel, "kernel literal")->required();
  pot_cmd->add_option("--grid", pot_grid, "probe grid size");
  pot_cmd->add_option("--seed", pot_seed, "probe grid seed");
  attach_output_flags(pot_cmd, &pot_out);
  pot_cmd->callback([&] {
    const auto cfg = load_config(pot_config);
    const auto rep = potential_report(cfg, Kernel::parse(pot_kernel), pot_grid, pot_seed);
    emit(json{{"command", "potential"},
              {"config", pot_config},
              {"kernel", pot_kernel},
              {"d", cfg.d},
              {"grid_size", rep.grid_size},
              {"seed", rep.seed},
              {"support_min", rep.support_min},
              {"support_max", rep.support_max},
              {"grid_min", rep.grid_min},
              {"constancy_gap", rep.constancy_gap}},
         pot_out);
  });

  // ---- minimize ----
  auto* min_cmd = app.add_subcommand("minimize", "multi-start energy minimization");
  std::string min_kernel, min_trace, min_out_config;
  int min_d = 3;
  OptimizerParams params;
  bool no_weights = false;
  OutputOptions min_out;
  min_cmd->add_option("--kernel", min_kernel, "kernel literal")->required();
  min_cmd->add_option("--d", min_d, "ambient dimension");
  min_cmd->add_option("--atoms", params.n_atoms, "atoms per start");
  min_cmd->add_option("--starts", params.n_starts, "independent starts");
  min_cmd->add_option("--iters", params.max_iters, "iteration cap per start");
  min_cmd->add_option("--step", params.initial_step, "initial line-search step");
  min_cmd->add_option("--grad-tol", params.grad_tol, "gradient norm stopping tolerance");
  min_cmd->add_option("--merge-radius", params.merge_radius, "geodesic cluster merge radius");
  min_cmd->add_option("--seed", params.seed, "base seed");
  min_cmd->add_flag("--no-weights", no_weights, "keep weights fixed at 1/N");
  min_cmd->add_option("--trace", min_trace, "write per-iteration CSV of the best start");
  min_cmd->add_option("--out-config", min_out_config, "write the best config as CSV");
  attach_output_flags(min_cmd, &min_out);
  min_cmd->callback([&] {
    params.optimize_weights = !no_weights;
    const auto rep = minimize_energy(Kernel::parse(min_kernel), min_d, params,
                                     /*keep_trace=*/!min_trace.empty());
    json starts = json::array();
    for (const auto& s : rep.starts)
      starts.push_back(json{{"start", s.start},
                            {"energy", s.energy},
                            {"iterations", s.iterations},
                            {"grad_norm", s.grad_norm},
                            {"converged", s.converged},
                            {"failed", s.failed}});
    emit(json{{"command", "minimize"},
              {"kernel", min_kernel},
              {"d", min_d},
              {"seed", params.seed},
              {"best_energy", rep.best_energy},
              {"best_start", rep.best_start},
              {"iterations", rep.iterations},
              {"grad_norm", rep.grad_norm},
              {"merged_atom_count", rep.merged_atom_count},
              {"per_start", std::move(starts)},
              {"best_config", config_json(rep.best_config)}},
         min_out);
    if (!min_trace.empty()) {
      std::ofstream f(min_trace);
      f << "iter,energy,grad_norm,step\n";
      char buf[160];
      for (const auto& row : rep.trace) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", row.iter, row.energy,
                      row.grad_norm, row.step);
        f << buf;
      }
    }
    if (!min_out_config.empty()) save_config_csv(rep.best_config, min_out_config);
  });

  // ---- reduce ----
  auto* red_cmd = app.add_subcommand(
      "reduce", "support reduction; without --config runs the minimizer first");
  std::string red_kernel, red_config, red_out_config;
  int red_d = 3, red_nmax = 12;
  double red_tol = 1e-9;
  OptimizerParams red_params;
  std::uint64_t red_seed = 0;
  OutputOptions red_out;
  red_cmd->add_option("--kernel", red_kernel, "kernel literal")->required();
  red_cmd->add_option("--d", red_d, "ambient dimension");
  red_cmd->add_option("--config", red_config, "input config (skips the optimizer)");
  red_cmd->add_option("--nmax", red_nmax, "expansion degree cap");
  red_cmd->add_option("--tol", red_tol, "moment tolerance");
  red_cmd->add_option("--atoms", red_params.n_atoms, "optimizer atoms");
  red_cmd->add_option("--starts", red_params.n_starts, "optimizer starts");
  red_cmd->add_option("--iters", red_params.max_iters, "optimizer iteration cap");
  red_cmd->add_option("--seed", red_seed, "seed for optimizer and bases");
  red_cmd->add_option("--out-config", red_out_config, "write the reduced config as CSV");
  attach_output_flags(red_cmd, &red_out);
  red_cmd->callback([&] {
    const Kernel kernel = Kernel::parse(red_kernel);
    const auto exp = expand_kernel(kernel, red_d, red_nmax);

    json j{{"command", "reduce"}, {"kernel", red_kernel}, {"d", red_d}, {"nmax", red_nmax}};
    SphericalConfig input{};
    if (red_config.empty()) {
      red_params.seed = red_seed;
      const auto mrep = minimize_energy(kernel, red_d, red_params);
      input = mrep.best_config;
      j["pipeline"] = true;
      j["minimize"] = {{"best_energy", mrep.best_energy},
                       {"best_start", mrep.best_start},
                       {"n_atoms", input.size()}};
    } else {
      input = load_config(red_config);
      j["pipeline"] = false;
      j["config"] = red_config;
    }

    ReductionReport rrep;
    const auto reduced = discrete_minimizer_reduce(input, exp, red_tol, &rrep, red_seed);
    const auto bound = support_bound(exp);
    if (reduced.size() > static_cast<int>(bound))
      throw numerical_error("reduce: final support exceeds the theorem bound");
    if (rrep.energy_after > rrep.energy_before + 10.0 * red_tol)
      throw numerical_error("reduce: energy increased beyond tolerance");
    const auto prep = potential_report(reduced, kernel, 10000, red_seed);
    j["reduction"] = json::parse(rrep.to_json());
    j["g_trace"] = rrep.g_trace;
    j["support_bound"] = bound;
    j["bound_satisfied"] = reduced.size() <= static_cast<int>(bound);
    j["potential"] = {{"support_min", prep.support_min},
                      {"support_max", prep.support_max},
                      {"grid_min", prep.grid_min},
                      {"constancy_gap", prep.constancy_gap}};
    j["final_config"] = config_json(reduced);
    emit(j, red_out);
    if (!red_out_config.empty()) save_config_csv(reduced, red_out_config);
  });

  // ---- witness ----
  auto* wit_cmd = app.add_subcommand("witness", "non-positive-definiteness certificate");
  double wit_p = 3.0, wit_eps = 0.0;
  int wit_d = 3;
  std::vector<double> wit_scan;
  OutputOptions wit_out;
  wit_cmd->add_option("--p", wit_p, "p-frame exponent")->required();
  wit_cmd->add_option("--d", wit_d, "ambient dimension");
  wit_cmd->add_option("--eps", wit_eps, "starting epsilon (0 = default schedule)");
  wit_cmd->add_option("--scan", wit_scan, "p_min p_max step: emit CSV instead of JSON")
      ->expected(3);
  attach_output_flags(wit_cmd, &wit_out);
  wit_cmd->callback([&] {
    if (!wit_scan.empty()) {
      std::ostringstream csv;
      csv << "p,k,eps_final,form_value\n";
      char buf[160];
      for (double p = wit_scan[0]; p <= wit_scan[1] + 1e-12; p += wit_scan[2]) {
        const double nearest_even = 2.0 * std::round(p / 2.0);
        if (std::fabs(p - nearest_even) <= 1e-9) continue;  // even integers rejected
        const auto rep = non_pd_witness(p, wit_d, wit_eps);
        std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g\n", p, rep.k, rep.eps,
                      rep.quadratic_form_value);
        csv << buf;
      }
      if (wit_out.out_path.empty())
        std::cout << csv.str();
      else {
        std::ofstream f(wit_out.out_path);
        f << csv.str();
      }
      return;
    }
    const auto rep = non_pd_witness(wit_p, wit_d, wit_eps);
    json points = json::array();
    for (int i = 0; i < 2 * rep.k + 2; ++i) {
      const double* p0 = rep.points.data() + static_cast<std::size_t>(i) * rep.d;
      points.push_back(std::vector<double>(p0, p0 + rep.d));
    }
    emit(json{{"command", "witness"},
              {"p", rep.p},
              {"d", rep.d},
              {"k", rep.k},
              {"eps_final", rep.eps},
              {"shrink_steps", rep.shrink_steps},
              {"alpha", rep.alpha},
              {"beta", rep.beta},
              {"quadratic_form_value", rep.quadratic_form_value},
              {"first_block_term", rep.first_block_term},
              {"cross_term", rep.cross_term},
              {"bp", bp_coefficient(rep.k, rep.p)},
              {"hadamard_min_points", hadamard_power_bound(rep.p).first},
              {"u", rep.u},
              {"points", std::move(points)}},
         wit_out);
  });

  // ---- verify-diffop ----
  auto* diff_cmd = app.add_subcommand("verify-diffop", "sign scan of the iterated operators");
  int diff_k = 1, diff_d = 3;
  double diff_tol = 1e-12, diff_h = 1e-3;
  std::string diff_pgrid, diff_tgrid, diff_csv;
  OutputOptions diff_out;
  diff_cmd->add_option("--k", diff_k, "operator index");
  diff_cmd->add_option("--d", diff_d, "latitudinal dimension of the operator");
  diff_cmd->add_option("--pgrid", diff_pgrid, "comma-separated p values");
  diff_cmd->add_option("--tgrid", diff_tgrid, "comma-separated t values");
  diff_cmd->add_option("--tol", diff_tol, "indeterminacy threshold");
  diff_cmd->add_option("--stencil-h", diff_h, "stencil step");
  diff_cmd->add_option("--csv", diff_csv, "also write the cell matrix as CSV");
  attach_output_flags(diff_cmd, &diff_out);
  diff_cmd->callback([&] {
    std::vector<double> ps = diff_pgrid.empty()
                                 ? std::vector<double>{2.0 * diff_k + 0.25, 2.0 * diff_k + 0.5,
                                                       2.0 * diff_k + 1.0}
                                 : parse_grid(diff_pgrid);
    std::vector<double> ts;
    if (diff_tgrid.empty())
      for (int i = 1; i <= 10; ++i) ts.push_back(0.1 * i);
    else
      ts = parse_grid(diff_tgrid);
    const auto rep = dk_sign_scan(diff_k, diff_d, ps, ts, diff_tol, diff_h);
    json j{{"command", "verify-diffop"}};
    j.update(json::parse(rep.to_json()));
    emit(j, diff_out);
    if (!diff_csv.empty()) {
      std::ofstream f(diff_csv);
      f << rep.to_csv();
    }
  });

  // ---- designs ----
  auto* des_cmd = app.add_subcommand("designs", "weighted-design verification");
  std::string des_config, des_degrees;
  int des_nmax = 0;
  double des_tol = 1e-9;
  std::uint64_t des_seed = 0;
  OutputOptions des_out;
  des_cmd->add_option("--config", des_config, "config path or builtin:NAME")->required();
  des_cmd->add_option("--degrees", des_degrees, "comma-separated degrees to verify");
  des_cmd->add_option("--nmax", des_nmax, "verify all degrees 1..nmax");
  des_cmd->add_option("--tol", des_tol, "residual threshold");
  des_cmd->add_option("--seed", des_seed, "basis seed (d >= 4)");
  attach_output_flags(des_cmd, &des_out);
  des_cmd->callback([&] {
    const auto cfg = load_config(des_config);
    std::vector<int> degrees;
    if (!des_degrees.empty())
      for (double v : parse_grid(des_degrees)) degrees.push_back(static_cast<int>(v));
    else {
      const int hi = des_nmax > 0 ? des_nmax : 3;
      for (int n = 1; n <= hi; ++n) degrees.push_back(n);
    }
    json residuals = json::array();
    bool all_ok = true;
    for (int n : degrees) {
      const auto basis = harmonic_basis(n, cfg.d, des_seed);
      // sigma-moments of every harmonic of degree n >= 1 vanish
      double worst = 0.0;
      for (const auto& f : basis.functions) {
        double moment = 0.0;
        for (int i = 0; i < cfg.size(); ++i) moment += cfg.weights[i] * f(cfg.point(i));
        worst = std::max(worst, std::fabs(moment));
      }
      residuals.push_back(json{{"n", n}, {"residual", worst}, {"ok", worst <= des_tol}});
      all_ok = all_ok && worst <= des_tol;
    }
    emit(json{{"command", "designs"},
              {"config", des_config},
              {"d", cfg.d},
              {"n_atoms", cfg.size()},
              {"tol", des_tol},
              {"degrees", degrees},
              {"residuals", std::move(residuals)},
              {"is_weighted_design", all_ok}},
         des_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // every usage error maps to 1
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const std::overflow_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const sphere::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
