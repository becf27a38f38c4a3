#pragma once

// Command-line front end. Exit codes: 0 success, 1 validation error, 2 solver
// or quadrature failure. File outputs go to --out, else $CONELAB_OUT, else ".".

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "conelab/config.hpp"
#include "conelab/cone.hpp"
#include "conelab/cross_section.hpp"
#include "conelab/errors.hpp"
#include "conelab/io.hpp"
#include "conelab/mode_solver.hpp"
#include "conelab/report.hpp"

namespace conelab::cli {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { ok = 0, validation_failure = 1, solver_failure = 2 };

namespace detail {

inline std::filesystem::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CONELAB_OUT"); env && *env) return env;
  return ".";
}

struct BaseOptions {
  std::string base = "circle";
  double beta = 1.0;
  int m = 2;
  std::size_t count = 0;
  std::string file;
  bool fat = false;
};

inline void add_base_options(CLI::App* app, BaseOptions& b) {
  app->add_option("--base", b.base, "circle | sphere | file")->check(CLI::IsMember({"circle", "sphere", "file"}));
  app->add_option("--beta", b.beta, "circle circumference / 2pi");
  app->add_option("--m", b.m, "sphere dimension");
  app->add_option("--count", b.count, "number of listed eigenvalues");
  app->add_option("--file", b.file, "spectrum JSON document");
  app->add_flag("--fat", b.fat, "allow beta > 1 (negative controls)");
}

inline CrossSection build_base(const BaseOptions& b, std::size_t min_count) {
  const std::size_t count = std::max<std::size_t>(b.count == 0 ? 8 : b.count, min_count);
  if (b.base == "sphere") return sphere_spectrum(b.m, count);
  if (b.base == "file") {
    if (b.file.empty()) throw config_error("--file", "--base file needs --file");
    return load_spectrum(io::read_file(b.file));
  }
  return circle_spectrum(b.beta, count, b.fat);
}

inline void write_outputs(const std::filesystem::path& dir, const std::string& command, const ExperimentOutput& result,
                          const nlohmann::json& config, double wall_seconds, std::ostream& out) {
  const std::string csv_name = result.stem + ".csv";
  const std::string summary_name = result.stem + "_summary.json";
  const std::string manifest_name = result.stem + "_manifest.json";
  io::atomic_write(dir / csv_name, result.csv);
  io::atomic_write(dir / summary_name, result.summary.dump(2) + "\n");
  const nlohmann::json manifest{{"tool", "conelab"},
                                {"version", kToolVersion},
                                {"command", command},
                                {"config", config},
                                {"config_hash", io::fnv1a_hex(config.dump())},
                                {"outputs", {csv_name, summary_name}},
                                {"wall_time_seconds", wall_seconds}};
  io::atomic_write(dir / manifest_name, manifest.dump(2) + "\n");
  out << (dir / csv_name).string() << "\n" << (dir / summary_name).string() << "\n";
}

inline int run_config(const ExperimentConfig& cfg, const std::string& command, const std::string& out_flag,
                      std::ostream& out) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentOutput result = run_experiment(cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_outputs(output_dir(out_flag), command, result, to_json(cfg), wall, out);
  return ok;
}

}  // namespace detail

inline int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"conelab: harmonic functions on metric cones and smoothed cone surfaces"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // alpha
  double alpha_n = 2.0, alpha_lambda = 0.0;
  auto* alpha = app.add_subcommand("alpha", "radial exponent of a cone harmonic");
  alpha->add_option("--n", alpha_n, "cone dimension N")->required();
  alpha->add_option("--lambda", alpha_lambda, "eigenvalue of the cross-section")->required();

  // spectrum
  detail::BaseOptions spec_base;
  std::optional<double> spec_n;
  auto* spectrum = app.add_subcommand("spectrum", "cross-section spectrum and admissibility");
  detail::add_base_options(spectrum, spec_base);
  spectrum->add_option("--n", spec_n, "cone dimension for the Obata check");

  // energy
  detail::BaseOptions en_base;
  double en_n = 2.0, en_radius = 1.0;
  std::vector<std::string> en_terms;
  auto* energy = app.add_subcommand("energy", "ball energies of a harmonic expansion");
  detail::add_base_options(energy, en_base);
  energy->add_option("--n", en_n, "cone dimension N");
  energy->add_option("--term", en_terms, "mode term i:a (repeatable)")->required();
  energy->add_option("--radius", en_radius, "ball radius in (0, 1]");

  // decay
  ExperimentConfig decay_cfg;
  decay_cfg.experiment = ExperimentKind::decay;
  decay_cfg.sweep.beta = 0.5;
  std::optional<int> decay_sphere;
  std::optional<double> decay_eps;
  bool decay_profile = false;
  std::string decay_out;
  auto* decay = app.add_subcommand("decay", "mean gradient energy over a dyadic radius ladder");
  decay->add_option("--beta", decay_cfg.sweep.beta, "circle base / profile slope");
  decay->add_option("--sphere", decay_sphere, "use the unit sphere S^m as base");
  decay->add_option("--n", decay_cfg.decay.n, "cone dimension N");
  decay->add_option("--mode", decay_cfg.decay.mode, "mode index (cone source)");
  decay->add_option("--coefficient", decay_cfg.decay.coefficient, "mode coefficient");
  decay->add_option("--levels", decay_cfg.decay.levels, "number of dyadic radii");
  decay->add_option("--epsilon", decay_eps, "smoothing scale; selects the surface-of-revolution source");
  decay->add_flag("--profile", decay_profile, "quadrature on the exact cone surface instead of closed forms");
  decay->add_option("--k", decay_cfg.sweep.k, "angular mode (profile source)");
  decay->add_option("--r-max", decay_cfg.sweep.r_max, "outer radius (profile source)");
  decay->add_flag("--sharp-only", decay_cfg.decay.sharp_only, "reject non-sharp cones");
  decay->add_option("--out", decay_out, "output directory");

  // iterate
  ExperimentConfig it_cfg;
  it_cfg.experiment = ExperimentKind::iterate;
  std::string it_out;
  auto* iterate = app.add_subcommand("iterate", "dyadic energy recursion");
  iterate->add_option("--e0", it_cfg.iterate.E0);
  iterate->add_option("--delta0", it_cfg.iterate.delta0);
  iterate->add_option("--c", it_cfg.iterate.C, "forcing constant");
  iterate->add_option("--p", it_cfg.iterate.p);
  iterate->add_option("--n", it_cfg.iterate.N);
  iterate->add_option("--r0", it_cfg.iterate.R0);
  iterate->add_option("--kmax", it_cfg.iterate.kmax);
  iterate->add_option("--threshold", it_cfg.iterate.threshold);
  iterate->add_option("--out", it_out, "output directory");

  // solve-mode
  double sm_beta = 1.0, sm_eps = 0.0, sm_rmax = 1.0, sm_tol = 1e-8;
  int sm_k = 1;
  std::string sm_out;
  auto* solve = app.add_subcommand("solve-mode", "radial factor of u = h(r) cos(k theta)");
  solve->add_option("--beta", sm_beta);
  solve->add_option("--epsilon", sm_eps, "smoothing scale, 0 for the exact cone");
  solve->add_option("--k", sm_k);
  solve->add_option("--r-max", sm_rmax);
  solve->add_option("--tol", sm_tol, "residual tolerance");
  solve->add_option("--out", sm_out, "output directory");

  // sweep
  std::string sw_config, sw_manifest, sw_out;
  std::optional<double> sw_beta, sw_gamma, sw_p, sw_rmax;
  std::optional<int> sw_k;
  std::optional<unsigned> sw_threads;
  std::optional<bool> sw_control;
  auto* sweep = app.add_subcommand("sweep", "run a configured experiment");
  auto* cfg_opt = sweep->add_option("--config", sw_config, "experiment JSON");
  auto* man_opt = sweep->add_option("--manifest", sw_manifest, "re-run from a manifest");
  cfg_opt->excludes(man_opt);
  sweep->add_option("--beta", sw_beta);
  sweep->add_option("--gamma", sw_gamma);
  sweep->add_option("--p", sw_p);
  sweep->add_option("--k", sw_k);
  sweep->add_option("--r-max", sw_rmax);
  sweep->add_option("--threads", sw_threads, "worker threads, 0 = all cores");
  sweep->add_option("--control", sw_control, "admit sub-threshold p");
  sweep->add_option("--out", sw_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::CallForVersion& e) {
    out << kToolVersion << "\n";
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return validation_failure;
  }

  try {
    if (*alpha) {
      out << io::format_double(alpha_exponent(alpha_n, alpha_lambda)) << "\n";
      return ok;
    }
    if (*spectrum) {
      const CrossSection cs = detail::build_base(spec_base, 2);
      const double N = spec_n.value_or(spec_base.base == "sphere" ? spec_base.m + 1.0 : 2.0);
      const auto ob = obata_check(cs, N);
      nlohmann::json doc = to_json(cs);
      doc["n"] = N;
      doc["obata"] = {{"pass", ob.pass}, {"margin", ob.margin}};
      doc["sharpness_gap"] = sharpness_gap(cs);
      doc["sharp"] = sharpness_gap(cs) > 1e-15;
      doc["bg_density"] = cs.mass / N;
      out << doc.dump(2) << "\n";
      return ok;
    }
    if (*energy) {
      std::vector<ModeTerm> terms;
      std::size_t max_index = 1;
      for (const auto& t : en_terms) {
        const auto colon = t.find(':');
        if (colon == std::string::npos) throw config_error("--term", "term '" + t + "' is not of the form i:a");
        try {
          ModeTerm term{std::stoul(t.substr(0, colon)), std::stod(t.substr(colon + 1))};
          max_index = std::max(max_index, term.index);
          terms.push_back(term);
        } catch (const std::logic_error&) {
          throw config_error("--term", "term '" + t + "' is not of the form i:a");
        }
      }
      const HarmonicExpansion exp =
          make_expansion(make_cone(en_n, detail::build_base(en_base, max_index + 1)), std::move(terms));
      nlohmann::json doc{{"radius", en_radius},
                         {"ball_energy", ball_energy(exp, en_radius)},
                         {"mean_ball_energy", mean_ball_energy(exp, en_radius)},
                         {"alpha1", exp.cone.alpha1()},
                         {"bg_density", bg_density(exp.cone)}};
      const auto c = contraction_check(exp);
      doc["contraction"] = {{"ratio", c.ratio}, {"delta0", c.delta0}, {"bound", c.bound}};
      out << doc.dump(2) << "\n";
      return ok;
    }
    if (*decay) {
      if (decay_sphere) {
        decay_cfg.decay.base = "sphere";
        decay_cfg.decay.sphere_m = *decay_sphere;
        if (decay->count("--n") == 0) decay_cfg.decay.n = *decay_sphere + 1.0;
      }
      if (decay_eps || decay_profile) {
        decay_cfg.decay.source = "profile";
        decay_cfg.decay.epsilon = decay_eps.value_or(0.0);
      }
      return detail::run_config(decay_cfg, "decay", decay_out, out);
    }
    if (*iterate) return detail::run_config(it_cfg, "iterate", it_out, out);
    if (*solve) {
      const ProfileFunction pf = sm_eps > 0.0 ? ProfileFunction::smoothed(sm_beta, sm_eps, sm_rmax)
                                              : ProfileFunction::exact_cone(sm_beta, sm_rmax);
      SolveOptions opt;
      opt.residual_tol = sm_tol;
      const auto t0 = std::chrono::steady_clock::now();
      const ModeSolution sol = solve_mode(pf, sm_k, opt);
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      ExperimentOutput result{"mode", mode_csv(sol),
                              {{"nodes", sol.size()},
                               {"max_residual", sol.max_residual()},
                               {"frobenius_exponent", sol.frobenius_exponent()},
                               {"leading_coefficient", sol.leading_coefficient()},
                               {"r_series", sol.r_series()},
                               {"series_terms", sol.series_terms()}}};
      const nlohmann::json config{{"beta", sm_beta}, {"epsilon", sm_eps}, {"k", sm_k}, {"r_max", sm_rmax},
                                  {"tol", sm_tol}};
      detail::write_outputs(detail::output_dir(sm_out), "solve-mode", result, config, wall, out);
      return ok;
    }
    if (*sweep) {
      nlohmann::json doc;
      if (!sw_manifest.empty()) {
        const nlohmann::json manifest = nlohmann::json::parse(io::read_file(sw_manifest));
        if (!manifest.contains("config")) throw config_error("--manifest", "manifest has no 'config' entry");
        doc = manifest.at("config");
      } else if (!sw_config.empty()) {
        doc = nlohmann::json::parse(io::read_file(sw_config));
      } else {
        throw config_error("--config", "sweep needs --config or --manifest");
      }
      ExperimentConfig cfg = config_from_json(doc);
      if (sw_beta) cfg.sweep.beta = *sw_beta;
      if (sw_gamma) cfg.sweep.gamma = *sw_gamma;
      if (sw_p) cfg.sweep.p = *sw_p;
      if (sw_k) cfg.sweep.k = *sw_k;
      if (sw_rmax) cfg.sweep.r_max = *sw_rmax;
      if (sw_threads) cfg.sweep.threads = *sw_threads;
      if (sw_control) cfg.sweep.control = *sw_control;
      return detail::run_config(cfg, "sweep", sw_out, out);
    }
  } catch (const config_error& e) {
    err << "error: " << e.what() << " [parameter: " << e.parameter() << "]\n";
    return validation_failure;
  } catch (const parse_error& e) {
    err << "error: " << e.what() << " [field: " << e.field() << "]\n";
    return validation_failure;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << "\n";
    return validation_failure;
  } catch (const domain_error& e) {
    err << "error: " << e.what() << "\n";
    return validation_failure;
  } catch (const structural_error& e) {
    err << "error: " << e.what() << "\n";
    return validation_failure;
  } catch (const degenerate_input_error& e) {
    err << "error: " << e.what() << "\n";
    return validation_failure;
  } catch (const solver_error& e) {
    err << "solver failure: " << e.what() << "\n";
    return solver_failure;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return solver_failure;
  }
  return validation_failure;
}

}  // namespace conelab::cli
