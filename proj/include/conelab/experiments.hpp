#pragma once

// Epsilon sweeps on smoothed cones: Hoelder-seminorm blow-up of |grad u| and
// L^p-Hessian blow-up under the normalization ||Delta u||_p + ||grad u||_p,
// plus decay experiments over dyadic radius ladders.
//
// Scaling picture for u = h cos(theta) on phi_eps with alpha = k/beta: h ~ r^alpha
// for r >> eps and h ~ eps^{alpha-1} r inside the core, so
//   [ |grad u| ]_{C^gamma} ~ eps^{alpha - 1 - gamma},
//   ||Hess u||_{L^p}       ~ eps^{alpha - 2 + 2/p}.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <numbers>
#include <span>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "conelab/cone.hpp"
#include "conelab/cross_section.hpp"
#include "conelab/errors.hpp"
#include "conelab/fields.hpp"
#include "conelab/fit.hpp"
#include "conelab/mode_solver.hpp"
#include "conelab/profile.hpp"

namespace conelab {

enum class SweepKind { holder, cz };

struct EpsilonGrid {
  double start = 1e-1;
  double stop = 1e-3;
  std::size_t count = 7;

  std::vector<double> values() const {
    std::vector<double> out(count);
    if (count == 1) {
      out[0] = start;
      return out;
    }
    const double a = std::log(start), b = std::log(stop);
    for (std::size_t i = 0; i < count; ++i)
      out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    out.front() = start;
    out.back() = stop;
    return out;
  }
};

struct SweepConfig {
  SweepKind kind = SweepKind::holder;
  double beta = 2.0 / 3.0;
  EpsilonGrid epsilons;
  int k = 1;
  double gamma = 0.75;
  double p = 6.0;
  double r_max = 1.0;
  double ode_tol = 1e-8;
  double quadrature_tol = 1e-10;
  bool control = false;       // admit sub-threshold p for control runs
  unsigned threads = 0;       // 0: hardware concurrency

  double alpha() const { return static_cast<double>(k) / beta; }
  /// 2/(2 - alpha): the Hessian L^p norm blows up only for p above this.
  double cz_threshold() const {
    const double a = alpha();
    return a < 2.0 ? 2.0 / (2.0 - a) : std::numeric_limits<double>::infinity();
  }
};

inline void validate(const SweepConfig& cfg) {
  if (!(cfg.beta > 0.0 && cfg.beta <= 1.0)) throw config_error("beta", "beta must lie in (0, 1]");
  if (cfg.k < 1) throw config_error("k", "mode k must be >= 1");
  if (!(cfg.r_max > 0.0)) throw config_error("r_max", "r_max must be positive");
  if (cfg.epsilons.count < 2) throw config_error("epsilons.count", "sweep needs at least two epsilons");
  if (!(cfg.epsilons.start > 0.0 && cfg.epsilons.stop > 0.0))
    throw config_error("epsilons", "epsilons must be positive");
  if (cfg.epsilons.start == cfg.epsilons.stop) throw config_error("epsilons", "start and stop coincide");
  if (std::max(cfg.epsilons.start, cfg.epsilons.stop) >= cfg.r_max)
    throw config_error("epsilons", "epsilons must be smaller than r_max");
  if (!(cfg.ode_tol > 0.0)) throw config_error("tolerances.ode", "ode tolerance must be positive");
  if (!(cfg.quadrature_tol > 0.0)) throw config_error("tolerances.quadrature", "quadrature tolerance must be positive");
  if (cfg.kind == SweepKind::holder) {
    if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) throw config_error("gamma", "gamma must lie in (0, 1]");
  } else {
    if (!(cfg.p > 2.0)) throw config_error("p", "p must exceed 2 (the surface dimension)");
    if (!cfg.control && !(cfg.p > cfg.cz_threshold())) {
      throw config_error("p", "p = " + std::to_string(cfg.p) + " does not exceed 2/(2-alpha) = " +
                                  std::to_string(cfg.cz_threshold()) + " (alpha = k/beta = " +
                                  std::to_string(cfg.alpha()) +
                                  "); no Hessian blow-up on a single cone point. Set control=true for a control run");
    }
  }
}

struct PairGrid {
  std::size_t outer_levels = 40;  // r_max 2^{-j}
  std::size_t inner_levels = 20;  // eps 2^{-j}
};

/// Lower bound for the gamma-Hoelder seminorm of |grad u| along the meridian theta = 0,
/// where the intrinsic distance is |r1 - r2| and |grad u| = |h'|. Maximizes over all
/// pairs of the dyadic radii r_max 2^{-j} and, for smoothed profiles, eps 2^{-j}.
inline double holder_seminorm(const ModeSolution& sol, double gamma, const PairGrid& grid = {}) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw domain_error("gamma must lie in (0, 1]");
  const ProfileFunction& pf = sol.profile();
  std::vector<double> radii;
  for (std::size_t j = 0; j <= grid.outer_levels; ++j) radii.push_back(std::ldexp(pf.r_max(), -static_cast<int>(j)));
  if (pf.kind() == ProfileKind::smoothed && pf.eps() < pf.r_max())
    for (std::size_t j = 0; j <= grid.inner_levels; ++j) radii.push_back(std::ldexp(pf.eps(), -static_cast<int>(j)));
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

  std::vector<double> grad(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) grad[i] = std::abs(sol.evaluate(radii[i]).dh);

  double best = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i)
    for (std::size_t j = i + 1; j < radii.size(); ++j)
      best = std::max(best, std::abs(grad[i] - grad[j]) / std::pow(radii[j] - radii[i], gamma));
  return best;
}

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SweepRow {
  double epsilon = kNaN;
  double holder_raw = kNaN;      // seminorm of |grad u|
  double holder = kNaN;          // divided by ||u||_{W^{1,2}(B_rmax)}
  double hessian_raw = kNaN;     // ||Hess u||_p
  double laplacian_lp = kNaN;    // ||Delta u||_p (solver residual)
  double gradient_lp = kNaN;     // ||grad u||_p
  double normalizer = kNaN;      // ||Delta u||_p + ||grad u||_p
  double hessian_lp = kNaN;      // hessian_raw / normalizer
  double w12_norm = kNaN;

  double measured(SweepKind kind) const { return kind == SweepKind::holder ? holder : hessian_lp; }
};

struct SweepRule {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SweepReport {
  SweepConfig config;
  std::vector<SweepRow> rows;  // in the configured epsilon order
  PowerLawFit fit_all;
  PowerLawFit fit_final_decade;
  bool blowup_predicted = false;
  double predicted_slope = 0.0;
  std::optional<double> exact_cone_value;  // finite eps -> 0 limit when no blow-up is predicted
  bool monotone = true;
  std::vector<SweepRule> rules;

  bool pass() const {
    return std::all_of(rules.begin(), rules.end(), [](const SweepRule& r) { return r.pass; });
  }
};

namespace detail {

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline SolveOptions solve_options(const SweepConfig& cfg) {
  SolveOptions opt;
  opt.residual_tol = cfg.ode_tol;
  return opt;
}

inline SweepRow sweep_row(const SweepConfig& cfg, double eps) {
  SweepRow row;
  row.epsilon = eps;
  ModeSolution sol = [&] {
    try {
      return solve_mode(ProfileFunction::smoothed(cfg.beta, eps, cfg.r_max), cfg.k, solve_options(cfg));
    } catch (const solver_error& e) {
      throw solver_error("epsilon=" + std::to_string(eps) + ": " + e.what());
    }
  }();
  const QuadratureOptions q{cfg.quadrature_tol};
  row.w12_norm = w12_norm(sol, cfg.r_max, q);
  if (cfg.kind == SweepKind::holder) {
    row.holder_raw = holder_seminorm(sol, cfg.gamma);
    row.holder = row.holder_raw / row.w12_norm;
  } else {
    auto check = [&](const LpResult& r, const char* what) {
      if (r.divergent) throw solver_error("epsilon=" + std::to_string(eps) + ": " + what + ": " + r.diagnostic);
      return r.norm;
    };
    row.hessian_raw = check(lp_norm(sol, Field::hessian, cfg.p, cfg.r_max, q), "hessian");
    row.laplacian_lp = check(lp_norm(sol, Field::laplacian_residual, cfg.p, cfg.r_max, q), "laplacian");
    row.gradient_lp = check(lp_norm(sol, Field::gradient, cfg.p, cfg.r_max, q), "gradient");
    row.normalizer = row.laplacian_lp + row.gradient_lp;
    row.hessian_lp = row.hessian_raw / row.normalizer;
  }
  return row;
}

inline double exact_cone_limit(const SweepConfig& cfg) {
  const ModeSolution sol = solve_mode(ProfileFunction::exact_cone(cfg.beta, cfg.r_max), cfg.k, solve_options(cfg));
  const QuadratureOptions q{cfg.quadrature_tol};
  if (cfg.kind == SweepKind::holder) return holder_seminorm(sol, cfg.gamma) / w12_norm(sol, cfg.r_max, q);
  const LpResult hess = lp_norm(sol, Field::hessian, cfg.p, cfg.r_max, q);
  if (hess.divergent) return std::numeric_limits<double>::infinity();
  const double lap = lp_norm(sol, Field::laplacian_residual, cfg.p, cfg.r_max, q).norm;
  const double grad = lp_norm(sol, Field::gradient, cfg.p, cfg.r_max, q).norm;
  return hess.norm / (lap + grad);
}

inline std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

/// Runs the configured sweep. Rows come back in the configured epsilon order
/// regardless of the thread count; each epsilon is an independent solve.
inline SweepReport run_sweep(const SweepConfig& cfg) {
  validate(cfg);
  SweepReport rep;
  rep.config = cfg;
  const std::vector<double> eps = cfg.epsilons.values();
  rep.rows.resize(eps.size());
  detail::parallel_for(eps.size(), cfg.threads, [&](std::size_t i) { rep.rows[i] = detail::sweep_row(cfg, eps[i]); });

  const double alpha = cfg.alpha();
  const bool singular = cfg.beta < 1.0;  // beta = 1 is the flat plane: nothing to blow up
  if (cfg.kind == SweepKind::holder) {
    rep.blowup_predicted = singular && cfg.gamma > alpha - 1.0;
    rep.predicted_slope = rep.blowup_predicted ? -(cfg.gamma - (alpha - 1.0)) : 0.0;
  } else {
    rep.blowup_predicted = singular && cfg.p > cfg.cz_threshold();
    rep.predicted_slope = rep.blowup_predicted ? (alpha - 2.0) + 2.0 / cfg.p : 0.0;
  }

  // Fits in ascending epsilon.
  std::vector<std::size_t> order(eps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return eps[a] < eps[b]; });
  const double eps_min = eps[order.front()];
  std::vector<double> xs, ys, xd, yd;
  for (std::size_t i : order) {
    const double v = rep.rows[i].measured(cfg.kind);
    xs.push_back(eps[i]);
    ys.push_back(v);
    if (eps[i] <= 10.0 * eps_min * (1.0 + 1e-12)) {
      xd.push_back(eps[i]);
      yd.push_back(v);
    }
  }
  const bool positive = std::all_of(ys.begin(), ys.end(), [](double v) { return v > 0.0; });
  if (positive) {
    rep.fit_all = fit_power_law(xs, ys);
    if (xd.size() >= 2) rep.fit_final_decade = fit_power_law(xd, yd);
  }
  for (std::size_t a = 0; a + 1 < ys.size(); ++a)
    rep.monotone = rep.monotone && ys[a] >= ys[a + 1] * (1.0 - 0.02);

  if (rep.blowup_predicted) {
    const double slope = rep.fit_final_decade.slope;
    const double tol = 0.15 * std::abs(rep.predicted_slope);
    rep.rules.push_back({"slope_within_15pct", positive && std::abs(slope - rep.predicted_slope) <= tol,
                         "final-decade slope " + detail::fmt_num(slope) + " vs predicted " +
                             detail::fmt_num(rep.predicted_slope)});
    rep.rules.push_back({"fit_residual_below_0.1", positive && rep.fit_final_decade.max_residual < 0.1,
                         "max log10 residual " + detail::fmt_num(rep.fit_final_decade.max_residual)});
    rep.rules.push_back({"monotone_blowup", rep.monotone, "measured values nonincreasing in epsilon (2% slack)"});
  } else {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double v : yd) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double variation = hi > 0.0 ? (hi - lo) / hi : 0.0;
    if (cfg.kind == SweepKind::holder) {
      // A flat control measures rounding noise only; treat that as bounded.
      const bool zero_control = hi < 1e-6;
      rep.rules.push_back({"bounded_final_decade", zero_control || variation < 0.10,
                           "relative variation " + detail::fmt_num(variation) + " over the final decade"});
    } else {
      rep.exact_cone_value = detail::exact_cone_limit(cfg);
      const double finest = rep.rows[order.front()].hessian_lp;
      const double dev = std::abs(finest - *rep.exact_cone_value) / std::max(std::abs(*rep.exact_cone_value), 1e-300);
      const bool zero_control = *rep.exact_cone_value < 1e-6 && finest < 1e-6;
      rep.rules.push_back({"converges_to_exact_cone", zero_control || dev < 0.02,
                           "finest-eps value " + detail::fmt_num(finest) + " vs exact cone " +
                               detail::fmt_num(*rep.exact_cone_value)});
    }
  }
  return rep;
}

// Decay experiments ---------------------------------------------------------

struct DecayReport {
  std::vector<double> radii;         // descending dyadic ladder
  std::vector<double> total_energy;  // integral of |grad u|^2 over B_R
  std::vector<double> mean_energy;   // mean of |grad u|^2 over B_R
  std::vector<double> ratio;        // mean(R) / mean(R_max)
  double predicted_exponent = 0.0;  // 2 alpha_1 - 2 (exact cones)
  PowerLawFit fit;                  // over the full ladder
  std::optional<PowerLawFit> fit_outer;  // smoothed: R >= 10 eps
  std::optional<PowerLawFit> fit_inner;  // smoothed: R <= eps / 10
  bool sharp = false;
  bool bound_holds = true;          // ratio <= R^{2 alpha_1 - 2} (cones only)
};

inline std::vector<double> dyadic_ladder(double r_max, std::size_t levels) {
  if (levels < 2) throw config_error("levels", "decay ladder needs at least two radii");
  std::vector<double> out(levels);
  for (std::size_t j = 0; j < levels; ++j) out[j] = std::ldexp(r_max, -static_cast<int>(j));
  return out;
}

/// Mean gradient energy over a dyadic ladder on an exact cone, from the closed forms.
/// `sharp_only` rejects non-sharp cones (diameter pi) as a configuration error.
inline DecayReport run_decay_experiment(const HarmonicExpansion& exp, std::span<const double> radii,
                                        bool sharp_only = false) {
  const double gap = sharpness_gap(exp.cone.cross_section);
  if (sharp_only && !(gap > 1e-15))
    throw config_error("base", "cone is not sharp (diameter pi); decay at the vertex is not expected");
  const DecayCheck check = decay_check(exp, radii);
  DecayReport rep;
  rep.sharp = gap > 1e-15;
  rep.radii.assign(radii.begin(), radii.end());
  rep.total_energy = check.profile.total_energy;
  rep.mean_energy = check.profile.mean_energy;
  rep.ratio = check.ratio;
  rep.predicted_exponent = 2.0 * exp.cone.alpha1() - 2.0;
  rep.bound_holds = check.pass;
  rep.fit = fit_power_law(rep.radii, rep.mean_energy);
  return rep;
}

/// Same experiment on a surface of revolution, by quadrature of |grad u|^2 over B_R.
inline DecayReport run_decay_experiment(const ModeSolution& sol, std::span<const double> radii,
                                        const QuadratureOptions& q = {}) {
  if (radii.size() < 2) throw structural_error("decay experiment needs at least two radii");
  const ProfileFunction& pf = sol.profile();
  DecayReport rep;
  rep.sharp = pf.kind() == ProfileKind::exact_cone ? pf.beta() < 1.0 : false;
  rep.predicted_exponent = 2.0 * sol.k() / pf.beta() - 2.0;
  for (double R : radii) {
    const double energy = lp_norm(sol, Field::gradient, 2.0, R, q).integral;
    const double area = 2.0 * std::numbers::pi * pf.integral(R);
    rep.radii.push_back(R);
    rep.total_energy.push_back(energy);
    rep.mean_energy.push_back(energy / area);
  }
  for (double m : rep.mean_energy) rep.ratio.push_back(m / rep.mean_energy.front());
  rep.fit = fit_power_law(rep.radii, rep.mean_energy);
  if (pf.kind() == ProfileKind::smoothed) {
    std::vector<double> xo, yo, xi, yi;
    for (std::size_t i = 0; i < rep.radii.size(); ++i) {
      if (rep.radii[i] >= 10.0 * pf.eps()) {
        xo.push_back(rep.radii[i]);
        yo.push_back(rep.mean_energy[i]);
      } else if (rep.radii[i] <= pf.eps() / 10.0) {
        xi.push_back(rep.radii[i]);
        yi.push_back(rep.mean_energy[i]);
      }
    }
    if (xo.size() >= 2) rep.fit_outer = fit_power_law(xo, yo);
    if (xi.size() >= 2) rep.fit_inner = fit_power_law(xi, yi);
  }
  return rep;
}

}  // namespace conelab
