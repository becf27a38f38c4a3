// One PASS/FAIL line per acceptance criterion; exit status is nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "conelab/cli.hpp"
#include "conelab/conelab.hpp"
#include "oracles.hpp"

using namespace conelab;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class Fn>
void guarded(int id, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

void exponents() {
  double worst_obata = 0.0, worst_sample = 0.0;
  for (double N : {2.0, 3.0, 4.0, 10.0}) worst_obata = std::max(worst_obata, std::abs(alpha_exponent(N, N - 1.0) - 1.0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> beta(0.05, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double k = 1 + i % 5, b = beta(rng), a = k / b;
    worst_sample = std::max(worst_sample, std::abs(alpha_exponent(2.0, a * a) - a) / a);
  }
  report(1, worst_obata <= 1e-14 && worst_sample <= 1e-12,
         "max |alpha(N,N-1)-1| = " + num(worst_obata) + ", max rel |alpha(2,(k/b)^2)-k/b| = " + num(worst_sample));
}

void energy_oracle() {
  const double worked = ball_energy(make_expansion(make_cone(2.0, circle_spectrum(0.5, 3)), {{1, 1.0}}), 1.0);
  const double worked_quad = oracle::cone_mode_energy(0.5, 1, 1.0);
  double worst = std::abs(worked - worked_quad) / worked_quad;
  int cases = 1;
  const double betas[] = {0.25, 0.4, 2.0 / 3.0, 0.85, 1.0};
  const std::size_t modes[] = {1, 2, 3, 6};
  const double radii[] = {1.0, 0.7, 0.3, 0.05};
  for (int c = 0; c < 19; ++c) {
    const double b = betas[c % 5];
    const std::size_t i = modes[c % 4];
    const double R = radii[(c / 5) % 4];
    const double closed = ball_energy(make_expansion(make_cone(2.0, circle_spectrum(b, 7)), {{i, 1.0}}), R);
    const double quad = oracle::cone_mode_energy(b, i, R);
    worst = std::max(worst, std::abs(closed - quad) / quad);
    ++cases;
  }
  report(2, worst <= 1e-8 && std::abs(worked - 2.0) <= 1e-12,
         std::to_string(cases) + " cases, worked case " + num(worked) + " (quadrature " + num(worked_quad) +
             "), max relative deviation " + num(worst));
}

void decay_property() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> coef(0.0, 1.0);
  std::size_t violations = 0, checks = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const bool sphere = trial % 4 == 3;
    const CrossSection cs = sphere ? sphere_spectrum(2, 16) : circle_spectrum(0.05 + 0.95 * unit(rng), 16);
    const ConeSpec cone = make_cone(sphere ? 3.0 : 2.0, cs);
    std::vector<ModeTerm> terms;
    for (std::size_t i = 1; i < 16; ++i)
      if (unit(rng) < 0.3) terms.push_back({i, coef(rng)});
    if (terms.empty()) terms.push_back({1, 1.0});
    std::vector<double> radii(20);
    for (auto& R : radii) R = std::max(unit(rng), 1e-9);
    violations += decay_check(make_expansion(cone, terms), radii).violations;
    checks += radii.size();
  }
  report(3, violations == 0, std::to_string(checks) + " radius checks over 1000 expansions, " +
                                 std::to_string(violations) + " violations");
}

void contraction_and_iteration() {
  double worst = 0.0;
  for (double b : {0.2, 0.5, 2.0 / 3.0, 0.9, 1.0}) {
    const ConeSpec cone = make_cone(2.0, circle_spectrum(b, 7));
    for (std::size_t i = 1; i < 7; ++i) {
      const auto c = contraction_check(make_expansion(cone, {{i, 1.0}}));
      worst = std::max(worst, std::abs(c.ratio - std::pow(0.5, 2.0 * cone.alphas[i] - 2.0)));
    }
  }
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int reached = 0;
  for (int s = 0; s < 20; ++s) {
    DyadicParams P;
    P.E0 = 0.1 + 10 * unit(rng);
    P.delta0 = 0.05 + 0.9 * unit(rng);
    P.C = 3 * unit(rng);
    P.N = 2 + 2 * unit(rng);
    P.p = P.N + 0.5 + 8 * unit(rng);
    P.R0 = 0.2 + unit(rng);
    P.threshold = 1e-9;
    const std::size_t predicted = predicted_steps(P, P.threshold);
    P.kmax = predicted;
    const auto t = iterate_dyadic(P);
    if (t.first_below && *t.first_below <= predicted) ++reached;
  }
  bool rejected = false;
  try {
    DyadicParams P;
    P.p = 2.0;
    P.N = 2.0;
    iterate_dyadic(P);
  } catch (const domain_error&) {
    rejected = true;
  }
  report(4, worst <= 1e-14 && reached == 20 && rejected,
         "max contraction deviation " + num(worst) + ", " + std::to_string(reached) +
             "/20 iterations below 1e-9 within predicted k, p<=N rejected: " + (rejected ? "yes" : "no"));
}

void ode_exactness() {
  double flat_err = 0.0, cone_err = 0.0, max_res = 0.0, trace = 0.0;
  bool positive = true;
  auto scan = [&](const ModeSolution& sol) {
    max_res = std::max(max_res, sol.max_residual());
    for (std::size_t i = 0; i < sol.size(); ++i) {
      const auto v = sol.node(i);
      positive = positive && v.h > 0.0 && v.dh > 0.0;
      // Trace relative to the magnitudes of the Laplacian's three terms; for
      // k = 1 near the tip those terms are O(1/r) and cancel.
      const double r = sol.grid_r(i), phi = sol.profile().phi(r), k = sol.k();
      const double scale = std::abs(v.ddh) + std::abs(sol.profile().dphi(r) / phi * v.dh) + k * k * std::abs(v.h) / (phi * phi);
      for (double th : {0.0, 0.3, 1.0}) {
        const auto H = hessian(sol, r, th);
        const double c = std::abs(std::cos(k * th));
        if (c > 0.0) trace = std::max(trace, std::abs(H.trace()) / (scale * c));
      }
    }
  };
  for (int k : {1, 2, 3}) {
    const auto sol = solve_mode(ProfileFunction::exact_cone(1.0), k);
    scan(sol);
    for (std::size_t i = 0; i < sol.size(); ++i)
      flat_err = std::max(flat_err, std::abs(sol.node(i).h - std::pow(sol.grid_r(i), k)));
  }
  const auto cone = solve_mode(ProfileFunction::exact_cone(0.5), 1);
  scan(cone);
  for (std::size_t i = 0; i < cone.size(); ++i)
    cone_err = std::max(cone_err, std::abs(cone.node(i).h - std::pow(cone.grid_r(i), 2)));
  for (double eps : {1e-1, 1e-2, 1e-3}) scan(solve_mode(ProfileFunction::smoothed(2.0 / 3.0, eps), 1));
  report(5, flat_err < 1e-10 && cone_err < 1e-8 && max_res < 1e-8 && positive && trace < 1e-8,
         "flat max error " + num(flat_err) + ", cone max error " + num(cone_err) + ", max residual " + num(max_res) +
             ", positivity " + (positive ? "ok" : "violated") + ", max relative trace " + num(trace));
}

void decay_experiment() {
  const auto radii = dyadic_ladder(1.0, 20);
  const auto sharp = run_decay_experiment(make_expansion(make_cone(2.0, circle_spectrum(0.5, 3)), {{1, 1.0}}), radii);
  const auto flat = run_decay_experiment(make_expansion(make_cone(2.0, circle_spectrum(1.0, 3)), {{1, 1.0}}), radii);
  report(6, std::abs(sharp.fit.slope - 2.0) <= 1e-6 && std::abs(flat.fit.slope) <= 1e-6,
         "sharp cone exponent " + num(sharp.fit.slope) + ", flat control exponent " + num(flat.fit.slope));
}

double final_decade_variation(const SweepReport& rep) {
  double lo = INFINITY, hi = 0.0;
  const double eps_min = std::min(rep.config.epsilons.start, rep.config.epsilons.stop);
  for (const auto& r : rep.rows)
    if (r.epsilon <= 10.0 * eps_min * (1 + 1e-12)) {
      lo = std::min(lo, r.holder);
      hi = std::max(hi, r.holder);
    }
  return (hi - lo) / hi;
}

void holder_sweep() {
  const auto t0 = std::chrono::steady_clock::now();
  SweepConfig cfg;
  cfg.kind = SweepKind::holder;
  cfg.beta = 2.0 / 3.0;
  cfg.gamma = 0.75;
  cfg.epsilons = {1e-1, 1e-3, 7};
  const auto blow = run_sweep(cfg);
  cfg.gamma = 0.4;
  const auto control = run_sweep(cfg);
  const double wall = seconds_since(t0);
  const double slope = blow.fit_final_decade.slope;
  const double variation = final_decade_variation(control);
  const bool pass = std::abs(slope + 0.25) <= 0.15 * 0.25 && blow.fit_final_decade.max_residual < 0.1 &&
                    variation < 0.10 && wall < 30.0;
  report(7, pass,
         "slope " + num(slope) + " (all points " + num(blow.fit_all.slope) + "), log residual " +
             num(blow.fit_final_decade.max_residual) + ", control variation " + num(variation) + ", " + num(wall) + " s");
}

void cz_sweep() {
  const auto t0 = std::chrono::steady_clock::now();
  SweepConfig cfg;
  cfg.kind = SweepKind::cz;
  cfg.beta = 2.0 / 3.0;
  cfg.p = 6.0;
  cfg.epsilons = {1e-1, 1e-3, 7};
  const auto blow = run_sweep(cfg);
  cfg.p = 3.0;
  cfg.control = true;
  cfg.epsilons = {1e-2, 1e-3, 2};
  const auto control = run_sweep(cfg);
  const double wall = seconds_since(t0);
  const double slope = blow.fit_final_decade.slope;
  const double finest = control.rows.back().hessian_lp;
  const double exact = control.exact_cone_value.value_or(NAN);
  const double dev = std::abs(finest - exact) / exact;
  const bool pass = std::abs(slope + 1.0 / 6.0) <= 0.15 / 6.0 && dev < 0.02 && wall < 60.0;
  report(8, pass,
         "slope " + num(slope) + " (all points " + num(blow.fit_all.slope) + "), p=3 at eps=1e-3: " + num(finest) +
             " vs exact cone " + num(exact) + " (" + num(100 * dev) + "%), " + num(wall) + " s");
}

int run_cli(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "conelab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

void reproducibility() {
  const fs::path root = fs::current_path() / "acceptance_runs";
  fs::remove_all(root);
  const fs::path first = root / "first", second = root / "second";
  fs::create_directories(first);
  fs::create_directories(second);
  struct Case {
    std::string stem, config;
  };
  const std::vector<Case> cases{
      {"holder", R"({"experiment": "holder", "beta": 0.6666666666666666, "gamma": 0.75,
                     "epsilons": {"start": 0.1, "stop": 0.001, "count": 7}})"},
      {"cz", R"({"experiment": "cz", "beta": 0.6666666666666666, "p": 6,
                 "epsilons": {"start": 0.01, "stop": 0.001, "count": 3}})"},
      {"decay", R"({"experiment": "decay", "beta": 0.5, "decay": {"mode": 1, "levels": 20}})"},
      {"iterate", R"({"experiment": "iterate", "iterate": {"e0": 1, "delta0": 0.75, "c": 1, "p": 4, "n": 2}})"}};
  int identical = 0;
  std::string note;
  for (const auto& c : cases) {
    const fs::path cfg = root / (c.stem + ".json");
    io::atomic_write(cfg, c.config);
    std::string err;
    if (run_cli({"sweep", "--config", cfg.string(), "--out", first.string()}, &err) != 0) {
      note += " " + c.stem + " run failed: " + err;
      continue;
    }
    if (run_cli({"sweep", "--manifest", (first / (c.stem + "_manifest.json")).string(), "--out", second.string()}, &err) != 0) {
      note += " " + c.stem + " rerun failed: " + err;
      continue;
    }
    if (io::read_file(first / (c.stem + ".csv")) == io::read_file(second / (c.stem + ".csv")))
      ++identical;
    else
      note += " " + c.stem + " differs";
  }
  report(9, identical == static_cast<int>(cases.size()),
         std::to_string(identical) + "/" + std::to_string(cases.size()) + " manifest reruns byte-identical" + note);
}

}  // namespace

int main() {
  guarded(1, exponents);
  guarded(2, energy_oracle);
  guarded(3, decay_property);
  guarded(4, contraction_and_iteration);
  guarded(5, ode_exactness);
  guarded(6, decay_experiment);
  guarded(7, holder_sweep);
  guarded(8, cz_sweep);
  guarded(9, reproducibility);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
