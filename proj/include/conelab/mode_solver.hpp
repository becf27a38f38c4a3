#pragma once

// Radial factor h of the harmonic mode u = h(r) cos(k theta) on dr^2 + phi^2 dtheta^2:
//   h'' + (phi'/phi) h' - k^2 h / phi^2 = 0,
// regular at the singular endpoint r = 0 and normalized by h(r_max) = 1.
//
// Near 0 the solution is a Frobenius series r^s sum_j c_j (r/scale)^j with
// s = k sqrt(Q(0)). From r_series outward the ODE is integrated in t = ln r,
// where y = h satisfies y'' = (1 - P) y' + k^2 Q y with P = r phi'/phi and
// Q = (r/phi)^2. Nodes are uniform in t and carry (y, y', y''); values between
// nodes come from quintic Hermite interpolation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "conelab/errors.hpp"
#include "conelab/profile.hpp"

namespace conelab {

struct SolveOptions {
  double residual_tol = 1e-8;  // relative ODE defect allowed on the reporting grid
  double ode_rtol = 1e-13;
  double r_series = 0.0;       // 0 selects max(eps/10, 1e-6) (1e-6 for exact cones)
  double step = 0.004;         // node spacing in ln r, divided by the outer exponent k/beta
  int max_refinements = 3;
};

struct ModeValue {
  double h = 0.0;
  double dh = 0.0;
  double ddh = 0.0;
};

namespace detail {

struct Hermite5 {
  double y, dy, ddy;
};

// Quintic Hermite interpolant on [t0, t0 + delta] from (y, y', y'') at both ends.
inline Hermite5 hermite5(double s, double delta, double y0, double d0, double dd0, double y1, double d1,
                         double dd1) {
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  const double a0 = y0, a1 = delta * d0, a2 = delta * delta * dd0;
  const double b0 = y1, b1 = delta * d1, b2 = delta * delta * dd1;

  const double v = a0 * (1 - 10 * s3 + 15 * s4 - 6 * s5) + a1 * (s - 6 * s3 + 8 * s4 - 3 * s5) +
                   a2 * 0.5 * (s2 - 3 * s3 + 3 * s4 - s5) + b2 * 0.5 * (s3 - 2 * s4 + s5) +
                   b1 * (-4 * s3 + 7 * s4 - 3 * s5) + b0 * (10 * s3 - 15 * s4 + 6 * s5);
  const double dv = a0 * (-30 * s2 + 60 * s3 - 30 * s4) + a1 * (1 - 18 * s2 + 32 * s3 - 15 * s4) +
                    a2 * 0.5 * (2 * s - 9 * s2 + 12 * s3 - 5 * s4) + b2 * 0.5 * (3 * s2 - 8 * s3 + 5 * s4) +
                    b1 * (-12 * s2 + 28 * s3 - 15 * s4) + b0 * (30 * s2 - 60 * s3 + 30 * s4);
  const double ddv = a0 * (-60 * s + 180 * s2 - 120 * s3) + a1 * (-36 * s + 96 * s2 - 60 * s3) +
                     a2 * 0.5 * (2 - 18 * s + 36 * s2 - 20 * s3) + b2 * 0.5 * (6 * s - 24 * s2 + 20 * s3) +
                     b1 * (-24 * s + 84 * s2 - 60 * s3) + b0 * (60 * s - 180 * s2 + 120 * s3);
  return {v, dv / delta, ddv / (delta * delta)};
}

}  // namespace detail

class ModeSolution {
 public:
  int k() const { return k_; }
  const ProfileFunction& profile() const { return profile_; }
  double r_series() const { return r_series_; }
  double frobenius_exponent() const { return s_; }
  std::size_t series_terms() const { return coeffs_.size(); }

  /// Leading coefficient c of h ~ c r^s at r -> 0.
  double leading_coefficient() const { return norm_; }

  std::size_t size() const { return t_.size(); }
  double grid_r(std::size_t i) const { return std::exp(t_[i]); }
  std::vector<double> grid() const {
    std::vector<double> out(t_.size());
    for (std::size_t i = 0; i < t_.size(); ++i) out[i] = grid_r(i);
    return out;
  }
  ModeValue node(std::size_t i) const { return from_log(grid_r(i), y_[i], d_[i], dd_[i]); }
  /// Relative ODE defect attributed to node i: the series defect at node 0,
  /// otherwise the interpolant's defect at the midpoint of [t_{i-1}, t_i].
  double residual(std::size_t i) const { return residual_[i]; }
  double max_residual() const { return *std::max_element(residual_.begin(), residual_.end()); }

  /// h, h', h'' at any r in (0, r_max].
  ModeValue evaluate(double r) const {
    if (!(r > 0.0) || r > profile_.r_max() * (1.0 + 1e-14))
      throw domain_error("radius " + std::to_string(r) + " outside (0, r_max]");
    if (r <= r_series_) return series_value(r);
    const double t = std::log(r);
    const double delta = t_[1] - t_[0];
    auto idx = static_cast<std::size_t>(std::floor((t - t_.front()) / delta));
    idx = std::min(idx, t_.size() - 2);
    const double s = std::clamp((t - t_[idx]) / delta, 0.0, 1.0);
    const auto v = detail::hermite5(s, delta, y_[idx], d_[idx], dd_[idx], y_[idx + 1], d_[idx + 1], dd_[idx + 1]);
    return from_log(r, v.y, v.dy, v.ddy);
  }

  /// Relative defect |h'' + (phi'/phi) h' - k^2 h/phi^2| / (sum of term magnitudes) at r.
  double relative_defect(double r) const { return defect_of(r, evaluate(r)); }

 private:
  friend ModeSolution solve_mode(const ProfileFunction&, int, const SolveOptions&);

  ModeSolution(const ProfileFunction& profile, int k) : k_(k), profile_(profile) {}

  static ModeValue from_log(double r, double y, double dy, double ddy) {
    return {y, dy / r, (ddy - dy) / (r * r)};
  }

  // y, y' = r h', y'' in ln r for the unnormalized series (c_0 = 1).
  std::array<double, 3> series_log(double r) const {
    const double x = r / scale_;
    double sum = 0.0, sum1 = 0.0, sum2 = 0.0, xp = 1.0;
    for (std::size_t j = 0; j < coeffs_.size(); ++j) {
      const double e = s_ + static_cast<double>(j);
      const double term = coeffs_[j] * xp;
      sum += term;
      sum1 += e * term;
      sum2 += e * e * term;
      xp *= x;
    }
    const double lead = std::pow(r, s_);
    return {lead * sum, lead * sum1, lead * sum2};
  }

  ModeValue series_value(double r) const {
    const auto v = series_log(r);
    return from_log(r, norm_ * v[0], norm_ * v[1], norm_ * v[2]);
  }

  double defect_of(double r, const ModeValue& v) const {
    const double phi = profile_.phi(r);
    const double a = v.ddh;
    const double b = profile_.dphi(r) / phi * v.dh;
    const double c = static_cast<double>(k_ * k_) * v.h / (phi * phi);
    const double scale = std::abs(a) + std::abs(b) + std::abs(c);
    return scale == 0.0 ? 0.0 : std::abs(a + b - c) / scale;
  }

  int k_;
  ProfileFunction profile_;
  double s_ = 0.0;
  double scale_ = 1.0;
  double r_series_ = 0.0;
  double norm_ = 1.0;  // multiplies the c_0 = 1 series to give h(r_max) = 1
  std::vector<double> coeffs_;
  std::vector<double> t_, y_, d_, dd_, residual_;
};

inline ModeSolution solve_mode(const ProfileFunction& profile, int k, const SolveOptions& opt = {}) {
  if (k < 1) throw domain_error("mode k must be >= 1");
  if (!(opt.residual_tol > 0.0)) throw domain_error("residual tolerance must be positive");

  ModeSolution sol(profile, k);
  const double kk = static_cast<double>(k) * static_cast<double>(k);
  double r_series = opt.r_series > 0.0
                        ? opt.r_series
                        : (profile.kind() == ProfileKind::smoothed ? std::max(profile.eps() / 10.0, 1e-6) : 1e-6);
  r_series = std::min(r_series, 0.5 * profile.r_max());
  sol.r_series_ = r_series;

  // Frobenius start: grow the coefficient table until terms at r_series fall below 1e-16 relative.
  for (std::size_t n_terms = 64;; n_terms *= 2) {
    const SeriesCoefficients sc = profile.series(n_terms);
    sol.scale_ = sc.scale;
    sol.s_ = static_cast<double>(k) * std::sqrt(sc.Q[0]);
    const double s = sol.s_;
    const double x = r_series / sc.scale;

    std::vector<double> c{1.0};
    double sum = 1.0, xp = 1.0;
    int small_run = 0;
    bool converged = false;
    for (std::size_t j = 1; j < n_terms; ++j) {
      double acc = 0.0;
      for (std::size_t i = 1; i <= j; ++i)
        acc += (sc.P[i] * (s + static_cast<double>(j - i)) - kk * sc.Q[i]) * c[j - i];
      const double jd = static_cast<double>(j);
      c.push_back(-acc / (jd * (2.0 * s + jd)));
      xp *= x;
      const double term = c.back() * xp;
      if (!std::isfinite(term)) break;
      sum += term;
      small_run = std::abs(term) < 1e-16 * std::abs(sum) ? small_run + 1 : 0;
      if (small_run >= 3) {
        converged = true;
        break;
      }
    }
    if (converged) {
      sol.coeffs_ = std::move(c);
      break;
    }
    if (n_terms >= 1024) {
      std::ostringstream msg;
      msg << "non-convergent series start at r_series=" << r_series << " (r/scale=" << x << ", k=" << k << ")";
      throw solver_error(msg.str());
    }
  }

  const double outer_exponent = static_cast<double>(k) / profile.beta();
  const double t0 = std::log(r_series);
  const double t1 = std::log(profile.r_max());
  const auto series0 = sol.series_log(r_series);

  using State = std::array<double, 2>;
  auto rhs = [&](const State& y, State& dydt, double t) {
    const double r = std::exp(t);
    const double q = profile.inverse_ratio(r);
    dydt[0] = y[1];
    dydt[1] = (1.0 - profile.log_slope(r)) * y[1] + kk * q * q * y[0];
  };

  double step = opt.step / std::max(1.0, outer_exponent);
  for (int attempt = 0;; ++attempt, step *= 0.5) {
    const auto n_int = static_cast<std::size_t>(std::ceil((t1 - t0) / step));
    const std::size_t n_nodes = std::max<std::size_t>(n_int, 4) + 1;
    const double delta = (t1 - t0) / static_cast<double>(n_nodes - 1);

    std::vector<double> times(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) times[i] = t0 + delta * static_cast<double>(i);
    times.back() = t1;

    // Start from the series scaled to y(t0) = 1 so the state stays O(1) at the left end.
    const double start_scale = 1.0 / series0[0];
    State state{1.0, series0[1] * start_scale};
    std::vector<double> ys, ds, dds;
    ys.reserve(n_nodes);
    ds.reserve(n_nodes);
    dds.reserve(n_nodes);
    auto observer = [&](const State& y, double t) {
      State dydt;
      rhs(y, dydt, t);
      ys.push_back(y[0]);
      ds.push_back(y[1]);
      dds.push_back(dydt[1]);
    };
    namespace ode = boost::numeric::odeint;
    try {
      ode::integrate_times(ode::make_controlled(1e-300, opt.ode_rtol, ode::runge_kutta_fehlberg78<State>()), rhs,
                           state, times.begin(), times.end(), delta, observer);
    } catch (const std::exception& e) {
      throw solver_error(std::string("ODE integration failed: ") + e.what());
    }
    if (ys.size() != n_nodes) throw solver_error("ODE integration did not reach r_max");

    const double y_end = ys.back();
    if (!(y_end > 0.0) || !std::isfinite(y_end)) throw solver_error("mode solution is not positive at r_max");
    for (std::size_t i = 0; i < n_nodes; ++i) {
      ys[i] /= y_end;
      ds[i] /= y_end;
      dds[i] /= y_end;
    }
    sol.norm_ = start_scale / y_end;
    sol.t_ = std::move(times);
    sol.y_ = std::move(ys);
    sol.d_ = std::move(ds);
    sol.dd_ = std::move(dds);

    sol.residual_.assign(n_nodes, 0.0);
    sol.residual_[0] = sol.defect_of(r_series, sol.series_value(r_series));
    double worst = sol.residual_[0];
    std::size_t worst_at = 0;
    for (std::size_t i = 1; i < n_nodes; ++i) {
      const double rm = std::exp(0.5 * (sol.t_[i - 1] + sol.t_[i]));
      sol.residual_[i] = sol.relative_defect(rm);
      if (sol.residual_[i] > worst) {
        worst = sol.residual_[i];
        worst_at = i;
      }
    }

    for (std::size_t i = 0; i < n_nodes; ++i) {
      if (!(sol.y_[i] > 0.0) || !(sol.d_[i] > 0.0)) {
        std::ostringstream msg;
        msg << "mode solution lost positivity of h or h' at r=" << sol.grid_r(i);
        throw solver_error(msg.str());
      }
    }
    if (worst <= opt.residual_tol) break;
    if (attempt >= opt.max_refinements) {
      std::ostringstream msg;
      msg << "ODE residual " << worst << " exceeds tolerance " << opt.residual_tol << " at r=" << sol.grid_r(worst_at)
          << " after " << attempt << " grid refinements";
      throw solver_error(msg.str());
    }
  }
  return sol;
}

}  // namespace conelab
