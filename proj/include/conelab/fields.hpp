#pragma once

// Pointwise gradient and covariant Hessian of u = h(r) cos(k theta) on
// dr^2 + phi^2 dtheta^2, and their L^p norms over geodesic balls B_R.
//
// Christoffel symbols: Gamma^r_{theta theta} = -phi phi', Gamma^theta_{r theta} = phi'/phi.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "conelab/errors.hpp"
#include "conelab/mode_solver.hpp"

namespace conelab {

inline double gradient_modulus(const ModeSolution& sol, double r, double theta) {
  const ModeValue v = sol.evaluate(r);
  const double kth = sol.k() * theta;
  const double radial = v.dh * std::cos(kth);
  const double angular = sol.k() * v.h / sol.profile().phi(r) * std::sin(kth);
  return std::hypot(radial, angular);
}

struct Hessian {
  double rr = 0.0;          // Hess(d_r, d_r)
  double r_theta = 0.0;     // Hess(d_r, d_theta)
  double theta_theta = 0.0; // Hess(d_theta, d_theta)
  double phi = 1.0;

  double norm() const {
    const double a = r_theta / phi;
    const double b = theta_theta / (phi * phi);
    return std::sqrt(rr * rr + 2.0 * a * a + b * b);
  }
  /// Metric trace, i.e. the Laplacian of u.
  double trace() const { return rr + theta_theta / (phi * phi); }
};

inline Hessian hessian(const ModeSolution& sol, double r, double theta) {
  const ModeValue v = sol.evaluate(r);
  const ProfileFunction& pf = sol.profile();
  const double phi = pf.phi(r);
  const double dphi = pf.dphi(r);
  const double k = sol.k();
  const double c = std::cos(k * theta);
  const double s = std::sin(k * theta);
  return {v.ddh * c, -k * (v.dh - dphi * v.h / phi) * s, (-k * k * v.h + phi * dphi * v.dh) * c, phi};
}

inline double hessian_norm(const ModeSolution& sol, double r, double theta) { return hessian(sol, r, theta).norm(); }

enum class Field { value, gradient, hessian, laplacian_residual };

inline std::string to_string(Field f) {
  switch (f) {
    case Field::value: return "value";
    case Field::gradient: return "gradient";
    case Field::hessian: return "hessian";
    case Field::laplacian_residual: return "laplacian-residual";
  }
  return "?";
}

namespace detail {

// |field|^2 = X cos^2(k theta) + Y sin^2(k theta) at radius r.
struct AngularSplit {
  double X = 0.0;
  double Y = 0.0;
};

inline AngularSplit angular_split(const ModeSolution& sol, Field field, double r) {
  const ModeValue v = sol.evaluate(r);
  const ProfileFunction& pf = sol.profile();
  const double phi = pf.phi(r);
  const double dphi = pf.dphi(r);
  const double k = sol.k();
  switch (field) {
    case Field::value: return {v.h * v.h, 0.0};
    case Field::gradient: {
      const double a = k * v.h / phi;
      return {v.dh * v.dh, a * a};
    }
    case Field::hessian: {
      const double tt = (-k * k * v.h + phi * dphi * v.dh) / (phi * phi);
      const double rt = k * (v.dh - dphi * v.h / phi) / phi;
      return {v.ddh * v.ddh + tt * tt, 2.0 * rt * rt};
    }
    case Field::laplacian_residual: {
      const double res = v.ddh + dphi / phi * v.dh - k * k * v.h / (phi * phi);
      return {res * res, 0.0};
    }
  }
  return {};
}

inline double abs_cos_moment(double p) {
  // integral over [0, 2 pi] of |cos|^p
  return 2.0 * std::sqrt(std::numbers::pi) * std::tgamma(0.5 * (p + 1.0)) / std::tgamma(0.5 * p + 1.0);
}

// integral over [0, 2 pi] of (X cos^2 + Y sin^2)^{p/2}
inline double angular_integral(double X, double Y, double p) {
  if (X == 0.0 && Y == 0.0) return 0.0;
  if (p == 2.0) return std::numbers::pi * (X + Y);
  if (X == Y) return 2.0 * std::numbers::pi * std::pow(X, 0.5 * p);
  if (Y == 0.0) return abs_cos_moment(p) * std::pow(X, 0.5 * p);
  if (X == 0.0) return abs_cos_moment(p) * std::pow(Y, 0.5 * p);
  const double M = std::max(X, Y);
  const double x = X / M, y = Y / M;
  auto f = [&](double psi) {
    const double c = std::cos(psi), s = std::sin(psi);
    return std::pow(x * c * c + y * s * s, 0.5 * p);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  return 4.0 * GK::integrate(f, 0.0, 0.5 * std::numbers::pi, 12, 1e-12) * std::pow(M, 0.5 * p);
}

}  // namespace detail

struct QuadratureOptions {
  double rel_tol = 1e-10;
  std::size_t max_panels = 900;  // dyadic panels toward r = 0
};

struct LpResult {
  double norm = 0.0;            // (integral)^{1/p}, +inf when divergent
  double integral = 0.0;        // integral of |field|^p over B_R
  double error_estimate = 0.0;  // absolute, on `integral`
  bool divergent = false;
  std::size_t panels = 0;
  std::string diagnostic;
};

/// L^p norm of a field of the mode over B_R, integrating |field|^p phi dr dtheta.
/// The radial integral runs over dyadic panels [R 2^{-j-1}, R 2^{-j}], each by
/// adaptive Gauss-Kronrod; once inside the series region the panel sums are
/// geometric and the tail is extrapolated. A panel ratio >= 1 there means the
/// integral diverges at the tip, which is reported rather than thrown.
inline LpResult lp_norm(const ModeSolution& sol, Field field, double p, double R, const QuadratureOptions& opt = {}) {
  if (!(p >= 1.0)) throw domain_error("Lebesgue exponent p must be >= 1");
  if (!(R > 0.0) || R > sol.profile().r_max() * (1.0 + 1e-14)) throw domain_error("R must lie in (0, r_max]");

  const ProfileFunction& pf = sol.profile();
  auto radial = [&](double r) {
    const auto split = detail::angular_split(sol, field, r);
    return detail::angular_integral(split.X, split.Y, p) * pf.phi(r);
  };

  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  LpResult out;
  double total = 0.0, err_total = 0.0, prev = -1.0;
  double hi = R;
  for (std::size_t j = 0;; ++j) {
    if (j >= opt.max_panels) {
      out.divergent = true;
      out.diagnostic = "panel sums did not settle within " + std::to_string(opt.max_panels) + " dyadic panels";
      break;
    }
    const double lo = 0.5 * hi;
    double err = 0.0;
    const double piece = GK::integrate(radial, lo, hi, 8, opt.rel_tol, &err);
    total += piece;
    err_total += std::abs(err);
    out.panels = j + 1;
    if (!std::isfinite(total)) {
      out.divergent = true;
      out.diagnostic = "non-finite integrand near r=" + std::to_string(lo);
      break;
    }
    const bool in_series_region = hi <= sol.r_series() && j >= 4;
    if (in_series_region && prev >= 0.0) {
      if (piece == 0.0) break;
      const double ratio = piece / prev;
      if (ratio >= 1.0 - 1e-9) {
        out.divergent = true;
        out.diagnostic = "integrand not integrable at r=0: dyadic panel ratio " + std::to_string(ratio);
        break;
      }
      const double tail = piece * ratio / (1.0 - ratio);
      if (tail <= opt.rel_tol * total) {
        total += tail;
        err_total += std::abs(tail) * 1e-3;
        break;
      }
    }
    prev = piece;
    hi = lo;
  }
  if (out.divergent) {
    out.norm = std::numeric_limits<double>::infinity();
    out.integral = std::numeric_limits<double>::infinity();
    return out;
  }
  out.integral = total;
  out.error_estimate = err_total;
  out.norm = std::pow(total, 1.0 / p);
  return out;
}

/// W^{1,2} norm of u over B_R: (||u||_2^2 + ||grad u||_2^2)^{1/2}.
inline double w12_norm(const ModeSolution& sol, double R, const QuadratureOptions& opt = {}) {
  const double u2 = lp_norm(sol, Field::value, 2.0, R, opt).integral;
  const double g2 = lp_norm(sol, Field::gradient, 2.0, R, opt).integral;
  return std::sqrt(u2 + g2);
}

}  // namespace conelab
