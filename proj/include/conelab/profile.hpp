#pragma once

// Warping profiles phi of surfaces of revolution dr^2 + phi(r)^2 dtheta^2.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "conelab/errors.hpp"

namespace conelab {

enum class ProfileKind { exact_cone, smoothed };

/// Taylor data of the ODE coefficients P = r phi'/phi and Q = (r/phi)^2 in the
/// variable x = r / scale. Both are analytic at r = 0 with P(0) = 1.
struct SeriesCoefficients {
  double scale = 1.0;
  std::vector<double> P;
  std::vector<double> Q;
};

/// Exact cone phi = beta r, or the smoothed family
///   phi_eps(r) = beta r + (1 - beta) eps (1 - e^{-r/eps}),
/// concave with phi'(0) = 1 and phi'(inf) = beta.
class ProfileFunction {
 public:
  static ProfileFunction exact_cone(double beta, double r_max = 1.0) {
    return ProfileFunction(ProfileKind::exact_cone, beta, 0.0, r_max);
  }
  static ProfileFunction smoothed(double beta, double eps, double r_max = 1.0) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw domain_error("smoothing scale eps must be positive");
    return ProfileFunction(ProfileKind::smoothed, beta, eps, r_max);
  }

  ProfileKind kind() const { return kind_; }
  double beta() const { return beta_; }
  double eps() const { return eps_; }
  double r_max() const { return r_max_; }

  double phi(double r) const {
    if (kind_ == ProfileKind::exact_cone) return beta_ * r;
    return beta_ * r - (1.0 - beta_) * eps_ * std::expm1(-r / eps_);
  }
  double dphi(double r) const {
    if (kind_ == ProfileKind::exact_cone) return beta_;
    return beta_ + (1.0 - beta_) * std::exp(-r / eps_);
  }
  double ddphi(double r) const {
    if (kind_ == ProfileKind::exact_cone) return 0.0;
    return -(1.0 - beta_) / eps_ * std::exp(-r / eps_);
  }

  /// r phi'(r) / phi(r), evaluated stably near r = 0.
  double log_slope(double r) const {
    if (kind_ == ProfileKind::exact_cone) return 1.0;
    return r * dphi(r) / phi(r);
  }
  /// r / phi(r)
  double inverse_ratio(double r) const {
    if (kind_ == ProfileKind::exact_cone) return 1.0 / beta_;
    return r / phi(r);
  }

  /// Integral of phi over [0, R]; the area of B_R is 2 pi times this.
  double integral(double R) const {
    if (kind_ == ProfileKind::exact_cone) return 0.5 * beta_ * R * R;
    return 0.5 * beta_ * R * R + (1.0 - beta_) * eps_ * (R + eps_ * std::expm1(-R / eps_));
  }

  /// Taylor coefficients of P and Q to order n_terms - 1.
  SeriesCoefficients series(std::size_t n_terms) const {
    SeriesCoefficients out;
    out.P.assign(n_terms, 0.0);
    out.Q.assign(n_terms, 0.0);
    if (n_terms == 0) return out;
    if (kind_ == ProfileKind::exact_cone) {
      out.P[0] = 1.0;
      out.Q[0] = 1.0 / (beta_ * beta_);
      return out;
    }
    out.scale = eps_;
    // f(x) = phi(eps x) / (eps x) = 1 + (1 - beta) sum_{n>=1} (-1)^n x^n / (n+1)!
    std::vector<double> f(n_terms, 0.0);
    f[0] = 1.0;
    double term = 1.0;
    for (std::size_t n = 1; n < n_terms; ++n) {
      term *= -1.0 / static_cast<double>(n + 1);
      f[n] = (1.0 - beta_) * term;
    }
    // g = 1/f
    std::vector<double> g(n_terms, 0.0);
    g[0] = 1.0;
    for (std::size_t n = 1; n < n_terms; ++n) {
      double acc = 0.0;
      for (std::size_t i = 1; i <= n; ++i) acc += f[i] * g[n - i];
      g[n] = -acc;
    }
    // Q = g^2, P = 1 + (x f') g
    for (std::size_t n = 0; n < n_terms; ++n) {
      double q = 0.0;
      double p = 0.0;
      for (std::size_t i = 0; i <= n; ++i) {
        q += g[i] * g[n - i];
        p += static_cast<double>(i) * f[i] * g[n - i];
      }
      out.Q[n] = q;
      out.P[n] = p + (n == 0 ? 1.0 : 0.0);
    }
    return out;
  }

 private:
  ProfileFunction(ProfileKind kind, double beta, double eps, double r_max)
      : kind_(kind), beta_(beta), eps_(eps), r_max_(r_max) {
    if (!(beta > 0.0 && beta <= 1.0)) throw domain_error("profile beta must lie in (0, 1]");
    if (!(r_max > 0.0) || !std::isfinite(r_max)) throw domain_error("r_max must be positive");
  }

  ProfileKind kind_;
  double beta_;
  double eps_;
  double r_max_;
};

/// Gauss curvature -phi''/phi of the surface at radius r.
inline double gauss_curvature(const ProfileFunction& profile, double r) {
  if (!(r > 0.0)) throw domain_error("gauss_curvature needs r > 0");
  return -profile.ddphi(r) / profile.phi(r);
}

}  // namespace conelab
