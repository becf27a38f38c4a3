#pragma once

// Harmonic functions on the N-cone over a cross-section X. A harmonic u on
// B_1(O) expands as sum_i a_i r^{alpha_i} phi_i(x) with phi_i L^2-normalized
// eigenfunctions of X; everything below works per mode from lambda_i alone.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "conelab/cross_section.hpp"
#include "conelab/errors.hpp"

namespace conelab {

/// Radial growth exponent of the cone harmonic over an eigenfunction with eigenvalue lambda.
inline double alpha_exponent(double N, double lambda) {
  if (!(N >= 2.0)) throw domain_error("cone dimension N must be >= 2");
  if (!(lambda >= 0.0)) throw domain_error("eigenvalue lambda must be >= 0");
  const double d = N - 2.0;
  if (lambda == 0.0) return 0.0;
  // (-d + sqrt(d^2 + 4 lambda)) / 2, rationalized to avoid cancellation for small lambda.
  return 2.0 * lambda / (d + std::sqrt(d * d + 4.0 * lambda));
}

struct ObataResult {
  bool pass = false;
  double margin = 0.0;  // lambda_1 - (N - 1)
};

/// Spectral admissibility of X as an RCD(N-2, N-1) cone base: lambda_1 >= N - 1.
inline ObataResult obata_check(const CrossSection& cs, double N) {
  if (cs.eigenvalues.size() < 2) throw structural_error("obata_check needs at least two eigenvalues");
  const double margin = cs.eigenvalues[1] - (N - 1.0);
  // Slack absorbs rounding in lambda_1 = (1/beta)^2 and friends.
  return {margin >= -1e-12 * std::max(1.0, N - 1.0), margin};
}

/// Exact spectral-gap surplus lambda_1 - 1 for the circle of diameter pi - eps_diam
/// (circumference 2(pi - eps_diam)) as a 2-cone base.
inline double delta1_circle(double eps_diam) {
  if (!(eps_diam > 0.0 && eps_diam < std::numbers::pi)) throw domain_error("eps_diam must lie in (0, pi)");
  const double ratio = std::numbers::pi / (std::numbers::pi - eps_diam);
  return ratio * ratio - 1.0;
}

/// pi - diam(X); the cone is sharp iff this is positive.
inline double sharpness_gap(const CrossSection& cs) { return std::numbers::pi - cs.diameter; }

struct ConeSpec {
  double N = 2.0;
  CrossSection cross_section;
  std::vector<double> alphas;

  double alpha1() const { return alphas.at(1); }
};

inline ConeSpec make_cone(double N, CrossSection cs) {
  if (!(N >= 2.0)) throw domain_error("cone dimension N must be >= 2");
  validate(cs, /*require_admissible_diameter=*/false);
  ConeSpec cone{N, std::move(cs), {}};
  cone.alphas.reserve(cone.cross_section.eigenvalues.size());
  for (double lambda : cone.cross_section.eigenvalues) cone.alphas.push_back(alpha_exponent(N, lambda));
  return cone;
}

/// Vertex density m(X)/N of the exact cone: m_c(B_R) = R^N m(X) / N.
inline double bg_density(const ConeSpec& cone) { return cone.cross_section.mass / cone.N; }

inline double ball_volume(const ConeSpec& cone, double R) { return std::pow(R, cone.N) * bg_density(cone); }

struct ModeTerm {
  std::size_t index = 0;  // position in the eigenvalue list, >= 1
  double coefficient = 0.0;
};

/// Finite truncation of the expansion. The constant mode is excluded.
struct HarmonicExpansion {
  ConeSpec cone;
  std::vector<ModeTerm> terms;
  std::size_t truncation_order = 0;  // largest mode index present
};

inline HarmonicExpansion make_expansion(ConeSpec cone, std::vector<ModeTerm> terms) {
  const std::size_t n = cone.cross_section.eigenvalues.size();
  std::vector<bool> seen(n, false);
  std::size_t order = 0;
  for (const auto& t : terms) {
    if (t.index == 0) throw structural_error("mode index 0 (constant mode) carries no gradient energy and is excluded");
    if (t.index >= n)
      throw structural_error("mode index " + std::to_string(t.index) + " beyond the listed spectrum (" +
                             std::to_string(n) + " eigenvalues)");
    if (seen[t.index]) throw structural_error("mode index " + std::to_string(t.index) + " listed twice");
    seen[t.index] = true;
    order = std::max(order, t.index);
  }
  return {std::move(cone), std::move(terms), order};
}

namespace detail {

inline void require_admissible(const ConeSpec& cone) {
  const auto ob = obata_check(cone.cross_section, cone.N);
  if (!ob.pass)
    throw domain_error("cross-section fails lambda_1 >= N - 1 (margin " + std::to_string(ob.margin) +
                       "); not an admissible cone base");
}

inline void require_radius(double R) {
  if (!(R > 0.0 && R <= 1.0)) throw domain_error("radius R must lie in (0, 1]");
}

// Energy of a single L^2-normalized mode with unit coefficient on B_R.
inline double mode_energy(const ConeSpec& cone, std::size_t i, double R) {
  const double lambda = cone.cross_section.eigenvalues[i];
  const double alpha = cone.alphas[i];
  const double power = 2.0 * alpha + cone.N - 2.0;
  return (lambda + alpha * alpha) * std::pow(R, power) / power;
}

}  // namespace detail

/// Dirichlet energy of u on B_R(O):
///   sum_i a_i^2 (lambda_i + alpha_i^2) R^{2 alpha_i + N - 2} / (2 alpha_i + N - 2).
inline double ball_energy(const HarmonicExpansion& exp, double R) {
  detail::require_radius(R);
  detail::require_admissible(exp.cone);
  double total = 0.0;
  for (const auto& t : exp.terms) total += t.coefficient * t.coefficient * detail::mode_energy(exp.cone, t.index, R);
  return total;
}

inline double mean_ball_energy(const HarmonicExpansion& exp, double R) {
  return ball_energy(exp, R) / ball_volume(exp.cone, R);
}

struct EnergyProfile {
  std::vector<double> radii;
  std::vector<double> total_energy;
  std::vector<double> mean_energy;
};

struct DecayCheck {
  EnergyProfile profile;
  std::vector<double> ratio;  // mean(R) / mean(1)
  std::vector<double> bound;  // R^{2 alpha_1 - 2}
  bool pass = false;
  std::size_t violations = 0;
};

inline constexpr double kIdentityTolerance = 1e-12;

/// Verifies mean_{B_R} |grad u|^2 <= R^{2 alpha_1 - 2} mean_{B_1} |grad u|^2 at every radius.
inline DecayCheck decay_check(const HarmonicExpansion& exp, std::span<const double> radii) {
  if (radii.empty()) throw structural_error("decay_check needs at least one radius");
  for (double R : radii) detail::require_radius(R);
  const double mean1 = mean_ball_energy(exp, 1.0);
  if (!(mean1 > 0.0)) throw degenerate_input_error("expansion has zero gradient energy");
  const double exponent = 2.0 * exp.cone.alpha1() - 2.0;

  DecayCheck out;
  for (double R : radii) {
    const double total = ball_energy(exp, R);
    const double mean = total / ball_volume(exp.cone, R);
    const double ratio = mean / mean1;
    const double bound = std::pow(R, exponent);
    out.profile.radii.push_back(R);
    out.profile.total_energy.push_back(total);
    out.profile.mean_energy.push_back(mean);
    out.ratio.push_back(ratio);
    out.bound.push_back(bound);
    if (ratio > bound * (1.0 + kIdentityTolerance)) ++out.violations;
  }
  out.pass = out.violations == 0;
  return out;
}

struct ContractionResult {
  double ratio = 0.0;   // mean(1/2) / mean(1)
  double delta0 = 0.0;  // 1 - ratio
  double bound = 0.0;   // (1/2)^{2 alpha_1 - 2}
  bool within_bound = false;
};

/// Contraction factor of the mean gradient energy from B_1 to B_{1/2}.
inline ContractionResult contraction_check(const HarmonicExpansion& exp) {
  bool nontrivial = false;
  for (const auto& t : exp.terms) nontrivial = nontrivial || t.coefficient != 0.0;
  if (!nontrivial) throw degenerate_input_error("all-zero expansion: contraction ratio is 0/0");

  ContractionResult out;
  out.ratio = mean_ball_energy(exp, 0.5) / mean_ball_energy(exp, 1.0);
  out.delta0 = 1.0 - out.ratio;
  out.bound = std::pow(0.5, 2.0 * exp.cone.alpha1() - 2.0);
  out.within_bound = out.ratio <= out.bound * (1.0 + kIdentityTolerance);
  return out;
}

}  // namespace conelab
