#pragma once

// Spectral data of cone base spaces: circles of circumference 2*pi*beta, unit
// round spheres, and user-supplied spectra read from JSON.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "conelab/errors.hpp"

namespace conelab {

/// Base space X of a cone. Eigenvalues are listed with multiplicity, so
/// eigenvalues[i] is the lambda_i paired with the i-th eigenfunction.
struct CrossSection {
  std::vector<double> eigenvalues;
  double diameter = 0.0;
  double mass = 0.0;
  double base_dimension = 0.0;

  bool operator==(const CrossSection&) const = default;
};

/// Checks the structural invariants. The diameter bound pi is only enforced
/// when `require_admissible_diameter` is set; fat circles built for negative
/// controls skip it.
inline void validate(const CrossSection& cs, bool require_admissible_diameter = true) {
  if (cs.eigenvalues.empty()) throw structural_error("cross-section has no eigenvalues");
  if (cs.eigenvalues.front() != 0.0)
    throw structural_error("eigenvalues[0] must be 0 (constant mode)");
  for (std::size_t i = 0; i < cs.eigenvalues.size(); ++i) {
    const double v = cs.eigenvalues[i];
    if (!std::isfinite(v) || v < 0.0)
      throw structural_error("eigenvalues[" + std::to_string(i) + "] must be finite and nonnegative");
    if (i > 0 && v < cs.eigenvalues[i - 1])
      throw structural_error("eigenvalues[" + std::to_string(i) + "] breaks nondecreasing order");
  }
  if (!(cs.mass > 0.0) || !std::isfinite(cs.mass)) throw structural_error("mass must be positive");
  if (!(cs.base_dimension >= 0.0)) throw structural_error("base_dimension must be >= 0");
  if (!(cs.diameter > 0.0)) throw structural_error("diameter must be positive");
  if (require_admissible_diameter && cs.diameter > std::numbers::pi * (1.0 + 1e-15))
    throw structural_error("diameter exceeds pi");
}

/// Circle of circumference 2*pi*beta: lambda_n = (n/beta)^2, multiplicity 2 for n >= 1.
/// `count` is the number of listed eigenvalues (multiplicities expanded).
/// beta > 1 violates the Obata bound for 2-cones and needs `allow_fat`.
inline CrossSection circle_spectrum(double beta, std::size_t count, bool allow_fat = false) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw domain_error("beta must be positive");
  if (beta > 1.0 && !allow_fat)
    throw domain_error("beta > 1 gives a circle longer than 2*pi; pass the override to build it");
  if (count < 2) throw structural_error("count must be at least 2");

  CrossSection cs;
  cs.eigenvalues.reserve(count);
  cs.eigenvalues.push_back(0.0);
  for (std::size_t n = 1; cs.eigenvalues.size() < count; ++n) {
    const double lambda = (static_cast<double>(n) / beta) * (static_cast<double>(n) / beta);
    cs.eigenvalues.push_back(lambda);
    if (cs.eigenvalues.size() < count) cs.eigenvalues.push_back(lambda);
  }
  cs.diameter = std::numbers::pi * beta;
  cs.mass = 2.0 * std::numbers::pi * beta;
  cs.base_dimension = 1.0;
  return cs;
}

/// Dimension of degree-k spherical harmonics on S^m, i.e. harmonic homogeneous
/// polynomials of degree k in m+1 variables: C(k+m, m) - C(k+m-2, m).
inline std::size_t sphere_multiplicity(int m, int k) {
  if (m < 1 || k < 0) throw domain_error("sphere_multiplicity needs m >= 1 and k >= 0");
  auto binom = [](long n, long r) -> std::size_t {
    if (r < 0 || n < r) return 0;
    std::size_t out = 1;
    for (long i = 1; i <= r; ++i) out = out * static_cast<std::size_t>(n - r + i) / static_cast<std::size_t>(i);
    return out;
  };
  return binom(k + m, m) - binom(k + m - 2, m);
}

inline double sphere_volume(int m) {
  const double half = 0.5 * (m + 1);
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

/// Unit round sphere S^m: lambda_k = k(k+m-1) repeated sphere_multiplicity(m, k) times,
/// truncated to `count` listed eigenvalues.
inline CrossSection sphere_spectrum(int m, std::size_t count) {
  if (m < 1) throw domain_error("sphere dimension m must be >= 1");
  if (count < 2) throw structural_error("count must be at least 2");

  CrossSection cs;
  cs.eigenvalues.reserve(count);
  for (int k = 0; cs.eigenvalues.size() < count; ++k) {
    const double lambda = static_cast<double>(k) * static_cast<double>(k + m - 1);
    const std::size_t mult = sphere_multiplicity(m, k);
    for (std::size_t j = 0; j < mult && cs.eigenvalues.size() < count; ++j) cs.eigenvalues.push_back(lambda);
  }
  cs.diameter = std::numbers::pi;
  cs.mass = sphere_volume(m);
  cs.base_dimension = m;
  return cs;
}

inline nlohmann::json to_json(const CrossSection& cs) {
  return nlohmann::json{{"eigenvalues", cs.eigenvalues},
                        {"diameter", cs.diameter},
                        {"mass", cs.mass},
                        {"base_dimension", cs.base_dimension}};
}

namespace detail {

inline std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

// Line of the first occurrence of "key" in the raw text, 0 when absent.
inline std::size_t line_of_key(std::string_view text, std::string_view key) {
  const std::string quoted = "\"" + std::string(key) + "\"";
  const auto pos = text.find(quoted);
  return pos == std::string_view::npos ? 0 : line_of_offset(text, pos);
}

}  // namespace detail

/// Parses and validates a spectrum document:
///   {"eigenvalues": [0, ...], "diameter": d, "mass": m, "base_dimension": n}
/// Unknown keys are rejected. Errors carry the offending field and its line.
inline CrossSection load_spectrum(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t line = detail::line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1);
    throw parse_error("<document>", line, "line " + std::to_string(line) + ": malformed JSON: " + e.what());
  }
  if (!doc.is_object()) throw parse_error("<document>", 1, "line 1: spectrum document must be a JSON object");

  auto fail = [&](const std::string& field, const std::string& key, const std::string& msg) -> parse_error {
    const std::size_t line = detail::line_of_key(text, key);
    return parse_error(field, line, "line " + std::to_string(line) + ": field '" + field + "': " + msg);
  };

  static constexpr std::string_view known[] = {"eigenvalues", "diameter", "mass", "base_dimension"};
  for (const auto& item : doc.items()) {
    if (std::find(std::begin(known), std::end(known), item.key()) == std::end(known))
      throw fail(item.key(), item.key(), "unknown key");
  }
  auto number = [&](const char* key) -> double {
    if (!doc.contains(key)) throw fail(key, key, "missing required field");
    const auto& v = doc.at(key);
    if (!v.is_number()) throw fail(key, key, "must be a number");
    return v.get<double>();
  };

  CrossSection cs;
  if (!doc.contains("eigenvalues")) throw fail("eigenvalues", "eigenvalues", "missing required field");
  const auto& ev = doc.at("eigenvalues");
  if (!ev.is_array() || ev.empty()) throw fail("eigenvalues", "eigenvalues", "must be a nonempty array");
  for (std::size_t i = 0; i < ev.size(); ++i) {
    const std::string field = "eigenvalues[" + std::to_string(i) + "]";
    if (!ev[i].is_number()) throw fail(field, "eigenvalues", "must be a number");
    const double v = ev[i].get<double>();
    if (v < 0.0) throw fail(field, "eigenvalues", "must be nonnegative");
    if (i == 0 && v != 0.0) throw fail(field, "eigenvalues", "first eigenvalue must be 0");
    if (i > 0 && v < cs.eigenvalues.back()) throw fail(field, "eigenvalues", "eigenvalues must be sorted nondecreasing");
    cs.eigenvalues.push_back(v);
  }
  cs.diameter = number("diameter");
  cs.mass = number("mass");
  cs.base_dimension = number("base_dimension");
  if (!(cs.diameter > 0.0) || cs.diameter > std::numbers::pi * (1.0 + 1e-15))
    throw fail("diameter", "diameter", "must lie in (0, pi]");
  if (!(cs.mass > 0.0)) throw fail("mass", "mass", "must be positive");
  if (cs.base_dimension < 0.0) throw fail("base_dimension", "base_dimension", "must be >= 0");
  return cs;
}

}  // namespace conelab
