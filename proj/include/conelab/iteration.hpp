#pragma once

// Dyadic recursion E_{k+1} = (1 - delta0) E_k + C R_k^{2(p-N)/p}, R_k = R0 2^{-k},
// which drives the mean gradient energy to zero at a sharp point when p > N.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "conelab/errors.hpp"

namespace conelab {

struct DyadicParams {
  double E0 = 1.0;
  double delta0 = 0.5;
  double C = 0.0;
  double p = 4.0;
  double N = 2.0;
  double R0 = 1.0;
  std::size_t kmax = 64;
  double threshold = 1e-9;

  double forcing_exponent() const { return 2.0 * (p - N) / p; }
};

struct IterationTrace {
  std::vector<double> E;      // E[k], k = 0..kmax
  std::vector<double> radii;  // R0 2^{-k}
  DyadicParams params;
  std::optional<std::size_t> first_below;  // first k with E[k] < threshold
};

inline void validate(const DyadicParams& P) {
  if (!(P.p > P.N))
    throw domain_error("p must exceed N: the forcing R^{2(p-N)/p} does not vanish for p <= N");
  if (!(P.delta0 > 0.0 && P.delta0 < 1.0)) throw domain_error("delta0 must lie in (0, 1)");
  if (!(P.C >= 0.0)) throw domain_error("forcing constant C must be >= 0");
  if (!(P.E0 >= 0.0)) throw domain_error("E0 must be >= 0");
  if (!(P.R0 > 0.0)) throw domain_error("R0 must be positive");
  if (!(P.N >= 2.0)) throw domain_error("N must be >= 2");
  if (!(P.threshold > 0.0)) throw domain_error("threshold must be positive");
}

inline IterationTrace iterate_dyadic(const DyadicParams& P) {
  validate(P);
  const double s = P.forcing_exponent();
  IterationTrace trace{{}, {}, P, std::nullopt};
  trace.E.reserve(P.kmax + 1);
  trace.radii.reserve(P.kmax + 1);

  double E = P.E0;
  for (std::size_t k = 0; k <= P.kmax; ++k) {
    const double Rk = std::ldexp(P.R0, -static_cast<int>(k));
    trace.E.push_back(E);
    trace.radii.push_back(Rk);
    if (!trace.first_below && E < P.threshold) trace.first_below = k;
    E = (1.0 - P.delta0) * E + P.C * std::pow(Rk, s);
  }
  return trace;
}

/// E_k from the geometric-sum closed form
///   q^k E0 + C R0^s sum_{j<k} q^{k-1-j} r^j,  q = 1 - delta0, r = 2^{-s}.
inline double dyadic_closed_form(const DyadicParams& P, std::size_t k) {
  validate(P);
  const double q = 1.0 - P.delta0;
  const double s = P.forcing_exponent();
  const double r = std::exp2(-s);
  const double kd = static_cast<double>(k);
  double sum = 0.0;
  if (k > 0) {
    if (std::abs(q - r) > 1e-12 * std::max(q, r))
      sum = (std::pow(q, kd) - std::pow(r, kd)) / (q - r);
    else
      sum = kd * std::pow(std::max(q, r), kd - 1.0);
  }
  return std::pow(q, kd) * P.E0 + P.C * std::pow(P.R0, s) * sum;
}

/// Upper envelope q^k E0 + C R0^s k m^{k-1}, m = max(q, 2^{-s}); dominates E_k.
inline double dyadic_envelope(const DyadicParams& P, std::size_t k) {
  validate(P);
  const double q = 1.0 - P.delta0;
  const double s = P.forcing_exponent();
  const double m = std::max(q, std::exp2(-s));
  const double kd = static_cast<double>(k);
  const double forcing = k == 0 ? 0.0 : P.C * std::pow(P.R0, s) * kd * std::pow(m, kd - 1.0);
  return std::pow(q, kd) * P.E0 + forcing;
}

/// First k at which the envelope drops below `threshold`; E_k is then below it too.
inline std::size_t predicted_steps(const DyadicParams& P, double threshold, std::size_t cap = 100000) {
  for (std::size_t k = 0; k <= cap; ++k)
    if (dyadic_envelope(P, k) < threshold) return k;
  throw domain_error("envelope does not reach the threshold within the step cap");
}

}  // namespace conelab
