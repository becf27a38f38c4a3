#pragma once

// Experiment configuration document:
//
//   {
//     "experiment": "holder" | "cz" | "decay" | "iterate",
//     "beta": 0.6667, "k": 1, "gamma": 0.75, "p": 6, "r_max": 1,
//     "epsilons": {"start": 0.1, "stop": 0.001, "count": 7, "spacing": "geometric"},
//     "tolerances": {"ode": 1e-8, "quadrature": 1e-10},
//     "control": false, "threads": 0,
//     "decay":   {"source": "cone" | "profile", "base": "circle" | "sphere", "n": 2,
//                 "sphere_m": 2, "mode": 1, "coefficient": 1, "epsilon": 0,
//                 "levels": 20, "sharp_only": false},
//     "iterate": {"e0": 1, "delta0": 0.5, "c": 0, "p": 4, "n": 2, "r0": 1,
//                 "kmax": 64, "threshold": 1e-9}
//   }
//
// Every key except "experiment" is optional; unknown keys are rejected.

#include <algorithm>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "conelab/cone.hpp"
#include "conelab/cross_section.hpp"
#include "conelab/errors.hpp"
#include "conelab/experiments.hpp"
#include "conelab/iteration.hpp"

namespace conelab {

enum class ExperimentKind { holder, cz, decay, iterate };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::holder: return "holder";
    case ExperimentKind::cz: return "cz";
    case ExperimentKind::decay: return "decay";
    case ExperimentKind::iterate: return "iterate";
  }
  return "?";
}

struct DecayConfig {
  std::string source = "cone";  // closed forms on an exact cone, or quadrature on a profile
  std::string base = "circle";  // cone source: circle of circumference 2 pi beta, or unit sphere
  double n = 2.0;
  int sphere_m = 2;
  std::size_t mode = 1;
  double coefficient = 1.0;
  double epsilon = 0.0;  // profile source: 0 selects the exact cone profile
  std::size_t levels = 20;
  bool sharp_only = false;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::holder;
  SweepConfig sweep;
  DecayConfig decay;
  DyadicParams iterate;
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, std::string_view where,
                           std::initializer_list<std::string_view> known) {
  for (const auto& item : obj.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      const std::string name = where.empty() ? item.key() : std::string(where) + "." + item.key();
      throw config_error(name, "unknown configuration key '" + name + "'");
    }
  }
}

inline const nlohmann::json* child(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline void read_number(const nlohmann::json& obj, const char* key, std::string_view where, double& out) {
  if (const auto* v = child(obj, key)) {
    const std::string name = where.empty() ? key : std::string(where) + "." + key;
    if (!v->is_number()) throw config_error(name, "'" + name + "' must be a number");
    out = v->get<double>();
  }
}

template <class Int>
inline void read_integer(const nlohmann::json& obj, const char* key, std::string_view where, Int& out) {
  if (const auto* v = child(obj, key)) {
    const std::string name = where.empty() ? key : std::string(where) + "." + key;
    if (!v->is_number_integer() || (std::is_unsigned_v<Int> && v->get<long long>() < 0))
      throw config_error(name, "'" + name + "' must be a nonnegative integer");
    out = v->get<Int>();
  }
}

inline void read_bool(const nlohmann::json& obj, const char* key, std::string_view where, bool& out) {
  if (const auto* v = child(obj, key)) {
    const std::string name = where.empty() ? key : std::string(where) + "." + key;
    if (!v->is_boolean()) throw config_error(name, "'" + name + "' must be true or false");
    out = v->get<bool>();
  }
}

inline void read_string(const nlohmann::json& obj, const char* key, std::string_view where, std::string& out,
                        std::initializer_list<std::string_view> allowed) {
  if (const auto* v = child(obj, key)) {
    const std::string name = where.empty() ? key : std::string(where) + "." + key;
    if (!v->is_string()) throw config_error(name, "'" + name + "' must be a string");
    out = v->get<std::string>();
    if (std::find(allowed.begin(), allowed.end(), out) == allowed.end())
      throw config_error(name, "'" + name + "' has unsupported value '" + out + "'");
  }
}

}  // namespace detail

/// Parses an experiment configuration. Structure and types are checked here;
/// value ranges are checked by `validate(const ExperimentConfig&)`.
inline ExperimentConfig config_from_json(const nlohmann::json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw config_error("<document>", "configuration must be a JSON object");
  reject_unknown(doc, "", {"experiment", "beta", "epsilons", "k", "gamma", "p", "r_max", "tolerances", "control",
                           "threads", "decay", "iterate"});
  ExperimentConfig cfg;
  std::string experiment;
  if (!doc.contains("experiment")) throw config_error("experiment", "missing required key 'experiment'");
  read_string(doc, "experiment", "", experiment, {"holder", "cz", "decay", "iterate"});
  cfg.experiment = experiment == "holder" ? ExperimentKind::holder
                   : experiment == "cz"   ? ExperimentKind::cz
                   : experiment == "decay" ? ExperimentKind::decay
                                           : ExperimentKind::iterate;

  SweepConfig& s = cfg.sweep;
  s.kind = cfg.experiment == ExperimentKind::cz ? SweepKind::cz : SweepKind::holder;
  read_number(doc, "beta", "", s.beta);
  read_integer(doc, "k", "", s.k);
  read_number(doc, "gamma", "", s.gamma);
  read_number(doc, "p", "", s.p);
  read_number(doc, "r_max", "", s.r_max);
  read_bool(doc, "control", "", s.control);
  read_integer(doc, "threads", "", s.threads);
  if (const auto* e = child(doc, "epsilons")) {
    if (!e->is_object()) throw config_error("epsilons", "'epsilons' must be an object");
    reject_unknown(*e, "epsilons", {"start", "stop", "count", "spacing"});
    read_number(*e, "start", "epsilons", s.epsilons.start);
    read_number(*e, "stop", "epsilons", s.epsilons.stop);
    read_integer(*e, "count", "epsilons", s.epsilons.count);
    std::string spacing = "geometric";
    read_string(*e, "spacing", "epsilons", spacing, {"geometric"});
  }
  if (const auto* t = child(doc, "tolerances")) {
    if (!t->is_object()) throw config_error("tolerances", "'tolerances' must be an object");
    reject_unknown(*t, "tolerances", {"ode", "quadrature"});
    read_number(*t, "ode", "tolerances", s.ode_tol);
    read_number(*t, "quadrature", "tolerances", s.quadrature_tol);
  }
  if (const auto* d = child(doc, "decay")) {
    if (!d->is_object()) throw config_error("decay", "'decay' must be an object");
    reject_unknown(*d, "decay",
                   {"source", "base", "n", "sphere_m", "mode", "coefficient", "epsilon", "levels", "sharp_only"});
    DecayConfig& dc = cfg.decay;
    read_string(*d, "source", "decay", dc.source, {"cone", "profile"});
    read_string(*d, "base", "decay", dc.base, {"circle", "sphere"});
    read_number(*d, "n", "decay", dc.n);
    read_integer(*d, "sphere_m", "decay", dc.sphere_m);
    read_integer(*d, "mode", "decay", dc.mode);
    read_number(*d, "coefficient", "decay", dc.coefficient);
    read_number(*d, "epsilon", "decay", dc.epsilon);
    read_integer(*d, "levels", "decay", dc.levels);
    read_bool(*d, "sharp_only", "decay", dc.sharp_only);
  }
  if (const auto* it = child(doc, "iterate")) {
    if (!it->is_object()) throw config_error("iterate", "'iterate' must be an object");
    reject_unknown(*it, "iterate", {"e0", "delta0", "c", "p", "n", "r0", "kmax", "threshold"});
    DyadicParams& ip = cfg.iterate;
    read_number(*it, "e0", "iterate", ip.E0);
    read_number(*it, "delta0", "iterate", ip.delta0);
    read_number(*it, "c", "iterate", ip.C);
    read_number(*it, "p", "iterate", ip.p);
    read_number(*it, "n", "iterate", ip.N);
    read_number(*it, "r0", "iterate", ip.R0);
    read_integer(*it, "kmax", "iterate", ip.kmax);
    read_number(*it, "threshold", "iterate", ip.threshold);
  }
  return cfg;
}

inline nlohmann::json to_json(const ExperimentConfig& cfg) {
  const SweepConfig& s = cfg.sweep;
  nlohmann::json doc{
      {"experiment", to_string(cfg.experiment)},
      {"beta", s.beta},
      {"k", s.k},
      {"gamma", s.gamma},
      {"p", s.p},
      {"r_max", s.r_max},
      {"epsilons", {{"start", s.epsilons.start}, {"stop", s.epsilons.stop}, {"count", s.epsilons.count},
                    {"spacing", "geometric"}}},
      {"tolerances", {{"ode", s.ode_tol}, {"quadrature", s.quadrature_tol}}},
      {"control", s.control},
      {"threads", s.threads},
  };
  if (cfg.experiment == ExperimentKind::decay) {
    const DecayConfig& d = cfg.decay;
    doc["decay"] = {{"source", d.source}, {"base", d.base}, {"n", d.n}, {"sphere_m", d.sphere_m},
                    {"mode", d.mode}, {"coefficient", d.coefficient}, {"epsilon", d.epsilon},
                    {"levels", d.levels}, {"sharp_only", d.sharp_only}};
  }
  if (cfg.experiment == ExperimentKind::iterate) {
    const DyadicParams& i = cfg.iterate;
    doc["iterate"] = {{"e0", i.E0}, {"delta0", i.delta0}, {"c", i.C}, {"p", i.p}, {"n", i.N},
                      {"r0", i.R0}, {"kmax", i.kmax}, {"threshold", i.threshold}};
  }
  return doc;
}

/// Range checks for everything the selected experiment will touch.
inline void validate(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentKind::holder:
    case ExperimentKind::cz:
      validate(cfg.sweep);
      break;
    case ExperimentKind::decay: {
      const DecayConfig& d = cfg.decay;
      if (!(cfg.sweep.beta > 0.0 && cfg.sweep.beta <= 1.0)) throw config_error("beta", "beta must lie in (0, 1]");
      if (d.levels < 2) throw config_error("decay.levels", "decay ladder needs at least two radii");
      if (d.source == "cone") {
        if (!(d.n >= 2.0)) throw config_error("decay.n", "cone dimension must be >= 2");
        if (d.mode < 1) throw config_error("decay.mode", "mode index must be >= 1");
        if (d.base == "sphere" && d.sphere_m < 1) throw config_error("decay.sphere_m", "sphere dimension must be >= 1");
        if (d.coefficient == 0.0) throw config_error("decay.coefficient", "coefficient must be nonzero");
        const CrossSection cs = d.base == "sphere" ? sphere_spectrum(d.sphere_m, d.mode + 1)
                                                   : circle_spectrum(cfg.sweep.beta, d.mode + 1);
        const auto ob = obata_check(cs, d.n);
        if (!ob.pass)
          throw config_error("decay.n", "cross-section fails lambda_1 >= N - 1 (margin " + std::to_string(ob.margin) + ")");
        if (d.sharp_only && !(sharpness_gap(cs) > 1e-15))
          throw config_error("decay.sharp_only", "cone over a base of diameter pi is not sharp");
      } else {
        if (cfg.sweep.k < 1) throw config_error("k", "mode k must be >= 1");
        if (!(d.epsilon >= 0.0)) throw config_error("decay.epsilon", "epsilon must be >= 0");
        if (!(cfg.sweep.r_max > 0.0)) throw config_error("r_max", "r_max must be positive");
        if (d.sharp_only && d.epsilon == 0.0 && cfg.sweep.beta == 1.0)
          throw config_error("decay.sharp_only", "beta = 1 is the flat plane, not a sharp cone");
      }
      break;
    }
    case ExperimentKind::iterate:
      try {
        validate(cfg.iterate);
      } catch (const domain_error& e) {
        throw config_error("iterate", e.what());
      }
      break;
  }
}

}  // namespace conelab
