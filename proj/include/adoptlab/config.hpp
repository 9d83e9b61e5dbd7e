#pragma once

// Run configuration: one JSON file per run, strict key checking, and a
// manifest that captures the full effective parameterisation. The manifest
// is itself a valid config (runtime metadata lives under "meta", which the
// parser accepts and ignores), so re-feeding it reproduces the run.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "adoptlab/basins.hpp"
#include "adoptlab/dynamics.hpp"
#include "adoptlab/model.hpp"
#include "adoptlab/policy.hpp"

namespace adoptlab {

struct RunFlags {
  bool trustEnabled = false;
  bool coordEnabled = true;
  bool seedFromROnly = false;
};

struct SweepSpec {
  std::string variable; // psiDev, psiG, psiP, alpha, B (basins) or rho
  std::vector<double> values;
};

struct ScenarioSpec {
  bool trustEnabled = true;
  std::vector<Intervention> interventions;
};

struct RunConfig {
  ModelParams params;
  TrustParams trust;
  IntegrationConfig integration;
  std::optional<FullState> initialState;
  RunFlags flags;
  int basinsResolution = 200;
  std::optional<SweepSpec> sweep;
  std::optional<ScenarioSpec> scenario;
  std::string outputDir = "out";
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& j, const std::set<std::string>& allowed,
                       const std::string& scope) {
  if (!j.is_object())
    throw ValidationError("config section '" + scope + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ValidationError("unknown key '" + it.key() + "' in " + scope);
}

inline double num(const json& j, const std::string& scope,
                  const std::string& key) {
  if (!j.at(key).is_number())
    throw ValidationError(scope + "." + key + " must be a number");
  return j.at(key).get<double>();
}

inline void read_params(const json& j, ModelParams& p) {
  check_keys(j, {"c0", "cP", "bG", "bP", "B", "alpha", "gamma", "eStar", "k",
                 "delta", "deltaInd", "lambda", "psiG", "psiP", "psiDev",
                 "rho", "eStar0", "alpha0", "bG0", "n"},
             "params");
  auto rd = [&](const char* key, double& field) {
    if (j.contains(key)) field = num(j, "params", key);
  };
  rd("c0", p.c0);
  rd("cP", p.cP);
  rd("bG", p.bG);
  rd("bP", p.bP);
  rd("B", p.B);
  rd("alpha", p.alpha);
  rd("gamma", p.gamma);
  rd("eStar", p.eStar);
  rd("k", p.k);
  rd("delta", p.delta);
  rd("deltaInd", p.deltaInd);
  rd("lambda", p.lambda);
  rd("psiG", p.psiG);
  rd("psiP", p.psiP);
  rd("psiDev", p.psiDev);
  rd("eStar0", p.eStar0);
  rd("alpha0", p.alpha0);
  rd("bG0", p.bG0);
  if (j.contains("rho") && !j.at("rho").is_null())
    p.rho = num(j, "params", "rho");
  if (j.contains("n")) {
    if (!j.at("n").is_number_integer())
      throw ValidationError("params.n must be an integer");
    p.n = j.at("n").get<long>();
  }
}

inline void read_trust(const json& j, TrustParams& tp) {
  check_keys(j, {"alphaHat", "kappaCoeff", "kappaLinear", "beta", "V",
                 "deltaAlpha"},
             "trust");
  auto rd = [&](const char* key, double& field) {
    if (j.contains(key)) field = num(j, "trust", key);
  };
  rd("alphaHat", tp.alphaHat);
  rd("kappaCoeff", tp.kappaCoeff);
  rd("kappaLinear", tp.kappaLinear);
  rd("beta", tp.beta);
  rd("V", tp.V);
  if (j.contains("deltaAlpha") && !j.at("deltaAlpha").is_null())
    tp.deltaAlpha = num(j, "trust", "deltaAlpha");
}

inline void read_integration(const json& j, IntegrationConfig& c) {
  check_keys(j, {"stepSize", "tMax", "cornerTolerance", "eventTimeTolerance",
                 "renormalizeEachStep"},
             "integration");
  auto rd = [&](const char* key, double& field) {
    if (j.contains(key)) field = num(j, "integration", key);
  };
  rd("stepSize", c.stepSize);
  rd("tMax", c.tMax);
  rd("cornerTolerance", c.cornerTolerance);
  rd("eventTimeTolerance", c.eventTimeTolerance);
  if (j.contains("renormalizeEachStep"))
    c.renormalizeEachStep = j.at("renormalizeEachStep").get<bool>();
}

inline InterventionKind intervention_kind(const std::string& s) {
  if (s == "subsidy") return InterventionKind::Subsidy;
  if (s == "seed") return InterventionKind::Seed;
  if (s == "trustFix") return InterventionKind::TrustFix;
  if (s == "culturePrep") return InterventionKind::CulturePrep;
  if (s == "embedSupport") return InterventionKind::EmbedSupport;
  if (s == "hold") return InterventionKind::Hold;
  throw ValidationError("unknown intervention kind '" + s + "'");
}

inline std::string intervention_kind_name(InterventionKind k) {
  switch (k) {
    case InterventionKind::Subsidy: return "subsidy";
    case InterventionKind::Seed: return "seed";
    case InterventionKind::TrustFix: return "trustFix";
    case InterventionKind::CulturePrep: return "culturePrep";
    case InterventionKind::EmbedSupport: return "embedSupport";
    default: return "hold";
  }
}

} // namespace detail

/// Parse and fully validate a config. Unknown keys are rejected with the
/// offending key named; JSON syntax errors carry the byte position.
inline RunConfig parse_config(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config parse error: ") + e.what());
  }

  detail::check_keys(j,
                     {"params", "trust", "integration", "initialState",
                      "flags", "basins", "sweep", "scenario", "output",
                      "meta"},
                     "config");

  RunConfig cfg;
  if (j.contains("params")) detail::read_params(j.at("params"), cfg.params);
  if (j.contains("trust")) detail::read_trust(j.at("trust"), cfg.trust);
  if (j.contains("integration"))
    detail::read_integration(j.at("integration"), cfg.integration);

  if (j.contains("initialState")) {
    const json& s = j.at("initialState");
    detail::check_keys(s, {"xG", "xP", "xR", "c", "alphaBelief"},
                       "initialState");
    FullState st;
    st.x = {detail::num(s, "initialState", "xG"),
            detail::num(s, "initialState", "xP"),
            detail::num(s, "initialState", "xR")};
    st.c = s.contains("c") ? detail::num(s, "initialState", "c")
                           : cfg.params.c0;
    st.alphaBelief = s.contains("alphaBelief")
                         ? detail::num(s, "initialState", "alphaBelief")
                         : cfg.params.alpha;
    st.t = 0.0;
    if (!st.x.valid())
      throw ValidationError("initialState is not on the simplex");
    if (st.c < 0.0 || st.c > cfg.params.c0)
      throw ValidationError("initialState.c must lie in [0, c0]");
    if (st.alphaBelief < 0.0 || st.alphaBelief > 1.0)
      throw ValidationError("initialState.alphaBelief must lie in [0,1]");
    cfg.initialState = st;
  }

  if (j.contains("flags")) {
    const json& f = j.at("flags");
    detail::check_keys(f, {"trustEnabled", "coordEnabled", "seedFromROnly"},
                       "flags");
    if (f.contains("trustEnabled"))
      cfg.flags.trustEnabled = f.at("trustEnabled").get<bool>();
    if (f.contains("coordEnabled"))
      cfg.flags.coordEnabled = f.at("coordEnabled").get<bool>();
    if (f.contains("seedFromROnly"))
      cfg.flags.seedFromROnly = f.at("seedFromROnly").get<bool>();
  }

  if (j.contains("basins")) {
    const json& b = j.at("basins");
    detail::check_keys(b, {"resolution"}, "basins");
    if (b.contains("resolution")) {
      if (!b.at("resolution").is_number_integer())
        throw ValidationError("basins.resolution must be an integer");
      cfg.basinsResolution = b.at("resolution").get<int>();
      if (cfg.basinsResolution < 2)
        throw ValidationError("basins.resolution must be >= 2");
    }
  }

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    detail::check_keys(s, {"variable", "values", "from", "to", "step"},
                       "sweep");
    SweepSpec spec;
    spec.variable = s.at("variable").get<std::string>();
    if (s.contains("values")) {
      for (const auto& v : s.at("values")) spec.values.push_back(v.get<double>());
    } else {
      double from = detail::num(s, "sweep", "from");
      double to = detail::num(s, "sweep", "to");
      double step = detail::num(s, "sweep", "step");
      if (!(step > 0.0)) throw ValidationError("sweep.step must be > 0");
      for (double v = from; v <= to + 1e-12; v += step) spec.values.push_back(v);
    }
    if (spec.values.empty())
      throw ValidationError("sweep produced no values");
    cfg.sweep = spec;
  }

  if (j.contains("scenario")) {
    const json& s = j.at("scenario");
    detail::check_keys(s, {"trustEnabled", "interventions"}, "scenario");
    ScenarioSpec spec;
    if (s.contains("trustEnabled"))
      spec.trustEnabled = s.at("trustEnabled").get<bool>();
    if (s.contains("interventions")) {
      for (const auto& iv : s.at("interventions")) {
        detail::check_keys(iv, {"kind", "startTime", "duration", "magnitude"},
                           "scenario.interventions[]");
        Intervention w;
        w.kind = detail::intervention_kind(iv.at("kind").get<std::string>());
        w.startTime = detail::num(iv, "intervention", "startTime");
        if (iv.contains("duration"))
          w.duration = detail::num(iv, "intervention", "duration");
        if (iv.contains("magnitude"))
          w.magnitude = detail::num(iv, "intervention", "magnitude");
        spec.interventions.push_back(w);
      }
    }
    cfg.scenario = spec;
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    detail::check_keys(o, {"dir"}, "output");
    if (o.contains("dir")) cfg.outputDir = o.at("dir").get<std::string>();
  }

  cfg.params.validate();
  cfg.trust.validate();
  cfg.integration.validate();
  return cfg;
}

/// Full effective configuration (every default resolved) plus run metadata.
/// Feeding this back through parse_config reproduces the run byte for byte.
inline std::string make_manifest(const RunConfig& cfg,
                                 const std::string& command,
                                 double wallClockSeconds) {
  using nlohmann::json;
  json j;

  json meta;
  meta["tool"] = "adoptlab";
  meta["version"] = "0.1.0";
  meta["command"] = command;
  meta["wallClockSeconds"] = wallClockSeconds;
  j["meta"] = meta;

  json p;
  p["c0"] = cfg.params.c0;
  p["cP"] = cfg.params.cP;
  p["bG"] = cfg.params.bG;
  p["bP"] = cfg.params.bP;
  p["B"] = cfg.params.B;
  p["alpha"] = cfg.params.alpha;
  p["gamma"] = cfg.params.gamma;
  p["eStar"] = cfg.params.eStar;
  p["k"] = cfg.params.k;
  p["delta"] = cfg.params.delta;
  p["deltaInd"] = cfg.params.deltaInd;
  p["lambda"] = cfg.params.lambda;
  p["psiG"] = cfg.params.psiG;
  p["psiP"] = cfg.params.psiP;
  p["psiDev"] = cfg.params.psiDev;
  if (cfg.params.rho) p["rho"] = *cfg.params.rho;
  p["eStar0"] = cfg.params.eStar0;
  p["alpha0"] = cfg.params.alpha0;
  p["bG0"] = cfg.params.bG0;
  p["n"] = cfg.params.n;
  j["params"] = p;

  json t;
  t["alphaHat"] = cfg.trust.alphaHat;
  t["kappaCoeff"] = cfg.trust.kappaCoeff;
  t["kappaLinear"] = cfg.trust.kappaLinear;
  t["beta"] = cfg.trust.beta;
  t["V"] = cfg.trust.V;
  if (cfg.trust.deltaAlpha) t["deltaAlpha"] = *cfg.trust.deltaAlpha;
  j["trust"] = t;

  json ic;
  ic["stepSize"] = cfg.integration.stepSize;
  ic["tMax"] = cfg.integration.tMax;
  ic["cornerTolerance"] = cfg.integration.cornerTolerance;
  ic["eventTimeTolerance"] = cfg.integration.eventTimeTolerance;
  ic["renormalizeEachStep"] = cfg.integration.renormalizeEachStep;
  j["integration"] = ic;

  if (cfg.initialState) {
    json s;
    s["xG"] = cfg.initialState->x.xG;
    s["xP"] = cfg.initialState->x.xP;
    s["xR"] = cfg.initialState->x.xR;
    s["c"] = cfg.initialState->c;
    s["alphaBelief"] = cfg.initialState->alphaBelief;
    j["initialState"] = s;
  }

  json f;
  f["trustEnabled"] = cfg.flags.trustEnabled;
  f["coordEnabled"] = cfg.flags.coordEnabled;
  f["seedFromROnly"] = cfg.flags.seedFromROnly;
  j["flags"] = f;

  json b;
  b["resolution"] = cfg.basinsResolution;
  j["basins"] = b;

  if (cfg.sweep) {
    json s;
    s["variable"] = cfg.sweep->variable;
    s["values"] = cfg.sweep->values;
    j["sweep"] = s;
  }

  if (cfg.scenario) {
    json s;
    s["trustEnabled"] = cfg.scenario->trustEnabled;
    json ivs = json::array();
    for (const auto& w : cfg.scenario->interventions) {
      json iv;
      iv["kind"] = detail::intervention_kind_name(w.kind);
      iv["startTime"] = w.startTime;
      iv["duration"] = w.duration;
      iv["magnitude"] = w.magnitude;
      ivs.push_back(iv);
    }
    s["interventions"] = ivs;
    j["scenario"] = s;
  }

  json o;
  o["dir"] = cfg.outputDir;
  j["output"] = o;

  return j.dump(2) + "\n";
}

} // namespace adoptlab
