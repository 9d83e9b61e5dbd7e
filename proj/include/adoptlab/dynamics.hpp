#pragma once

// Replicator dynamics coupled to the cost-ratchet ODE and the belief ODE.
//
// The simplex part is integrated with a fixed-step classical 4th-order
// scheme. The cost never goes through the generic stepper: within a
// sub-interval on which the decay indicator is constant, c is advanced in
// closed form c(t+dt) = c(t) * exp(-r dt), and threshold crossings of
// e(x) - eStar are located by bisection so the indicator is correct on each
// sub-interval. Below threshold with deltaInd = 0 the cost is not touched
// at all, so it stays bit-identical to c0 until the first crossing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "adoptlab/model.hpp"

namespace adoptlab {

enum class EventKind { CrossUp, CrossDown };

struct ThresholdEvent {
  double t;
  EventKind kind;
};

/// Maximal interval with the decay indicator on.
struct Excursion {
  double tStart;
  double tEnd;
};

enum class TrajectoryType { Type1, Type2, Type3, Type4, Unclassified };

enum class Corner { G, P, R, None };

inline const char* to_string(TrajectoryType t) {
  switch (t) {
    case TrajectoryType::Type1: return "Type1";
    case TrajectoryType::Type2: return "Type2";
    case TrajectoryType::Type3: return "Type3";
    case TrajectoryType::Type4: return "Type4";
    default: return "Unclassified";
  }
}

struct IntegrationConfig {
  double stepSize = 0.01;
  double tMax = 200.0;
  double cornerTolerance = 1e-6;
  double eventTimeTolerance = 1e-9;
  bool renormalizeEachStep = true;
  bool recordSamples = true;

  void validate() const {
    if (!(stepSize > 0.0)) throw ValidationError("stepSize must be > 0");
    if (!(tMax > 0.0)) throw ValidationError("tMax must be > 0");
    if (!(cornerTolerance > 0.0))
      throw ValidationError("cornerTolerance must be > 0");
    if (!(eventTimeTolerance > 0.0))
      throw ValidationError("eventTimeTolerance must be > 0");
  }
};

// Time-windowed modifications executed inside the integrator. Windows are
// half-open [startTime, startTime+duration); seeds fire once at startTime.
enum class InterventionKind {
  Subsidy,      // adds magnitude to fG
  Seed,         // moves magnitude of mass onto xG
  TrustFix,     // pins alphaBelief at magnitude (contractual sharing)
  CulturePrep,  // multiplies psiDev by (1 - magnitude)
  EmbedSupport, // multiplies delta by (1 + magnitude) while above threshold
  Hold          // holds effective adoption at magnitude (pilot clamp)
};

struct Intervention {
  InterventionKind kind;
  double startTime = 0.0;
  double duration = 0.0;
  double magnitude = 0.0;
};

struct IntegrateOptions {
  bool trustEnabled = false;
  double beliefTarget = 0.0; // alpha_actual the belief relaxes toward
  bool coordEnabled = true;
  bool freezeCost = false;   // fixed-cost phase portrait (basin maps)
  bool seedFromROnly = false;
  std::vector<Intervention> interventions;
};

struct Trajectory {
  std::vector<FullState> samples;
  std::vector<std::uint8_t> phases; // 1 while the decay indicator is on
  std::vector<ThresholdEvent> events;
  std::vector<Excursion> excursions;
  TrajectoryType classification = TrajectoryType::Unclassified;
  Corner convergedCorner = Corner::None;
  FullState finalState;
  bool reachedTMax = false;
};

struct SimplexDeriv {
  double dxG;
  double dxP;
  double dxR;
};

/// dx_i = x_i (f_i - fbar). Components sum to zero; faces are invariant
/// (x_i = 0 gives dx_i = 0 exactly).
inline SimplexDeriv replicator_rhs(const SimplexState& s, double c,
                                   double alpha, const ModelParams& p,
                                   bool coordEnabled = true) {
  Payoffs f = payoffs(s, c, alpha, p, coordEnabled);
  double fbar = mean_fitness(s, f);
  return {s.xG * (f.fG - fbar), s.xP * (f.fP - fbar), s.xR * (f.fR - fbar)};
}

struct FullDeriv {
  double dxG;
  double dxP;
  double dxR;
  double dc;
  double dAlpha;
};

/// Right-hand side of the coupled system at the current state. The belief
/// only moves once gains have been realised (the system has been above
/// threshold at least once); before that there is nothing to renege on.
inline FullDeriv full_rhs(const FullState& st, const ModelParams& p,
                          const IntegrateOptions& opt, bool gainsRealized) {
  SimplexDeriv d =
      replicator_rhs(st.x, st.c, st.alphaBelief, p, opt.coordEnabled);
  double e = effective_adoption(st.x, p.gamma);
  double rate = p.deltaInd + (e > p.eStar ? p.delta : 0.0);
  double dc = opt.freezeCost ? 0.0 : -rate * st.c;
  double dAlpha = 0.0;
  if (opt.trustEnabled && gainsRealized)
    dAlpha = -p.lambda * (st.alphaBelief - opt.beliefTarget);
  return {d.dxG, d.dxP, d.dxR, dc, dAlpha};
}

/// Move `magnitude` of mass onto xG, taken proportionally from xP and xR
/// (or from xR alone). Never removes more mass than is available.
inline SimplexState apply_seed(const SimplexState& s, double magnitude,
                               bool fromROnly) {
  double avail = fromROnly ? s.xR : (s.xP + s.xR);
  double m = std::min(magnitude, avail);
  if (m <= 0.0 || avail <= 0.0) return s;
  SimplexState out = s;
  if (fromROnly) {
    out.xR -= m;
  } else {
    out.xP -= m * s.xP / avail;
    out.xR -= m * s.xR / avail;
  }
  out.xG += m;
  return out.normalized();
}

namespace detail {

struct Mods {
  double fGBonus = 0.0;
  double psiDevScale = 1.0;
  double deltaScale = 1.0;
  bool pinBelief = false;
  double pinnedBelief = 0.0;
  bool hold = false;
  double holdLevel = 0.0;
};

inline Mods active_mods(const std::vector<Intervention>& iv, double t) {
  Mods m;
  for (const auto& w : iv) {
    if (w.kind == InterventionKind::Seed) continue;
    if (t < w.startTime || t >= w.startTime + w.duration) continue;
    switch (w.kind) {
      case InterventionKind::Subsidy: m.fGBonus += w.magnitude; break;
      case InterventionKind::CulturePrep:
        m.psiDevScale *= (1.0 - w.magnitude);
        break;
      case InterventionKind::EmbedSupport:
        m.deltaScale *= (1.0 + w.magnitude);
        break;
      case InterventionKind::TrustFix:
        m.pinBelief = true;
        m.pinnedBelief = w.magnitude;
        break;
      case InterventionKind::Hold:
        m.hold = true;
        m.holdLevel = std::max(m.holdLevel, w.magnitude);
        break;
      default: break;
    }
  }
  return m;
}

inline Payoffs payoffs_mod(const SimplexState& s, double c, double alpha,
                           const ModelParams& p, bool coord, const Mods& m) {
  double e = effective_adoption(s, p.gamma);
  if (m.hold && e < m.holdLevel) e = m.holdLevel;
  Payoffs f;
  f.fG = -c + alpha * systemic_benefit(e, p) + p.bG + m.fGBonus;
  f.fP = -p.cP + p.bP;
  f.fR = 0.0;
  if (coord) {
    f.fG += p.psiG * s.xG - (p.psiDev * m.psiDevScale) * s.xP;
    f.fP += -p.psiP * s.xG;
  }
  return f;
}

struct Deriv4 {
  double dxG, dxP, dxR, dA;
};

inline Deriv4 deriv_at(const SimplexState& x, double c, double alphaB,
                       const ModelParams& p, const IntegrateOptions& opt,
                       const Mods& m, bool gains) {
  Payoffs f = payoffs_mod(x, c, alphaB, p, opt.coordEnabled, m);
  double fbar = mean_fitness(x, f);
  Deriv4 d;
  d.dxG = x.xG * (f.fG - fbar);
  d.dxP = x.xP * (f.fP - fbar);
  d.dxR = x.xR * (f.fR - fbar);
  d.dA = 0.0;
  if (opt.trustEnabled && gains && !m.pinBelief)
    d.dA = -p.lambda * (alphaB - opt.beliefTarget);
  return d;
}

// One RK4 step of (x, alphaBelief) over dt with the decay regime fixed at
// rate r; c is supplied analytically at the stage times and advanced in
// closed form. r == 0 leaves c untouched.
inline FullState rk4_substep(const FullState& s, double dt, double r,
                             const ModelParams& p, const IntegrateOptions& opt,
                             const Mods& m, bool gains) {
  auto c_at = [&](double tau) {
    return r == 0.0 ? s.c : s.c * std::exp(-r * tau);
  };
  auto shifted = [&](const Deriv4& d, double h) {
    SimplexState x{s.x.xG + h * d.dxG, s.x.xP + h * d.dxP,
                   s.x.xR + h * d.dxR};
    return x;
  };

  double cHalf = c_at(0.5 * dt);
  double cFull = c_at(dt);

  Deriv4 k1 = deriv_at(s.x, s.c, s.alphaBelief, p, opt, m, gains);
  Deriv4 k2 = deriv_at(shifted(k1, 0.5 * dt), cHalf,
                       s.alphaBelief + 0.5 * dt * k1.dA, p, opt, m, gains);
  Deriv4 k3 = deriv_at(shifted(k2, 0.5 * dt), cHalf,
                       s.alphaBelief + 0.5 * dt * k2.dA, p, opt, m, gains);
  Deriv4 k4 = deriv_at(shifted(k3, dt), cFull, s.alphaBelief + dt * k3.dA, p,
                       opt, m, gains);

  FullState out;
  double w = dt / 6.0;
  out.x.xG = s.x.xG + w * (k1.dxG + 2.0 * k2.dxG + 2.0 * k3.dxG + k4.dxG);
  out.x.xP = s.x.xP + w * (k1.dxP + 2.0 * k2.dxP + 2.0 * k3.dxP + k4.dxP);
  out.x.xR = s.x.xR + w * (k1.dxR + 2.0 * k2.dxR + 2.0 * k3.dxR + k4.dxR);
  out.alphaBelief = s.alphaBelief + w * (k1.dA + 2.0 * k2.dA + 2.0 * k3.dA + k4.dA);
  out.c = cFull;
  out.t = s.t + dt;
  return out;
}

inline double linf_to_corner(const SimplexState& x, Corner c) {
  switch (c) {
    case Corner::G:
      return std::max({std::abs(x.xG - 1.0), std::abs(x.xP), std::abs(x.xR)});
    case Corner::P:
      return std::max({std::abs(x.xG), std::abs(x.xP - 1.0), std::abs(x.xR)});
    case Corner::R:
      return std::max({std::abs(x.xG), std::abs(x.xP), std::abs(x.xR - 1.0)});
    default: return std::numeric_limits<double>::infinity();
  }
}

} // namespace detail

/// Type1: trapped with no excursion. Type2: excursion(s) happened, trapped
/// anyway, barrier permanently lowered. Type3: locked in at genuine
/// adoption. Type4: locked in after repeated crossings. Anything else
/// (time-out, convergence to the rejection face) is Unclassified.
inline TrajectoryType classify_trajectory(const Trajectory& tr,
                                          const ModelParams& p) {
  switch (tr.convergedCorner) {
    case Corner::G:
      return tr.excursions.size() >= 2 ? TrajectoryType::Type4
                                       : TrajectoryType::Type3;
    case Corner::P:
      if (tr.excursions.empty()) return TrajectoryType::Type1;
      return tr.finalState.c < p.c0 ? TrajectoryType::Type2
                                    : TrajectoryType::Unclassified;
    default:
      return TrajectoryType::Unclassified;
  }
}

/// Integrate the coupled system from `initial` until tMax or until the
/// state has settled at a corner (both the distance and the derivative norm
/// must be below cornerTolerance, so the saddle at (0,0,1) is not mistaken
/// for an endpoint). Threshold crossings are located by bisection to
/// eventTimeTolerance and the cost is integrated in closed form on each
/// side. Throws NonFiniteStateError if the state blows up.
inline Trajectory integrate(const FullState& initial, const ModelParams& p,
                            const IntegrationConfig& cfg,
                            const IntegrateOptions& opt = {}) {
  cfg.validate();
  if (!initial.x.valid())
    throw ValidationError("initial state is not on the simplex");

  Trajectory traj;
  FullState s = initial;
  if (cfg.renormalizeEachStep) s.x = s.x.normalized();

  // Boundary times where window membership can change. Steps are split at
  // these times so each RK4 sub-step sees constant modifiers.
  std::vector<double> boundaries;
  std::vector<const Intervention*> seeds;
  double lastWindowEnd = s.t;
  for (const auto& w : opt.interventions) {
    if (w.startTime < 0.0 || w.duration < 0.0)
      throw ValidationError("intervention windows must be non-negative");
    boundaries.push_back(w.startTime);
    if (w.kind == InterventionKind::Seed) {
      if (!(w.magnitude >= 0.0 && w.magnitude <= 1.0))
        throw ValidationError("seed magnitude must lie in [0,1]");
      seeds.push_back(&w);
      lastWindowEnd = std::max(lastWindowEnd, w.startTime);
    } else {
      boundaries.push_back(w.startTime + w.duration);
      lastWindowEnd = std::max(lastWindowEnd, w.startTime + w.duration);
    }
  }
  std::sort(boundaries.begin(), boundaries.end());
  boundaries.erase(std::unique(boundaries.begin(), boundaries.end()),
                   boundaries.end());
  std::sort(seeds.begin(), seeds.end(),
            [](const Intervention* a, const Intervention* b) {
              return a->startTime < b->startTime;
            });
  for (size_t i = 1; i < seeds.size(); ++i)
    if (seeds[i]->startTime == seeds[i - 1]->startTime)
      throw ValidationError("overlapping seed interventions at t=" +
                            std::to_string(seeds[i]->startTime));

  size_t boundaryIdx = 0;
  while (boundaryIdx < boundaries.size() && boundaries[boundaryIdx] <= s.t)
    ++boundaryIdx;
  size_t seedIdx = 0;

  detail::Mods mods = detail::active_mods(opt.interventions, s.t);
  if (mods.pinBelief) s.alphaBelief = mods.pinnedBelief;
  while (seedIdx < seeds.size() && seeds[seedIdx]->startTime <= s.t) {
    s.x = apply_seed(s.x, seeds[seedIdx]->magnitude, opt.seedFromROnly);
    ++seedIdx;
  }

  auto natural_above = [&](const SimplexState& x) {
    return effective_adoption(x, p.gamma) > p.eStar;
  };
  bool above = mods.hold || natural_above(s.x);
  bool gains = above;
  double excursionStart = s.t;
  bool excursionOpen = above;

  auto record = [&](bool force = false) {
    if (cfg.recordSamples || force) {
      traj.samples.push_back(s);
      traj.phases.push_back(above ? 1 : 0);
    }
  };
  record(true);

  auto check_finite = [&](const FullState& ns) {
    if (!(std::isfinite(ns.x.xG) && std::isfinite(ns.x.xP) &&
          std::isfinite(ns.x.xR) && std::isfinite(ns.c) &&
          std::isfinite(ns.alphaBelief)))
      throw NonFiniteStateError(ns.t, cfg.stepSize);
  };

  auto flip_indicator = [&](double t, bool nowAbove) {
    traj.events.push_back(
        {t, nowAbove ? EventKind::CrossUp : EventKind::CrossDown});
    if (nowAbove) {
      excursionStart = t;
      excursionOpen = true;
      gains = true;
    } else {
      traj.excursions.push_back({excursionStart, t});
      excursionOpen = false;
    }
    above = nowAbove;
  };

  bool converged = false;
  const double tEnd = cfg.tMax;

  while (s.t < tEnd && !converged) {
    double target = std::min(s.t + cfg.stepSize, tEnd);
    bool atBoundary = false;
    if (boundaryIdx < boundaries.size() &&
        boundaries[boundaryIdx] <= target) {
      target = boundaries[boundaryIdx];
      atBoundary = true;
    }

    // Advance to `target`, splitting at threshold crossings.
    while (s.t < target) {
      double dt = target - s.t;
      double r = opt.freezeCost
                     ? 0.0
                     : p.deltaInd + (above ? p.delta * mods.deltaScale : 0.0);
      FullState cand = detail::rk4_substep(s, dt, r, p, opt, mods, gains);
      bool candAbove = mods.hold ? true : natural_above(cand.x);

      if (candAbove == above) {
        check_finite(cand);
        cand.t = target;
        if (cfg.renormalizeEachStep) cand.x = cand.x.normalized();
        s = cand;
        break;
      }

      // Bisect the step fraction for the crossing; commit just past it so
      // the committed state already sits on the new side.
      double lo = 0.0, hi = dt;
      while (hi - lo > cfg.eventTimeTolerance) {
        double mid = 0.5 * (lo + hi);
        FullState probe = detail::rk4_substep(s, mid, r, p, opt, mods, gains);
        if (natural_above(probe.x) == above)
          lo = mid;
        else
          hi = mid;
      }
      FullState crossed = detail::rk4_substep(s, hi, r, p, opt, mods, gains);
      check_finite(crossed);
      if (cfg.renormalizeEachStep) crossed.x = crossed.x.normalized();
      s = crossed;
      flip_indicator(s.t, !above);
      record();
    }
    record();

    if (atBoundary) {
      // Apply any seed scheduled exactly here, then refresh window state.
      while (seedIdx < seeds.size() && seeds[seedIdx]->startTime <= s.t) {
        s.x = apply_seed(s.x, seeds[seedIdx]->magnitude, opt.seedFromROnly);
        ++seedIdx;
      }
      detail::Mods next = detail::active_mods(opt.interventions, s.t);
      if (next.pinBelief && !mods.pinBelief) s.alphaBelief = next.pinnedBelief;
      mods = next;
      bool nowAbove = mods.hold || natural_above(s.x);
      if (nowAbove != above) {
        flip_indicator(s.t, nowAbove);
        record();
      }
      ++boundaryIdx;
    }

    // Corner settling test, deferred until all interventions have played out.
    if (s.t >= lastWindowEnd) {
      for (Corner cn : {Corner::G, Corner::P, Corner::R}) {
        if (detail::linf_to_corner(s.x, cn) >= cfg.cornerTolerance) continue;
        detail::Deriv4 d =
            detail::deriv_at(s.x, s.c, s.alphaBelief, p, opt, mods, gains);
        double dmax =
            std::max({std::abs(d.dxG), std::abs(d.dxP), std::abs(d.dxR)});
        if (dmax < cfg.cornerTolerance) {
          converged = true;
          traj.convergedCorner = cn;
          break;
        }
      }
    }
  }

  if (excursionOpen) traj.excursions.push_back({excursionStart, s.t});
  traj.finalState = s;
  traj.reachedTMax = !converged;
  if (!cfg.recordSamples) record(true);
  traj.classification = classify_trajectory(traj, p);
  return traj;
}

} // namespace adoptlab
