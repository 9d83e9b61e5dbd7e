#pragma once

// Policy instruments over the coupled dynamics: the self-terminating
// threshold subsidy, seeding past the tipping point, the minimum pilot
// duration that survives release, intervention sequencing, repeated-pilot
// experiments, and welfare accounting.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "adoptlab/dynamics.hpp"
#include "adoptlab/equilibria.hpp"
#include "adoptlab/model.hpp"
#include "adoptlab/trust.hpp"

namespace adoptlab {

/// Early-adopter subsidy that closes the payoff gap at the current
/// effective adoption: s* = max(0, (c - cP) + (bP - bG) - alpha*Phi(e)).
/// Decreasing in e at fixed c and zero once the systemic term covers the
/// gap, so a schedule paying s*(e) switches itself off.
inline double subsidy(double e, const ModelParams& p, double c) {
  double gap = (c - p.cP) + (p.bP - p.bG);
  return std::max(0.0, gap - p.alpha * systemic_benefit(e, p));
}

struct SeedingResult {
  double fraction; // genuine-adopter mass to install on the G-P edge
  bool verified;   // simulation from (fraction, 1-fraction, 0) reached G
};

/// Minimal seeding mass: the edge tipping point plus a safety margin.
/// Returns 0 when genuine adoption already dominates the edge; propagates
/// NoRootError when the trap dominates (no seed can work at this cost).
inline SeedingResult seeding_fraction(const ModelParams& p, double c,
                                      const IntegrationConfig& cfg,
                                      double margin = 0.02) {
  double fraction = 0.0;
  try {
    fraction = std::min(tipping_point(p, c) + margin, 1.0);
  } catch (const NoRootError& e) {
    if (e.side == NoRootError::Side::GDominates) return {0.0, true};
    throw;
  }
  // Verification runs against the fixed-cost flow: the ratchet only ever
  // helps genuine adoption, so the frozen portrait is the conservative
  // bound and matches the separatrix that defines xG*.
  IntegrationConfig quiet = cfg;
  quiet.recordSamples = false;
  IntegrateOptions frozen;
  frozen.freezeCost = true;
  FullState init = initial_state({fraction, 1.0 - fraction, 0.0}, p);
  init.c = c;
  Trajectory tr = integrate(init, p, quiet, frozen);
  return {fraction, tr.convergedCorner == Corner::G};
}

struct CriticalExcursion {
  double tStar;
  double costAtRelease;     // c0 * exp(-delta * tStar)
  double xGAtRelease;       // population state when the clamp lifts
  double tippingAtRelease;  // xG*(costAtRelease)
};

/// Smallest hold duration T such that clamping effective adoption at
/// `holdLevel` for [0, T] and then releasing leads to lock-in at the G
/// corner. Found by doubling then bisection to `tol`. At the boundary the
/// released state sits on the tipping point of the decayed cost, which is
/// reported for the fixed-point check xG(T*) = xG*(c0 exp(-delta T*)).
inline CriticalExcursion critical_excursion(const ModelParams& p,
                                            const FullState& initial,
                                            const IntegrationConfig& cfg,
                                            double holdLevel,
                                            double tol = 1e-3,
                                            double tHoldMax = 100.0) {
  IntegrationConfig quiet = cfg;
  quiet.recordSamples = false;

  auto locks_in = [&](double T) {
    IntegrateOptions opt;
    if (T > 0.0)
      opt.interventions.push_back(
          {InterventionKind::Hold, 0.0, T, holdLevel});
    Trajectory tr = integrate(initial, p, quiet, opt);
    return tr.convergedCorner == Corner::G;
  };

  if (locks_in(0.0))
    return {0.0, p.c0, initial.x.xG, tipping_point(p, p.c0)};

  double lo = 0.0, hi = 1.0;
  while (!locks_in(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > tHoldMax)
      throw NoCrossingError(
          "no hold duration up to " + std::to_string(tHoldMax) +
          " flips the basin (cost decay too weak for this start)");
  }

  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (locks_in(mid))
      hi = mid;
    else
      lo = mid;
  }

  CriticalExcursion out;
  out.tStar = hi;

  // state at the moment the critical clamp lifts
  IntegrateOptions opt;
  opt.interventions.push_back({InterventionKind::Hold, 0.0, out.tStar, holdLevel});
  IntegrationConfig upToRelease = quiet;
  upToRelease.tMax = out.tStar;
  Trajectory tr = integrate(initial, p, upToRelease, opt);
  out.costAtRelease = tr.finalState.c;
  out.xGAtRelease = tr.finalState.x.xG;
  out.tippingAtRelease = tipping_point(p, out.costAtRelease);
  return out;
}

struct WelfareReport {
  double deltaW;            // per-doctor loss of the trap vs full adoption
  double totalLoss;         // n * deltaW
  double effectiveAdoption; // e at the final state
  double rawAdoptionRate;   // xG + xP at the final state
  bool premiseHolds;        // B > n (c0 - bG), full adoption socially optimal
};

/// Welfare loss of the partial-adoption trap: deltaW = alpha B + bG - bP + cP.
/// Also carries both adoption metrics so their divergence is visible: the
/// raw rate is high at the trap while effective adoption sits at gamma.
inline WelfareReport welfare(const ModelParams& p, const FullState& final_) {
  WelfareReport w;
  w.deltaW = p.alpha * p.B + p.bG - p.bP + p.cP;
  w.totalLoss = static_cast<double>(p.n) * w.deltaW;
  w.effectiveAdoption = effective_adoption(final_.x, p.gamma);
  w.rawAdoptionRate = final_.x.xG + final_.x.xP;
  w.premiseHolds = p.B > static_cast<double>(p.n) * (p.c0 - p.bG);
  return w;
}

struct PolicyScenario {
  std::vector<Intervention> schedule;
  FullState initial;
  ModelParams params;
  TrustParams tp;
  bool trustEnabled = true;
  bool seedFromROnly = false;
};

struct ScenarioResult {
  Trajectory trajectory;
  WelfareReport welfare;
  TrustReport trust;
};

/// Integrate the full system with the scheduled interventions applied as
/// payoff/parameter modifications inside their windows. Scheduling
/// conflicts (two seeds at the same instant) are rejected by the
/// integrator.
inline ScenarioResult run_scenario(const PolicyScenario& sc,
                                   const IntegrationConfig& cfg) {
  IntegrateOptions opt;
  opt.trustEnabled = sc.trustEnabled;
  opt.beliefTarget = optimal_reneging(sc.tp, sc.params.B).alphaActual;
  opt.seedFromROnly = sc.seedFromROnly;
  opt.interventions = sc.schedule;

  ScenarioResult r;
  r.trajectory = integrate(sc.initial, sc.params, cfg, opt);
  r.welfare = welfare(sc.params, r.trajectory.finalState);
  r.trust = trust_report(sc.params, sc.tp, r.trajectory.finalState.c);
  return r;
}

struct RepeatedPilotSpec {
  int count = 10;
  double duration = 1.5;
  double gap = 1.0;
  double holdLevel = 0.8;
};

/// Repeated pilot programme: `count` clamp windows separated by free
/// relaxation, trust game active throughout. Each failed pilot still decays
/// the cost (ratchet) while the realised reneging erodes the belief; which
/// force wins is the theta* comparison.
inline ScenarioResult run_repeated_pilots(const ModelParams& p,
                                          const TrustParams& tp,
                                          const FullState& initial,
                                          const RepeatedPilotSpec& spec,
                                          const IntegrationConfig& cfg) {
  PolicyScenario sc;
  sc.params = p;
  sc.tp = tp;
  sc.initial = initial;
  for (int i = 0; i < spec.count; ++i) {
    double start = i * (spec.duration + spec.gap);
    sc.schedule.push_back(
        {InterventionKind::Hold, start, spec.duration, spec.holdLevel});
  }
  return run_scenario(sc, cfg);
}

struct ValueAdoptionRow {
  double rho;
  double systemicValue;  // B along the technology spectrum
  double eFinal;         // steady-state effective adoption
  double rawAdoption;    // xG + xP at the final state
  double deltaW;
  double totalLoss;      // n * deltaW (foregone when trapped)
  bool trapped;          // converged to the partial-adoption corner
  double realisedLoss;   // totalLoss if trapped, else 0
};

struct ValueAdoptionCurve {
  std::vector<ValueAdoptionRow> rows;
  double valueAdoptionCorrelation; // corr(totalLoss, eFinal) across the grid
};

/// Steady-state outcomes across the technology spectrum. The systemic value
/// falls linearly from B at rho = 0 to pointSolutionValue at rho = 1
/// (system-change technologies carry the large systemic gains); the other
/// parameters follow the rho mapping. Each row integrates the coupled
/// dynamics from a start near the partial-adoption corner, so the escape
/// happens exactly where that corner destabilises.
inline ValueAdoptionCurve value_adoption_curve(
    const ModelParams& base, const std::vector<double>& rhoGrid,
    const IntegrationConfig& cfg, double pointSolutionValue = 0.0,
    SimplexState start = {0.02, 0.96, 0.02}) {
  ValueAdoptionCurve out;
  IntegrationConfig quiet = cfg;
  quiet.recordSamples = false;

  for (double rho : rhoGrid) {
    ModelParams withRho = base;
    withRho.rho = rho;
    ModelParams p = apply_rho(withRho);
    p.B = base.B * (1.0 - rho) + pointSolutionValue * rho;
    if (p.B <= 0.0) p.B = 1e-9; // keep Phi well-defined at the far endpoint

    Trajectory tr = integrate(initial_state(start, p), p, quiet);
    ValueAdoptionRow row;
    row.rho = rho;
    row.systemicValue = p.B;
    row.eFinal = effective_adoption(tr.finalState.x, p.gamma);
    row.rawAdoption = tr.finalState.x.xG + tr.finalState.x.xP;
    WelfareReport w = welfare(p, tr.finalState);
    row.deltaW = w.deltaW;
    row.totalLoss = w.totalLoss;
    row.trapped = tr.convergedCorner == Corner::P;
    row.realisedLoss = row.trapped ? row.totalLoss : 0.0;
    out.rows.push_back(row);
  }

  // Pearson correlation between foregone value and adoption depth
  double n = static_cast<double>(out.rows.size());
  double mx = 0.0, my = 0.0;
  for (const auto& r : out.rows) {
    mx += r.totalLoss;
    my += r.eFinal;
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (const auto& r : out.rows) {
    sxy += (r.totalLoss - mx) * (r.eFinal - my);
    sxx += (r.totalLoss - mx) * (r.totalLoss - mx);
    syy += (r.eFinal - my) * (r.eFinal - my);
  }
  out.valueAdoptionCorrelation =
      (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : 0.0;
  return out;
}

} // namespace adoptlab
