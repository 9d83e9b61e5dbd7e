#pragma once

// The organisation's commitment problem. Announced sharing alphaHat, realised
// gain V, quadratic reputational cost: the one-shot optimum reneges by
// Delta* = clamp(V / kappaCoeff, 0, alphaHat). The repeated game sustains
// full sharing iff the discount factor clears beta* = V / (V + kappa) under
// the per-unit linearised cost. theta* converts the tipping-point
// sensitivities into the cost-decay vs belief-erosion speed ratio that
// decides whether repeated failed pilots help or hurt.

#include <algorithm>
#include <cmath>
#include <string>

#include "adoptlab/dynamics.hpp"
#include "adoptlab/equilibria.hpp"
#include "adoptlab/model.hpp"

namespace adoptlab {

struct RenegingResult {
  double deltaOpt;    // optimal reneging
  double alphaActual; // alphaHat - deltaOpt
};

/// First-order condition kappa'(Delta) = V for the quadratic cost, clamped
/// to the feasible set [0, alphaHat].
inline RenegingResult optimal_reneging(const TrustParams& tp, double V) {
  double d = std::clamp(V / tp.kappaCoeff, 0.0, tp.alphaHat);
  return {d, tp.alphaHat - d};
}

inline RenegingResult optimal_reneging(const TrustParams& tp) {
  return optimal_reneging(tp, tp.V);
}

struct RenegingSensitivity {
  double dDeltaDV;  // 1 / kappa''(Delta) on the interior, 0 when clamped
  bool atBoundary;
};

/// Marginal reneging response to the realised gain. At a clamped optimum
/// the derivative is zero and reported as such rather than asserted.
inline RenegingSensitivity reneging_sensitivity(const TrustParams& tp) {
  double interior = tp.V / tp.kappaCoeff;
  if (interior <= 0.0 || interior >= tp.alphaHat) return {0.0, true};
  return {1.0 / tp.kappaCoeff, false};
}

/// beta* = V / (V + kappa): the lowest discount factor that sustains
/// genuine commitment. Increasing in V, decreasing in kappa.
inline double beta_star(double V, double kappaLinear) {
  if (!(kappaLinear > 0.0))
    throw ValidationError("kappaLinear must be > 0");
  if (!(V >= 0.0)) throw ValidationError("V must be >= 0");
  return V / (V + kappaLinear);
}

/// Defection test: the organisation reneges iff beta < beta*. Equality
/// cooperates.
inline bool will_defect(double V, double kappaLinear, double beta) {
  return beta < beta_star(V, kappaLinear);
}

/// Per-episode belief downgrade used in theta*. Configured explicitly or
/// defaulted to the reneging depth at the realised gain V = B.
inline double resolved_delta_alpha(const ModelParams& p,
                                   const TrustParams& tp) {
  if (tp.deltaAlpha) return *tp.deltaAlpha;
  return tp.alphaHat - optimal_reneging(tp, p.B).alphaActual;
}

struct ThetaStar {
  double value;
  bool ratchetBeneficial; // delta / lambda > theta*
  double dTippingDAlpha;  // finite-difference sensitivities used
  double dTippingDCost;
};

/// theta* = (|d xG*/d alpha| / (d xG*/d c)) * (deltaAlpha / c0). Systems
/// with delta/lambda above it gain more from the cost ratchet per failed
/// attempt than they lose to belief erosion.
inline ThetaStar theta_star(const ModelParams& p, const TrustParams& tp,
                            double c) {
  ComparativeStatics cs = comparative_statics(p, c);
  double dAlphaMag = std::abs(cs.dAlpha);
  if (!(cs.dCostGap > 0.0))
    throw NumericalError("theta*: d xG*/d c is not positive");
  ThetaStar r;
  r.dTippingDAlpha = cs.dAlpha;
  r.dTippingDCost = cs.dCostGap;
  r.value = (dAlphaMag / cs.dCostGap) * (resolved_delta_alpha(p, tp) / p.c0);
  double ratio = p.lambda > 0.0
                     ? p.delta / p.lambda
                     : std::numeric_limits<double>::infinity();
  r.ratchetBeneficial = ratio > r.value;
  return r;
}

struct TrustReport {
  double deltaOpt;
  double alphaActual;
  double betaStar;
  bool willDefect;
  double thetaStar;
  bool ratchetBeneficial;
};

inline TrustReport trust_report(const ModelParams& p, const TrustParams& tp,
                                double c) {
  TrustReport r;
  RenegingResult rr = optimal_reneging(tp);
  r.deltaOpt = rr.deltaOpt;
  r.alphaActual = rr.alphaActual;
  r.betaStar = beta_star(tp.V, tp.kappaLinear);
  r.willDefect = will_defect(tp.V, tp.kappaLinear, tp.beta);
  ThetaStar th = theta_star(p, tp, c);
  r.thetaStar = th.value;
  r.ratchetBeneficial = th.ratchetBeneficial;
  return r;
}

/// Self-confirming trap test: pessimistic beliefs (below the announcement)
/// keep the system under the threshold forever, so the gains that would
/// correct the beliefs never materialise and the belief is never revised.
inline bool detect_trust_trap(const FullState& initial, const ModelParams& p,
                              const TrustParams& tp,
                              const IntegrationConfig& cfg) {
  IntegrateOptions opt;
  opt.trustEnabled = true;
  opt.beliefTarget = optimal_reneging(tp, p.B).alphaActual;
  Trajectory tr = integrate(initial, p, cfg, opt);
  return tr.convergedCorner == Corner::P && tr.excursions.empty() &&
         tr.finalState.alphaBelief == initial.alphaBelief &&
         initial.alphaBelief < tp.alphaHat;
}

} // namespace adoptlab
