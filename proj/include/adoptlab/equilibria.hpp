#pragma once

// Equilibrium location and local stability for the frozen-cost dynamics.
//
// At a pure-strategy corner the replicator linearisation is diagonal in the
// transverse directions: the growth rate toward strategy j at corner i is
// f_j - f_i evaluated at the corner. The interior equilibrium on the G-P
// edge (the tipping point) solves
//   alpha * Phi(gamma + (1-gamma) x) = (c - cP) + (bP - bG),
// which is bracketed and bisected; Phi is monotone so no derivative-based
// refinement is needed.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adoptlab/model.hpp"

namespace adoptlab {

enum class EquilibriumKind { CornerG, CornerP, CornerR, EdgeGPInterior };

enum class Stability { Stable, Saddle, Unstable };

inline const char* to_string(EquilibriumKind k) {
  switch (k) {
    case EquilibriumKind::CornerG: return "corner_G";
    case EquilibriumKind::CornerP: return "corner_P";
    case EquilibriumKind::CornerR: return "corner_R";
    default: return "edge_GP_interior";
  }
}

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Saddle: return "saddle";
    default: return "unstable";
  }
}

struct EquilibriumReport {
  SimplexState location;
  EquilibriumKind kind;
  std::array<double, 2> eigenvalues{}; // transverse growth rates
  Stability stability = Stability::Unstable;
  std::vector<std::pair<std::string, bool>> conditionChecks;
};

inline Stability stability_from_eigenvalues(double a, double b) {
  if (a < 0.0 && b < 0.0) return Stability::Stable;
  if (a > 0.0 && b > 0.0) return Stability::Unstable;
  return Stability::Saddle;
}

/// Transverse growth rates and stability for the three corners at frozen
/// cost c. The step-limit conditions and their sigmoid-smoothed versions
/// are both reported: with a finite-k logistic the P corner keeps a small
/// Phi(gamma) leak, so the exact check is the smoothed one.
inline std::vector<EquilibriumReport> corner_stability(const ModelParams& p,
                                                       double c) {
  std::vector<EquilibriumReport> out;
  double phi0 = systemic_benefit(0.0, p);
  double phiGamma = systemic_benefit(p.gamma, p);
  double phi1 = systemic_benefit(1.0, p);

  // R corner: eigenvalues toward G and P. Coordination terms vanish here
  // (xG = xP = 0).
  {
    EquilibriumReport r;
    r.location = corner_r();
    r.kind = EquilibriumKind::CornerR;
    double towardG = -c + p.alpha * phi0 + p.bG;
    double towardP = p.bP - p.cP;
    r.eigenvalues = {towardG, towardP};
    r.stability = stability_from_eigenvalues(towardG, towardP);
    r.conditionChecks = {
        {"bP>cP", p.bP > p.cP},
        {"G_blocked: alpha*Phi(0)+bG<c", towardG < 0.0},
    };
    out.push_back(std::move(r));
  }

  // P corner: eigenvalues toward G and R. fG picks up -psiDev here.
  {
    EquilibriumReport r;
    r.location = corner_p();
    r.kind = EquilibriumKind::CornerP;
    double fG = -c + p.alpha * phiGamma + p.bG - p.psiDev;
    double fP = p.bP - p.cP;
    double towardG = fG - fP;
    double towardR = -fP;
    r.eigenvalues = {towardG, towardR};
    r.stability = stability_from_eigenvalues(towardG, towardR);
    r.conditionChecks = {
        {"bP>cP", p.bP > p.cP},
        {"step: gamma<eStar", p.gamma < p.eStar},
        {"smoothed: alpha*Phi(gamma)+bG-c-psiDev<bP-cP", towardG < 0.0},
    };
    out.push_back(std::move(r));
  }

  // G corner: eigenvalues toward P and R. fG picks up +psiG, fP picks up
  // -psiP here.
  {
    EquilibriumReport r;
    r.location = corner_g();
    r.kind = EquilibriumKind::CornerG;
    double fG = -c + p.alpha * phi1 + p.bG + p.psiG;
    double fP = p.bP - p.cP - p.psiP;
    double towardP = fP - fG;
    double towardR = -fG;
    r.eigenvalues = {towardP, towardR};
    r.stability = stability_from_eigenvalues(towardP, towardR);
    r.conditionChecks = {
        {"step: alpha*B+bG-c>bP-cP", p.alpha * p.B + p.bG - c > p.bP - p.cP},
        {"step: alpha*B+bG>c", p.alpha * p.B + p.bG > c},
        {"smoothed: alpha*Phi(1)+bG-c+psiG>bP-cP-psiP", towardP < 0.0},
        {"smoothed: alpha*Phi(1)+bG+psiG>c", towardR < 0.0},
    };
    out.push_back(std::move(r));
  }

  return out;
}

/// Unstable equilibrium xG* on the G-P edge at frozen cost c: the root of
/// alpha*Phi(gamma + (1-gamma)x) - ((c-cP) + (bP-bG)) on (0,1), bisected
/// until |residual| < 1e-10. Throws NoRootError (with the side the function
/// lies on) outside the bistable regime.
inline double tipping_point(const ModelParams& p, double c) {
  double gap = (c - p.cP) + (p.bP - p.bG);
  auto f = [&](double x) {
    double e = p.gamma + (1.0 - p.gamma) * x;
    return p.alpha * systemic_benefit(e, p) - gap;
  };

  double f0 = f(0.0);
  double f1 = f(1.0);
  if (f0 >= 0.0)
    throw NoRootError(NoRootError::Side::GDominates,
                      "no tipping point: alpha*Phi(gamma) already exceeds the "
                      "payoff gap; genuine adoption dominates the edge");
  if (f1 <= 0.0)
    throw NoRootError(NoRootError::Side::TrapDominates,
                      "no tipping point: alpha*Phi(1) below the payoff gap; "
                      "partial adoption dominates the edge");

  double lo = 0.0, hi = 1.0;
  double mid = 0.5, fm = f(mid);
  for (int it = 0; it < 200 && std::abs(fm) >= 1e-10; ++it) {
    if (fm > 0.0)
      hi = mid;
    else
      lo = mid;
    mid = 0.5 * (lo + hi);
    fm = f(mid);
  }
  if (std::abs(fm) >= 1e-10)
    throw NumericalError("tipping point bisection stalled, residual " +
                         std::to_string(fm));
  return mid;
}

/// Corners plus, when the bistable regime holds, the G-P edge interior
/// equilibrium with its along-edge and transverse growth rates. Unlike
/// tipping_point (which solves the base equation), this equilibrium
/// respects the coordination terms, so it stays consistent with
/// corner_stability when the psi coefficients are nonzero.
inline std::vector<EquilibriumReport> all_equilibria(const ModelParams& p,
                                                     double c) {
  std::vector<EquilibriumReport> out = corner_stability(p, c);

  double gap = (c - p.cP) + (p.bP - p.bG);
  // fG - fP on the edge; every term is increasing in x
  auto g = [&](double x) {
    double e = p.gamma + (1.0 - p.gamma) * x;
    return p.alpha * systemic_benefit(e, p) + (p.psiG + p.psiP) * x -
           p.psiDev * (1.0 - x) - gap;
  };
  if (g(0.0) >= 0.0 || g(1.0) <= 0.0) return out; // monostable edge

  double lo = 0.0, hi = 1.0, mid = 0.5, gm = g(mid);
  for (int it = 0; it < 200 && std::abs(gm) >= 1e-10; ++it) {
    if (gm > 0.0)
      hi = mid;
    else
      lo = mid;
    mid = 0.5 * (lo + hi);
    gm = g(mid);
  }
  double x = mid;

  EquilibriumReport r;
  r.location = SimplexState{x, 1.0 - x, 0.0};
  r.kind = EquilibriumKind::EdgeGPInterior;
  double e = p.gamma + (1.0 - p.gamma) * x;
  // Along the edge: d/dx [x(1-x)(fG-fP)] at the root reduces to
  // x(1-x) * d(fG-fP)/dx.
  double alongEdge =
      x * (1.0 - x) *
      (p.alpha * systemic_benefit_slope(e, p) * (1.0 - p.gamma) + p.psiG +
       p.psiP + p.psiDev);
  // Transverse: fR - fbar = -fP since fG = fP there.
  double towardR = -(p.bP - p.cP - p.psiP * x);
  r.eigenvalues = {alongEdge, towardR};
  r.stability = stability_from_eigenvalues(alongEdge, towardR);
  r.conditionChecks = {{"bistable: root on (0,1)", true}};
  out.push_back(std::move(r));
  return out;
}

struct ComparativeStatics {
  double dAlpha = 0.0;   // d xG* / d alpha
  double dB = 0.0;       // d xG* / d B
  double dCostGap = 0.0; // d xG* / d (c0 - cP)
  double dBenGap = 0.0;  // d xG* / d (bP - bG)
  double dGamma = 0.0;   // reported, sign not asserted
  bool patternHolds = false; // (-, -, +, +) where |derivative| > 1e-8
};

/// Central finite differences of the tipping point. Relative step 1e-4;
/// signs are only judged when the derivative is clearly resolved.
inline ComparativeStatics comparative_statics(const ModelParams& p, double c,
                                              double rel = 1e-4) {
  auto step = [&](double v) { return rel * std::max(std::abs(v), 1e-2); };

  auto central = [&](auto&& eval, double v) {
    double h = step(v);
    return (eval(v + h) - eval(v - h)) / (2.0 * h);
  };

  ComparativeStatics r;
  r.dAlpha = central(
      [&](double a) {
        ModelParams q = p;
        q.alpha = a;
        return tipping_point(q, c);
      },
      p.alpha);
  r.dB = central(
      [&](double b) {
        ModelParams q = p;
        q.B = b;
        return tipping_point(q, c);
      },
      p.B);
  r.dCostGap = central([&](double cc) { return tipping_point(p, cc); }, c);
  r.dBenGap = central(
      [&](double bp) {
        ModelParams q = p;
        q.bP = bp;
        return tipping_point(q, c);
      },
      p.bP);
  r.dGamma = central(
      [&](double g) {
        ModelParams q = p;
        q.gamma = g;
        return tipping_point(q, c);
      },
      p.gamma);

  auto resolved = [](double d) { return std::abs(d) > 1e-8; };
  r.patternHolds = resolved(r.dAlpha) && r.dAlpha < 0.0 && resolved(r.dB) &&
                   r.dB < 0.0 && resolved(r.dCostGap) && r.dCostGap > 0.0 &&
                   resolved(r.dBenGap) && r.dBenGap > 0.0;
  return r;
}

struct GammaSweepPoint {
  double gamma;
  double xGStar;
};

struct GammaSweepResult {
  std::vector<GammaSweepPoint> points;
  std::optional<double> turningPoint; // gamma where d xG*/d gamma flips sign
};

/// Dense gamma scan of the tipping point. Reports an interior turning point
/// if the discrete derivative changes sign anywhere; for this family the
/// root satisfies xG* = 1 - (1 - E)/(1 - gamma) with E independent of
/// gamma, so the scan is expected to come back monotone.
inline GammaSweepResult gamma_sweep(const ModelParams& p, double c,
                                    double gFrom, double gTo, int nPoints) {
  if (nPoints < 3) throw ValidationError("gamma_sweep needs >= 3 points");
  GammaSweepResult out;
  for (int i = 0; i < nPoints; ++i) {
    double g = gFrom + (gTo - gFrom) * i / (nPoints - 1);
    ModelParams q = p;
    q.gamma = g;
    out.points.push_back({g, tipping_point(q, c)});
  }
  const double tol = 1e-12;
  int prevSign = 0;
  for (size_t i = 1; i < out.points.size(); ++i) {
    double d = out.points[i].xGStar - out.points[i - 1].xGStar;
    int sign = d > tol ? 1 : (d < -tol ? -1 : 0);
    if (sign != 0 && prevSign != 0 && sign != prevSign) {
      out.turningPoint = out.points[i - 1].gamma;
      break;
    }
    if (sign != 0) prevSign = sign;
  }
  return out;
}

struct RhoCritical {
  double closedForm;            // 1 - cP / ((bP - bG0) + c0)
  std::optional<double> swept;  // smallest rho where the P corner destabilises
  double sweepStep;
  bool agrees; // |closedForm - swept| <= sweepStep
};

/// Critical technology type: closed form plus a numerically detected
/// bifurcation from a rho sweep of the P-corner growth rate toward G.
inline RhoCritical rho_critical(const ModelParams& base,
                                double sweepStep = 0.005) {
  RhoCritical r;
  r.closedForm = 1.0 - base.cP / ((base.bP - base.bG0) + base.c0);
  r.sweepStep = sweepStep;

  std::optional<double> found;
  for (double rho = 0.0; rho <= 1.0 + 1e-12; rho += sweepStep) {
    ModelParams withRho = base;
    withRho.rho = std::min(rho, 1.0);
    ModelParams q = apply_rho(withRho);
    double towardG = (-q.c0 + q.alpha * systemic_benefit(q.gamma, q) + q.bG -
                      q.psiDev) -
                     (q.bP - q.cP);
    if (towardG >= 0.0) {
      found = std::min(rho, 1.0);
      break;
    }
  }
  r.swept = found;
  r.agrees = found && std::abs(*found - r.closedForm) <= sweepStep + 1e-12;
  return r;
}

} // namespace adoptlab
