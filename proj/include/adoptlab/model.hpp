#pragma once

// Three-strategy adoption game: genuine adopters (G), partial adopters (P)
// and rejecters (R) on the unit simplex. This header holds the parameter
// set, the effective-adoption measure, the threshold benefit curve and the
// per-strategy payoffs. Everything downstream (dynamics, equilibria, basins,
// trust, policy) consumes only these functions.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace adoptlab {

// Thrown when inputs violate a documented precondition (bad config,
// broken parameter ordering). Maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
public:
  explicit ValidationError(const std::string& what)
      : std::invalid_argument(what) {}
};

// Base for runtime numerical failures. Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what)
      : std::runtime_error(what) {}
};

// Bracketing failed: the tipping-point function has one sign on all of (0,1).
class NoRootError : public NumericalError {
public:
  enum class Side { GDominates, TrapDominates };

  NoRootError(Side side, const std::string& what)
      : NumericalError(what), side(side) {}

  Side side;
};

class NonFiniteStateError : public NumericalError {
public:
  NonFiniteStateError(double t, double h)
      : NumericalError("non-finite state at t=" + std::to_string(t) +
                       " (step size " + std::to_string(h) +
                       " likely too large)"),
        t(t), stepSize(h) {}

  double t;
  double stepSize;
};

class NoCrossingError : public NumericalError {
public:
  explicit NoCrossingError(const std::string& what) : NumericalError(what) {}
};

/// Point on the 2-simplex: strategy frequencies, xG + xP + xR = 1.
struct SimplexState {
  double xG = 0.0;
  double xP = 0.0;
  double xR = 0.0;

  double sum() const { return xG + xP + xR; }

  bool valid(double tol = 1e-9) const {
    return xG >= -tol && xP >= -tol && xR >= -tol &&
           std::abs(sum() - 1.0) <= tol;
  }

  // Clamp negatives to zero, then rescale so the components sum to one.
  SimplexState normalized() const {
    SimplexState s{xG < 0.0 ? 0.0 : xG, xP < 0.0 ? 0.0 : xP,
                   xR < 0.0 ? 0.0 : xR};
    double total = s.sum();
    if (total <= 0.0)
      throw NumericalError("cannot normalize simplex state with zero mass");
    s.xG /= total;
    s.xP /= total;
    s.xR /= total;
    return s;
  }
};

inline SimplexState corner_g() { return {1.0, 0.0, 0.0}; }
inline SimplexState corner_p() { return {0.0, 1.0, 0.0}; }
inline SimplexState corner_r() { return {0.0, 0.0, 1.0}; }

/// All scalar parameters of the game. Defaults are the reference set used
/// throughout the verification suite. Plain aggregate; call validate() at
/// construction boundaries (config parsing does this for you).
struct ModelParams {
  double c0 = 1.0;       // initial disruption cost of genuine adoption
  double cP = 0.2;       // cost of partial adoption
  double bG = 0.1;       // direct private benefit, genuine
  double bP = 0.5;       // direct private benefit, partial
  double B = 2.0;        // total systemic benefit
  double alpha = 0.7;    // appropriated fraction of systemic benefit
  double gamma = 0.3;    // partial adopters' contribution weight
  double eStar = 0.6;    // adoption threshold
  double k = 25.0;       // sigmoid steepness
  double delta = 0.5;    // embedding cost-decay rate (above threshold)
  double deltaInd = 0.0; // individual decay rate (always on)
  double lambda = 0.1;   // belief updating rate
  double psiG = 0.0;     // peer benefit among genuine adopters
  double psiP = 0.0;     // norm enforcement against partial adopters
  double psiDev = 0.0;   // deviance cost to genuine adopters
  std::optional<double> rho; // technology type index, 0 = system-change
  double eStar0 = 0.6;   // baselines for the rho parametrisation
  double alpha0 = 0.7;
  double bG0 = 0.1;
  long n = 1;            // population size for aggregate welfare

  // Cost/benefit ordering plus range checks. Violations are errors, not
  // warnings: all downstream analysis assumes the ordering.
  void validate() const {
    if (!(cP > 0.0 && cP < c0))
      throw ValidationError("cost ordering violated: require 0 < cP < c0 "
                            "(cP=" + std::to_string(cP) +
                            ", c0=" + std::to_string(c0) + ")");
    if (!(bG < bP))
      throw ValidationError("benefit ordering violated: require bG < bP "
                            "(bG=" + std::to_string(bG) +
                            ", bP=" + std::to_string(bP) + ")");
    if (!(bP > cP))
      throw ValidationError("partial adoption must be privately profitable: "
                            "require bP > cP (bP=" + std::to_string(bP) +
                            ", cP=" + std::to_string(cP) + ")");
    if (!(bG >= 0.0)) throw ValidationError("bG must be >= 0");
    if (!(B > 0.0)) throw ValidationError("B must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0))
      throw ValidationError("alpha must lie in (0,1)");
    if (!(gamma >= 0.0 && gamma < 1.0))
      throw ValidationError("gamma must lie in [0,1)");
    if (!(eStar > 0.0 && eStar < 1.0))
      throw ValidationError("eStar must lie in (0,1)");
    if (!(k > 0.0)) throw ValidationError("k must be > 0");
    if (!(delta > 0.0)) throw ValidationError("delta must be > 0");
    if (!(deltaInd >= 0.0)) throw ValidationError("deltaInd must be >= 0");
    if (!(lambda >= 0.0)) throw ValidationError("lambda must be >= 0");
    if (!(psiG >= 0.0 && psiP >= 0.0 && psiDev >= 0.0))
      throw ValidationError("coordination coefficients must be >= 0");
    if (rho && !(*rho >= 0.0 && *rho <= 1.0))
      throw ValidationError("rho must lie in [0,1]");
    if (!(eStar0 > 0.0 && eStar0 < 1.0))
      throw ValidationError("eStar0 must lie in (0,1)");
    if (!(alpha0 > 0.0 && alpha0 < 1.0))
      throw ValidationError("alpha0 must lie in (0,1)");
    if (!(bG0 >= 0.0)) throw ValidationError("bG0 must be >= 0");
    if (!(n > 0)) throw ValidationError("n must be > 0");
  }
};

/// Organisation side of the trust game.
struct TrustParams {
  double alphaHat = 0.7;    // announced sharing fraction
  double kappaCoeff = 4.0;  // curvature of the quadratic reputational cost
  double kappaLinear = 1.0; // per-unit cost of the local linearisation
  double beta = 0.9;        // discount factor
  double V = 2.0;           // realised systemic gain
  std::optional<double> deltaAlpha; // belief erosion per failed attempt;
                                    // defaults to alphaHat - alphaActual(V=B)

  void validate() const {
    if (!(alphaHat > 0.0 && alphaHat <= 1.0))
      throw ValidationError("alphaHat must lie in (0,1]");
    if (!(kappaCoeff > 0.0)) throw ValidationError("kappaCoeff must be > 0");
    if (!(kappaLinear > 0.0)) throw ValidationError("kappaLinear must be > 0");
    if (!(beta > 0.0 && beta < 1.0))
      throw ValidationError("beta must lie in (0,1)");
    if (!(V >= 0.0)) throw ValidationError("V must be >= 0");
    if (deltaAlpha && !(*deltaAlpha >= 0.0))
      throw ValidationError("deltaAlpha must be >= 0");
  }
};

/// Quadratic reputational cost, kappa(d) = kappaCoeff * d^2 / 2.
/// kappa(0) = 0, kappa'(0) = 0, kappa'' = kappaCoeff > 0.
inline double reputational_cost(const TrustParams& tp, double d) {
  return 0.5 * tp.kappaCoeff * d * d;
}

/// Full system state: simplex point, current disruption cost, believed
/// sharing fraction, and time. c is non-increasing along any trajectory.
struct FullState {
  SimplexState x;
  double c = 1.0;
  double alphaBelief = 0.7;
  double t = 0.0;
};

inline FullState initial_state(const SimplexState& x, const ModelParams& p) {
  return FullState{x, p.c0, p.alpha, 0.0};
}

/// e(x) = xG + gamma * xP, the threshold-relevant adoption mass.
inline double effective_adoption(const SimplexState& s, double gamma) {
  return s.xG + gamma * s.xP;
}

// Logistic with steepness k, evaluated so exp never overflows.
// sigmoid_k(0) = 1/2 exactly.
inline double sigmoid_k(double z, double k) {
  double a = k * z;
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  double ea = std::exp(a);
  return ea / (1.0 + ea);
}

/// Phi(e) = B * sigmoid(e - eStar). Strictly increasing, 0 < Phi < B,
/// Phi(eStar) = B/2.
inline double systemic_benefit(double e, const ModelParams& p) {
  return p.B * sigmoid_k(e - p.eStar, p.k);
}

/// d Phi / d e.
inline double systemic_benefit_slope(double e, const ModelParams& p) {
  double s = sigmoid_k(e - p.eStar, p.k);
  return p.B * p.k * s * (1.0 - s);
}

/// The cost state is carried, not recomputed: decay is integrated in the
/// dynamics module. This accessor exists so callers never read the raw field
/// with the wrong sign convention.
inline double disruption_cost(double cCurrent) { return cCurrent; }

struct Payoffs {
  double fG = 0.0;
  double fP = 0.0;
  double fR = 0.0;
};

/// Per-strategy payoffs at simplex state s with live cost c and believed
/// sharing fraction alpha. fR is normalised to zero; fP never contains Phi.
/// Coordination adds psiG*xG - psiDev*xP to fG and -psiP*xG to fP.
inline Payoffs payoffs(const SimplexState& s, double c, double alpha,
                       const ModelParams& p, bool coordinationEnabled) {
  double e = effective_adoption(s, p.gamma);
  Payoffs f;
  f.fG = -c + alpha * systemic_benefit(e, p) + p.bG;
  f.fP = -p.cP + p.bP;
  f.fR = 0.0;
  if (coordinationEnabled) {
    f.fG += p.psiG * s.xG - p.psiDev * s.xP;
    f.fP += -p.psiP * s.xG;
  }
  return f;
}

inline double mean_fitness(const SimplexState& s, const Payoffs& f) {
  return s.xG * f.fG + s.xP * f.fP + s.xR * f.fR;
}

/// Derive the parameter set for technology type rho in [0,1]:
///   eStar = (1-rho) * eStar0
///   alpha = rho + (1-rho) * alpha0
///   bG    = bG0 + rho * (bP - bG0)
///   c0    = c0 * (1-rho)
/// Coordination coefficients scale by (1-rho): coordination effects vanish
/// at the point-solution end. The mapping itself drives the system-change
/// orderings cP < c0 and bG < bP to equality at rho = 1 (bG = bP, c0 = 0),
/// so only the rho-invariant requirements are enforced here.
inline ModelParams apply_rho(const ModelParams& base) {
  if (!base.rho)
    throw ValidationError("apply_rho requires rho to be set");
  double r = *base.rho;
  if (!(r >= 0.0 && r <= 1.0))
    throw ValidationError("rho must lie in [0,1]");

  ModelParams p = base;
  p.eStar = (1.0 - r) * base.eStar0;
  p.alpha = r + (1.0 - r) * base.alpha0;
  p.bG = base.bG0 + r * (base.bP - base.bG0);
  p.c0 = base.c0 * (1.0 - r);
  p.psiG = base.psiG * (1.0 - r);
  p.psiP = base.psiP * (1.0 - r);
  p.psiDev = base.psiDev * (1.0 - r);

  if (!(p.bP > p.cP))
    throw ValidationError("derived params violate bP > cP");
  if (!(p.bG <= p.bP))
    throw ValidationError("derived params violate bG <= bP");
  if (!(p.c0 >= 0.0))
    throw ValidationError("derived params violate c0 >= 0");
  if (!(p.alpha > 0.0 && p.alpha <= 1.0))
    throw ValidationError("derived params violate alpha in (0,1]");
  if (!(p.eStar >= 0.0 && p.eStar < 1.0))
    throw ValidationError("derived params violate eStar in [0,1)");
  return p;
}

} // namespace adoptlab
