#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "adoptlab/dynamics.hpp"
#include "adoptlab/equilibria.hpp"

using namespace adoptlab;

namespace {

ModelParams reference() { return ModelParams{}; }

// Closed-form inversion of the tipping-point equation for the logistic
// benefit curve: the effective adoption at the root is
//   E = eStar + logit(gap / (alpha B)) / k,
// so xG* = (E - gamma) / (1 - gamma). Independent of the bisection path.
double tipping_closed_form(const ModelParams& p, double c) {
  double gap = (c - p.cP) + (p.bP - p.bG);
  double u = gap / (p.alpha * p.B);
  double E = p.eStar + std::log(u / (1.0 - u)) / p.k;
  return (E - p.gamma) / (1.0 - p.gamma);
}

const EquilibriumReport& find(const std::vector<EquilibriumReport>& v,
                              EquilibriumKind k) {
  for (const auto& r : v)
    if (r.kind == k) return r;
  throw std::runtime_error("equilibrium kind missing");
}

} // namespace

TEST_CASE("corner stability at the reference set") {
  ModelParams p = reference();

  // the bistability inequality holds with margin: alpha*B = 1.4 above
  // (c0 - cP) + (bP - bG) = 1.2
  REQUIRE(p.alpha * p.B > (p.c0 - p.cP) + (p.bP - p.bG));

  auto reports = corner_stability(p, p.c0);
  REQUIRE(reports.size() == 3);

  const auto& r = find(reports, EquilibriumKind::CornerR);
  CHECK(r.stability == Stability::Saddle);
  CHECK(r.eigenvalues[1] > 0.0); // invadable by partial adoption

  const auto& pc = find(reports, EquilibriumKind::CornerP);
  CHECK(pc.stability == Stability::Stable);

  const auto& g = find(reports, EquilibriumKind::CornerG);
  CHECK(g.stability == Stability::Stable);

  for (const auto& rep : reports)
    for (const auto& check : rep.conditionChecks) CHECK(check.second);
}

TEST_CASE("corner stability edge directions") {
  SECTION("bP < cP destabilises the P corner along P-R") {
    // bypasses validate() on purpose: this is the broken-ordering direction
    ModelParams p = reference();
    p.bP = 0.1;
    p.cP = 0.2;
    auto reports = corner_stability(p, p.c0);
    const auto& pc = find(reports, EquilibriumKind::CornerP);
    CHECK(pc.eigenvalues[1] > 0.0);
    CHECK(pc.stability != Stability::Stable);
  }

  SECTION("alpha = 0 with bG < c0 leaves the G corner unstable") {
    ModelParams p = reference();
    p.alpha = 0.0;
    auto reports = corner_stability(p, p.c0);
    const auto& g = find(reports, EquilibriumKind::CornerG);
    CHECK(g.eigenvalues[1] > 0.0); // fG < 0 at the corner, R invades
    CHECK(g.stability != Stability::Stable);
  }
}

TEST_CASE("eigenvalue signs agree with perturbation simulations") {
  // 50 random ordering-compliant parameter sets; perturb each corner 1e-3
  // toward each other strategy and watch the perturbed mass grow or decay.
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  int tested = 0;
  while (tested < 50) {
    ModelParams p;
    p.c0 = 0.5 + 1.5 * u(rng);
    p.cP = 0.05 + 0.7 * p.c0 * u(rng);
    p.bP = p.cP + 0.05 + 1.0 * u(rng);
    p.bG = p.bP * u(rng) * 0.9;
    p.B = 0.5 + 2.5 * u(rng);
    p.alpha = 0.05 + 0.9 * u(rng);
    p.gamma = 0.9 * u(rng);
    p.eStar = 0.1 + 0.8 * u(rng);
    REQUIRE_NOTHROW(p.validate());

    auto reports = corner_stability(p, p.c0);
    bool degenerate = false;
    for (const auto& r : reports)
      if (std::abs(r.eigenvalues[0]) < 1e-3 ||
          std::abs(r.eigenvalues[1]) < 1e-3)
        degenerate = true;
    if (degenerate) continue; // too close to a bifurcation to call by sim
    ++tested;

    IntegrationConfig cfg;
    cfg.tMax = 1.0;
    cfg.cornerTolerance = 1e-14;
    IntegrateOptions opt;
    opt.freezeCost = true;

    const double eps = 1e-3;
    auto grow = [&](SimplexState from) {
      Trajectory tr = integrate(initial_state(from, p), p, cfg, opt);
      return tr.finalState.x;
    };

    // order matches corner_stability: R reports (toward G, toward P)
    {
      const auto& r = find(reports, EquilibriumKind::CornerR);
      SimplexState towardG{eps, 0.0, 1.0 - eps};
      CHECK((grow(towardG).xG > eps) == (r.eigenvalues[0] > 0.0));
      SimplexState towardP{0.0, eps, 1.0 - eps};
      CHECK((grow(towardP).xP > eps) == (r.eigenvalues[1] > 0.0));
    }
    {
      const auto& r = find(reports, EquilibriumKind::CornerP);
      SimplexState towardG{eps, 1.0 - eps, 0.0};
      CHECK((grow(towardG).xG > eps) == (r.eigenvalues[0] > 0.0));
      SimplexState towardR{0.0, 1.0 - eps, eps};
      CHECK((grow(towardR).xR > eps) == (r.eigenvalues[1] > 0.0));
    }
    {
      const auto& r = find(reports, EquilibriumKind::CornerG);
      SimplexState towardP{1.0 - eps, eps, 0.0};
      CHECK((grow(towardP).xP > eps) == (r.eigenvalues[0] > 0.0));
      SimplexState towardR{1.0 - eps, 0.0, eps};
      CHECK((grow(towardR).xR > eps) == (r.eigenvalues[1] > 0.0));
    }
  }
}

TEST_CASE("tipping point") {
  ModelParams p = reference();

  SECTION("bisection matches the closed-form inversion") {
    double x = tipping_point(p, p.c0);
    CHECK(std::abs(x - tipping_closed_form(p, p.c0)) < 1e-9);
    CHECK(x == Catch::Approx(0.53).margin(0.01));

    // residual at the reported root
    double e = p.gamma + (1.0 - p.gamma) * x;
    double gap = (p.c0 - p.cP) + (p.bP - p.bG);
    CHECK(std::abs(p.alpha * systemic_benefit(e, p) - gap) < 1e-10);
  }

  SECTION("monotone in the live cost") {
    CHECK(tipping_point(p, 0.61) < tipping_point(p, 1.0));
  }

  SECTION("no root when genuine adoption already dominates the edge") {
    ModelParams q = p;
    q.gamma = 0.65;
    q.alpha = 0.9;
    try {
      tipping_point(q, q.c0);
      FAIL("expected NoRootError");
    } catch (const NoRootError& e) {
      CHECK(e.side == NoRootError::Side::GDominates);
    }
  }

  SECTION("no root when the trap dominates the edge") {
    ModelParams q = p;
    q.alpha = 0.3;
    try {
      tipping_point(q, q.c0);
      FAIL("expected NoRootError");
    } catch (const NoRootError& e) {
      CHECK(e.side == NoRootError::Side::TrapDominates);
    }
  }
}

TEST_CASE("edge equilibrium report") {
  ModelParams p = reference();
  auto reports = all_equilibria(p, p.c0);
  REQUIRE(reports.size() == 4);
  const auto& edge = find(reports, EquilibriumKind::EdgeGPInterior);
  CHECK(edge.stability == Stability::Saddle);
  CHECK(edge.eigenvalues[0] > 0.0); // repelling along the edge
  CHECK(edge.eigenvalues[1] < 0.0); // rejection cannot invade
  CHECK(edge.location.xG == Catch::Approx(0.531).margin(1e-2));
}

TEST_CASE("comparative statics of the tipping point") {
  ModelParams p = reference();
  ComparativeStatics cs = comparative_statics(p, p.c0);
  CHECK(cs.dAlpha < 0.0);
  CHECK(cs.dB < 0.0);
  CHECK(cs.dCostGap > 0.0);
  CHECK(cs.dBenGap > 0.0);
  CHECK(cs.patternHolds);

  // analytic values at the reference set, from the closed form
  CHECK(cs.dAlpha == Catch::Approx(-0.5714).margin(1e-3));
  CHECK(cs.dCostGap == Catch::Approx(0.3333).margin(1e-3));
}

TEST_CASE("gamma dependence of the tipping point") {
  ModelParams p = reference();
  GammaSweepResult sweep = gamma_sweep(p, p.c0, 0.0, 0.5, 101);

  SECTION("each point matches the closed form") {
    for (const auto& pt : sweep.points) {
      ModelParams q = p;
      q.gamma = pt.gamma;
      CHECK(std::abs(pt.xGStar - tipping_closed_form(q, p.c0)) < 1e-8);
    }
  }

  SECTION("strictly decreasing, no turning point") {
    for (size_t i = 1; i < sweep.points.size(); ++i)
      CHECK(sweep.points[i].xGStar < sweep.points[i - 1].xGStar);
    CHECK_FALSE(sweep.turningPoint.has_value());
  }
}

TEST_CASE("critical technology type") {
  SECTION("closed form at the documented parameters") {
    ModelParams p = reference(); // bP - bG0 = 0.4, c0 = 1.0, cP = 0.2
    RhoCritical rc = rho_critical(p);
    CHECK(rc.closedForm == Catch::Approx(1.0 - 0.2 / 1.4).margin(1e-12));
  }

  SECTION("cP -> 0 pushes rho_c -> 1") {
    ModelParams p = reference();
    p.cP = 1e-6;
    CHECK(rho_critical(p).closedForm == Catch::Approx(1.0).margin(1e-5));
  }

  SECTION("monotone in cP and c0") {
    ModelParams p = reference();
    auto rc = [&](double cP, double c0) {
      ModelParams q = p;
      q.cP = cP;
      q.c0 = c0;
      return rho_critical(q).closedForm;
    };
    CHECK(rc(0.25, 1.0) < rc(0.2, 1.0));
    CHECK(rc(0.2, 1.2) > rc(0.2, 1.0));
  }

  SECTION("sweep detection agrees when the benefit curve is step-like") {
    // gamma = 0 and a steep sigmoid keep the Phi(gamma) leak negligible up
    // to the bifurcation, so the smoothed and step conditions coincide.
    ModelParams p = reference();
    p.gamma = 0.0;
    p.k = 150.0;
    RhoCritical rc = rho_critical(p, 0.005);
    REQUIRE(rc.swept.has_value());
    CHECK(rc.agrees);
    CHECK(std::abs(*rc.swept - rc.closedForm) <= 0.005 + 1e-12);
  }

  SECTION("with the default sigmoid the smoothed bifurcation comes early") {
    ModelParams p = reference();
    p.gamma = 0.0;
    RhoCritical rc = rho_critical(p, 0.005);
    REQUIRE(rc.swept.has_value());
    CHECK(*rc.swept < rc.closedForm);
  }
}
