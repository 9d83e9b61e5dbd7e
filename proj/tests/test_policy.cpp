#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "adoptlab/policy.hpp"

using namespace adoptlab;

TEST_CASE("threshold subsidy schedule") {
  ModelParams p;

  SECTION("full gap when the systemic term is negligible") {
    CHECK(subsidy(0.0, p, p.c0) == Catch::Approx(1.2).margin(1e-5));
  }

  SECTION("half the systemic benefit is already in at the threshold") {
    // Phi(eStar) = B/2 = 1, so s* = 1.2 - 0.7
    CHECK(subsidy(p.eStar, p, p.c0) == Catch::Approx(0.5).margin(1e-12));
  }

  SECTION("self-terminating once the gap is covered") {
    CHECK(subsidy(1.0, p, 0.2) == 0.0);
  }

  SECTION("decreasing in effective adoption at fixed cost") {
    double prev = subsidy(0.0, p, p.c0);
    for (double e = 0.1; e <= 1.0; e += 0.1) {
      double s = subsidy(e, p, p.c0);
      CHECK(s <= prev);
      prev = s;
    }
  }
}

TEST_CASE("seeding fraction") {
  ModelParams p;
  IntegrationConfig cfg;

  SECTION("tipping point plus margin, verified by simulation") {
    SeedingResult r = seeding_fraction(p, p.c0, cfg);
    CHECK(r.fraction == Catch::Approx(tipping_point(p, p.c0) + 0.02).margin(1e-12));
    CHECK(r.verified);
  }

  SECTION("nothing to seed when genuine adoption dominates the edge") {
    ModelParams q = p;
    q.gamma = 0.65;
    q.alpha = 0.9;
    SeedingResult r = seeding_fraction(q, q.c0, cfg);
    CHECK(r.fraction == 0.0);
    CHECK(r.verified);
  }

  SECTION("seeding below the tipping point falls back to the trap") {
    double below = tipping_point(p, p.c0) - 0.02;
    IntegrationConfig quiet = cfg;
    quiet.recordSamples = false;
    IntegrateOptions frozen;
    frozen.freezeCost = true;
    Trajectory tr = integrate(initial_state({below, 1.0 - below, 0.0}, p), p,
                              quiet, frozen);
    CHECK(tr.convergedCorner == Corner::P);
  }

  SECTION("trap-dominant parameters propagate NoRoot") {
    ModelParams q = p;
    q.alpha = 0.3;
    CHECK_THROWS_AS(seeding_fraction(q, q.c0, cfg), NoRootError);
  }
}

TEST_CASE("critical excursion duration") {
  ModelParams p; // delta = 0.5
  IntegrationConfig cfg;
  // below threshold (e = 0.594) and under the tipping point, on the G-P edge
  FullState start = initial_state({0.42, 0.58, 0.0}, p);
  // hold level below the c0 break-even adoption, so the clamp cannot tip
  // the system without help from the ratchet
  const double hold = 0.66;

  CriticalExcursion ce = critical_excursion(p, start, cfg, hold);
  REQUIRE(ce.tStar > 0.0);

  SECTION("releasing early relapses, releasing late locks in") {
    auto run_with_hold = [&](double T) {
      IntegrateOptions opt;
      opt.interventions.push_back({InterventionKind::Hold, 0.0, T, hold});
      IntegrationConfig quiet = cfg;
      quiet.recordSamples = false;
      return integrate(start, p, quiet, opt);
    };
    Trajectory early = run_with_hold(0.9 * ce.tStar);
    CHECK(early.classification == TrajectoryType::Type2);
    Trajectory late = run_with_hold(1.1 * ce.tStar);
    CHECK(late.classification == TrajectoryType::Type3);
  }

  SECTION("release state sits on the decayed-cost tipping point") {
    CHECK(ce.costAtRelease ==
          Catch::Approx(p.c0 * std::exp(-p.delta * ce.tStar)).epsilon(1e-6));
    CHECK(std::abs(ce.xGAtRelease - ce.tippingAtRelease) < 0.05);
  }

  SECTION("faster embedding shortens the critical duration") {
    ModelParams q = p;
    q.delta = 1.0;
    CriticalExcursion fast = critical_excursion(q, start, cfg, hold);
    CHECK(fast.tStar < ce.tStar);
  }

  SECTION("without a ratchet no hold duration works") {
    ModelParams q = p;
    q.delta = 1e-9; // effectively no decay
    CHECK_THROWS_AS(critical_excursion(q, start, cfg, hold, 1e-3, 50.0),
                    NoCrossingError);
  }
}

TEST_CASE("welfare accounting") {
  ModelParams p;

  SECTION("loss of the trap at the reference set") {
    WelfareReport w = welfare(p, initial_state(corner_p(), p));
    CHECK(w.deltaW == Catch::Approx(1.2).margin(1e-12));
    CHECK(w.totalLoss == Catch::Approx(1.2 * p.n).margin(1e-12));
    CHECK(w.rawAdoptionRate == 1.0);
    CHECK(w.effectiveAdoption == Catch::Approx(p.gamma).margin(1e-15));
  }

  SECTION("the identity holds under perturbed parameters") {
    ModelParams q = p;
    q.alpha = 0.61;
    q.B = 1.7;
    WelfareReport w = welfare(q, initial_state(corner_p(), q));
    CHECK(std::abs(w.deltaW - (q.alpha * q.B + q.bG - q.bP + q.cP)) <= 1e-12);
  }

  SECTION("slope in B is alpha") {
    double h = 1e-6;
    ModelParams up = p, dn = p;
    up.B += h;
    dn.B -= h;
    FullState s = initial_state(corner_p(), p);
    double fd = (welfare(up, s).deltaW - welfare(dn, s).deltaW) / (2.0 * h);
    CHECK(fd == Catch::Approx(p.alpha).epsilon(1e-6));
  }

  SECTION("negative loss flips the social-optimality premise flag") {
    ModelParams q = p;
    q.B = 1e-12; // degenerate systemic value, bypassing validate()
    WelfareReport w = welfare(q, initial_state(corner_p(), q));
    CHECK(w.deltaW < 0.0);
    CHECK_FALSE(w.premiseHolds);
  }
}

TEST_CASE("scenario engine") {
  ModelParams p;
  p.psiDev = 0.3;
  TrustParams tp;
  tp.alphaHat = 0.7;
  tp.kappaCoeff = 4.0;
  IntegrationConfig cfg;
  cfg.recordSamples = false;

  FullState start = initial_state({0.1, 0.8, 0.1}, p);
  start.alphaBelief = 0.05; // distrustful population

  auto scenario_with = [&](std::vector<Intervention> iv) {
    PolicyScenario sc;
    sc.params = p;
    sc.tp = tp;
    sc.initial = start;
    sc.schedule = std::move(iv);
    return run_scenario(sc, cfg);
  };

  SECTION("baseline: no interventions, straight into the trap") {
    ScenarioResult r = scenario_with({});
    CHECK(r.trajectory.convergedCorner == Corner::P);
    CHECK(r.welfare.deltaW > 0.0);
  }

  SECTION("correct sequencing escapes, seed-first does not") {
    // trust architecture, then cultural preparation, then the seed with
    // embedding support concentrated in the window
    std::vector<Intervention> ordered = {
        {InterventionKind::TrustFix, 0.0, 100.0, tp.alphaHat},
        {InterventionKind::CulturePrep, 2.0, 98.0, 1.0},
        {InterventionKind::Seed, 5.0, 0.0, 0.6},
        {InterventionKind::EmbedSupport, 5.0, 20.0, 1.0},
    };
    ScenarioResult good = scenario_with(ordered);
    CHECK(good.trajectory.convergedCorner == Corner::G);

    // identical budget, seed applied before the ground is prepared
    std::vector<Intervention> seedFirst = {
        {InterventionKind::Seed, 0.0, 0.0, 0.6},
        {InterventionKind::EmbedSupport, 0.0, 20.0, 1.0},
        {InterventionKind::TrustFix, 5.0, 100.0, tp.alphaHat},
        {InterventionKind::CulturePrep, 7.0, 98.0, 1.0},
    };
    ScenarioResult bad = scenario_with(seedFirst);
    CHECK(bad.trajectory.convergedCorner == Corner::P);
  }

  SECTION("overlapping seeds are rejected") {
    std::vector<Intervention> conflict = {
        {InterventionKind::Seed, 1.0, 0.0, 0.2},
        {InterventionKind::Seed, 1.0, 0.0, 0.3},
    };
    CHECK_THROWS_AS(scenario_with(conflict), ValidationError);
  }

  SECTION("subsidy window keeps fG competitive throughout") {
    // fixed magnitude set to the full gap at window start, the worst case
    ModelParams base; // no coordination terms in the subsidy calibration
    double mag = subsidy(0.0, base, base.c0);
    PolicyScenario sc;
    sc.params = base;
    sc.tp = tp;
    sc.initial = initial_state({0.1, 0.8, 0.1}, base);
    sc.trustEnabled = false;
    sc.schedule = {{InterventionKind::Subsidy, 0.0, 30.0, mag}};
    IntegrationConfig rec = cfg;
    rec.recordSamples = true;
    rec.tMax = 30.0;
    ScenarioResult r = run_scenario(sc, rec);
    for (const FullState& s : r.trajectory.samples) {
      Payoffs f = payoffs(s.x, s.c, s.alphaBelief, base, true);
      CHECK(f.fG + mag - f.fP >= -1e-9);
    }

    // and it actually moves the population compared to no subsidy
    PolicyScenario none = sc;
    none.schedule.clear();
    ScenarioResult r0 = run_scenario(none, rec);
    CHECK(r.trajectory.finalState.x.xG > r0.trajectory.finalState.x.xG);
  }
}

TEST_CASE("repeated pilots ratchet the barrier down") {
  // fast belief erosion: every pilot fails, yet each one permanently
  // lowers the cost and hence the tipping point
  ModelParams p;
  p.delta = 0.1;
  p.lambda = 0.5;
  TrustParams tp;
  tp.alphaHat = 0.7;
  tp.kappaCoeff = 4.0;
  IntegrationConfig cfg; // record samples to read c at pilot boundaries

  FullState start = initial_state({0.05, 0.9, 0.05}, p);
  start.alphaBelief = tp.alphaHat;
  RepeatedPilotSpec spec;
  spec.count = 6;
  ScenarioResult r = run_repeated_pilots(p, tp, start, spec, cfg);
  REQUIRE(r.trajectory.convergedCorner == Corner::P); // all pilots fail

  auto c_at = [&](double t) {
    double c = p.c0;
    for (const FullState& s : r.trajectory.samples)
      if (s.t <= t + 1e-9) c = s.c;
    return c;
  };

  double prevC = p.c0 + 1.0;
  double prevTip = 0.0;
  for (int i = 0; i < spec.count; ++i) {
    double tEnd = i * (spec.duration + spec.gap) + spec.duration;
    double c = c_at(tEnd);
    CHECK(c < prevC);
    double tip = tipping_point(p, c);
    if (i > 0) CHECK(tip <= prevTip);
    prevC = c;
    prevTip = tip;
  }
}

TEST_CASE("value-adoption curve") {
  ModelParams p;
  p.gamma = 0.0; // keep the trap intact up to the analytic bifurcation
  p.k = 150.0;
  p.n = 100;
  IntegrationConfig cfg;
  cfg.tMax = 600.0; // escape is slow just past the bifurcation

  std::vector<double> grid = {0.0, 0.2, 0.4, 0.6, 0.8, 0.84, 0.9, 1.0};
  ValueAdoptionCurve curve = value_adoption_curve(p, grid, cfg);
  double rhoC = rho_critical(p).closedForm;

  SECTION("trapped below the critical type with full raw adoption") {
    for (const auto& row : curve.rows) {
      if (row.rho < rhoC - 0.02) {
        CHECK(row.trapped);
        CHECK(row.rawAdoption > 0.999);
        CHECK(std::abs(row.eFinal - p.gamma) < 1e-3);
      }
    }
  }

  SECTION("adoption jumps across the bifurcation") {
    const ValueAdoptionRow* below = nullptr;
    const ValueAdoptionRow* above = nullptr;
    for (const auto& row : curve.rows) {
      if (row.rho == 0.84) below = &row;
      if (row.rho == 0.9) above = &row;
    }
    REQUIRE(below);
    REQUIRE(above);
    CHECK(below->trapped);
    CHECK_FALSE(above->trapped);
    CHECK(above->eFinal > 0.9);
  }

  SECTION("foregone value decreases along the spectrum and anti-correlates "
          "with adoption depth") {
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& row : curve.rows) {
      if (row.rho >= rhoC) break;
      CHECK(row.totalLoss <= prev + 1e-9);
      prev = row.totalLoss;
    }
    CHECK(curve.valueAdoptionCorrelation < 0.0);
  }
}
