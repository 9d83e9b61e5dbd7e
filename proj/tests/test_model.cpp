#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "adoptlab/model.hpp"

using namespace adoptlab;

namespace {

ModelParams reference() { return ModelParams{}; }

SimplexState random_simplex(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double a = u(rng), b = u(rng);
  if (a > b) std::swap(a, b);
  return {a, b - a, 1.0 - b};
}

} // namespace

TEST_CASE("effective adoption") {
  CHECK(effective_adoption({1.0, 0.0, 0.0}, 0.3) == 1.0);
  CHECK(effective_adoption({0.0, 1.0, 0.0}, 0.3) == 0.3);
  CHECK(effective_adoption({0.4, 0.5, 0.1}, 0.5) == Catch::Approx(0.65).margin(1e-15));
}

TEST_CASE("systemic benefit curve") {
  ModelParams p = reference();

  SECTION("half of B exactly at the threshold") {
    CHECK(systemic_benefit(p.eStar, p) == p.B / 2.0);
    ModelParams q = p;
    q.B = 3.7;
    CHECK(std::abs(systemic_benefit(q.eStar, q) - q.B / 2.0) < 1e-12);
  }

  SECTION("logistic value at e = 0.72, k = 25") {
    // sigma evaluated directly: z = k (e - eStar) = 3
    double expected = 2.0 / (1.0 + std::exp(-3.0));
    CHECK(systemic_benefit(0.72, p) == Catch::Approx(expected).margin(1e-14));
    CHECK(systemic_benefit(0.72, p) == Catch::Approx(1.9051).margin(1e-4));
  }

  SECTION("strictly increasing and bounded on [0,1]") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
      double e1 = u(rng), e2 = u(rng);
      if (e1 > e2) std::swap(e1, e2);
      if (e2 - e1 < 1e-12) continue;
      CHECK(systemic_benefit(e2, p) > systemic_benefit(e1, p));
      CHECK(systemic_benefit(e1, p) > 0.0);
      CHECK(systemic_benefit(e1, p) < p.B);
    }
  }
}

TEST_CASE("payoffs") {
  ModelParams p = reference();

  SECTION("fP carries no systemic term") {
    Payoffs f = payoffs(corner_p(), p.c0, p.alpha, p, false);
    CHECK(f.fP == p.bP - p.cP);
    CHECK(f.fR == 0.0);

    // perturbing B must leave fP unchanged bit-for-bit
    ModelParams q = p;
    q.B = 123.456;
    std::mt19937 rng(11);
    for (int i = 0; i < 50; ++i) {
      SimplexState s = random_simplex(rng);
      CHECK(payoffs(s, 0.4, p.alpha, p, false).fP ==
            payoffs(s, 0.4, q.alpha, q, false).fP);
    }
  }

  SECTION("fR is zero everywhere") {
    std::mt19937 rng(13);
    for (int i = 0; i < 20; ++i)
      CHECK(payoffs(random_simplex(rng), 0.7, 0.5, p, true).fR == 0.0);
  }

  SECTION("coordination terms at the P corner") {
    ModelParams q = p;
    q.psiDev = 0.2;
    double c = 0.8;
    Payoffs f = payoffs(corner_p(), c, q.alpha, q, true);
    double expected =
        -c + q.alpha * systemic_benefit(q.gamma, q) + q.bG - 0.2;
    CHECK(f.fG == Catch::Approx(expected).margin(1e-15));
    CHECK(f.fP == q.bP - q.cP); // psiP * xG vanishes at xG = 0
  }
}

TEST_CASE("disruption cost accessor") {
  // the decay itself lives in the dynamics; the state carries the value
  CHECK(disruption_cost(1.0) == 1.0);
  CHECK(disruption_cost(0.37) == 0.37);
}

TEST_CASE("mean fitness") {
  ModelParams p = reference();
  CHECK(mean_fitness({1.0, 0.0, 0.0}, {2.5, 1.0, 0.0}) == 2.5);
  CHECK(mean_fitness({0.0, 0.0, 1.0}, {2.5, 1.0, 0.0}) == 0.0);
  CHECK(mean_fitness({0.5, 0.5, 0.0}, {1.0, 3.0, 0.0}) == 2.0);

  SECTION("selection identity sum_i x_i (f_i - fbar) = 0") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> uc(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
      SimplexState s = random_simplex(rng);
      Payoffs f = payoffs(s, uc(rng), uc(rng), p, true);
      double fbar = mean_fitness(s, f);
      double total = s.xG * (f.fG - fbar) + s.xP * (f.fP - fbar) +
                     s.xR * (f.fR - fbar);
      CHECK(std::abs(total) <= 1e-12);
    }
  }
}

TEST_CASE("parameter validation") {
  SECTION("reference set is valid") { CHECK_NOTHROW(reference().validate()); }

  SECTION("cost ordering") {
    ModelParams p = reference();
    p.cP = 1.5; // above c0
    CHECK_THROWS_MATCHES(p.validate(), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("0 < cP < c0")));
  }

  SECTION("benefit ordering") {
    ModelParams p = reference();
    p.bG = 0.9;
    CHECK_THROWS_AS(p.validate(), ValidationError);
  }

  SECTION("partial adoption must pay") {
    ModelParams p = reference();
    p.bP = 0.1;
    CHECK_THROWS_AS(p.validate(), ValidationError);
  }

  SECTION("trust params") {
    TrustParams tp;
    CHECK_NOTHROW(tp.validate());
    tp.kappaCoeff = 0.0;
    CHECK_THROWS_AS(tp.validate(), ValidationError);
  }
}

TEST_CASE("rho parametrisation") {
  ModelParams base = reference();

  SECTION("rho = 0 leaves the baselines in place") {
    base.rho = 0.0;
    ModelParams p = apply_rho(base);
    CHECK(p.eStar == base.eStar0);
    CHECK(p.alpha == base.alpha0);
    CHECK(p.bG == base.bG0);
    CHECK(p.c0 == base.c0);
    CHECK(p.psiDev == base.psiDev);
  }

  SECTION("rho = 1 is the point-solution endpoint") {
    base.rho = 1.0;
    base.psiG = 0.4;
    base.psiDev = 0.3;
    ModelParams p = apply_rho(base);
    CHECK(p.eStar == 0.0);
    CHECK(p.alpha == 1.0);
    CHECK(p.bG == p.bP);
    CHECK(p.c0 == 0.0);
    CHECK(p.psiG == 0.0);
    CHECK(p.psiDev == 0.0);

    // With zero cost, full appropriation and bG = bP, genuine adoption
    // strictly dominates everywhere: fG - fP = Phi(e) + cP > cP > 0.
    std::mt19937 rng(23);
    for (int i = 0; i < 100; ++i) {
      SimplexState s = random_simplex(rng);
      Payoffs f = payoffs(s, p.c0, p.alpha, p, true);
      CHECK(f.fG - f.fP >= p.cP);
    }
  }

  SECTION("rho = 0.5 halves the threshold") {
    base.rho = 0.5;
    CHECK(apply_rho(base).eStar == Catch::Approx(0.3).margin(1e-15));
  }

  SECTION("rejects a broken derived ordering, naming it") {
    ModelParams bad = reference();
    bad.bP = 0.15; // below cP, bypassing validate() on purpose
    bad.rho = 0.5;
    CHECK_THROWS_MATCHES(apply_rho(bad), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("bP > cP")));
  }

  SECTION("requires rho") {
    CHECK_THROWS_AS(apply_rho(reference()), ValidationError);
  }
}
