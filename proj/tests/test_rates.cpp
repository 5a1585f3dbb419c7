#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "prion/rates.hpp"

using namespace prion;

TEST_CASE("power law families") {
  const auto r = power_law_rates(1.0, 0.0, 0.5, 2.0, 1.0, 0.1);
  CHECK(r.beta(7) == doctest::Approx(7.0));
  CHECK(r.tau(7) == doctest::Approx(1.0));
  CHECK(r.mu(9) == doctest::Approx(3.0));
  CHECK(std::abs(r.beta(8) - r.beta(7)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(power_law_rates(1.0, 1.5, 0.0, 1.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(power_law_rates(-1.0, 0.5, 0.0, 1.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(power_law_rates(1.0, 0.5, 0.0, 0.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("shifted law reproduces beta (j - 1)") {
  auto r = power_law_rates(1.0, 0.0, 0.0, 1.0, 0.0, 0.0);
  r.beta.scale = 0.3;
  r.beta.shift = 1.0;
  for (int j = 1; j < 20; ++j) CHECK(r.beta(j) == doctest::Approx(0.3 * (j - 1)));
  r.beta.table = std::vector<double>{0.0, 0.0, 5.0, 6.0};
  CHECK(r.beta(3) == doctest::Approx(6.0));
}

TEST_CASE("hypothesis verification") {
  CHECK(verify_hypotheses(power_law_rates(1.0, 0.5, 1.0, 2.0, 0.0, 0.0), 500).pass);

  auto wobbly = power_law_rates(1.0, 0.0, 0.0, 2.0, 0.0, 0.0);
  std::vector<double> table(401);
  for (int i = 0; i <= 400; ++i) table[i] = i * (1.0 + (i % 2 == 0 ? 1.0 : -1.0));
  wobbly.beta.table = table;
  const auto rep = verify_hypotheses(wobbly, 400);
  CHECK_FALSE(rep.pass);
  CHECK(rep.beta.lipschitz_K > 100.0);

  const auto sqrt_tau = power_law_rates(1.0, 0.5, 0.0, 1.0, 0.0, 0.0);
  CHECK(verify_hypotheses(sqrt_tau, 2000).tau.growth_K == doctest::Approx(1.0));
  CHECK(verify_hypotheses(sqrt_tau, 2000).tau.lipschitz_K <= 1.0);
}

TEST_CASE("prefactors by regime") {
  const auto r = power_law_rates(2.0, 0.5, 1.0, 1.0, 0.0, 0.0);
  const auto s = make_scaling(0.1, 0.0, r);
  const auto p = s.prefactors(r);
  CHECK(p.s == doctest::Approx(0.01));
  CHECK(p.b == doctest::Approx(0.01));
  CHECK(p.d == doctest::Approx(0.1));
  CHECK(p.nu == doctest::Approx(std::pow(0.1, -0.5)));
  const auto pb = make_scaling(0.1, 0.0, r, Regime::boundary_breakage).prefactors(r);
  CHECK(pb.b == doctest::Approx(0.1));
  CHECK(regime_from_string(to_string(Regime::boundary_breakage)) == Regime::boundary_breakage);
  CHECK_THROWS(regime_from_string("sideways"));
  CHECK_THROWS_AS(make_scaling(0.0, 0.0, r), std::invalid_argument);
}

TEST_CASE("n0 rule and sigma") {
  CHECK(default_n0(0.01, 0.0) == 2);
  CHECK(default_n0(0.01, 0.5) == 50);
  CHECK(default_n0(0.25, 0.25) == 2);
  for (int k = 2; k <= 10; ++k) {
    const double eps = std::ldexp(1.0, -k);
    CHECK(std::abs(eps * default_n0(eps, 0.3) - 0.3) <= eps);
  }
  const auto r = power_law_rates(2.0, 1.0, 0.5, 1.0, 0.0, 0.0);
  const double sigma = default_sigma(r);
  CHECK(1.0 + sigma > std::max({1.0, r.alpha, 1.0 + r.m, 1.0 + r.theta}));
}

TEST_CASE("rescaled coefficients") {
  const auto r = power_law_rates(1.5, 0.0, 0.5, 1.0, 0.0, 0.0);
  const double eps = 0.125;
  for (int i = 1; i < 30; ++i)
    CHECK(rescaled_coefficient(r, Coefficient::beta, eps, i * eps) ==
          doctest::Approx(std::pow(i * eps, 1.5)));
  CHECK(rescaled_coefficient(r, Coefficient::tau, eps, 1.7) == doctest::Approx(1.0));
  CHECK(rescaled_coefficient(r, Coefficient::beta, eps, 0.2, 4) == 0.0);

  // Uniform convergence on [r, R] and on [0, R] for the degradation law.
  double previous = INFINITY, previous0 = INFINITY;
  for (int k = 2; k <= 9; ++k) {
    const double e = std::ldexp(1.0, -k);
    double sup = 0.0, sup0 = 0.0;
    for (int n = 0; n <= 4000; ++n) {
      const double x = 3.0 * n / 4000.0;
      const double err = std::abs(rescaled_coefficient(r, Coefficient::mu, e, x) - std::sqrt(x));
      sup0 = std::max(sup0, err);
      if (x >= 0.5) sup = std::max(sup, err);
    }
    CHECK(sup <= previous);
    CHECK(sup0 <= previous0);
    previous = sup;
    previous0 = sup0;
  }
}

TEST_CASE("embedding weight") {
  CHECK(embedding_weight(0.5, 1.3) == doctest::Approx(1.0));
  CHECK(embedding_weight(0.25, 0.75) == 0.75);
  double worst = 0.0;
  for (int n = 0; n <= 10000; ++n) {
    const double x = 10.0 * n / 10000.0;
    const double e = embedding_weight(0.1, x);
    CHECK(e <= x);
    worst = std::max(worst, x - e);
  }
  CHECK(worst < 0.1);
}
