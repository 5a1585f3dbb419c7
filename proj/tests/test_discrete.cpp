#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "prion/closure.hpp"
#include "prion/discrete.hpp"

using namespace prion;

namespace {

RateFamily silent() {
  auto r = power_law_rates(0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
  r.beta.scale = r.tau.scale = r.mu.scale = 0.0;
  return r;
}

DiscreteState random_state(int n0, int N, unsigned seed) {
  DiscreteState s(0.0, 1.3, n0, N);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (double& x : s.u) x = U(gen);
  return s;
}

}  // namespace

TEST_CASE("null dynamics is a fixed point") {
  const auto k = uniform_kernel(30);
  const auto d = rhs_truncated(random_state(2, 30, 1), silent(), k);
  CHECK(d.dv == 0.0);
  for (double x : d.du) CHECK(x == 0.0);
}

TEST_CASE("single bin fragmentation by hand") {
  auto r = silent();
  r.beta.scale = 1.0;
  const auto k = uniform_kernel(6);
  DiscreteState s(0.0, 0.0, 2, 6);
  s.at(6) = 1.0;
  const auto d = rhs_truncated(s, r, k);
  for (int i = 2; i <= 5; ++i) CHECK(d.du[i - 2] == doctest::Approx(2.0 / 5.0));
  CHECK(d.du[4] == doctest::Approx(-1.0));
  CHECK(d.dv == doctest::Approx(2.0 / 5.0));
}

TEST_CASE("single bin polymerization by hand") {
  auto r = silent();
  r.tau.scale = 1.0;
  const auto k = uniform_kernel(10);
  DiscreteState s(0.0, 2.0, 3, 10);
  s.at(4) = 0.5;
  s.at(10) = 7.0;
  const auto d = rhs_truncated(s, r, k);
  CHECK(d.du[4 - 3] == doctest::Approx(-1.0));
  CHECK(d.du[5 - 3] == doctest::Approx(1.0));
  CHECK(d.du[10 - 3] == 0.0);
  CHECK(d.dv == doctest::Approx(-1.0));
}

TEST_CASE("mass derivative identity") {
  const auto k = uniform_kernel(60);
  auto r = power_law_rates(1.0, 0.5, 0.5, 1.0, 0.7, 0.3);
  const auto s = random_state(3, 60, 7);
  const DiscreteModel model(r, k, 3, 60);
  const auto d = rhs_truncated(s, r, k);
  double dm = d.dv;
  for (int i = 3; i <= 60; ++i) dm += i * d.du[i - 3];
  CHECK(dm == doctest::Approx(r.lambda - r.gamma * s.v - model.mass_loss_rate(s.u)).epsilon(1e-12));

  for (double eps : {0.5, 0.1, 0.02}) {
    const auto sc = make_scaling(eps, 0.1, r);
    const int N = 80;
    const auto kk = uniform_kernel(N);
    const auto st = random_state(sc.n0, N, 11);
    const DiscreteModel m(r, kk, sc.n0, N, sc);
    const auto dd = rhs_rescaled(st, r, kk, sc);
    double rate = dd.dv;
    for (int i = sc.n0; i <= N; ++i) rate += eps * eps * i * dd.du[i - sc.n0];
    CHECK(rate == doctest::Approx(r.lambda - r.gamma * st.v - m.mass_loss_rate(st.u)).epsilon(1e-11));
    CHECK(rate <= r.lambda + 1e-12);
  }
}

TEST_CASE("rescaling with eps one is the truncated system") {
  const auto r = power_law_rates(1.0, 0.5, 1.0, 1.0, 0.4, 0.2);
  const auto k = uniform_kernel(25);
  const auto s = random_state(2, 25, 3);
  const auto a = rhs_truncated(s, r, k);
  const auto b = rhs_rescaled(s, r, k, make_scaling(1.0, 0.0, r));
  CHECK(a.dv == doctest::Approx(b.dv).epsilon(1e-14));
  for (std::size_t i = 0; i < a.du.size(); ++i)
    CHECK(a.du[i] == doctest::Approx(b.du[i]).epsilon(1e-14));
}

TEST_CASE("boundary breakage monomer return") {
  auto r = silent();
  r.beta.scale = 1.0;
  r.beta.exponent = 1.0;
  r.alpha = 1.0;
  const double eps = 0.05;
  const int N = 60;
  const std::vector<double> rr(N + 1, 1.0);
  const auto k = boundary_weighted_kernel(eps, rr, uniform_kernel(N), N);
  const auto sc = make_scaling(eps, 0.2, r, Regime::boundary_breakage);
  const auto s = random_state(sc.n0, N, 5);
  const auto p = sc.prefactors(r);
  double oracle = 0.0;
  for (int j = sc.n0; j <= N; ++j)
    for (int i = 1; i < sc.n0; ++i) oracle += 2.0 * p.s * p.b * i * k(i, j) * j * s.at(j);
  const auto d = rhs_rescaled(s, r, k, sc);
  CHECK(d.dv == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(DiscreteModel(r, k, sc.n0, N, sc).fragment_return_rate(s.u) ==
        doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("weak form agrees with the derivative") {
  const auto r = power_law_rates(1.0, 0.0, 0.5, 1.0, 0.2, 0.1);
  const auto k = kernel_from_measure(SelfSimilarMeasure::symmetric_atom(0.3), 40);
  const auto sc = make_scaling(0.1, 0.3, r);
  const DiscreteModel m(r, k, sc.n0, 40, sc);
  const auto s = random_state(sc.n0, 40, 9);
  std::vector<double> phi;
  for (int i = sc.n0; i <= 41; ++i) phi.push_back(std::sin(0.2 * i) + 0.01 * i * i);
  const auto d = rhs_rescaled(s, r, k, sc);
  double oracle = 0.0;
  for (std::size_t i = 0; i < d.du.size(); ++i) oracle += phi[i] * d.du[i];
  CHECK(weak_form_rhs(m, s.v, s.u, phi, WeakForm::direct) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(weak_form_rhs(m, s.v, s.u, phi, WeakForm::rearranged) ==
        doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("moments and pairing") {
  DiscreteState s(0.0, 0.0, 2, 10);
  s.at(4) = 3.0;
  const double eps = 0.1;
  CHECK(moments(s, 0.0, eps) == doctest::Approx(0.3));
  CHECK(moments(s, 1.0, eps) == doctest::Approx(0.12));
  CHECK(moments(s, 2.0, eps) == doctest::Approx(0.1 * 0.16 * 3.0));

  const auto r = random_state(2, 50, 4);
  double count = 0.0, mass = 0.0;
  for (int i = 2; i <= 50; ++i) {
    count += r.at(i) * eps;
    mass += r.at(i) * eps * eps * (2 * i + 1) / 2.0;
  }
  CHECK(pair_test_function(r, [](double) { return 1.0; }, eps) == doctest::Approx(count).epsilon(1e-13));
  CHECK(pair_test_function(r, [](double x) { return x; }, eps) == doctest::Approx(mass).epsilon(1e-13));

  auto g = [](double x) { return std::exp(-(x - 2.0) * (x - 2.0) / 0.3); };
  double trap = 0.0;
  for (int i = 2; i <= 50; ++i) {
    const int n = 100000;
    const double a = i * eps, h = eps / n;
    double cell = 0.5 * (g(a) + g(a + eps));
    for (int q = 1; q < n; ++q) cell += g(a + q * h);
    trap += r.at(i) * cell * h;
  }
  CHECK(pair_test_function(r, g, eps) == doctest::Approx(trap).epsilon(1e-9));
}

TEST_CASE("constant coefficient run matches the moment closure") {
  auto r = silent();
  r.lambda = 1.0;
  r.gamma = 0.1;
  r.beta.scale = 0.002;
  r.beta.exponent = 1.0;
  r.beta.shift = 1.0;
  r.alpha = 1.0;
  r.tau.scale = 0.05;
  r.mu.scale = 0.05;
  const int n0 = 3, N = 500;
  const auto k = uniform_kernel(N);
  DiscreteState s(0.0, 1.0, n0, N);
  for (int i = 20; i <= 60; ++i) s.at(i) = 0.01;
  const std::vector<double> times{1.0, 5.0, 10.0};
  const auto traj = integrate(s, r, k, std::nullopt, times, 1e-10);
  MomentTriple y0{1.0, 0.0, 0.0};
  for (int i = n0; i <= N; ++i) {
    y0[1] += s.at(i);
    y0[2] += i * s.at(i);
  }
  const auto ref = integrate_masel_closure({1.0, 0.1, 0.05, 0.05, 0.002}, n0, y0, times, 1e-12);
  for (std::size_t t = 0; t < times.size(); ++t) {
    const auto& st = traj.snapshots[t];
    double P = 0.0, M = 0.0;
    for (int i = n0; i <= N; ++i) {
      P += st.at(i);
      M += i * st.at(i);
    }
    CHECK(st.v == doctest::Approx(ref[t][0]).epsilon(1e-6));
    CHECK(P == doctest::Approx(ref[t][1]).epsilon(1e-6));
    CHECK(M == doctest::Approx(ref[t][2]).epsilon(1e-6));
  }
  for (const auto& res : mass_balance_residual(traj)) CHECK(std::abs(res.relative) <= 1e-6);
}

TEST_CASE("truncation refinement") {
  auto r = silent();
  r.beta.scale = 1.0;
  r.beta.exponent = 1.0;
  r.alpha = 1.0;
  const auto k = uniform_kernel(400);
  DiscreteState s(0.0, 1.0, 2, 400);
  for (int i = 50; i <= 90; ++i) s.at(i) = 1.0;
  const std::vector<double> times{0.5, 1.0};
  const std::vector<int> Ns{100, 200, 400};
  for (const auto& row : truncation_refinement(s, r, k, Ns, times, 1e-9)) {
    CHECK(row.u_diff == 0.0);
    CHECK(row.v_diff == 0.0);
  }
  const std::vector<int> bad{200, 100};
  CHECK_THROWS_AS(truncation_refinement(s, r, k, bad, times, 1e-9), std::invalid_argument);
}
