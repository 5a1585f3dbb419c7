#include <cmath>
#include <numeric>

#include "doctest.h"
#include "prion/closure.hpp"
#include "prion/continuum.hpp"

using namespace prion;

namespace {

ContinuumRates constant_rates(double beta_slope, double tau, double mu, double lambda = 0.0,
                              double gamma = 0.0) {
  ContinuumRates r;
  r.beta = [beta_slope](double x) { return beta_slope * x; };
  r.tau = [tau](double) { return tau; };
  r.mu = [mu](double) { return mu; };
  r.lambda = lambda;
  r.gamma = gamma;
  return r;
}

const ContinuumKernel uniform = ContinuumKernel::self_similar(SelfSimilarMeasure::lebesgue());

double bump(double x, double c, double w) {
  const double z = (x - c) / w;
  return std::abs(z) < 1.0 ? std::exp(-1.0 / (1.0 - z * z)) : 0.0;
}

std::vector<double> restrict_half(const std::vector<double>& fine) {
  std::vector<double> out(fine.size() / 2);
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = 0.5 * (fine[2 * c] + fine[2 * c + 1]);
  return out;
}

}  // namespace

TEST_CASE("empty polymer field leaves only the monomer source") {
  const ContinuumModel m(SizeGrid(0.5, 4.0, 50), constant_rates(1.0, 1.0, 0.2, 1.5, 0.5), uniform,
                         BoundaryModel::zero_influx());
  const auto [dV, dU] = pde_rhs(m, {0.0, 0.8, std::vector<double>(50, 0.0), 0.0});
  CHECK(dV == doctest::Approx(1.5 - 0.5 * 0.8));
  for (double x : dU) CHECK(x == 0.0);
}

TEST_CASE("pure transport telescopes") {
  const SizeGrid g(0.5, 4.0, 70);
  const ContinuumModel m(g, constant_rates(0.0, 1.0, 0.0), uniform, BoundaryModel::zero_influx());
  const auto U = sample_profile(g, [](double x) { return bump(x, 2.0, 1.0); });
  const auto [dV, dU] = pde_rhs(m, {0.0, 2.0, U, 0.0});
  const double h = g.h();
  double number = 0.0, mass = 0.0, growth = 0.0;
  for (int c = 0; c < g.cells; ++c) {
    number += h * dU[c];
    mass += h * g.center(c) * dU[c];
    if (c + 1 < g.cells) growth += 2.0 * U[c];
  }
  CHECK(std::abs(number) < 1e-13);
  CHECK(mass == doctest::Approx(h * growth).epsilon(1e-12));
  CHECK(dV == doctest::Approx(-h * growth).epsilon(1e-12));
}

TEST_CASE("fragmentation of one cell against closed forms") {
  const double x0 = 0.5;
  const SizeGrid g(x0, 4.0, 35);
  const ContinuumModel m(g, constant_rates(1.0, 0.0, 0.0), uniform, BoundaryModel::zero_influx());
  const int d = 27;
  std::vector<double> U(g.cells, 0.0);
  U[d] = 2.0;
  const auto [dV, dU] = pde_rhs(m, {0.0, 1.0, U, 0.0});
  const double h = g.h(), y = g.center(d), rate = y * U[d];
  double number = 0.0, mass = 0.0;
  for (int c = 0; c < g.cells; ++c) {
    number += h * dU[c];
    mass += h * g.center(c) * dU[c];
  }
  // Uniform k(x,y) = 1/y: fragments above x0 number 2 (y - x0)/y, monomers
  // returned are 2 int_0^x0 x/y dx.
  CHECK(number == doctest::Approx(rate * h * (2.0 * (y - x0) / y - 1.0)).epsilon(1e-12));
  CHECK(dV == doctest::Approx(rate * h * x0 * x0 / y).epsilon(1e-12));
  CHECK(mass + dV == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  for (int c = d + 1; c < g.cells; ++c) CHECK(dU[c] == 0.0);
}

TEST_CASE("boundary conditions") {
  const double x0 = 0.25;
  const SizeGrid g(x0, 4.0, 60);
  const auto U = sample_profile(g, [](double x) { return bump(x, 2.0, 1.2); });
  const auto rates = constant_rates(1.0, 1.0, 0.0);

  SUBCASE("no influx") {
    const ContinuumModel m(g, rates, uniform, BoundaryModel::zero_influx());
    CHECK(boundary_influx(m, {0.0, 3.0, U, 0.0}) == 0.0);
    CHECK(m.boundary_value(3.0, U) == 0.0);
  }
  SUBCASE("constant atoms give a monomer independent flux") {
    const ContinuumModel m(g, rates, uniform, BoundaryModel::uniform_with_atoms(x0, 0.3));
    CHECK(m.boundary_flux(1.0, U) == doctest::Approx(m.boundary_flux(5.0, U)).epsilon(1e-15));
    double oracle = 0.0;
    for (int c = 0; c < g.cells; ++c) oracle += 0.3 * g.center(c) * U[c];
    CHECK(m.boundary_flux(1.0, U) == doctest::Approx(2.0 * g.h() * oracle).epsilon(1e-12));
    for (double V : {0.5, 1.0, 4.0})
      CHECK(std::abs(m.boundary_residual(V, U, m.boundary_value(V, U))) <= 1e-8);
    for (double y : {1.2, 2.0, 3.9}) CHECK(std::abs(BoundaryModel::uniform_with_atoms(x0, 0.3).split_defect(x0, y)) < 1e-12);
    CHECK_THROWS_AS(m.boundary_value(0.0, U), DegenerateBoundary);
  }
  SUBCASE("renewal ghost value") {
    const ContinuumModel m(g, constant_rates(1.0, 2.0, 0.0), uniform,
                           BoundaryModel::renewal_mode([](double) { return 0.7; }));
    double M0 = 0.0;
    for (int c = 0; c < g.cells; ++c) M0 += U[c] * (g.hi(c) - g.lo(c));
    CHECK(m.boundary_value(1.0, U) == doctest::Approx(0.7 * M0 / 2.0).epsilon(1e-10));
    auto rr = constant_rates(1.0, 0.0, 0.0);
    const ContinuumModel flat(g, rr, uniform, BoundaryModel::renewal_mode([](double) { return 0.7; }));
    CHECK_THROWS_AS(flat.boundary_value(1.0, U), DegenerateBoundary);
  }
}

TEST_CASE("closed system conserves mass") {
  const SizeGrid g(0.5, 6.0, 220);
  const ContinuumModel m(g, constant_rates(0.5, 1.0, 0.0), uniform, BoundaryModel::zero_influx());
  const ContinuumState s0{0.0, 1.0, sample_profile(g, [](double x) { return bump(x, 1.5, 0.8); }), 0.0};
  const std::vector<double> times{0.5, 1.0};
  const auto traj = integrate_continuum(s0, m, times, 1e-11);
  const double m0 = m.mass(s0.V, s0.U);
  for (const auto& st : traj.snapshots) CHECK(m.mass(st.V, st.U) == doctest::Approx(m0).epsilon(1e-9));
  for (double r : traj.residual) CHECK(std::abs(r) < 1e-9);
  for (const auto& st : traj.snapshots)
    for (double u : st.U) CHECK(u >= 0.0);
}

TEST_CASE("moments follow the closure") {
  const double x0 = 0.5;
  const SizeGrid g(x0, 8.0, 300);
  const ClosureParams p{1.0, 0.5, 1.0, 0.2, 1.0};
  const ContinuumModel m(g, constant_rates(p.beta, p.tau, p.mu, p.lambda, p.gamma), uniform,
                         BoundaryModel::zero_influx());
  const ContinuumState s0{0.0, 1.0, sample_profile(g, [](double x) { return bump(x, 1.5, 1.0); }), 0.0};
  const std::vector<double> times{0.25, 0.5, 1.0};
  const auto traj = integrate_continuum(s0, m, times, 1e-10);
  const double h = g.h();
  auto cell_moments = [&](const ContinuumState& s) {
    MomentTriple y{s.V, 0.0, 0.0};
    for (int c = 0; c < g.cells; ++c) {
      y[1] += h * s.U[c];
      y[2] += h * g.center(c) * s.U[c];
    }
    return y;
  };
  const auto ref = integrate_greer_closure(p, x0, cell_moments(s0), times, 1e-12);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto got = cell_moments(traj.snapshots[k]);
    for (int q = 0; q < 3; ++q) CHECK(got[q] == doctest::Approx(ref[k][q]).epsilon(1e-6));
  }
}

TEST_CASE("end breakage system") {
  const SizeGrid g(0.5, 4.0, 140);
  const auto U = sample_profile(g, [](double x) { return bump(x, 2.5, 0.7); });

  auto still = constant_rates(0.0, 1.0, 0.1);
  still.r = [](double) { return 0.0; };
  const ContinuumModel a(g, still, uniform, BoundaryModel::zero_influx(), LimitSystem::end_breakage);
  const ContinuumModel b(g, still, uniform, BoundaryModel::zero_influx());
  const auto [dVa, dUa] = alt_limit_rhs(a, {0.0, 1.3, U, 0.0});
  const auto [dVb, dUb] = pde_rhs(b, {0.0, 1.3, U, 0.0});
  CHECK(dVa == doctest::Approx(dVb).epsilon(1e-14));
  for (int c = 0; c < g.cells; ++c) CHECK(dUa[c] == doctest::Approx(dUb[c]).epsilon(1e-14));
  CHECK_THROWS(pde_rhs(a, {0.0, 1.3, U, 0.0}));
  CHECK_THROWS(alt_limit_rhs(b, {0.0, 1.3, U, 0.0}));

  ContinuumRates drift;
  drift.beta = [](double) { return 1.0; };
  drift.tau = [](double) { return 0.0; };
  drift.mu = [](double) { return 0.0; };
  drift.r = [](double) { return 0.0; };
  const ContinuumModel m(g, drift, uniform, BoundaryModel::zero_influx(), LimitSystem::end_breakage);
  const ContinuumState s0{0.0, 0.0, U, 0.0};
  const std::vector<double> times{0.5};
  const auto traj = integrate_continuum(s0, m, times, 1e-9);
  const auto& end = traj.snapshots.back();
  const double n0 = std::accumulate(U.begin(), U.end(), 0.0);
  const double n1 = std::accumulate(end.U.begin(), end.U.end(), 0.0);
  const double c0 = m.polymer_mass(U) / (g.h() * n0);
  const double c1 = m.polymer_mass(end.U) / (g.h() * n1);
  CHECK(n1 == doctest::Approx(n0).epsilon(1e-9));
  CHECK(c1 == doctest::Approx(c0 - 0.5).epsilon(1e-6));
  CHECK(m.mass(end.V, end.U) == doctest::Approx(m.mass(0.0, U)).epsilon(1e-9));
}

TEST_CASE("weak formulation defect shrinks under refinement") {
  auto phi = [](double x) { return bump(x, 2.0, 1.0); };
  auto dphi = [](double x) {
    const double z = x - 2.0;
    return std::abs(z) < 1.0 ? bump(x, 2.0, 1.0) * (-2.0 * z / ((1.0 - z * z) * (1.0 - z * z))) : 0.0;
  };
  double previous = INFINITY, first = 0.0;
  for (int cells : {50, 100, 200, 400}) {
    const SizeGrid g(0.5, 4.0, cells);
    const ContinuumModel m(g, constant_rates(1.0, 1.0, 0.2), uniform, BoundaryModel::zero_influx());
    const ContinuumState s{0.0, 1.0, sample_profile(g, [](double x) { return bump(x, 2.2, 1.3); }), 0.0};
    const auto w = weak_pairing_continuum(m, s, phi, dphi, uniform);
    CHECK(w.defect < previous);
    if (cells == 50) first = w.defect;
    previous = w.defect;
  }
  CHECK(previous < first / 4.0);
}

TEST_CASE("stable step") {
  const SizeGrid g(0.5, 4.0, 70);
  auto r = constant_rates(1.0, 1.0, 0.0);
  r.tau = [](double x) { return x; };
  const ContinuumModel m(g, r, uniform, BoundaryModel::zero_influx());
  CHECK(m.cfl_step(2.0) == doctest::Approx(0.5 * g.h() / (2.0 * 4.0)));
  CHECK(std::isinf(m.cfl_step(0.0)));
}

TEST_CASE("first order self convergence") {
  std::vector<std::vector<double>> fields;
  const std::vector<double> times{0.5};
  for (int cells : {100, 200, 400, 800}) {
    const SizeGrid g(0.5, 4.0, cells);
    const ContinuumModel m(g, constant_rates(1.0, 1.0, 0.1), uniform, BoundaryModel::zero_influx());
    const ContinuumState s0{0.0, 1.0, sample_profile(g, [](double x) { return bump(x, 2.0, 1.0); }), 0.0};
    fields.push_back(integrate_continuum(s0, m, times, 1e-10).snapshots.back().U);
  }
  std::vector<double> diff;
  for (std::size_t k = 0; k + 1 < fields.size(); ++k) {
    const auto coarse = restrict_half(fields[k + 1]);
    double acc = 0.0;
    for (std::size_t c = 0; c < coarse.size(); ++c) acc += std::abs(coarse[c] - fields[k][c]);
    diff.push_back(acc * 3.5 / coarse.size());
  }
  for (std::size_t k = 0; k + 1 < diff.size(); ++k) CHECK(std::log2(diff[k] / diff[k + 1]) >= 0.8);
  CHECK(std::log2(diff[diff.size() - 2] / diff.back()) >= 0.9);
}
