#include "prion/closure.hpp"

#include "prion/ode.hpp"

namespace prion {

MomentTriple masel_closure_rhs(const ClosureParams& p, int n0, const MomentTriple& y) {
  const auto [v, P, M] = y;
  const double small = p.beta * n0 * (n0 - 1);  // monomers returned per polymer per unit time
  return {p.lambda - p.gamma * v - p.tau * v * P + small * P,
          -p.mu * P + p.beta * M - p.beta * (2.0 * n0 - 1.0) * P,
          p.tau * v * P - p.mu * M - small * P};
}

MomentTriple greer_closure_rhs(const ClosureParams& p, double x0, const MomentTriple& y) {
  const auto [V, P, M] = y;
  const double small = p.beta * x0 * x0;
  return {p.lambda - p.gamma * V - p.tau * V * P + small * P,
          -p.mu * P + p.beta * M - 2.0 * p.beta * x0 * P,
          p.tau * V * P - p.mu * M - small * P};
}

namespace {

template <class Rhs>
std::vector<MomentTriple> run(Rhs&& f, const MomentTriple& y0, std::span<const double> times,
                              double tol) {
  OdeOptions opts;
  opts.tol = tol;
  DormandPrince solver(opts);
  auto raw = solver.integrate(
      [&](double, std::span<const double> y, std::span<double> dy) {
        const auto d = f(MomentTriple{y[0], y[1], y[2]});
        dy[0] = d[0];
        dy[1] = d[1];
        dy[2] = d[2];
      },
      {y0[0], y0[1], y0[2]}, 0.0, times);
  std::vector<MomentTriple> out;
  for (const auto& r : raw) out.push_back({r[0], r[1], r[2]});
  return out;
}

}  // namespace

std::vector<MomentTriple> integrate_masel_closure(const ClosureParams& p, int n0,
                                                  const MomentTriple& y0,
                                                  std::span<const double> times, double tol) {
  return run([&](const MomentTriple& y) { return masel_closure_rhs(p, n0, y); }, y0, times, tol);
}

std::vector<MomentTriple> integrate_greer_closure(const ClosureParams& p, double x0,
                                                  const MomentTriple& y0,
                                                  std::span<const double> times, double tol) {
  return run([&](const MomentTriple& y) { return greer_closure_rhs(p, x0, y); }, y0, times, tol);
}

}  // namespace prion
