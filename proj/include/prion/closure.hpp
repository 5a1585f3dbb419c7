#pragma once

#include <array>
#include <span>
#include <vector>

namespace prion {

/// Constant-coefficient parameters under which the moments (monomers,
/// polymer number, polymer mass) obey a closed 3-ODE system.
struct ClosureParams {
  double lambda = 0.0;
  double gamma = 0.0;
  double tau = 0.0;   // constant polymerization rate
  double mu = 0.0;    // constant polymer degradation
  double beta = 0.0;  // fragmentation slope: beta_j = beta (j-1), or beta(x) = beta x
};

/// (v, P = sum u_i, M = sum i u_i)
using MomentTriple = std::array<double, 3>;

/// Discrete model with uniform kernel and minimal size n0.
MomentTriple masel_closure_rhs(const ClosureParams& p, int n0, const MomentTriple& y);
/// Continuum model with uniform kernel k(x,y) = 1/y, minimal size x0 and no
/// boundary influx.
MomentTriple greer_closure_rhs(const ClosureParams& p, double x0, const MomentTriple& y);

std::vector<MomentTriple> integrate_masel_closure(const ClosureParams& p, int n0,
                                                  const MomentTriple& y0,
                                                  std::span<const double> times, double tol);
std::vector<MomentTriple> integrate_greer_closure(const ClosureParams& p, double x0,
                                                  const MomentTriple& y0,
                                                  std::span<const double> times, double tol);

}  // namespace prion
