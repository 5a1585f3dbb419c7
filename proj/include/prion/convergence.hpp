#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prion/continuum.hpp"
#include "prion/discrete.hpp"
#include "prion/kernels.hpp"
#include "prion/rates.hpp"

namespace prion {

struct TestFunction {
  std::string name;
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  double lo = 0.0;  // support
  double hi = 0.0;
};

/// Smooth bump exp(1 - 1/(1 - s^2)), s = (x - center)/radius.
TestFunction mollified_bump(double center, double radius);
/// x times a smooth cutoff equal to 1 on [lo + ramp, hi - ramp].
TestFunction mass_cutoff(double lo, double hi, double ramp);

/// Eight bumps spread over (x0 + margin, xmax - margin) with jittered centers
/// and widths, followed by the mass test function.
std::vector<TestFunction> default_test_set(double x0, double xmax, double margin,
                                           std::uint64_t seed);

/// 2^-kmin, ..., 2^-kmax.
std::vector<double> dyadic_eps_list(int kmin = 2, int kmax = 7);

struct SweepConfig {
  std::string name = "sweep";
  RateFamily rates;
  SelfSimilarMeasure k0 = SelfSimilarMeasure::lebesgue();
  Regime regime = Regime::standard;
  /// Weight r_j of interior breakage in the boundary-breakage kernel.
  double boundary_r = 1.0;
  /// Moment exponent; default_sigma(rates) when unset.
  std::optional<double> sigma;
  double x0 = 0.5;
  double xmax = 4.0;
  std::vector<double> eps_list = dyadic_eps_list();
  double V0 = 1.0;
  std::function<double(double)> U0;
  std::vector<double> times;
  int reference_cells = 960;
  double tol = 1e-7;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct SweepRun {
  double eps = 0.0;
  int n0 = 0;
  int N = 0;
  std::optional<DiscreteTrajectory> trajectory;
  std::string error;  // non-empty when the run failed
  double seconds = 0.0;
};

struct EpsilonSweep {
  SweepConfig config;
  SizeGrid grid;
  std::vector<SweepRun> runs;
  std::optional<ContinuumTrajectory> reference;
  std::string reference_error;
  double reference_seconds = 0.0;
  std::vector<TestFunction> tests;
};

/// Discrete initial data: cell averages of U0 over [i eps, (i+1) eps).
DiscreteState sample_discrete(const std::function<double(double)>& U0, double V0, double eps,
                              int n0, int N);

/// Runs the rescaled discrete system for every eps and the continuum
/// reference. A failing run is recorded and the sweep continues.
EpsilonSweep run_sweep(const SweepConfig& config);

/// D(eps, phi) for every eps; NaN where the run failed.
std::vector<double> weak_star_distance(const EpsilonSweep& sweep, const TestFunction& test);
/// sup_t |v^eps - V| for every eps.
std::vector<double> monomer_distance(const EpsilonSweep& sweep);

/// Nonincreasing along the sweep; the first step may grow by `slack` (relative).
bool nonincreasing(std::span<const double> series, double slack = 0.05);

struct OrderFit {
  double order = 0.0;
  double r2 = 0.0;
  int used = 0;
  std::vector<std::string> notes;
};

/// Least-squares slope of log D against log eps. Nonpositive or non-finite
/// points are dropped with a note; fewer than 3 usable points throws.
OrderFit fit_order(std::span<const double> eps, std::span<const double> D);

struct PairingSeries {
  std::string family;
  double exponent = 0.0;
  std::vector<double> distance;  // per eps
};

/// sup_t |int z^eps u^eps phi - int z U phi| for z in {beta, tau, mu}, plus the
/// transport pairing sum tau^eps u^eps (phi(x+eps) - phi(x))/eps against
/// int tau U phi'. Throws when a family exponent reaches 1 + sigma.
std::vector<PairingSeries> pairing_limit_check(const EpsilonSweep& sweep,
                                               std::span<const Coefficient> families,
                                               const TestFunction& test);

struct AuditRow {
  double eps = 0.0;
  double moment_peak = 0.0;  // max_t M0 + M_{1+sigma}
  double moment_envelope = 0.0;
  double moment_margin = 0.0;
  double dvdt_peak = 0.0;  // max_t |dv/dt|
  double dvdt_bound = 0.0;
  double dvdt_margin = 0.0;
  double return_peak = 0.0;  // max_t of the small-fragment monomer release
  double return_margin = 0.0;  // against 2 eps n0 K M_alpha
  bool ok = true;
};

struct BoundAudit {
  std::vector<AuditRow> rows;
  bool pass() const;
};

/// Checks every trajectory against the moment envelope and the monomer
/// derivative bound valid in the standard regime.
BoundAudit bound_audit(const EpsilonSweep& sweep, double T);

struct ConvergenceReport {
  std::vector<double> eps;
  std::vector<std::string> test_names;
  std::vector<std::vector<double>> D;  // D[test][eps]
  std::vector<double> monomer;
  std::vector<OrderFit> fits;  // per test, then monomer
  std::vector<bool> monotone;  // per test, then monomer
  std::vector<double> final_ratio;  // D(last)/D(first) per test
  BoundAudit audit;
  std::vector<std::string> failures;
};

ConvergenceReport summarize(const EpsilonSweep& sweep);

}  // namespace prion
