#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "prion/kernels.hpp"
#include "prion/ode.hpp"
#include "prion/rates.hpp"

namespace prion {

/// Monomers v and polymer counts u_{n0..N} at time t.
struct DiscreteState {
  double t = 0.0;
  double v = 0.0;
  int n0 = 2;
  int N = 2;
  std::vector<double> u;  // u[k] = u_{n0+k}

  DiscreteState() = default;
  DiscreteState(double t, double v, int n0, int N);

  double at(int i) const { return (i < n0 || i > N) ? 0.0 : u[i - n0]; }
  double& at(int i) { return u.at(i - n0); }
  /// Same data on a different truncation; entries above the new N are dropped.
  DiscreteState resized(int new_N) const;
};

struct DiscreteDerivative {
  double dv = 0.0;
  std::vector<double> du;
};

/// Precomputed coefficient tables for the truncated (optionally rescaled)
/// discrete system on sizes n0..N.
class DiscreteModel {
 public:
  DiscreteModel(const RateFamily& rates, const FragmentationKernel& kernel, int n0, int N,
                std::optional<ScalingConfig> scaling = std::nullopt);

  int n0() const { return n0_; }
  int N() const { return N_; }
  const RateFamily& rates() const { return rates_; }
  const Prefactors& prefactors() const { return pre_; }
  /// eps of the size embedding (1 for the unscaled system).
  double eps() const { return eps_; }
  /// Weight s in the conserved mass v + s sum i u_i.
  double mass_weight() const { return pre_.s; }

  double beta(int i) const { return beta_[i - n0_]; }
  double tau(int i) const { return tau_[i - n0_]; }
  double mu(int i) const { return mu_[i - n0_]; }
  double k(int i, int j) const { return kernel_(i, j); }

  /// Derivative of (v, u_{n0..N}); du must have N - n0 + 1 entries.
  void rhs(double v, std::span<const double> u, double& dv, std::span<double> du) const;

  /// v + s sum i u_i.
  double mass(double v, std::span<const double> u) const;
  /// 2 s b sum_j (sum_{i<n0} i k_{i,j}) beta_j u_j, monomers released by
  /// fragments below n0.
  double fragment_return_rate(std::span<const double> u) const;
  /// s d sum i mu_i u_i, the polymer degradation term of the mass balance.
  double mass_loss_rate(std::span<const double> u) const;

 private:
  RateFamily rates_;
  const FragmentationKernel& kernel_;
  int n0_, N_;
  double eps_ = 1.0;
  Prefactors pre_;
  std::vector<double> beta_, tau_, mu_;
  std::vector<double> monomer_return_;  // sum_{i<n0} i k_{i,j} for j = n0..N
  mutable std::vector<double> work_;
};

/// Truncated system with no outflux at N.
DiscreteDerivative rhs_truncated(const DiscreteState& state, const RateFamily& rates,
                                 const FragmentationKernel& kernel);
/// eps-rescaled truncated system.
DiscreteDerivative rhs_rescaled(const DiscreteState& state, const RateFamily& rates,
                                const FragmentationKernel& kernel, const ScalingConfig& scaling);

/// Cumulative terms of the mass balance up to each output time.
struct MassLedger {
  std::vector<double> source;        // lambda t
  std::vector<double> monomer_loss;  // int gamma v
  std::vector<double> polymer_loss;  // int s d sum i mu_i u_i
};

/// Diagnostics gathered on every accepted integrator step.
struct StepDiagnostics {
  std::vector<double> t;
  std::vector<double> moment_sum;  // M_0 + M_{1+sigma}
  std::vector<double> dvdt;
  std::vector<double> fragment_return;
  std::vector<double> moment_alpha;
  std::vector<double> moment_theta;
  double max_mass_growth_excess = 0.0;  // max of d/dt mass - lambda
  double min_entry = 0.0;
};

struct DiscreteTrajectory {
  std::vector<DiscreteState> snapshots;
  MassLedger ledger;
  StepDiagnostics steps;
  double eps = 1.0;
  double sigma = 1.0;
  double mass_weight = 1.0;
  double initial_mass = 0.0;
  double lambda = 0.0;
  OdeStats stats;

  /// M_r at every snapshot.
  std::vector<double> moment_series(double r) const;
};

struct InitialBudget {
  double rho0 = 0.0;  // v + eps^2 sum i u_i
  double M0 = 0.0;    // eps sum u_i
  double M1s = 0.0;   // eps^(2+sigma) sum i^(1+sigma) u_i
};

InitialBudget initial_budget(const DiscreteState& state, double eps, double sigma);

/// Integrates the truncated system (rescaled when `scaling` is given) and
/// records snapshots at `output_times`.
DiscreteTrajectory integrate(const DiscreteState& initial, const RateFamily& rates,
                             const FragmentationKernel& kernel,
                             const std::optional<ScalingConfig>& scaling,
                             std::span<const double> output_times, double tol);

/// M_r = eps sum (i eps)^r u_i.
double moments(const DiscreteState& state, double r, double eps);

/// sum u_i int_{i eps}^{(i+1) eps} phi, i.e. the pairing of the stepwise
/// embedding with phi.
double pair_test_function(const DiscreteState& state, const std::function<double(double)>& phi,
                          double eps);

struct ResidualPoint {
  double t;
  double absolute;
  double relative;
};

std::vector<ResidualPoint> mass_balance_residual(const DiscreteTrajectory& traj);

struct RefinementRow {
  int N_coarse;
  int N_fine;
  double v_diff;  // sup over output times of |v_N - v_N'|
  double u_diff;  // sup over output times of sum_{i<=N} |u_i^N - u_i^N'|
};

std::vector<RefinementRow> truncation_refinement(const DiscreteState& initial,
                                                 const RateFamily& rates,
                                                 const FragmentationKernel& kernel,
                                                 std::span<const int> N_list,
                                                 std::span<const double> output_times,
                                                 double tol,
                                                 const std::optional<ScalingConfig>& scaling = {});

enum class WeakForm { direct, rearranged };

/// Right side of the discrete weak formulation for test values phi_i,
/// i = n0..N+1 (phi[k] = phi_{n0+k}).
double weak_form_rhs(const DiscreteModel& model, double v, std::span<const double> u,
                     std::span<const double> phi, WeakForm form);

}  // namespace prion
