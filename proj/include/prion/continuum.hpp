#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "prion/kernels.hpp"
#include "prion/ode.hpp"
#include "prion/rates.hpp"

namespace prion {

/// M uniform cells [x0 + c h, x0 + (c+1) h) covering [x0, xmax).
struct SizeGrid {
  double x0 = 0.0;
  double xmax = 1.0;
  int cells = 1;

  SizeGrid() = default;
  SizeGrid(double x0, double xmax, int cells);

  double h() const { return (xmax - x0) / cells; }
  double lo(int c) const { return x0 + c * h(); }
  double hi(int c) const { return x0 + (c + 1) * h(); }
  double center(int c) const { return x0 + (c + 0.5) * h(); }
};

struct ContinuumRates {
  std::function<double(double)> beta;
  std::function<double(double)> tau;
  std::function<double(double)> mu;
  double lambda = 0.0;
  double gamma = 0.0;
  /// Fragmentation frequency of the end-breakage limit system; there beta
  /// acts as a size drift.
  std::function<double(double)> r;
};

/// Continuum coefficients x -> scale * x^kappa obtained as eps -> 0 from
/// power-law discrete coefficients.
ContinuumRates limit_rates(const RateFamily& family);

/// Fragment-size distribution k(., y) as a probability measure on [0, y].
class ContinuumKernel {
 public:
  /// k(x,y) dx = k0(x/y) dx / y.
  static ContinuumKernel self_similar(SelfSimilarMeasure k0);
  /// Stepwise k^eps built from a discrete kernel.
  static ContinuumKernel from_repartition(std::shared_ptr<const RepartitionTables> tables);

  /// k([a,b), y)
  double mass(double a, double b, double y) const;
  /// int_{[a,b)} x k(dx, y)
  double moment(double a, double b, double y) const;
  /// int_{[a,b)} f(x) k(dx, y)
  double integrate(const std::function<double(double)>& f, double a, double b, double y) const;

 private:
  std::variant<SelfSimilarMeasure, std::shared_ptr<const RepartitionTables>> source_;
  explicit ContinuumKernel(decltype(source_) s) : source_(std::move(s)) {}
};

enum class BoundaryMode { general, zero_influx, renewal };

/// Boundary part of the kernel near x0: Dirac weights psi_plus at x0+
/// (fragments that stay polymers) and psi_minus at x0- (returned to the
/// monomer pool), with the diffuse remainder l(x,y).
struct BoundaryModel {
  BoundaryMode mode = BoundaryMode::zero_influx;
  std::function<double(double)> psi_plus;
  std::function<double(double)> psi_minus;
  std::function<double(double, double)> diffuse;  // l(x,y), used by split_defect
  std::function<double(double)> renewal;          // m(y)

  static BoundaryModel zero_influx();
  /// psi+ = psi- = w and l(x,y) = (1 - 4 x0 w / y) / y on [0,y]; satisfies
  /// the split mass identity exactly for y >= 4 x0 w.
  static BoundaryModel uniform_with_atoms(double x0, double w);
  static BoundaryModel renewal_mode(std::function<double(double)> m);

  /// 2 int_0^x y l(y,x) dy + 2 x0 psi-(x) + 2 x0 psi+(x) - x.
  double split_defect(double x0, double x) const;
};

class DegenerateBoundary : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ContinuumState {
  double t = 0.0;
  double V = 0.0;
  std::vector<double> U;  // cell averages
  double boundary_flux_in = 0.0;
};

enum class LimitSystem { standard, end_breakage };

/// Finite-volume discretization of the monomer/polymer system on a size
/// grid: first-order upwind transport, fragmentation with the source cell
/// lumped at its center, fragments deposited so that both their number and
/// their mass are preserved.
class ContinuumModel {
 public:
  ContinuumModel(SizeGrid grid, ContinuumRates rates, ContinuumKernel kernel,
                 BoundaryModel boundary, LimitSystem system = LimitSystem::standard);

  const SizeGrid& grid() const { return grid_; }
  const ContinuumRates& rates() const { return rates_; }
  const BoundaryModel& boundary() const { return boundary_; }
  LimitSystem system() const { return system_; }
  /// Evaluate the end-breakage monomer equation with the signs exactly as
  /// printed in its original statement instead of the mass-conserving ones.
  void set_signs_as_printed(bool v) { as_printed_ = v; }

  void rhs(double V, std::span<const double> U, double& dV, std::span<double> dU) const;

  /// Boundary number flux entering the first cell.
  double boundary_flux(double V, std::span<const double> U) const;
  /// Boundary value U(t, x0) implied by the boundary condition.
  double boundary_value(double V, std::span<const double> U) const;
  /// x0 (V tau(x0) U(x0) - 2 int psi+ beta U); zero when the ghost value
  /// satisfies the general boundary condition.
  double boundary_residual(double V, std::span<const double> U, double ghost) const;

  double mass(double V, std::span<const double> U) const;
  double polymer_mass(std::span<const double> U) const;
  double mass_loss_rate(std::span<const double> U) const;
  /// Largest stable step 0.5 h / (max transport speed).
  double cfl_step(double V) const;

  /// Fragment number deposited into each cell per unit fragmentation of a
  /// polymer in cell d (entries 0..d).
  std::span<const double> deposits(int d) const { return deposits_[d]; }

 private:
  SizeGrid grid_;
  ContinuumRates rates_;
  ContinuumKernel kernel_;
  BoundaryModel boundary_;
  LimitSystem system_;
  bool as_printed_ = false;
  std::vector<double> x_, beta_, tau_, mu_, r_, tau_face_, beta_face_;
  std::vector<double> psi_plus_, psi_minus_, renewal_;
  std::vector<std::vector<double>> deposits_;
  std::vector<double> monomer_return_;  // int_0^x0 x k(dx, y_d)
  mutable std::vector<double> work_;
};

std::vector<double> sample_profile(const SizeGrid& grid, const std::function<double(double)>& f);

/// Derivative of (V, U) for the standard system.
std::pair<double, std::vector<double>> pde_rhs(const ContinuumModel& model,
                                               const ContinuumState& state);
/// Derivative for the end-breakage limit system; the model must be built
/// with LimitSystem::end_breakage.
std::pair<double, std::vector<double>> alt_limit_rhs(const ContinuumModel& model,
                                                     const ContinuumState& state);
double boundary_influx(const ContinuumModel& model, const ContinuumState& state);

struct ContinuumTrajectory {
  std::vector<ContinuumState> snapshots;
  std::vector<double> source, monomer_loss, polymer_loss;  // cumulative ledger
  std::vector<double> residual;  // mass-balance residual at each snapshot
  std::vector<double> leak;      // fraction of polymer mass in the top 5% of cells
  double initial_mass = 0.0;
  OdeStats stats;
};

ContinuumTrajectory integrate_continuum(const ContinuumState& initial, const ContinuumModel& model,
                                        std::span<const double> output_times, double tol);

struct WeakPairing {
  double pairing = 0.0;      // int U phi
  double scheme_rate = 0.0;  // d/dt int U phi from the discretization
  double weak_rhs = 0.0;     // right side of the weak formulation
  double defect = 0.0;       // |scheme_rate - weak_rhs|
};

WeakPairing weak_pairing_continuum(const ContinuumModel& model, const ContinuumState& state,
                                   const std::function<double(double)>& phi,
                                   const std::function<double(double)>& dphi,
                                   const ContinuumKernel& kernel);

/// sum_c U_c int_cell phi
double pair_cells(const SizeGrid& grid, std::span<const double> U,
                  const std::function<double(double)>& phi);

}  // namespace prion
