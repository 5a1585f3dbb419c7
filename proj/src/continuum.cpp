#include "prion/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "prion/numerics.hpp"

namespace prion {

SizeGrid::SizeGrid(double x0_, double xmax_, int cells_) : x0(x0_), xmax(xmax_), cells(cells_) {
  if (!(x0 >= 0.0)) throw std::invalid_argument("size grid: x0 must be >= 0");
  if (!(xmax > x0)) throw std::invalid_argument("size grid: xmax must exceed x0");
  if (cells < 1) throw std::invalid_argument("size grid: need at least one cell");
}

ContinuumRates limit_rates(const RateFamily& family) {
  ContinuumRates r;
  r.beta = [law = family.beta](double x) { return law.limit(x); };
  r.tau = [law = family.tau](double x) { return law.limit(x); };
  r.mu = [law = family.mu](double x) { return law.limit(x); };
  r.lambda = family.lambda;
  r.gamma = family.gamma;
  return r;
}

// ---------------------------------------------------------------------------

ContinuumKernel ContinuumKernel::self_similar(SelfSimilarMeasure k0) {
  return ContinuumKernel(std::move(k0));
}

ContinuumKernel ContinuumKernel::from_repartition(
    std::shared_ptr<const RepartitionTables> tables) {
  if (!tables) throw std::invalid_argument("continuum kernel: null repartition tables");
  return ContinuumKernel(std::move(tables));
}

namespace {

struct Clamp {
  double a, b;
};

Clamp clamp_to(const RepartitionTables& t, double a, double b) {
  const double top = t.xmax();
  return {std::clamp(a, 0.0, top), std::clamp(b, 0.0, top)};
}

}  // namespace

double ContinuumKernel::mass(double a, double b, double y) const {
  if (!(b > a) || !(y > 0.0)) return 0.0;
  if (const auto* k0 = std::get_if<SelfSimilarMeasure>(&source_)) return k0->mass(a / y, b / y);
  const auto& t = *std::get<std::shared_ptr<const RepartitionTables>>(source_);
  const auto [lo, hi] = clamp_to(t, a, b);
  return t.F(hi, y) - t.F(lo, y);
}

double ContinuumKernel::moment(double a, double b, double y) const {
  if (!(b > a) || !(y > 0.0)) return 0.0;
  if (const auto* k0 = std::get_if<SelfSimilarMeasure>(&source_))
    return y * k0->moment(a / y, b / y);
  const auto& t = *std::get<std::shared_ptr<const RepartitionTables>>(source_);
  const auto [lo, hi] = clamp_to(t, a, b);
  return t.small_fragment_moment(hi, y) - t.small_fragment_moment(lo, y);
}

double ContinuumKernel::integrate(const std::function<double(double)>& f, double a, double b,
                                  double y) const {
  if (!(b > a) || !(y > 0.0)) return 0.0;
  if (const auto* k0 = std::get_if<SelfSimilarMeasure>(&source_))
    return k0->integrate([&](double s) { return f(s * y); }, a / y, b / y);
  const auto& t = *std::get<std::shared_ptr<const RepartitionTables>>(source_);
  const auto [lo, hi] = clamp_to(t, a, std::min(b, y + t.eps()));
  const double e = t.eps();
  double acc = 0.0;
  for (auto i = cell_index(lo, e); static_cast<double>(i) * e < hi; ++i) {
    const double l = std::max(lo, static_cast<double>(i) * e);
    const double r = std::min(hi, static_cast<double>(i + 1) * e);
    if (r > l) acc += t.density(0.5 * (l + r), y) * gauss5(f, l, r);
  }
  return acc;
}

// ---------------------------------------------------------------------------

BoundaryModel BoundaryModel::zero_influx() { return {}; }

BoundaryModel BoundaryModel::uniform_with_atoms(double x0, double w) {
  BoundaryModel b;
  b.mode = BoundaryMode::general;
  b.psi_plus = [w](double) { return w; };
  b.psi_minus = [w](double) { return w; };
  b.diffuse = [x0, w](double x, double y) {
    return (x >= 0.0 && x <= y) ? (1.0 - 4.0 * x0 * w / y) / y : 0.0;
  };
  return b;
}

BoundaryModel BoundaryModel::renewal_mode(std::function<double(double)> m) {
  BoundaryModel b;
  b.mode = BoundaryMode::renewal;
  b.renewal = std::move(m);
  return b;
}

double BoundaryModel::split_defect(double x0, double x) const {
  const double diffuse_part =
      diffuse ? 2.0 * gauss5_composite([&](double y) { return y * diffuse(y, x); }, 0.0, x, 16)
              : 0.0;
  const double plus = psi_plus ? psi_plus(x) : 0.0;
  const double minus = psi_minus ? psi_minus(x) : 0.0;
  return diffuse_part + 2.0 * x0 * minus + 2.0 * x0 * plus - x;
}

// ---------------------------------------------------------------------------

ContinuumModel::ContinuumModel(SizeGrid grid, ContinuumRates rates, ContinuumKernel kernel,
                               BoundaryModel boundary, LimitSystem system)
    : grid_(grid),
      rates_(std::move(rates)),
      kernel_(std::move(kernel)),
      boundary_(std::move(boundary)),
      system_(system) {
  if (!rates_.beta || !rates_.tau || !rates_.mu)
    throw std::invalid_argument("continuum model: beta, tau and mu are required");
  if (system_ == LimitSystem::end_breakage && !rates_.r)
    throw std::invalid_argument("continuum model: end-breakage system needs r");
  if (boundary_.mode == BoundaryMode::renewal && !boundary_.renewal)
    throw std::invalid_argument("continuum model: renewal boundary needs m");

  const int M = grid_.cells;
  const double h = grid_.h();
  x_.resize(M);
  beta_.resize(M);
  tau_.resize(M);
  mu_.resize(M);
  r_.assign(M, 0.0);
  psi_plus_.assign(M, 0.0);
  psi_minus_.assign(M, 0.0);
  renewal_.assign(M, 0.0);
  tau_face_.resize(M);
  beta_face_.resize(M);
  for (int c = 0; c < M; ++c) {
    const double x = grid_.center(c);
    x_[c] = x;
    beta_[c] = rates_.beta(x);
    tau_[c] = rates_.tau(x);
    mu_[c] = rates_.mu(x);
    if (rates_.r) r_[c] = rates_.r(x);
    if (boundary_.psi_plus) psi_plus_[c] = boundary_.psi_plus(x);
    if (boundary_.psi_minus) psi_minus_[c] = boundary_.psi_minus(x);
    if (boundary_.renewal) renewal_[c] = boundary_.renewal(x);
    tau_face_[c] = rates_.tau(grid_.hi(c));
    beta_face_[c] = rates_.beta(grid_.hi(c));
  }

  // Fragments of a polymer at y_d falling in cell c carry number W and mass
  // Z; they are split between c and a neighbor so that both are kept.
  deposits_.assign(M, {});
  monomer_return_.assign(M, 0.0);
  for (int d = 0; d < M; ++d) {
    const double y = x_[d];
    auto& dep = deposits_[d];
    dep.assign(d + 1, 0.0);
    monomer_return_[d] = kernel_.moment(0.0, grid_.x0, y);
    for (int c = 0; c <= d; ++c) {
      const double W = kernel_.mass(grid_.lo(c), grid_.hi(c), y);
      if (W <= 0.0) continue;
      const double mean = kernel_.moment(grid_.lo(c), grid_.hi(c), y) / W;
      const double shift = (mean - x_[c]) / h;
      if (shift > 0.0 && c < d) {
        dep[c] += W * (1.0 - shift);
        dep[c + 1] += W * shift;
      } else if (shift < 0.0 && c > 0) {
        dep[c] += W * (1.0 + shift);
        dep[c - 1] -= W * shift;
      } else if (shift != 0.0) {
        dep[c] += W * mean / x_[c];  // no neighbor: keep the mass
      } else {
        dep[c] += W;
      }
    }
  }
  work_.resize(M);
}

std::vector<double> sample_profile(const SizeGrid& grid, const std::function<double(double)>& f) {
  std::vector<double> U(grid.cells);
  const double h = grid.h();
  for (int c = 0; c < grid.cells; ++c) U[c] = gauss5(f, grid.lo(c), grid.hi(c)) / h;
  return U;
}

double pair_cells(const SizeGrid& grid, std::span<const double> U,
                  const std::function<double(double)>& phi) {
  double acc = 0.0;
  for (int c = 0; c < grid.cells; ++c)
    if (U[c] != 0.0) acc += U[c] * gauss5(phi, grid.lo(c), grid.hi(c));
  return acc;
}

double ContinuumModel::boundary_flux(double V, std::span<const double> U) const {
  const double h = grid_.h();
  double acc = 0.0;
  switch (boundary_.mode) {
    case BoundaryMode::zero_influx:
      return 0.0;
    case BoundaryMode::general:
      for (int c = 0; c < grid_.cells; ++c) acc += psi_plus_[c] * beta_[c] * U[c];
      return 2.0 * h * acc;
    case BoundaryMode::renewal:
      for (int c = 0; c < grid_.cells; ++c) acc += renewal_[c] * U[c];
      return V * h * acc;
  }
  return 0.0;
}

double ContinuumModel::boundary_value(double V, std::span<const double> U) const {
  if (boundary_.mode == BoundaryMode::zero_influx) return 0.0;
  const double tau0 = rates_.tau(grid_.x0);
  if (boundary_.mode == BoundaryMode::renewal) {
    double acc = 0.0;
    for (int c = 0; c < grid_.cells; ++c) acc += renewal_[c] * U[c];
    acc *= grid_.h();
    if (tau0 > 0.0) return acc / tau0;
    if (acc == 0.0) return 0.0;
    throw DegenerateBoundary("renewal boundary: tau(x0) = 0 with nonzero renewal flux");
  }
  const double flux = boundary_flux(V, U);
  const double speed = V * tau0;
  if (speed > 0.0) return flux / speed;
  if (flux == 0.0) return 0.0;
  throw DegenerateBoundary("boundary condition: V tau(x0) = 0 with nonzero fragment influx");
}

double ContinuumModel::boundary_residual(double V, std::span<const double> U, double ghost) const {
  const double x0 = grid_.x0;
  return x0 * (V * rates_.tau(x0) * ghost - boundary_flux(V, U));
}

double ContinuumModel::polymer_mass(std::span<const double> U) const {
  double acc = 0.0;
  for (int c = 0; c < grid_.cells; ++c) acc += x_[c] * U[c];
  return acc * grid_.h();
}

double ContinuumModel::mass(double V, std::span<const double> U) const {
  return V + polymer_mass(U);
}

double ContinuumModel::mass_loss_rate(std::span<const double> U) const {
  double acc = 0.0;
  for (int c = 0; c < grid_.cells; ++c) acc += x_[c] * mu_[c] * U[c];
  return acc * grid_.h();
}

double ContinuumModel::cfl_step(double V) const {
  double speed = 0.0;
  for (int c = 0; c < grid_.cells; ++c) {
    double s = std::abs(V) * tau_face_[c];
    if (system_ == LimitSystem::end_breakage) s += beta_face_[c];
    speed = std::max(speed, s);
  }
  if (system_ == LimitSystem::end_breakage) speed = std::max(speed, rates_.beta(grid_.x0));
  return speed > 0.0 ? 0.5 * grid_.h() / speed : std::numeric_limits<double>::infinity();
}

void ContinuumModel::rhs(double V, std::span<const double> U, double& dV,
                         std::span<double> dU) const {
  const int M = grid_.cells;
  const double h = grid_.h();
  const bool alt = system_ == LimitSystem::end_breakage;
  const auto& frag = alt ? r_ : beta_;
  const double influx = boundary_flux(V, U);

  // Face fluxes; the top face is closed.
  double below = influx;
  double growth = 0.0, drift_return = 0.0, exit_mass = 0.0;
  if (alt) {
    const double out = rates_.beta(grid_.x0) * U[0];
    below -= out;
    exit_mass = x_[0] * out;
  }
  for (int c = 0; c < M; ++c) {
    double above = 0.0;
    if (c + 1 < M) {
      const double up = V * tau_face_[c] * U[c];
      growth += up;
      above = up;
      if (alt) {
        const double down = beta_face_[c] * U[c + 1];
        drift_return += down;
        above -= down;
      }
    }
    dU[c] = (below - above) / h - (mu_[c] + frag[c]) * U[c];
    below = above;
  }

  double returned = 0.0, minus_atoms = 0.0;
  std::fill(work_.begin(), work_.end(), 0.0);
  for (int d = 0; d < M; ++d) {
    const double rate = 2.0 * frag[d] * U[d];
    if (rate == 0.0) continue;
    const auto& dep = deposits_[d];
    for (int c = 0; c <= d; ++c) work_[c] += rate * dep[c];
    returned += rate * monomer_return_[d];
    minus_atoms += psi_minus_[d] * beta_[d] * U[d];
  }
  for (int c = 0; c < M; ++c) dU[c] += work_[c];

  dV = rates_.lambda - rates_.gamma * V + h * returned + 2.0 * grid_.x0 * h * minus_atoms;
  if (boundary_.mode == BoundaryMode::renewal) dV -= grid_.x0 * influx;
  if (!alt) {
    dV -= h * growth;
  } else if (!as_printed_) {
    dV += -h * growth + h * drift_return + exit_mass;
  } else {
    double tv = 0.0, bv = 0.0;
    for (int c = 0; c < M; ++c) {
      tv += tau_[c] * U[c];
      bv += beta_[c] * U[c];
    }
    dV += V * h * tv - h * bv;
  }
}

std::pair<double, std::vector<double>> pde_rhs(const ContinuumModel& model,
                                               const ContinuumState& state) {
  if (model.system() != LimitSystem::standard)
    throw std::invalid_argument("pde_rhs: model is not the standard system");
  std::vector<double> dU(state.U.size());
  double dV = 0.0;
  model.rhs(state.V, state.U, dV, dU);
  return {dV, std::move(dU)};
}

std::pair<double, std::vector<double>> alt_limit_rhs(const ContinuumModel& model,
                                                     const ContinuumState& state) {
  if (model.system() != LimitSystem::end_breakage)
    throw std::invalid_argument("alt_limit_rhs: model is not the end-breakage system");
  std::vector<double> dU(state.U.size());
  double dV = 0.0;
  model.rhs(state.V, state.U, dV, dU);
  return {dV, std::move(dU)};
}

double boundary_influx(const ContinuumModel& model, const ContinuumState& state) {
  return model.boundary_value(state.V, state.U);
}

ContinuumTrajectory integrate_continuum(const ContinuumState& initial, const ContinuumModel& model,
                                        std::span<const double> output_times, double tol) {
  const auto M = static_cast<std::size_t>(model.grid().cells);
  if (initial.U.size() != M) throw std::invalid_argument("integrate_continuum: U size mismatch");
  if (initial.V < 0.0) throw std::invalid_argument("integrate_continuum: V must be >= 0");
  for (double u : initial.U)
    if (u < 0.0) throw std::invalid_argument("integrate_continuum: U must be >= 0");

  const auto& rates = model.rates();
  std::vector<double> y0(M + 3, 0.0);
  y0[0] = initial.V;
  std::copy(initial.U.begin(), initial.U.end(), y0.begin() + 1);

  auto rhs = [&](double, std::span<const double> y, std::span<double> dy) {
    const auto U = y.subspan(1, M);
    model.rhs(y[0], U, dy[0], dy.subspan(1, M));
    dy[M + 1] = rates.gamma * y[0];
    dy[M + 2] = model.mass_loss_rate(U);
  };
  auto limiter = [&](double, std::span<const double> y) { return model.cfl_step(y[0]); };

  OdeOptions opts;
  opts.tol = tol;
  DormandPrince solver(opts);
  const auto raw = solver.integrate(rhs, std::move(y0), initial.t, output_times, {}, limiter);

  ContinuumTrajectory traj;
  traj.stats = solver.stats();
  traj.initial_mass = model.mass(initial.V, initial.U);
  const auto top = std::max<std::size_t>(1, M / 20);
  const double h = model.grid().h();
  for (std::size_t s = 0; s < raw.size(); ++s) {
    ContinuumState st;
    st.t = output_times[s];
    st.V = raw[s][0];
    st.U.assign(raw[s].begin() + 1, raw[s].begin() + 1 + M);
    st.boundary_flux_in = model.boundary_flux(st.V, st.U);
    traj.source.push_back(rates.lambda * (st.t - initial.t));
    traj.monomer_loss.push_back(raw[s][M + 1]);
    traj.polymer_loss.push_back(raw[s][M + 2]);
    const double pm = model.polymer_mass(st.U);
    traj.residual.push_back(st.V + pm - (traj.initial_mass + traj.source.back() -
                                         traj.monomer_loss.back() - traj.polymer_loss.back()));
    double upper = 0.0;
    for (std::size_t c = M - top; c < M; ++c) upper += model.grid().center(c) * st.U[c] * h;
    traj.leak.push_back(pm > 0.0 ? upper / pm : 0.0);
    traj.snapshots.push_back(std::move(st));
  }
  return traj;
}

WeakPairing weak_pairing_continuum(const ContinuumModel& model, const ContinuumState& state,
                                   const std::function<double(double)>& phi,
                                   const std::function<double(double)>& dphi,
                                   const ContinuumKernel& kernel) {
  const auto& g = model.grid();
  const auto& rates = model.rates();
  const double h = g.h();
  std::vector<double> dU(state.U.size());
  double dV = 0.0;
  model.rhs(state.V, state.U, dV, dU);

  WeakPairing w;
  w.pairing = pair_cells(g, state.U, phi);
  w.scheme_rate = pair_cells(g, dU, phi);
  const bool alt = model.system() == LimitSystem::end_breakage;
  double acc = model.boundary_flux(state.V, state.U) * phi(g.x0);
  for (int c = 0; c < g.cells; ++c) {
    const double u = state.U[c];
    if (u == 0.0) continue;
    auto local = [&](double x) {
      const double frag = alt ? rates.r(x) : rates.beta(x);
      double v = -(rates.mu(x) + frag) * phi(x) + state.V * rates.tau(x) * dphi(x);
      if (alt) v -= rates.beta(x) * dphi(x);
      return v;
    };
    acc += u * gauss5(local, g.lo(c), g.hi(c));
    const double y = g.center(c);
    const double frag = alt ? rates.r(y) : rates.beta(y);
    acc += 2.0 * frag * u * h * kernel.integrate(phi, g.x0, std::nextafter(y, y + 1.0), y);
  }
  if (alt) acc -= rates.beta(g.x0) * state.U[0] * phi(g.x0);
  w.weak_rhs = acc;
  w.defect = std::abs(w.scheme_rate - w.weak_rhs);
  return w;
}

}  // namespace prion
