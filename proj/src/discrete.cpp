#include "prion/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "prion/numerics.hpp"

namespace prion {

DiscreteState::DiscreteState(double t_, double v_, int n0_, int N_)
    : t(t_), v(v_), n0(n0_), N(N_) {
  if (n0 < 1 || N < n0) throw std::invalid_argument("discrete state: need 1 <= n0 <= N");
  u.assign(static_cast<std::size_t>(N - n0 + 1), 0.0);
}

DiscreteState DiscreteState::resized(int new_N) const {
  DiscreteState out(t, v, n0, new_N);
  for (int i = n0; i <= std::min(N, new_N); ++i) out.at(i) = at(i);
  return out;
}

// ---------------------------------------------------------------------------

DiscreteModel::DiscreteModel(const RateFamily& rates, const FragmentationKernel& kernel, int n0,
                             int N, std::optional<ScalingConfig> scaling)
    : rates_(rates), kernel_(kernel), n0_(n0), N_(N) {
  if (n0 < 2) throw std::invalid_argument("discrete model: n0 must be >= 2");
  if (N <= n0) throw std::invalid_argument("discrete model: need N > n0");
  if (kernel.jmax() < N)
    throw std::invalid_argument("discrete model: kernel jmax " + std::to_string(kernel.jmax()) +
                                " is below N " + std::to_string(N));
  if (scaling) {
    if (!(scaling->eps > 0.0)) throw std::invalid_argument("discrete model: eps must be > 0");
    eps_ = scaling->eps;
    pre_ = scaling->prefactors(rates);
  }
  const auto count = static_cast<std::size_t>(N - n0 + 1);
  beta_.resize(count);
  tau_.resize(count);
  mu_.resize(count);
  monomer_return_.resize(count);
  for (int i = n0; i <= N; ++i) {
    beta_[i - n0] = rates.beta(i);
    tau_[i - n0] = rates.tau(i);
    mu_[i - n0] = rates.mu(i);
    double r = 0.0;
    for (int f = 1; f < n0; ++f) r += f * kernel(f, i);
    monomer_return_[i - n0] = r;
  }
  work_.resize(count);
}

void DiscreteModel::rhs(double v, std::span<const double> u, double& dv,
                        std::span<double> du) const {
  const auto count = static_cast<std::size_t>(N_ - n0_ + 1);
  if (u.size() != count || du.size() != count)
    throw std::invalid_argument("discrete rhs: state has " + std::to_string(u.size()) +
                                " polymer entries, expected " + std::to_string(count));
  const double b = pre_.b, d = pre_.d, nu = pre_.nu, s = pre_.s;

  // Fragmentation outflow of each parent size.
  auto& w = work_;
  for (std::size_t k = 0; k < count; ++k) w[k] = b * beta_[k] * u[k];

  double polymerization = 0.0;
  double returned = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const bool top = (k + 1 == count);
    const double flux_out = top ? 0.0 : tau_[k] * u[k];
    const double flux_in = k == 0 ? 0.0 : tau_[k - 1] * u[k - 1];
    du[k] = -d * mu_[k] * u[k] - w[k] - nu * v * (flux_out - flux_in);
    polymerization += flux_out;
    returned += monomer_return_[k] * w[k];
  }
  // Fragment gain 2 sum_{j>i} k_{i,j} w_j.
  for (int j = n0_ + 1; j <= N_; ++j) {
    const double wj = 2.0 * w[j - n0_];
    if (wj == 0.0) continue;
    const double* row = kernel_.row(j).data() + (n0_ - 1);
    double* out = du.data();
    const int len = j - n0_;
    for (int k = 0; k < len; ++k) out[k] += wj * row[k];
  }
  dv = rates_.lambda - rates_.gamma * v - s * nu * v * polymerization + 2.0 * s * returned;
}

double DiscreteModel::mass(double v, std::span<const double> u) const {
  double m = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) m += static_cast<double>(n0_ + k) * u[k];
  return v + pre_.s * m;
}

double DiscreteModel::fragment_return_rate(std::span<const double> u) const {
  double r = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) r += monomer_return_[k] * beta_[k] * u[k];
  return 2.0 * pre_.s * pre_.b * r;
}

double DiscreteModel::mass_loss_rate(std::span<const double> u) const {
  double m = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) m += static_cast<double>(n0_ + k) * mu_[k] * u[k];
  return pre_.s * pre_.d * m;
}

// ---------------------------------------------------------------------------

namespace {

DiscreteDerivative eval_rhs(const DiscreteState& state, const DiscreteModel& model) {
  DiscreteDerivative out;
  out.du.resize(state.u.size());
  model.rhs(state.v, state.u, out.dv, out.du);
  return out;
}

}  // namespace

DiscreteDerivative rhs_truncated(const DiscreteState& state, const RateFamily& rates,
                                 const FragmentationKernel& kernel) {
  return eval_rhs(state, DiscreteModel(rates, kernel, state.n0, state.N));
}

DiscreteDerivative rhs_rescaled(const DiscreteState& state, const RateFamily& rates,
                                const FragmentationKernel& kernel, const ScalingConfig& scaling) {
  if (!(scaling.eps > 0.0)) throw std::invalid_argument("rhs_rescaled: eps must be > 0");
  return eval_rhs(state, DiscreteModel(rates, kernel, state.n0, state.N, scaling));
}

double moments(const DiscreteState& state, double r, double eps) {
  double acc = 0.0;
  for (int i = state.n0; i <= state.N; ++i) {
    const double ui = state.at(i);
    if (ui != 0.0) acc += std::pow(i * eps, r) * ui;
  }
  return eps * acc;
}

double pair_test_function(const DiscreteState& state, const std::function<double(double)>& phi,
                          double eps) {
  double acc = 0.0;
  for (int i = state.n0; i <= state.N; ++i) {
    const double ui = state.at(i);
    if (ui != 0.0) acc += ui * gauss5_composite(phi, i * eps, (i + 1) * eps, 16);
  }
  return acc;
}

InitialBudget initial_budget(const DiscreteState& state, double eps, double sigma) {
  InitialBudget b;
  b.rho0 = state.v + eps * moments(state, 1.0, eps);
  b.M0 = moments(state, 0.0, eps);
  b.M1s = moments(state, 1.0 + sigma, eps);
  return b;
}

std::vector<double> DiscreteTrajectory::moment_series(double r) const {
  std::vector<double> out;
  out.reserve(snapshots.size());
  for (const auto& s : snapshots) out.push_back(moments(s, r, eps));
  return out;
}

DiscreteTrajectory integrate(const DiscreteState& initial, const RateFamily& rates,
                             const FragmentationKernel& kernel,
                             const std::optional<ScalingConfig>& scaling,
                             std::span<const double> output_times, double tol) {
  for (double x : initial.u)
    if (x < 0.0) throw std::invalid_argument("integrate: initial polymer counts must be >= 0");
  if (initial.v < 0.0) throw std::invalid_argument("integrate: initial monomers must be >= 0");

  const DiscreteModel model(rates, kernel, initial.n0, initial.N, scaling);
  const int n0 = initial.n0, N = initial.N;
  const auto count = static_cast<std::size_t>(N - n0 + 1);
  const double eps = model.eps();
  const double sigma = scaling ? scaling->sigma : default_sigma(rates);

  DiscreteTrajectory traj;
  traj.eps = eps;
  traj.sigma = sigma;
  traj.mass_weight = model.mass_weight();
  traj.initial_mass = model.mass(initial.v, initial.u);
  traj.lambda = rates.lambda;

  // State layout: v, u_{n0..N}, int gamma v, int polymer loss.
  std::vector<double> y0(count + 3, 0.0);
  y0[0] = initial.v;
  std::copy(initial.u.begin(), initial.u.end(), y0.begin() + 1);

  auto rhs = [&](double, std::span<const double> y, std::span<double> dy) {
    const auto u = y.subspan(1, count);
    model.rhs(y[0], u, dy[0], dy.subspan(1, count));
    dy[count + 1] = rates.gamma * y[0];
    dy[count + 2] = model.mass_loss_rate(u);
  };

  // Powers (i eps)^r used by the per-step diagnostics.
  std::vector<double> w_sigma(count), w_alpha(count), w_theta(count), w_mass(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double x = static_cast<double>(n0 + k) * eps;
    w_sigma[k] = std::pow(x, 1.0 + sigma);
    w_alpha[k] = std::pow(x, rates.alpha);
    w_theta[k] = std::pow(x, rates.theta);
    w_mass[k] = model.mass_weight() * static_cast<double>(n0 + k);
  }
  auto& steps = traj.steps;
  steps.min_entry = initial.v;
  for (double x : initial.u) steps.min_entry = std::min(steps.min_entry, x);
  steps.max_mass_growth_excess = -std::numeric_limits<double>::infinity();
  auto observer = [&](double t, std::span<const double> y, std::span<const double> dy) {
    double m0 = 0.0, ms = 0.0, ma = 0.0, mt = 0.0, dmass = dy[0];
    double lo = y[0];
    for (std::size_t k = 0; k < count; ++k) {
      const double u = y[k + 1];
      lo = std::min(lo, u);
      m0 += u;
      ms += w_sigma[k] * u;
      ma += w_alpha[k] * u;
      mt += w_theta[k] * u;
      dmass += w_mass[k] * dy[k + 1];
    }
    steps.t.push_back(t);
    steps.moment_sum.push_back(eps * (m0 + ms));
    steps.moment_alpha.push_back(eps * ma);
    steps.moment_theta.push_back(eps * mt);
    steps.dvdt.push_back(dy[0]);
    steps.fragment_return.push_back(model.fragment_return_rate(y.subspan(1, count)));
    steps.min_entry = std::min(steps.min_entry, lo);
    steps.max_mass_growth_excess = std::max(steps.max_mass_growth_excess, dmass - rates.lambda);
  };

  OdeOptions opts;
  opts.tol = tol;
  DormandPrince solver(opts);
  const auto raw = solver.integrate(rhs, std::move(y0), initial.t, output_times, observer);
  traj.stats = solver.stats();

  traj.snapshots.reserve(raw.size());
  for (std::size_t s = 0; s < raw.size(); ++s) {
    DiscreteState st(output_times[s], raw[s][0], n0, N);
    std::copy(raw[s].begin() + 1, raw[s].begin() + 1 + count, st.u.begin());
    traj.snapshots.push_back(std::move(st));
    traj.ledger.source.push_back(rates.lambda * (output_times[s] - initial.t));
    traj.ledger.monomer_loss.push_back(raw[s][count + 1]);
    traj.ledger.polymer_loss.push_back(raw[s][count + 2]);
  }
  return traj;
}

std::vector<ResidualPoint> mass_balance_residual(const DiscreteTrajectory& traj) {
  std::vector<ResidualPoint> out;
  out.reserve(traj.snapshots.size());
  const double rho0 = traj.initial_mass;
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
    const auto& st = traj.snapshots[s];
    double m = 0.0;
    for (int i = st.n0; i <= st.N; ++i) m += i * st.at(i);
    const double lhs = st.v + traj.mass_weight * m;
    const double rhs = rho0 + traj.ledger.source[s] - traj.ledger.monomer_loss[s] -
                       traj.ledger.polymer_loss[s];
    const double res = lhs - rhs;
    out.push_back({st.t, res, rho0 > 0.0 ? res / rho0 : res});
  }
  return out;
}

std::vector<RefinementRow> truncation_refinement(const DiscreteState& initial,
                                                 const RateFamily& rates,
                                                 const FragmentationKernel& kernel,
                                                 std::span<const int> N_list,
                                                 std::span<const double> output_times,
                                                 double tol,
                                                 const std::optional<ScalingConfig>& scaling) {
  if (N_list.size() < 2) throw std::invalid_argument("truncation_refinement: need >= 2 sizes");
  for (std::size_t k = 1; k < N_list.size(); ++k)
    if (N_list[k] <= N_list[k - 1])
      throw std::invalid_argument("truncation_refinement: N_list must be strictly increasing");

  std::vector<DiscreteTrajectory> runs;
  for (int N : N_list)
    runs.push_back(integrate(initial.resized(N), rates, kernel, scaling, output_times, tol));

  std::vector<RefinementRow> table;
  for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
    RefinementRow row{N_list[k], N_list[k + 1], 0.0, 0.0};
    for (std::size_t s = 0; s < output_times.size(); ++s) {
      const auto& a = runs[k].snapshots[s];
      const auto& b = runs[k + 1].snapshots[s];
      row.v_diff = std::max(row.v_diff, std::abs(a.v - b.v));
      double du = 0.0;
      for (int i = a.n0; i <= a.N; ++i) du += std::abs(a.at(i) - b.at(i));
      row.u_diff = std::max(row.u_diff, du);
    }
    table.push_back(row);
  }
  return table;
}

double weak_form_rhs(const DiscreteModel& model, double v, std::span<const double> u,
                     std::span<const double> phi, WeakForm form) {
  const int n0 = model.n0(), N = model.N();
  const auto& p = model.prefactors();
  if (phi.size() < static_cast<std::size_t>(N - n0 + 2))
    throw std::invalid_argument("weak_form_rhs: need phi_i for i = n0..N+1");
  auto ph = [&](int i) { return phi[i - n0]; };
  auto ui = [&](int i) { return u[i - n0]; };

  double acc = 0.0;
  for (int i = n0; i <= N; ++i) acc -= p.d * model.mu(i) * ui(i) * ph(i);
  for (int i = n0; i < N; ++i) acc += p.nu * v * model.tau(i) * ui(i) * (ph(i + 1) - ph(i));

  if (form == WeakForm::direct) {
    for (int i = n0; i <= N; ++i) acc -= p.b * model.beta(i) * ui(i) * ph(i);
    for (int i = n0; i <= N; ++i) {
      double gain = 0.0;
      for (int j = i + 1; j <= N; ++j) gain += model.beta(j) * model.k(i, j) * ui(j);
      acc += 2.0 * p.b * ph(i) * gain;
    }
  } else {
    for (int j = n0 + 1; j <= N; ++j) {
      const double bu = model.beta(j) * ui(j);
      if (bu == 0.0) continue;
      double inner = 0.0;
      for (int i = n0; i < j; ++i) inner += i * model.k(i, j) * (ph(i) / i - ph(j) / j);
      acc += 2.0 * p.b * bu * inner;
    }
    for (int j = n0; j <= N; ++j) {
      double small = 0.0;
      for (int i = 1; i < n0; ++i) small += i * model.k(i, j);
      acc -= 2.0 * p.b * small * model.beta(j) * ui(j) * ph(j) / j;
    }
  }
  return acc;
}

}  // namespace prion
