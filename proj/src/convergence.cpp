#include "prion/convergence.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include "prion/numerics.hpp"

namespace prion {

namespace {

double smooth_step_raw(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
double smooth_step_raw_d(double t) { return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }

// 0 for t <= 0, 1 for t >= 1, C-infinity in between.
double smooth_step(double t) {
  const double a = smooth_step_raw(t), b = smooth_step_raw(1.0 - t);
  return a / (a + b);
}

double smooth_step_d(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double a = smooth_step_raw(t), b = smooth_step_raw(1.0 - t);
  const double da = smooth_step_raw_d(t), db = -smooth_step_raw_d(1.0 - t);
  return (da * b - a * db) / ((a + b) * (a + b));
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

TestFunction mollified_bump(double center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("mollified_bump: radius must be > 0");
  TestFunction f;
  char buf[64];
  std::snprintf(buf, sizeof buf, "bump(%.4g,%.4g)", center, radius);
  f.name = buf;
  f.lo = center - radius;
  f.hi = center + radius;
  f.phi = [=](double x) {
    const double s = (x - center) / radius;
    return std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
  };
  f.dphi = [=](double x) {
    const double s = (x - center) / radius;
    if (std::abs(s) >= 1.0) return 0.0;
    const double q = 1.0 - s * s;
    return std::exp(1.0 - 1.0 / q) * (-2.0 * s / (q * q)) / radius;
  };
  return f;
}

TestFunction mass_cutoff(double lo, double hi, double ramp) {
  if (!(hi - lo > 2.0 * ramp && ramp > 0.0))
    throw std::invalid_argument("mass_cutoff: support too short for the ramp");
  TestFunction f;
  f.name = "mass";
  f.lo = lo;
  f.hi = hi;
  f.phi = [=](double x) {
    return x * smooth_step((x - lo) / ramp) * smooth_step((hi - x) / ramp);
  };
  f.dphi = [=](double x) {
    const double a = smooth_step((x - lo) / ramp), b = smooth_step((hi - x) / ramp);
    const double da = smooth_step_d((x - lo) / ramp) / ramp;
    const double db = -smooth_step_d((hi - x) / ramp) / ramp;
    return a * b + x * (da * b + a * db);
  };
  return f;
}

std::vector<TestFunction> default_test_set(double x0, double xmax, double margin,
                                           std::uint64_t seed) {
  const double a = x0 + margin, b = xmax - margin;
  if (!(b > a)) throw std::invalid_argument("test set: margin leaves no room for supports");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  const int count = 8;
  const double spacing = (b - a) / count;
  std::vector<TestFunction> out;
  for (int k = 0; k < count; ++k) {
    double radius = spacing * (0.9 + 0.3 * jitter(rng));
    double center = a + (k + 0.5) * spacing + 0.25 * spacing * jitter(rng);
    radius = std::min({radius, center - a, b - center});
    out.push_back(mollified_bump(center, radius));
  }
  out.push_back(mass_cutoff(a, b, 0.25 * (b - a)));
  return out;
}

std::vector<double> dyadic_eps_list(int kmin, int kmax) {
  std::vector<double> out;
  for (int k = kmin; k <= kmax; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

DiscreteState sample_discrete(const std::function<double(double)>& U0, double V0, double eps,
                              int n0, int N) {
  DiscreteState st(0.0, V0, n0, N);
  for (int i = n0; i <= N; ++i)
    st.at(i) = gauss5_composite(U0, i * eps, (i + 1) * eps, 16) / eps;
  return st;
}

EpsilonSweep run_sweep(const SweepConfig& config) {
  if (config.eps_list.empty()) throw std::invalid_argument("sweep: empty eps list");
  for (std::size_t k = 1; k < config.eps_list.size(); ++k)
    if (!(config.eps_list[k] < config.eps_list[k - 1]))
      throw std::invalid_argument("sweep: eps list must be strictly decreasing");
  if (!config.U0) throw std::invalid_argument("sweep: initial profile missing");
  if (config.times.empty()) throw std::invalid_argument("sweep: no output times");

  EpsilonSweep sweep;
  sweep.config = config;
  sweep.grid = SizeGrid(config.x0, config.xmax, config.reference_cells);
  sweep.tests = default_test_set(config.x0, config.xmax, config.eps_list.front(), config.seed);
  sweep.runs.resize(config.eps_list.size());

  auto reference_task = [&] {
    const auto start = std::chrono::steady_clock::now();
    try {
      const ContinuumModel model(sweep.grid, limit_rates(config.rates),
                                 ContinuumKernel::self_similar(config.k0),
                                 BoundaryModel::zero_influx());
      ContinuumState init;
      init.V = config.V0;
      init.U = sample_profile(sweep.grid, config.U0);
      sweep.reference = integrate_continuum(init, model, config.times, config.tol);
    } catch (const std::exception& e) {
      sweep.reference_error = e.what();
    }
    sweep.reference_seconds = seconds_since(start);
  };

  auto eps_task = [&](std::size_t k) {
    auto& run = sweep.runs[k];
    const auto start = std::chrono::steady_clock::now();
    run.eps = config.eps_list[k];
    try {
      auto scaling = make_scaling(run.eps, config.x0, config.rates, config.regime);
      if (config.sigma) scaling.sigma = *config.sigma;
      run.n0 = scaling.n0;
      run.N = static_cast<int>(std::ceil(config.xmax / run.eps - 1e-9));
      if (run.N <= run.n0) throw std::invalid_argument("sweep: N(eps) must exceed n0(eps)");
      FragmentationKernel kernel = kernel_from_measure(config.k0, run.N);
      if (config.regime == Regime::boundary_breakage) {
        const std::vector<double> r(run.N + 1, config.boundary_r);
        kernel = boundary_weighted_kernel(run.eps, r, kernel, run.N);
      }
      const auto init = sample_discrete(config.U0, config.V0, run.eps, run.n0, run.N);
      run.trajectory = integrate(init, config.rates, kernel, scaling, config.times, config.tol);
    } catch (const std::exception& e) {
      run.error = e.what();
    }
    run.seconds = seconds_since(start);
  };

  const std::size_t tasks = sweep.runs.size() + 1;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < tasks;) {
      if (t == 0)
        reference_task();
      else
        eps_task(t - 1);
    }
  };
  const auto nthreads =
      static_cast<std::size_t>(std::clamp<int>(config.threads, 1, static_cast<int>(tasks)));
  std::vector<std::thread> pool;
  for (std::size_t p = 1; p < nthreads; ++p) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return sweep;
}

std::vector<double> weak_star_distance(const EpsilonSweep& sweep, const TestFunction& test) {
  std::vector<double> out(sweep.runs.size(), kNaN);
  if (!sweep.reference) return out;
  const auto& ref = sweep.reference->snapshots;
  std::vector<double> target;
  for (const auto& s : ref) target.push_back(pair_cells(sweep.grid, s.U, test.phi));
  for (std::size_t k = 0; k < sweep.runs.size(); ++k) {
    const auto& run = sweep.runs[k];
    if (!run.trajectory) continue;
    double d = 0.0;
    for (std::size_t s = 0; s < target.size(); ++s)
      d = std::max(d, std::abs(pair_test_function(run.trajectory->snapshots[s], test.phi,
                                                  run.eps) - target[s]));
    out[k] = d;
  }
  return out;
}

std::vector<double> monomer_distance(const EpsilonSweep& sweep) {
  std::vector<double> out(sweep.runs.size(), kNaN);
  if (!sweep.reference) return out;
  const auto& ref = sweep.reference->snapshots;
  for (std::size_t k = 0; k < sweep.runs.size(); ++k) {
    const auto& run = sweep.runs[k];
    if (!run.trajectory) continue;
    double d = 0.0;
    for (std::size_t s = 0; s < ref.size(); ++s)
      d = std::max(d, std::abs(run.trajectory->snapshots[s].v - ref[s].V));
    out[k] = d;
  }
  return out;
}

bool nonincreasing(std::span<const double> series, double slack) {
  for (std::size_t k = 1; k < series.size(); ++k) {
    if (!std::isfinite(series[k]) || !std::isfinite(series[k - 1])) return false;
    const double allowed = k == 1 ? series[0] * (1.0 + slack) : series[k - 1];
    if (series[k] > allowed) return false;
  }
  return true;
}

OrderFit fit_order(std::span<const double> eps, std::span<const double> D) {
  if (eps.size() != D.size()) throw std::invalid_argument("fit_order: size mismatch");
  OrderFit fit;
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < D.size(); ++k) {
    if (!(D[k] > 0.0) || !std::isfinite(D[k]) || !(eps[k] > 0.0)) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "dropped point eps=%.6g (D=%.6g)", eps[k], D[k]);
      fit.notes.emplace_back(buf);
      continue;
    }
    xs.push_back(std::log(eps[k]));
    ys.push_back(std::log(D[k]));
  }
  fit.used = static_cast<int>(xs.size());
  if (xs.size() < 3) throw std::invalid_argument("fit_order: fewer than 3 usable points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  fit.order = sxy / sxx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

std::vector<PairingSeries> pairing_limit_check(const EpsilonSweep& sweep,
                                               std::span<const Coefficient> families,
                                               const TestFunction& test) {
  const auto& rates = sweep.config.rates;
  const double ell = 1.0 + sweep.config.sigma.value_or(default_sigma(rates));
  const auto limits = limit_rates(rates);
  const auto& grid = sweep.grid;

  auto one = [&](const std::string& name, double kappa,
                 const std::function<double(const SweepRun&, int)>& discrete_weight,
                 const std::function<double(double)>& continuum_integrand) {
    if (kappa >= ell)
      throw std::invalid_argument("pairing_limit_check: exponent of " + name +
                                  " is not below the moment order 1 + sigma");
    PairingSeries series{name, kappa, std::vector<double>(sweep.runs.size(), kNaN)};
    if (!sweep.reference) return series;
    std::vector<double> target;
    for (const auto& s : sweep.reference->snapshots) target.push_back(pair_cells(grid, s.U, continuum_integrand));
    for (std::size_t k = 0; k < sweep.runs.size(); ++k) {
      const auto& run = sweep.runs[k];
      if (!run.trajectory) continue;
      std::vector<double> w(run.N + 1, 0.0);
      for (int i = run.n0; i <= run.N; ++i) w[i] = discrete_weight(run, i);
      double d = 0.0;
      for (std::size_t s = 0; s < target.size(); ++s) {
        const auto& st = run.trajectory->snapshots[s];
        double acc = 0.0;
        for (int i = st.n0; i <= st.N; ++i) acc += w[i] * st.at(i);
        d = std::max(d, std::abs(acc - target[s]));
      }
      series.distance[k] = d;
    }
    return series;
  };

  std::vector<PairingSeries> out;
  for (Coefficient c : families) {
    const char* name = c == Coefficient::beta ? "beta" : c == Coefficient::tau ? "tau" : "mu";
    const auto& z = c == Coefficient::beta ? limits.beta : c == Coefficient::tau ? limits.tau : limits.mu;
    out.push_back(one(
        name, rates.exponent(c),
        [&](const SweepRun& run, int i) {
          const double lo = i * run.eps, hi = (i + 1) * run.eps;
          return rescaled_coefficient(rates, c, run.eps, 0.5 * (lo + hi), run.n0) *
                 gauss5(test.phi, lo, hi);
        },
        [&](double x) { return z(x) * test.phi(x); }));
  }
  out.push_back(one(
      "transport", rates.theta,
      [&](const SweepRun& run, int i) {
        const double x = i * run.eps;
        const double t = rescaled_coefficient(rates, Coefficient::tau, run.eps, x + 0.5 * run.eps,
                                              run.n0);
        return t * (test.phi(x + run.eps) - test.phi(x));
      },
      [&](double x) { return limits.tau(x) * test.dphi(x); }));
  return out;
}

bool BoundAudit::pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const AuditRow& r) { return r.ok; });
}

BoundAudit bound_audit(const EpsilonSweep& sweep, double T) {
  const auto& rates = sweep.config.rates;
  const double K = rates.K;
  BoundAudit audit;
  for (const auto& run : sweep.runs) {
    if (!run.trajectory) continue;
    const auto& tr = *run.trajectory;
    const auto budget = initial_budget(tr.snapshots.front(), run.eps, tr.sigma);
    const double sigma = tr.sigma;
    const double C = std::max(K * (budget.rho0 + rates.lambda * T) * (1.0 + sigma) *
                                  std::pow(2.0, sigma),
                              2.0 * K);
    const double base = budget.M0 + budget.M1s + 1.0;
    auto envelope = [&](double t) { return base * std::exp(2.0 * C * t); };
    const double Cp = std::max(budget.rho0 + rates.lambda * T, envelope(T));

    AuditRow row;
    row.eps = run.eps;
    row.moment_margin = std::numeric_limits<double>::infinity();
    row.dvdt_margin = std::numeric_limits<double>::infinity();
    row.return_margin = std::numeric_limits<double>::infinity();
    const auto& st = tr.steps;
    for (std::size_t k = 0; k < st.t.size(); ++k) {
      const double env = envelope(st.t[k]);
      if (env - st.moment_sum[k] < row.moment_margin) {
        row.moment_margin = env - st.moment_sum[k];
        row.moment_envelope = env;
      }
      row.moment_peak = std::max(row.moment_peak, st.moment_sum[k]);
      const double release = 2.0 * run.eps * run.n0 * K * st.moment_alpha[k];
      const double bound = rates.lambda + rates.gamma * Cp + K * Cp * Cp + release;
      row.return_peak = std::max(row.return_peak, st.fragment_return[k]);
      row.return_margin = std::min(row.return_margin, release - st.fragment_return[k]);
      const double dv = std::abs(st.dvdt[k]);
      if (bound - dv < row.dvdt_margin) {
        row.dvdt_margin = bound - dv;
        row.dvdt_bound = bound;
      }
      row.dvdt_peak = std::max(row.dvdt_peak, dv);
    }
    row.ok = row.moment_margin >= 0.0 && row.dvdt_margin >= 0.0 && row.return_margin >= 0.0;
    audit.rows.push_back(row);
  }
  return audit;
}

ConvergenceReport summarize(const EpsilonSweep& sweep) {
  ConvergenceReport rep;
  rep.eps = sweep.config.eps_list;
  if (!sweep.reference_error.empty()) rep.failures.push_back("reference: " + sweep.reference_error);
  for (const auto& run : sweep.runs)
    if (!run.error.empty()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "eps=%.6g: ", run.eps);
      rep.failures.push_back(buf + run.error);
    }

  auto add = [&](const std::string& name, std::vector<double> series) {
    rep.test_names.push_back(name);
    rep.monotone.push_back(nonincreasing(series));
    rep.final_ratio.push_back(series.back() / series.front());
    try {
      rep.fits.push_back(fit_order(rep.eps, series));
    } catch (const std::invalid_argument& e) {
      OrderFit f;
      f.order = kNaN;
      f.r2 = kNaN;
      f.notes.emplace_back(e.what());
      rep.fits.push_back(f);
    }
    rep.D.push_back(std::move(series));
  };
  for (const auto& t : sweep.tests) add(t.name, weak_star_distance(sweep, t));
  rep.monomer = monomer_distance(sweep);
  add("monomer", rep.monomer);
  rep.D.pop_back();
  rep.test_names.pop_back();

  double T = 0.0;
  for (double t : sweep.config.times) T = std::max(T, t);
  rep.audit = bound_audit(sweep, T);
  return rep;
}

}  // namespace prion
