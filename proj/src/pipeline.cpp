#include <chrono>
#include <cmath>
#include <fstream>

#include "prion/closure.hpp"
#include "prion/scenario.hpp"

namespace prion {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

SelfSimilarMeasure scenario_measure(const Scenario& s) {
  const auto& k = s.kernel;
  if (k.breaks.empty() && k.atoms.empty()) return SelfSimilarMeasure::lebesgue();
  std::vector<double> breaks = k.breaks, values = k.values;
  if (breaks.empty()) breaks = {0.0, 1.0};
  if (values.empty()) values = {0.0};
  return SelfSimilarMeasure(k.atoms, breaks, values);
}

BoundaryModel scenario_boundary(const Scenario& s) {
  const auto& b = s.boundary;
  if (b.mode == "general") {
    BoundaryModel m = BoundaryModel::uniform_with_atoms(s.scaling.x0, b.psi);
    return m;
  }
  if (b.mode == "renewal") {
    const double c = b.renewal;
    return BoundaryModel::renewal_mode([c](double) { return c; });
  }
  return BoundaryModel::zero_influx();
}

double rel_err(double a, double b) {
  const double scale = std::max(std::abs(b), 1e-300);
  return std::abs(a - b) / scale;
}

void run_discrete(const Scenario& s, const fs::path& out, const RunOptions& opt,
                  RunManifest& m) {
  const double tol = opt.tol.value_or(s.tol);
  const auto rates = s.rate_family();
  std::optional<ScalingConfig> scaling;
  int n0 = s.scaling.n0, N = s.grid.N;
  double eps = 1.0;
  if (!s.scaling.eps.empty()) {
    eps = s.scaling.eps.front();
    scaling = make_scaling(eps, s.scaling.x0, rates, s.scaling.regime);
    n0 = scaling->n0;
    N = static_cast<int>(std::ceil(s.grid.xmax / eps - 1e-9));
  }
  const auto kernel = scenario_kernel(s, N, eps);
  const auto init = sample_discrete(s.initial_profile(), s.initial.V0, eps, n0, N);

  const auto start = Clock::now();
  const auto traj = integrate(init, rates, kernel, scaling, s.times, tol);
  m.timings.emplace_back("discrete", seconds_since(start));
  write_discrete_csv(out / "discrete.csv", traj);
  m.artifacts.push_back({"discrete_trajectory", (out / "discrete.csv").string()});

  for (const auto& r : mass_balance_residual(traj))
    if (std::abs(r.relative) > 1e-6) {
      m.violations.push_back("mass balance residual exceeds 1e-6 relative");
      break;
    }

  if (!s.closure) return;
  if (scaling || s.kernel.type != "uniform" || s.rates.theta != 0.0 || s.rates.m != 0.0 ||
      s.rates.alpha != 1.0 || s.rates.beta_shift != 1.0)
    throw std::runtime_error(
        "closure comparison needs the unscaled system with uniform kernel, constant tau and mu "
        "and beta_i = beta (i - 1)");
  const ClosureParams p{rates.lambda, rates.gamma, s.rates.tau_scale, s.rates.mu_scale,
                        s.rates.beta_scale};
  const auto& st0 = traj.snapshots.front();
  MomentTriple y0{st0.v, 0.0, 0.0};
  for (int i = n0; i <= N; ++i) {
    y0[1] += st0.at(i);
    y0[2] += i * st0.at(i);
  }
  const auto ref = integrate_masel_closure(p, n0, y0, s.times, 1e-12);
  std::vector<std::vector<double>> rows;
  double worst = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    const auto& st = traj.snapshots[k];
    double P = 0.0, M = 0.0;
    for (int i = n0; i <= N; ++i) {
      P += st.at(i);
      M += i * st.at(i);
    }
    const double e = std::max({rel_err(st.v, ref[k][0]), rel_err(P, ref[k][1]),
                               rel_err(M, ref[k][2])});
    worst = std::max(worst, e);
    rows.push_back({st.t, st.v, ref[k][0], P, ref[k][1], M, ref[k][2], e});
  }
  write_csv(out / "closure.csv", {"t", "v", "v_closure", "P", "P_closure", "M", "M_closure",
                                  "rel_err"},
            rows);
  m.artifacts.push_back({"closure_comparison", (out / "closure.csv").string()});
  if (worst > 1e-5) m.violations.push_back("discrete closure mismatch exceeds 1e-5");
}

void run_continuum(const Scenario& s, const fs::path& out, const RunOptions& opt,
                   RunManifest& m) {
  const double tol = opt.tol.value_or(s.tol);
  const SizeGrid grid(s.scaling.x0, s.grid.xmax, s.grid.cells);
  const ContinuumModel model(grid, limit_rates(s.rate_family()),
                             ContinuumKernel::self_similar(scenario_measure(s)),
                             scenario_boundary(s));
  ContinuumState init;
  init.V = s.initial.V0;
  init.U = sample_profile(grid, s.initial_profile());
  const auto start = Clock::now();
  const auto traj = integrate_continuum(init, model, s.times, tol);
  m.timings.emplace_back("continuum", seconds_since(start));
  write_continuum_csv(out / "continuum.csv", traj, model);
  write_field_csv(out / "field.csv", traj, grid);
  m.artifacts.push_back({"continuum_trajectory", (out / "continuum.csv").string()});
  m.artifacts.push_back({"continuum_field", (out / "field.csv").string()});

  if (!s.closure) return;
  if (s.kernel.type != "uniform" || s.rates.theta != 0.0 || s.rates.m != 0.0 ||
      s.rates.alpha != 1.0 || s.boundary.mode != "zero_influx")
    throw std::runtime_error(
        "closure comparison needs the uniform kernel, constant tau and mu, beta(x) = beta x "
        "and zero influx");
  const auto r = s.rate_family();
  const ClosureParams p{r.lambda, r.gamma, s.rates.tau_scale, s.rates.mu_scale,
                        s.rates.beta_scale};
  const double h = grid.h();
  auto moments = [&](const ContinuumState& st) {
    double P = 0.0, M = 0.0;
    for (int c = 0; c < grid.cells; ++c) {
      P += h * st.U[c];
      M += h * grid.center(c) * st.U[c];
    }
    return MomentTriple{st.V, P, M};
  };
  const auto ref = integrate_greer_closure(p, grid.x0, moments(traj.snapshots.front()), s.times,
                                           1e-12);
  std::vector<std::vector<double>> rows;
  double worst = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    const auto y = moments(traj.snapshots[k]);
    const double e = std::max({rel_err(y[0], ref[k][0]), rel_err(y[1], ref[k][1]),
                               rel_err(y[2], ref[k][2])});
    worst = std::max(worst, e);
    rows.push_back({traj.snapshots[k].t, y[0], ref[k][0], y[1], ref[k][1], y[2], ref[k][2], e});
  }
  write_csv(out / "closure.csv", {"t", "V", "V_closure", "P", "P_closure", "M", "M_closure",
                                  "rel_err"},
            rows);
  m.artifacts.push_back({"closure_comparison", (out / "closure.csv").string()});
  if (worst > 1e-4) m.violations.push_back("continuum closure mismatch exceeds 1e-4");
}

ConvergenceReport run_sweep_outputs(const Scenario& s, const fs::path& out,
                                    const RunOptions& opt, RunManifest& m) {
  const auto start = Clock::now();
  const auto sweep = run_sweep(sweep_config(s, opt));
  m.timings.emplace_back("sweep", seconds_since(start));
  const auto report = summarize(sweep);
  write_sweep_tables(out, report);
  write_text(out / "report.json", report_json(s.name, report));
  auto names = report.test_names;
  auto series = report.D;
  names.push_back("monomer");
  series.push_back(report.monomer);
  write_text(out / "distance.svg", loglog_svg(s.name + ": D(eps, phi)", report.eps, names, series));
  m.artifacts.push_back({"distance_table", (out / "distance.csv").string()});
  m.artifacts.push_back({"audit_table", (out / "audit.csv").string()});
  m.artifacts.push_back({"report", (out / "report.json").string()});
  m.artifacts.push_back({"plot", (out / "distance.svg").string()});
  for (const auto& f : report.failures) m.violations.push_back("run failed: " + f);
  return report;
}

RunManifest start_manifest(const Scenario& s) {
  RunManifest m;
  m.scenario = s.name;
  m.hash = hex(scenario_hash(s));
  m.seed = s.seed;
  return m;
}

void finish(const fs::path& out, RunManifest& m) {
  m.artifacts.push_back({"manifest", (out / "manifest.json").string()});
  write_text(out / "manifest.json", manifest_json(m));
}

}  // namespace

FragmentationKernel scenario_kernel(const Scenario& s, int N, double eps) {
  const auto& k = s.kernel;
  if (k.type == "file") {
    std::ifstream in(k.path);
    if (!in) throw std::runtime_error("cannot open kernel file " + k.path);
    auto kernel = read_kernel(in);
    if (kernel.jmax() < N) throw std::runtime_error("kernel file jmax is below the truncation N");
    return kernel;
  }
  if (k.type == "uniform") return uniform_kernel(N);
  const auto interior = kernel_from_measure(scenario_measure(s), N);
  if (k.type == "measure") return interior;
  const std::vector<double> r(N + 1, k.r);
  return boundary_weighted_kernel(eps, r, interior, N);
}

SweepConfig sweep_config(const Scenario& s, const RunOptions& opt) {
  SweepConfig c;
  c.name = s.name;
  c.rates = s.rate_family();
  c.k0 = scenario_measure(s);
  c.regime = s.scaling.regime;
  c.boundary_r = s.kernel.r;
  c.x0 = s.scaling.x0;
  c.xmax = s.grid.xmax;
  c.eps_list = s.scaling.eps;
  c.V0 = s.initial.V0;
  c.U0 = s.initial_profile();
  c.times = s.times;
  c.reference_cells = s.grid.cells;
  c.tol = opt.tol.value_or(s.tol);
  c.seed = s.seed;
  c.threads = opt.threads;
  return c;
}


RunManifest run(Scenario s, const fs::path& outdir, const RunOptions& opt) {
  fs::create_directories(outdir);
  auto m = start_manifest(s);
  switch (s.pipeline) {
    case Pipeline::discrete:
      run_discrete(s, outdir, opt, m);
      break;
    case Pipeline::continuum:
      run_continuum(s, outdir, opt, m);
      break;
    case Pipeline::sweep: {
      const auto rep = run_sweep_outputs(s, outdir, opt, m);
      for (std::size_t k = 0; k < rep.monotone.size(); ++k)
        if (!rep.monotone[k]) {
          const bool monomer = k + 1 == rep.monotone.size();
          m.violations.push_back("distance not nonincreasing for " +
                                 (monomer ? std::string("monomer") : rep.test_names[k]));
        }
      break;
    }
    case Pipeline::audit:
      return run_audit(std::move(s), outdir, opt);
  }
  finish(outdir, m);
  return m;
}

RunManifest run_audit(Scenario s, const fs::path& outdir, const RunOptions& opt) {
  fs::create_directories(outdir);
  auto m = start_manifest(s);
  const auto rep = run_sweep_outputs(s, outdir, opt, m);
  for (const auto& row : rep.audit.rows)
    if (!row.ok) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "bound violated at eps=%.6g (moment %.3g, dv/dt %.3g, release %.3g)", row.eps,
                    row.moment_margin, row.dvdt_margin, row.return_margin);
      m.violations.emplace_back(buf);
    }
  finish(outdir, m);
  return m;
}

}  // namespace prion
