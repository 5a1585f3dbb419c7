#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "prion/continuum.hpp"
#include "prion/convergence.hpp"
#include "prion/discrete.hpp"
#include "prion/kernels.hpp"
#include "prion/rates.hpp"

namespace prion {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Pipeline { discrete, continuum, sweep, audit };

std::string to_string(Pipeline p);

struct RateSpec {
  double alpha = 1.0, theta = 0.0, m = 0.0, K = 1.0;
  double lambda = 1.0, gamma = 1.0;
  double beta_scale = 1.0, tau_scale = 1.0, mu_scale = 1.0;
  double beta_shift = 0.0;
};

struct KernelSpec {
  std::string type = "uniform";  // uniform | measure | boundary_weighted | file
  std::vector<SelfSimilarMeasure::Atom> atoms;
  std::vector<double> breaks;
  std::vector<double> values;
  double r = 1.0;  // boundary_weighted interior weight
  std::string path;
};

struct ScalingSpec {
  double x0 = 0.0;
  Regime regime = Regime::standard;
  std::vector<double> eps;  // empty: unscaled discrete system
  int n0 = 2;               // unscaled runs only
};

struct InitialSpec {
  std::string family = "bump";  // bump | gaussian | zero
  double center = 1.5;
  double width = 1.0;
  double amplitude = 1.0;
  double V0 = 1.0;
};

struct GridSpec {
  double xmax = 4.0;
  int cells = 960;
  int N = 500;  // unscaled discrete truncation
};

struct BoundarySpec {
  std::string mode = "zero_influx";  // zero_influx | general | renewal
  double psi = 0.0;
  double renewal = 0.0;
};

struct Scenario {
  std::string name = "scenario";
  Pipeline pipeline = Pipeline::discrete;
  RateSpec rates;
  KernelSpec kernel;
  ScalingSpec scaling;
  InitialSpec initial;
  GridSpec grid;
  BoundarySpec boundary;
  double tol = 1e-8;
  std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
  std::uint64_t seed = 1;
  bool closure = false;  // compare against the 3-moment closure

  RateFamily rate_family() const;
  std::function<double(double)> initial_profile() const;
};

/// Carries every problem found in a scenario document.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

Scenario parse_scenario(const std::string& text);
std::string canonical_json(const Scenario& s);
/// FNV-1a 64 of the canonical JSON form.
std::uint64_t scenario_hash(const Scenario& s);

std::vector<Scenario> preset_catalog();
std::optional<Scenario> find_preset(const std::string& name);

struct Artifact {
  std::string kind;
  std::string path;
};

struct RunManifest {
  std::string scenario;
  std::string hash;
  std::string tool_version = kToolVersion;
  std::uint64_t seed = 0;
  std::vector<Artifact> artifacts;
  std::vector<std::pair<std::string, double>> timings;  // seconds
  std::vector<std::string> violations;  // acceptance-property failures
};

struct RunOptions {
  int threads = 1;
  std::optional<double> tol;
};

/// Discrete kernel of a scenario on sizes up to N.
FragmentationKernel scenario_kernel(const Scenario& s, int N, double eps);
SweepConfig sweep_config(const Scenario& s, const RunOptions& options = {});

/// Executes the scenario's pipeline and writes CSV/JSON/SVG outputs into
/// outdir. Solver failures propagate as SolverError or std::runtime_error.
RunManifest run(Scenario scenario, const std::filesystem::path& outdir,
                const RunOptions& options = {});
/// Runs the scenario as a sweep and writes the bound audit.
RunManifest run_audit(Scenario scenario, const std::filesystem::path& outdir,
                      const RunOptions& options = {});

// Writers (report.cpp)
std::string format_number(double x);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
void write_discrete_csv(const std::filesystem::path& path, const DiscreteTrajectory& traj);
void write_continuum_csv(const std::filesystem::path& path, const ContinuumTrajectory& traj,
                         const ContinuumModel& model);
void write_field_csv(const std::filesystem::path& path, const ContinuumTrajectory& traj,
                     const SizeGrid& grid);
void write_sweep_tables(const std::filesystem::path& dir, const ConvergenceReport& report);
std::string report_json(const std::string& name, const ConvergenceReport& report);
/// Log-log plot of each series against eps.
std::string loglog_svg(const std::string& title, const std::vector<double>& eps,
                       const std::vector<std::string>& names,
                       const std::vector<std::vector<double>>& series);
std::string manifest_json(const RunManifest& m);

}  // namespace prion
