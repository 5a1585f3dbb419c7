#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "prion/ode.hpp"
#include "prion/scenario.hpp"

namespace {

enum Exit { ok = 0, validation = 1, solver = 2, violation = 3 };

struct Args {
  std::string scenario;
  std::string preset;
  std::string out = "prionsim-out";
  int threads = 1;
  std::optional<double> tol;
  bool dump = false;
};

prion::Scenario load(const Args& a) {
  if (!a.preset.empty()) {
    if (!a.scenario.empty()) throw prion::ScenarioError({"give either --scenario or --preset"});
    auto s = prion::find_preset(a.preset);
    if (!s) throw prion::ScenarioError({"unknown preset '" + a.preset + "'"});
    return *s;
  }
  if (a.scenario.empty()) throw prion::ScenarioError({"--scenario or --preset is required"});
  std::ifstream in(a.scenario);
  if (!in) throw prion::ScenarioError({"cannot read " + a.scenario});
  std::stringstream buf;
  buf << in.rdbuf();
  return prion::parse_scenario(buf.str());
}

int report(const prion::RunManifest& m, const std::string& out) {
  std::cout << m.scenario << " (" << m.hash << ") -> " << out << "\n";
  for (const auto& [k, v] : m.timings) std::cout << "  " << k << ": " << v << " s\n";
  for (const auto& v : m.violations) std::cout << "  VIOLATION " << v << "\n";
  return m.violations.empty() ? ok : violation;
}

template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const prion::ScenarioError& e) {
    std::cerr << e.what() << "\n";
    return validation;
  } catch (const prion::SolverError& e) {
    std::cerr << "solver failure at t=" << e.time() << " (component " << e.component()
              << "): " << e.what() << "\n";
    return solver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return solver;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prion aggregation-fragmentation simulator"};
  app.require_subcommand(1);
  Args args;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", args.scenario, "scenario JSON file");
    sub->add_option("--preset", args.preset, "bundled preset name");
    sub->add_option("--out", args.out, "output directory");
    sub->add_option("--threads", args.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--tol", args.tol, "solver tolerance override")->check(CLI::PositiveNumber);
  };

  auto* validate = app.add_subcommand("validate", "check a scenario and list every problem");
  add_common(validate);
  auto* run = app.add_subcommand("run", "run the scenario pipeline");
  add_common(run);
  auto* sweep = app.add_subcommand("sweep", "run the eps sweep and write the distance report");
  add_common(sweep);
  auto* audit = app.add_subcommand("audit", "run the eps sweep and audit the moment bounds");
  add_common(audit);
  auto* presets = app.add_subcommand("presets", "list bundled presets");
  presets->add_flag("--dump", args.dump, "print each preset as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : validation;
  }

  const prion::RunOptions opts{args.threads, args.tol};

  if (*presets) {
    for (const auto& s : prion::preset_catalog()) {
      if (args.dump)
        std::cout << prion::canonical_json(s) << "\n";
      else
        std::cout << s.name << "\t" << prion::to_string(s.pipeline) << "\n";
    }
    return ok;
  }
  if (*validate)
    return guarded([&] {
      const auto s = load(args);
      std::cout << "valid: " << s.name << " (" << prion::to_string(s.pipeline) << ")\n";
      return ok;
    });
  if (*run)
    return guarded([&] { return report(prion::run(load(args), args.out, opts), args.out); });
  if (*sweep)
    return guarded([&] {
      auto s = load(args);
      if (s.scaling.eps.size() < 3)
        throw prion::ScenarioError({"sweep needs at least 3 eps values"});
      s.pipeline = prion::Pipeline::sweep;
      return report(prion::run(s, args.out, opts), args.out);
    });
  if (*audit)
    return guarded([&] {
      auto s = load(args);
      if (s.scaling.eps.size() < 3)
        throw prion::ScenarioError({"audit needs at least 3 eps values"});
      return report(prion::run_audit(s, args.out, opts), args.out);
    });
  return ok;
}
