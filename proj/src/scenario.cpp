#include "prion/scenario.hpp"

#include <cmath>
#include <set>

#include "json.hpp"

namespace prion {

using nlohmann::json;

std::string to_string(Pipeline p) {
  switch (p) {
    case Pipeline::discrete: return "discrete";
    case Pipeline::continuum: return "continuum";
    case Pipeline::sweep: return "sweep";
    case Pipeline::audit: return "audit";
  }
  return "discrete";
}

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::string out = "invalid scenario:";
  for (const auto& e : errors) out += "\n  " + e;
  return out;
}

// Reads one JSON object, recording type errors and unknown keys.
class Section {
 public:
  Section(const json& doc, std::string path, std::vector<std::string>& errors)
      : path_(std::move(path)), errors_(errors) {
    if (doc.is_null()) return;
    if (!doc.is_object()) {
      errors_.push_back(label() + "must be an object");
      return;
    }
    obj_ = &doc;
  }

  ~Section() {
    if (!obj_) return;
    for (const auto& [key, _] : obj_->items())
      if (!seen_.count(key)) errors_.push_back("unknown key '" + prefix() + key + "'");
  }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!obj_ || !obj_->contains(key)) return;
    try {
      out = obj_->at(key).get<T>();
    } catch (const json::exception&) {
      errors_.push_back("'" + prefix() + key + "' has the wrong type");
    }
  }

  const json& child(const std::string& key) {
    seen_.insert(key);
    static const json null;
    if (!obj_ || !obj_->contains(key)) return null;
    return obj_->at(key);
  }

  std::string prefix() const { return path_.empty() ? "" : path_ + "."; }

 private:
  std::string label() const { return path_.empty() ? "document " : "'" + path_ + "' "; }

  const json* obj_ = nullptr;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& message, std::vector<std::string>& errors) {
  if (!ok) errors.push_back(message);
}

std::optional<SelfSimilarMeasure> build_measure(const KernelSpec& k, std::vector<std::string>& errors) {
  if (k.type == "uniform" || k.type == "boundary_weighted") {
    if (k.breaks.empty() && k.atoms.empty()) return SelfSimilarMeasure::lebesgue();
  }
  if (k.type == "file") return std::nullopt;
  try {
    std::vector<double> breaks = k.breaks, values = k.values;
    if (breaks.empty()) breaks = {0.0, 1.0};
    if (values.empty()) values = {0.0};
    SelfSimilarMeasure m(k.atoms, breaks, values);
    kernel_from_measure(m, 4);
    return m;
  } catch (const std::exception& e) {
    errors.push_back(std::string("kernel: ") + e.what());
    return std::nullopt;
  }
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

RateFamily Scenario::rate_family() const {
  auto r = power_law_rates(rates.alpha, rates.theta, rates.m, rates.K, rates.lambda, rates.gamma);
  r.beta.scale = rates.beta_scale;
  r.beta.shift = rates.beta_shift;
  r.tau.scale = rates.tau_scale;
  r.mu.scale = rates.mu_scale;
  return r;
}

std::function<double(double)> Scenario::initial_profile() const {
  const auto& p = initial;
  if (p.family == "zero") return [](double) { return 0.0; };
  if (p.family == "gaussian")
    return [p](double x) {
      const double s = (x - p.center) / p.width;
      return p.amplitude * std::exp(-0.5 * s * s);
    };
  return [p](double x) {
    const double s = (x - p.center) / p.width;
    return std::abs(s) < 1.0 ? p.amplitude * std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
  };
}

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError({std::string("not valid JSON: ") + e.what()});
  }
  std::vector<std::string> errors;
  Scenario s;
  {
    Section top(doc, "", errors);
    top.get("name", s.name);
    std::string pipeline = to_string(s.pipeline);
    top.get("pipeline", pipeline);
    if (pipeline == "discrete") s.pipeline = Pipeline::discrete;
    else if (pipeline == "continuum") s.pipeline = Pipeline::continuum;
    else if (pipeline == "sweep") s.pipeline = Pipeline::sweep;
    else if (pipeline == "audit") s.pipeline = Pipeline::audit;
    else errors.push_back("pipeline must be one of discrete, continuum, sweep, audit");
    top.get("tol", s.tol);
    top.get("times", s.times);
    top.get("seed", s.seed);
    top.get("closure", s.closure);

    {
      Section r(top.child("rates"), "rates", errors);
      r.get("alpha", s.rates.alpha);
      r.get("theta", s.rates.theta);
      r.get("m", s.rates.m);
      r.get("K", s.rates.K);
      r.get("lambda", s.rates.lambda);
      r.get("gamma", s.rates.gamma);
      r.get("beta_scale", s.rates.beta_scale);
      r.get("tau_scale", s.rates.tau_scale);
      r.get("mu_scale", s.rates.mu_scale);
      r.get("beta_shift", s.rates.beta_shift);
    }
    {
      Section k(top.child("kernel"), "kernel", errors);
      k.get("type", s.kernel.type);
      std::vector<std::array<double, 2>> atoms;
      k.get("atoms", atoms);
      for (const auto& a : atoms) s.kernel.atoms.push_back({a[0], a[1]});
      k.get("breaks", s.kernel.breaks);
      k.get("values", s.kernel.values);
      k.get("r", s.kernel.r);
      k.get("path", s.kernel.path);
    }
    {
      Section c(top.child("scaling"), "scaling", errors);
      c.get("x0", s.scaling.x0);
      std::string regime = to_string(s.scaling.regime);
      c.get("regime", regime);
      try {
        s.scaling.regime = regime_from_string(regime);
      } catch (const std::exception&) {
        errors.push_back("scaling.regime must be standard or boundary_breakage");
      }
      c.get("eps", s.scaling.eps);
      c.get("n0", s.scaling.n0);
    }
    {
      Section i(top.child("initial"), "initial", errors);
      i.get("family", s.initial.family);
      i.get("center", s.initial.center);
      i.get("width", s.initial.width);
      i.get("amplitude", s.initial.amplitude);
      i.get("V0", s.initial.V0);
    }
    {
      Section g(top.child("grid"), "grid", errors);
      g.get("xmax", s.grid.xmax);
      g.get("cells", s.grid.cells);
      g.get("N", s.grid.N);
    }
    {
      Section b(top.child("boundary"), "boundary", errors);
      b.get("mode", s.boundary.mode);
      b.get("psi", s.boundary.psi);
      b.get("renewal", s.boundary.renewal);
    }
  }

  const auto& r = s.rates;
  require(r.theta >= 0.0 && r.theta <= 1.0, "rates.theta must lie in [0,1]", errors);
  require(r.alpha >= 0.0, "rates.alpha must be >= 0", errors);
  require(r.m >= 0.0, "rates.m must be >= 0", errors);
  require(r.K > 0.0, "rates.K must be > 0", errors);
  require(r.lambda >= 0.0 && r.gamma >= 0.0, "rates.lambda and rates.gamma must be >= 0", errors);
  require(r.beta_scale >= 0.0 && r.tau_scale >= 0.0 && r.mu_scale >= 0.0,
          "rate scales must be >= 0", errors);
  require(r.beta_shift >= 0.0, "rates.beta_shift must be >= 0", errors);

  const auto& k = s.kernel;
  const bool known_kernel = k.type == "uniform" || k.type == "measure" ||
                            k.type == "boundary_weighted" || k.type == "file";
  require(known_kernel, "kernel.type must be one of uniform, measure, boundary_weighted, file",
          errors);
  if (k.type == "file") require(!k.path.empty(), "kernel.path is required for file kernels", errors);
  if (k.type == "measure") require(!k.breaks.empty() || !k.atoms.empty(),
                                   "kernel.measure needs breaks/values or atoms", errors);
  if (known_kernel) build_measure(k, errors);
  require(k.r >= 0.0, "kernel.r must be >= 0", errors);

  const auto& c = s.scaling;
  require(c.x0 >= 0.0, "scaling.x0 must be >= 0", errors);
  require(c.n0 >= 1, "scaling.n0 must be >= 1", errors);
  for (double e : c.eps) require(e > 0.0 && e <= 1.0, "scaling.eps entries must lie in (0,1]", errors);
  for (std::size_t i = 1; i < c.eps.size(); ++i)
    if (!(c.eps[i] < c.eps[i - 1])) {
      errors.push_back("scaling.eps must be strictly decreasing");
      break;
    }
  if (s.pipeline == Pipeline::sweep || s.pipeline == Pipeline::audit)
    require(c.eps.size() >= 3, "sweep and audit pipelines need at least 3 eps values", errors);

  const auto& i = s.initial;
  require(i.family == "bump" || i.family == "gaussian" || i.family == "zero",
          "initial.family must be one of bump, gaussian, zero", errors);
  require(i.width > 0.0, "initial.width must be > 0", errors);
  require(i.amplitude >= 0.0 && i.V0 >= 0.0, "initial amplitude and V0 must be >= 0", errors);

  require(s.grid.xmax > c.x0, "grid.xmax must exceed scaling.x0", errors);
  require(s.grid.cells >= 1, "grid.cells must be >= 1", errors);
  require(s.grid.N > c.n0, "grid.N must exceed scaling.n0", errors);

  const auto& b = s.boundary;
  require(b.mode == "zero_influx" || b.mode == "general" || b.mode == "renewal",
          "boundary.mode must be one of zero_influx, general, renewal", errors);
  if (b.mode == "general" && s.pipeline == Pipeline::continuum)
    require(c.x0 > 0.0, "boundary.mode general requires scaling.x0 > 0", errors);
  require(b.psi >= 0.0 && b.renewal >= 0.0, "boundary.psi and boundary.renewal must be >= 0",
          errors);

  if (s.pipeline == Pipeline::continuum)
    require(k.type == "uniform" || k.type == "measure",
            "continuum runs need a uniform or measure kernel", errors);

  require(s.tol > 0.0, "tol must be > 0", errors);
  require(!s.times.empty(), "times must not be empty", errors);
  for (double t : s.times) require(t >= 0.0, "times must be >= 0", errors);
  for (std::size_t n = 1; n < s.times.size(); ++n)
    if (!(s.times[n] > s.times[n - 1])) {
      errors.push_back("times must be sorted strictly increasing");
      break;
    }

  if (!errors.empty()) throw ScenarioError(std::move(errors));
  return s;
}

std::string canonical_json(const Scenario& s) {
  json atoms = json::array();
  for (const auto& a : s.kernel.atoms) atoms.push_back({a.location, a.weight});
  const json doc = {
      {"name", s.name},
      {"pipeline", to_string(s.pipeline)},
      {"rates",
       {{"alpha", s.rates.alpha}, {"theta", s.rates.theta}, {"m", s.rates.m},
        {"K", s.rates.K}, {"lambda", s.rates.lambda}, {"gamma", s.rates.gamma},
        {"beta_scale", s.rates.beta_scale}, {"tau_scale", s.rates.tau_scale},
        {"mu_scale", s.rates.mu_scale}, {"beta_shift", s.rates.beta_shift}}},
      {"kernel",
       {{"type", s.kernel.type}, {"atoms", atoms}, {"breaks", s.kernel.breaks},
        {"values", s.kernel.values}, {"r", s.kernel.r}, {"path", s.kernel.path}}},
      {"scaling",
       {{"x0", s.scaling.x0}, {"regime", to_string(s.scaling.regime)},
        {"eps", s.scaling.eps}, {"n0", s.scaling.n0}}},
      {"initial",
       {{"family", s.initial.family}, {"center", s.initial.center},
        {"width", s.initial.width}, {"amplitude", s.initial.amplitude},
        {"V0", s.initial.V0}}},
      {"grid", {{"xmax", s.grid.xmax}, {"cells", s.grid.cells}, {"N", s.grid.N}}},
      {"boundary",
       {{"mode", s.boundary.mode}, {"psi", s.boundary.psi}, {"renewal", s.boundary.renewal}}},
      {"tol", s.tol},
      {"times", s.times},
      {"seed", s.seed},
      {"closure", s.closure}};
  return doc.dump(2);
}

std::uint64_t scenario_hash(const Scenario& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical_json(s)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<Scenario> preset_catalog() {
  std::vector<Scenario> out;
  std::vector<double> sweep_times;
  for (int k = 0; k <= 10; ++k) sweep_times.push_back(0.1 * k);

  {
    Scenario s;
    s.name = "null_dynamics";
    s.pipeline = Pipeline::sweep;
    s.rates = {1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    s.scaling.x0 = 0.5;
    s.scaling.eps = dyadic_eps_list();
    s.grid.cells = 960;
    s.times = sweep_times;
    s.tol = 1e-8;
    out.push_back(s);
  }
  {
    // beta_i = beta (i - 1) with constant tau and mu and the uniform kernel:
    // the moments (v, sum u, sum i u) close.
    Scenario s;
    s.name = "masel_constant";
    s.pipeline = Pipeline::discrete;
    s.rates = {1.0, 0.0, 0.0, 1.0, 1.0, 0.1, 0.002, 0.05, 0.05, 1.0};
    s.scaling.n0 = 3;
    s.initial = {"bump", 40.0, 25.0, 0.01, 1.0};
    s.grid.N = 500;
    s.tol = 1e-8;
    s.closure = true;
    out.push_back(s);
  }
  {
    Scenario s;
    s.name = "greer_limit";
    s.pipeline = Pipeline::sweep;
    s.rates = {1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.2, 0.0};
    s.scaling.x0 = 0.5;
    s.scaling.eps = dyadic_eps_list();
    s.grid.cells = 960;
    s.times = sweep_times;
    s.tol = 1e-7;
    out.push_back(s);
  }
  {
    Scenario s;
    s.name = "transport_dominant";
    s.pipeline = Pipeline::sweep;
    s.rates = {1.0, 0.0, 0.0, 1.0, 2.0, 0.5, 0.05, 1.0, 0.0, 0.0};
    s.scaling.x0 = 0.5;
    s.scaling.eps = dyadic_eps_list();
    s.initial = {"bump", 1.25, 0.75, 1.0, 2.0};
    s.grid.cells = 960;
    s.times = sweep_times;
    s.tol = 1e-7;
    out.push_back(s);
  }
  {
    Scenario s = out[2];
    s.name = "boundary_breakage";
    s.scaling.regime = Regime::boundary_breakage;
    s.kernel.type = "boundary_weighted";
    s.kernel.r = 1.0;
    out.push_back(s);
  }
  {
    // i0 = 100 sets eps = 1/sqrt(i0); a = L/V = 2400/500; d0 = 5e-2.
    Scenario s;
    s.name = "biological_defaults";
    s.pipeline = Pipeline::discrete;
    s.rates = {1.0, 0.0, 0.0, 1.0, 2400.0 / 500.0, 1.0, 0.1, 1.0, 0.05, 0.0};
    s.scaling.x0 = 0.0;
    s.scaling.eps = {0.1};
    s.initial = {"gaussian", 1.0, 0.3, 1.0, 1.0};
    s.grid.xmax = 6.0;
    s.times = sweep_times;
    s.tol = 1e-8;
    out.push_back(s);
  }
  return out;
}

std::optional<Scenario> find_preset(const std::string& name) {
  for (auto& s : preset_catalog())
    if (s.name == name) return s;
  return std::nullopt;
}

}  // namespace prion
