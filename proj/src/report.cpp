#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "prion/scenario.hpp"

namespace prion {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_number(row[k]);
    out << '\n';
  }
}

void write_discrete_csv(const fs::path& path, const DiscreteTrajectory& traj) {
  const auto res = mass_balance_residual(traj);
  std::vector<std::vector<double>> rows;
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
    const auto& st = traj.snapshots[s];
    rows.push_back({st.t, st.v, moments(st, 0.0, traj.eps), moments(st, 1.0, traj.eps),
                    moments(st, 1.0 + traj.sigma, traj.eps), res[s].absolute});
  }
  write_csv(path, {"t", "v", "M0", "M1", "M1_sigma", "residual"}, rows);
}

void write_continuum_csv(const fs::path& path, const ContinuumTrajectory& traj,
                         const ContinuumModel& model) {
  const double h = model.grid().h();
  std::vector<std::vector<double>> rows;
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
    const auto& st = traj.snapshots[s];
    double P = 0.0;
    for (double u : st.U) P += h * u;
    rows.push_back({st.t, st.V, P, model.polymer_mass(st.U), traj.residual[s],
                    st.boundary_flux_in, traj.leak[s]});
  }
  write_csv(path, {"t", "V", "M0", "M1", "residual", "influx", "leak"}, rows);
}

void write_field_csv(const fs::path& path, const ContinuumTrajectory& traj, const SizeGrid& grid) {
  std::vector<std::vector<double>> rows;
  for (const auto& st : traj.snapshots)
    for (int c = 0; c < grid.cells; ++c) rows.push_back({st.t, grid.center(c), st.U[c]});
  write_csv(path, {"t", "x", "U"}, rows);
}

void write_sweep_tables(const fs::path& dir, const ConvergenceReport& rep) {
  std::vector<std::string> header{"eps"};
  for (const auto& n : rep.test_names) header.push_back(n);
  header.push_back("monomer");
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < rep.eps.size(); ++k) {
    std::vector<double> row{rep.eps[k]};
    for (const auto& d : rep.D) row.push_back(d[k]);
    row.push_back(rep.monomer[k]);
    rows.push_back(std::move(row));
  }
  write_csv(dir / "distance.csv", header, rows);

  rows.clear();
  for (const auto& a : rep.audit.rows)
    rows.push_back({a.eps, a.moment_peak, a.moment_envelope, a.moment_margin, a.dvdt_peak,
                    a.dvdt_bound, a.dvdt_margin, a.return_peak, a.return_margin,
                    a.ok ? 1.0 : 0.0});
  write_csv(dir / "audit.csv",
            {"eps", "moment_peak", "moment_envelope", "moment_margin", "dvdt_peak", "dvdt_bound",
             "dvdt_margin", "release_peak", "release_margin", "ok"},
            rows);
}

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json series_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(finite_or_null(x));
  return a;
}

}  // namespace

std::string report_json(const std::string& name, const ConvergenceReport& rep) {
  json tests = json::array();
  for (std::size_t k = 0; k <= rep.test_names.size(); ++k) {
    const bool monomer = k == rep.test_names.size();
    const auto& fit = rep.fits[k];
    tests.push_back({{"name", monomer ? "monomer" : rep.test_names[k]},
                     {"distance", series_json(monomer ? rep.monomer : rep.D[k])},
                     {"nonincreasing", static_cast<bool>(rep.monotone[k])},
                     {"final_ratio", finite_or_null(rep.final_ratio[k])},
                     {"order", finite_or_null(fit.order)},
                     {"r2", finite_or_null(fit.r2)},
                     {"notes", fit.notes}});
  }
  json audit = json::array();
  for (const auto& a : rep.audit.rows)
    audit.push_back({{"eps", a.eps},
                     {"moment_peak", a.moment_peak},
                     {"moment_margin", finite_or_null(a.moment_margin)},
                     {"dvdt_peak", a.dvdt_peak},
                     {"dvdt_margin", finite_or_null(a.dvdt_margin)},
                     {"release_peak", a.return_peak},
                     {"release_margin", finite_or_null(a.return_margin)},
                     {"ok", a.ok}});
  const json doc = {{"schema", 1},
                    {"scenario", name},
                    {"eps", rep.eps},
                    {"tests", tests},
                    {"audit", audit},
                    {"audit_pass", rep.audit.pass()},
                    {"failures", rep.failures}};
  return doc.dump(2) + "\n";
}

std::string loglog_svg(const std::string& title, const std::vector<double>& eps,
                       const std::vector<std::string>& names,
                       const std::vector<std::vector<double>>& series) {
  const double W = 640, H = 420, L = 70, R = 170, T = 40, B = 50;
  double ylo = INFINITY, yhi = -INFINITY;
  for (const auto& s : series)
    for (double y : s)
      if (y > 0.0 && std::isfinite(y)) {
        ylo = std::min(ylo, y);
        yhi = std::max(yhi, y);
      }
  if (!(ylo < yhi)) {
    ylo = 1e-3;
    yhi = 1.0;
  }
  const double xlo = std::log10(*std::min_element(eps.begin(), eps.end()));
  const double xhi = std::log10(*std::max_element(eps.begin(), eps.end()));
  const double lylo = std::floor(std::log10(ylo)), lyhi = std::ceil(std::log10(yhi));
  auto px = [&](double e) {
    return L + (std::log10(e) - xlo) / std::max(xhi - xlo, 1e-12) * (W - L - R);
  };
  auto py = [&](double y) {
    return H - B - (std::log10(y) - lylo) / std::max(lyhi - lylo, 1e-12) * (H - T - B);
  };
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
    << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
    << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double p = lylo; p <= lyhi; p += 1.0) {
    const double y = py(std::pow(10.0, p));
    o << "<line x1=\"" << L << "\" y1=\"" << y << "\" x2=\"" << W - R << "\" y2=\"" << y
      << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e"
      << static_cast<int>(p) << "</text>\n";
  }
  for (double e : eps) {
    o << "<text x=\"" << px(e) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
      << format_number(e).substr(0, 8) << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
    << "\" text-anchor=\"middle\">eps</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* col = colors[s % 10];
    std::string pts;
    for (std::size_t k = 0; k < eps.size() && k < series[s].size(); ++k) {
      const double y = series[s][k];
      if (!(y > 0.0) || !std::isfinite(y)) continue;
      pts += format_number(px(eps[k])).substr(0, 10) + "," +
             format_number(py(y)).substr(0, 10) + " ";
    }
    o << "<polyline fill=\"none\" stroke=\"" << col << "\" points=\"" << pts << "\"/>\n";
    const double ly = T + 14.0 * (s + 1);
    o << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 30
      << "\" y2=\"" << ly - 4 << "\" stroke=\"" << col << "\"/>\n";
    o << "<text x=\"" << W - R + 34 << "\" y=\"" << ly << "\">" << names[s] << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string manifest_json(const RunManifest& m) {
  json artifacts = json::array();
  for (const auto& a : m.artifacts) artifacts.push_back({{"kind", a.kind}, {"path", a.path}});
  json timings = json::object();
  for (const auto& [k, v] : m.timings) timings[k] = v;
  const json doc = {{"schema", 1},
                    {"scenario", m.scenario},
                    {"scenario_hash", m.hash},
                    {"tool_version", m.tool_version},
                    {"seed", m.seed},
                    {"artifacts", artifacts},
                    {"timings_seconds", timings},
                    {"violations", m.violations}};
  return doc.dump(2) + "\n";
}

}  // namespace prion
