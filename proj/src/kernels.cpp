#include "prion/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "prion/numerics.hpp"

namespace prion {

namespace {

constexpr double kLocationTol = 1e-14;

bool same_location(double a, double b) { return std::abs(a - b) <= kLocationTol; }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// SelfSimilarMeasure

SelfSimilarMeasure::SelfSimilarMeasure(std::vector<Atom> atoms, std::vector<double> breaks,
                                       std::vector<double> values, bool symmetric)
    : atoms_(std::move(atoms)),
      breaks_(std::move(breaks)),
      values_(std::move(values)),
      symmetric_(symmetric) {
  if (breaks_.empty() && values_.empty()) {
    breaks_ = {0.0, 1.0};
    values_ = {0.0};
  }
  if (breaks_.size() != values_.size() + 1)
    throw std::invalid_argument("measure density: need one more breakpoint than values");
  if (breaks_.front() != 0.0 || breaks_.back() != 1.0)
    throw std::invalid_argument("measure density: breakpoints must span [0,1]");
  for (std::size_t k = 0; k + 1 < breaks_.size(); ++k)
    if (!(breaks_[k] < breaks_[k + 1]))
      throw std::invalid_argument("measure density: breakpoints must be increasing");
  for (double v : values_)
    if (!(v >= 0.0)) throw std::invalid_argument("measure density: values must be nonnegative");
  for (const auto& a : atoms_) {
    if (!(a.location >= 0.0 && a.location <= 1.0))
      throw std::invalid_argument("measure atom outside [0,1]");
    if (!(a.weight >= 0.0)) throw std::invalid_argument("measure atom weight negative");
  }
  std::sort(atoms_.begin(), atoms_.end(),
            [](const Atom& l, const Atom& r) { return l.location < r.location; });
}

SelfSimilarMeasure SelfSimilarMeasure::lebesgue() { return {{}, {0.0, 1.0}, {1.0}, true}; }

SelfSimilarMeasure SelfSimilarMeasure::symmetric_atom(double location) {
  if (same_location(location, 0.5)) return {{{0.5, 1.0}}, {}, {}, true};
  return {{{location, 0.5}, {1.0 - location, 0.5}}, {}, {}, true};
}

double SelfSimilarMeasure::total_mass() const {
  double m = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k) m += values_[k] * (breaks_[k + 1] - breaks_[k]);
  for (const auto& a : atoms_) m += a.weight;
  return m;
}

namespace {

double density_mass(const std::vector<double>& breaks, const std::vector<double>& values,
                    double a, double b) {
  double m = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double lo = std::max(a, breaks[k]);
    const double hi = std::min(b, breaks[k + 1]);
    if (hi > lo) m += values[k] * (hi - lo);
  }
  return m;
}

}  // namespace

double SelfSimilarMeasure::open_mass(double a, double b) const {
  if (!(b > a)) return 0.0;
  double m = density_mass(breaks_, values_, a, b);
  for (const auto& at : atoms_)
    if (at.location > a + kLocationTol && at.location < b - kLocationTol) m += at.weight;
  return m;
}

double SelfSimilarMeasure::mass(double a, double b) const {
  if (!(b > a)) return 0.0;
  double m = density_mass(breaks_, values_, a, b);
  for (const auto& at : atoms_)
    if (at.location >= a - kLocationTol && at.location < b - kLocationTol) m += at.weight;
  return m;
}

double SelfSimilarMeasure::moment(double a, double b) const {
  if (!(b > a)) return 0.0;
  double m = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k) {
    const double lo = std::max(a, breaks_[k]);
    const double hi = std::min(b, breaks_[k + 1]);
    if (hi > lo) m += values_[k] * 0.5 * (hi * hi - lo * lo);
  }
  for (const auto& at : atoms_)
    if (at.location >= a - kLocationTol && at.location < b - kLocationTol)
      m += at.weight * at.location;
  return m;
}

double SelfSimilarMeasure::atom_at(double x) const {
  double w = 0.0;
  for (const auto& at : atoms_)
    if (same_location(at.location, x)) w += at.weight;
  return w;
}

double SelfSimilarMeasure::integrate(const std::function<double(double)>& f, double a,
                                     double b) const {
  if (!(b > a)) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (values_[k] == 0.0) continue;
    const double lo = std::max(a, breaks_[k]);
    const double hi = std::min(b, breaks_[k + 1]);
    if (hi > lo) {
      const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) * 64.0)));
      acc += values_[k] * gauss5_composite(f, lo, hi, panels);
    }
  }
  for (const auto& at : atoms_)
    if (at.location >= a - kLocationTol && at.location < b - kLocationTol)
      acc += at.weight * f(at.location);
  return acc;
}

double SelfSimilarMeasure::symmetry_defect() const {
  std::vector<double> pts = breaks_;
  for (double p : breaks_) pts.push_back(1.0 - p);
  for (const auto& at : atoms_) {
    pts.push_back(at.location);
    pts.push_back(1.0 - at.location);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(), same_location), pts.end());
  double defect = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double p = pts[k], q = pts[k + 1];
    defect = std::max(defect, std::abs(open_mass(p, q) - open_mass(1.0 - q, 1.0 - p)));
  }
  for (double p : pts) defect = std::max(defect, std::abs(atom_at(p) - atom_at(1.0 - p)));
  return defect;
}

// ---------------------------------------------------------------------------
// FragmentationKernel

std::string to_string(KernelProvenance p) {
  switch (p) {
    case KernelProvenance::uniform: return "uniform";
    case KernelProvenance::from_measure: return "from_measure";
    case KernelProvenance::boundary_weighted: return "boundary_weighted";
    case KernelProvenance::custom: return "custom";
  }
  return "custom";
}

KernelProvenance provenance_from_string(const std::string& s) {
  if (s == "uniform") return KernelProvenance::uniform;
  if (s == "from_measure") return KernelProvenance::from_measure;
  if (s == "boundary_weighted") return KernelProvenance::boundary_weighted;
  if (s == "custom") return KernelProvenance::custom;
  throw std::invalid_argument("unknown kernel provenance '" + s + "'");
}

FragmentationKernel::FragmentationKernel(std::vector<std::vector<double>> rows,
                                         KernelProvenance provenance)
    : rows_(std::move(rows)), provenance_(provenance) {
  if (rows_.empty()) throw std::invalid_argument("kernel needs jmax >= 2");
  for (std::size_t r = 0; r < rows_.size(); ++r)
    if (rows_[r].size() != r + 1)
      throw std::invalid_argument("kernel row " + std::to_string(r + 2) + " has wrong length");
}

std::span<const double> FragmentationKernel::row(int j) const {
  if (j < 2 || j > jmax()) return {};
  return rows_[j - 2];
}

std::span<double> FragmentationKernel::mutable_row(int j) {
  if (j < 2 || j > jmax()) throw std::out_of_range("kernel row index");
  return rows_[j - 2];
}

FragmentationKernel uniform_kernel(int jmax) {
  if (jmax < 2) throw std::invalid_argument("uniform_kernel: jmax must be >= 2");
  std::vector<std::vector<double>> rows;
  rows.reserve(jmax - 1);
  for (int j = 2; j <= jmax; ++j) rows.emplace_back(j - 1, 1.0 / (j - 1));
  return {std::move(rows), KernelProvenance::uniform};
}

FragmentationKernel kernel_from_measure(const SelfSimilarMeasure& k0, int jmax) {
  if (jmax < 2) throw std::invalid_argument("kernel_from_measure: jmax must be >= 2");
  if (std::abs(k0.total_mass() - 1.0) > 1e-12)
    throw std::invalid_argument("kernel_from_measure: measure must have unit mass");
  if (!k0.symmetric() || k0.symmetry_defect() > 1e-12)
    throw std::invalid_argument("kernel_from_measure: measure must be symmetric");

  const double atom0 = k0.atom_at(0.0);
  std::vector<std::vector<double>> rows;
  rows.reserve(jmax - 1);
  // Parent size 2 has a single admissible split.
  rows.push_back({1.0});
  for (int j = 3; j <= jmax; ++j) {
    std::vector<double> row(j - 1);
    const double denom = static_cast<double>(j - 1);
    for (int i = 1; i <= j - 1; ++i) {
      const double a = (i - 1) / denom;
      const double b = i / denom;
      double k = k0.open_mass(a, b) + 0.5 * k0.atom_at(a) + 0.5 * k0.atom_at(b);
      if (i == 1) k += 0.5 * atom0;
      if (i == j - 1) k += 0.5 * atom0;
      row[i - 1] = k;
    }
    rows.push_back(std::move(row));
  }
  return {std::move(rows), KernelProvenance::from_measure};
}

FragmentationKernel boundary_weighted_kernel(double eps, std::span<const double> r,
                                             const FragmentationKernel& interior, int jmax) {
  if (jmax < 2) throw std::invalid_argument("boundary_weighted_kernel: jmax must be >= 2");
  if (eps < 0.0) throw std::invalid_argument("boundary_weighted_kernel: eps must be >= 0");
  if (static_cast<int>(r.size()) <= jmax)
    throw std::invalid_argument("boundary_weighted_kernel: r must be indexed up to jmax");
  if (interior.jmax() < jmax)
    throw std::invalid_argument("boundary_weighted_kernel: interior kernel too small");

  std::vector<std::vector<double>> rows;
  rows.reserve(jmax - 1);
  rows.push_back({1.0});
  for (int j = 3; j <= jmax; ++j) {
    std::vector<double> row(j - 1, 0.0);
    if (j == 3) {
      row = {0.5, 0.5};
      rows.push_back(std::move(row));
      continue;
    }
    const double er = eps * r[j];
    if (er > 1.0 || r[j] < 0.0)
      throw std::invalid_argument("boundary_weighted_kernel: eps*r_j must lie in [0,1] (j=" +
                                  std::to_string(j) + ")");
    double interior_sum = 0.0;
    for (int i = 2; i <= j - 2; ++i) interior_sum += interior(i, j);
    if (!(interior_sum > 0.0))
      throw std::invalid_argument("boundary_weighted_kernel: interior row " +
                                  std::to_string(j) + " cannot be renormalized");
    row[0] = row[j - 2] = 0.5 * (1.0 - er);
    for (int i = 2; i <= j - 2; ++i) row[i - 1] = er * interior(i, j) / interior_sum;
    rows.push_back(std::move(row));
  }
  return {std::move(rows), KernelProvenance::boundary_weighted};
}

AxiomReport check_axioms(const FragmentationKernel& kernel) {
  AxiomReport rep;
  rep.min_entry = kernel.jmax() >= 2 ? kernel(1, 2) : 0.0;
  for (int j = 2; j <= kernel.jmax(); ++j) {
    const auto row = kernel.row(j);
    double sum = 0.0, mass = 0.0, sym = 0.0;
    for (int i = 1; i < j; ++i) {
      const double k = row[i - 1];
      sum += k;
      mass += i * k;
      sym = std::max(sym, std::abs(k - row[j - i - 1]));
      rep.min_entry = std::min(rep.min_entry, k);
    }
    const double sum_def = std::abs(sum - 1.0);
    const double mass_def = std::abs(2.0 * mass - j);
    if (sum_def > rep.row_sum_defect) {
      rep.row_sum_defect = sum_def;
      rep.row_sum_worst_j = j;
    }
    if (sym > rep.symmetry_defect) {
      rep.symmetry_defect = sym;
      rep.symmetry_worst_j = j;
    }
    if (mass_def > rep.mass_defect) {
      rep.mass_defect = mass_def;
      rep.mass_worst_j = j;
    }
  }
  return rep;
}

namespace {

// S_{p,j} for p = 0..len-1 (saturating at the row total beyond p = j).
std::vector<double> partial_sums(const FragmentationKernel& kernel, int j, int len) {
  std::vector<double> s(len, 0.0);
  double acc = 0.0;
  for (int p = 0; p < len; ++p) {
    s[p] = acc;
    acc += kernel(p, j);
  }
  return s;
}

}  // namespace

double compactness_modulus(const FragmentationKernel& kernel) {
  if (kernel.jmax() < 3) throw std::invalid_argument("compactness_modulus: jmax must be >= 3");
  double modulus = 0.0;
  for (int j = 2; j < kernel.jmax(); ++j) {
    const int len = j + 2;
    const auto lo = partial_sums(kernel, j, len);
    const auto hi = partial_sums(kernel, j + 1, len);
    double cum = 0.0;
    for (int p = 0; p < len; ++p) {
      cum += hi[p] - lo[p];
      modulus = std::max(modulus, std::abs(cum));
    }
  }
  return modulus;
}

StrengthenedModulus strengthened_modulus(const FragmentationKernel& kernel) {
  if (kernel.jmax() < 3) throw std::invalid_argument("strengthened_modulus: jmax must be >= 3");
  StrengthenedModulus out{0.0, 0.0};
  for (int j = 2; j < kernel.jmax(); ++j) {
    double cum = 0.0;
    for (int i = 1; i <= j; ++i) {
      cum += kernel(i, j + 1) - kernel(i, j);
      out.repartition = std::max(out.repartition, j * std::abs(cum));
    }
  }
  for (int j = 2; j <= kernel.jmax(); ++j)
    for (double k : kernel.row(j)) out.entry = std::max(out.entry, j * k);
  return out;
}

// ---------------------------------------------------------------------------
// RepartitionTables

RepartitionTables::RepartitionTables(FragmentationKernel kernel, double eps)
    : kernel_(std::move(kernel)), eps_(eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("repartition_tables: eps must be > 0");
  partial_.reserve(kernel_.jmax() - 1);
  prefix_.reserve(kernel_.jmax() - 1);
  for (int j = 2; j <= kernel_.jmax(); ++j) {
    partial_.push_back(partial_sums(kernel_, j, j + 1));
    const auto& s = partial_.back();
    std::vector<double> pre(s.size() + 1, 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) pre[i + 1] = pre[i] + s[i];
    prefix_.push_back(std::move(pre));
  }
}

double RepartitionTables::partial_sum(int i, int j) const {
  if (j < 2 || j > kernel_.jmax() || i <= 0) return 0.0;
  const auto& s = partial_[j - 2];
  return s[std::min<std::size_t>(i, s.size() - 1)];
}

void RepartitionTables::check_range(double x, double y) const {
  const double top = xmax();
  if (!(x >= 0.0 && x <= top && y >= 0.0 && y <= top))
    throw std::out_of_range("repartition tables: argument outside [0, eps*jmax]");
}

double RepartitionTables::density(double x, double y) const {
  check_range(x, y);
  const auto i = static_cast<int>(cell_index(x, eps_));
  const auto j = static_cast<int>(cell_index(y, eps_));
  return kernel_(i, j) / eps_;
}

double RepartitionTables::F(double x, double y) const {
  check_range(x, y);
  const auto i = static_cast<int>(cell_index(x, eps_));
  const auto j = static_cast<int>(cell_index(y, eps_));
  return partial_sum(i, j) + (x - i * eps_) / eps_ * kernel_(i, j);
}

double RepartitionTables::G(double x, double y) const {
  check_range(x, y);
  const auto i = static_cast<int>(cell_index(x, eps_));
  const auto j = static_cast<int>(cell_index(y, eps_));
  double prefix = 0.0;
  if (j >= 2 && j <= kernel_.jmax()) {
    const auto& pre = prefix_[j - 2];
    const int last = static_cast<int>(pre.size()) - 1;
    prefix = i <= last ? pre[i] : pre[last] + (i - last) * partial_[j - 2].back();
  }
  const double dx = x - i * eps_;
  const double s = partial_sum(i, j);
  return eps_ * prefix + dx * s + 0.5 * eps_ * s + dx * dx / (2.0 * eps_) * kernel_(i, j);
}

double RepartitionTables::pair_direct(const std::function<double(double)>& phi,
                                      double y) const {
  check_range(0.0, y);
  const auto j = static_cast<int>(cell_index(y, eps_));
  double acc = 0.0;
  for (int i = 1; i < j; ++i) {
    const double k = kernel_(i, j);
    if (k != 0.0) acc += k / eps_ * gauss5(phi, i * eps_, (i + 1) * eps_);
  }
  return acc;
}

double RepartitionTables::pair_by_parts(const std::function<double(double)>& phi,
                                        const std::function<double(double)>& dphi,
                                        double y) const {
  check_range(0.0, y);
  const auto n = static_cast<int>(cell_index(y, eps_));
  double integral = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double lo = i * eps_;
    const double hi = std::min(y, (i + 1) * eps_);
    if (hi > lo)
      integral += gauss5([&](double x) { return F(x, y) * dphi(x); }, lo, hi);
  }
  return phi(y) * F(y, y) - integral;
}

double RepartitionTables::small_fragment_moment(double a, double y) const {
  return a * F(a, y) - G(a, y);
}

// ---------------------------------------------------------------------------
// Text format

void write_kernel(std::ostream& out, const FragmentationKernel& kernel) {
  out << "prion-kernel 1\n";
  out << "jmax " << kernel.jmax() << "\n";
  out << "provenance " << to_string(kernel.provenance()) << "\n";
  for (int j = 2; j <= kernel.jmax(); ++j) {
    out << j;
    for (double k : kernel.row(j)) out << ' ' << format_double(k);
    out << '\n';
  }
}

FragmentationKernel read_kernel(std::istream& in) {
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "prion-kernel" || version != 1)
    throw std::invalid_argument("kernel file: missing 'prion-kernel 1' header");
  std::string key;
  int jmax = 0;
  std::string prov;
  if (!(in >> key >> jmax) || key != "jmax" || jmax < 2)
    throw std::invalid_argument("kernel file: bad jmax line");
  if (!(in >> key >> prov) || key != "provenance")
    throw std::invalid_argument("kernel file: bad provenance line");
  std::vector<std::vector<double>> rows;
  for (int j = 2; j <= jmax; ++j) {
    int jj = 0;
    if (!(in >> jj) || jj != j)
      throw std::invalid_argument("kernel file: expected row " + std::to_string(j));
    std::vector<double> row(j - 1);
    for (auto& k : row)
      if (!(in >> k)) throw std::invalid_argument("kernel file: short row " + std::to_string(j));
    rows.push_back(std::move(row));
  }
  return {std::move(rows), provenance_from_string(prov)};
}

}  // namespace prion
