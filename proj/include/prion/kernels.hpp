#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace prion {

/// A symmetric probability measure k0 on [0,1]: point atoms plus a
/// piecewise-constant density. Self-similar fragmentation kernels are built
/// from it as k(x,y) dx = k0(x/y) dx / y.
class SelfSimilarMeasure {
 public:
  struct Atom {
    double location;
    double weight;
  };

  /// `breaks` has one more entry than `values`, starts at 0 and ends at 1.
  SelfSimilarMeasure(std::vector<Atom> atoms, std::vector<double> breaks,
                     std::vector<double> values, bool symmetric = true);

  /// Lebesgue measure on [0,1].
  static SelfSimilarMeasure lebesgue();
  /// Unit atom at `location` (mirrored to 1-location with half weight each
  /// unless location is 1/2).
  static SelfSimilarMeasure symmetric_atom(double location);

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }
  bool symmetric() const { return symmetric_; }

  double total_mass() const;
  /// Largest |k0((a,b)) - k0((1-b,1-a))| over the probe intervals built from
  /// all breakpoints and atom locations.
  double symmetry_defect() const;

  /// Measure of the open interval (a,b).
  double open_mass(double a, double b) const;
  /// Measure of the half-open interval [a,b).
  double mass(double a, double b) const;
  /// First moment of the measure restricted to [a,b).
  double moment(double a, double b) const;
  /// Weight of the atom at exactly `x` (within a few ulps), 0 if none.
  double atom_at(double x) const;
  /// Integral of f against the measure restricted to [a,b).
  double integrate(const std::function<double(double)>& f, double a,
                   double b) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<double> breaks_;
  std::vector<double> values_;
  bool symmetric_;
};

enum class KernelProvenance { uniform, from_measure, boundary_weighted, custom };

std::string to_string(KernelProvenance p);
KernelProvenance provenance_from_string(const std::string& s);

/// Lower-triangular discrete fragmentation kernel k_{i,j}, 1 <= i < j <= jmax.
/// Stored densely, one row per parent size j.
class FragmentationKernel {
 public:
  FragmentationKernel() = default;
  /// rows[j-2] holds (k_{1,j}, ..., k_{j-1,j}) for j = 2..jmax.
  FragmentationKernel(std::vector<std::vector<double>> rows,
                      KernelProvenance provenance);

  int jmax() const { return static_cast<int>(rows_.size()) + 1; }
  KernelProvenance provenance() const { return provenance_; }

  /// k_{i,j}; zero outside 1 <= i < j.
  double operator()(int i, int j) const {
    if (j < 2 || j > jmax() || i < 1 || i >= j) return 0.0;
    return rows_[j - 2][i - 1];
  }
  /// (k_{1,j}, ..., k_{j-1,j}); empty for j < 2.
  std::span<const double> row(int j) const;
  std::span<double> mutable_row(int j);

 private:
  std::vector<std::vector<double>> rows_;
  KernelProvenance provenance_ = KernelProvenance::custom;
};

FragmentationKernel uniform_kernel(int jmax);
FragmentationKernel kernel_from_measure(const SelfSimilarMeasure& k0, int jmax);
/// End-biased breakage: k_{1,j} = k_{j-1,j} = (1 - eps r_j)/2 and
/// k_{i,j} = eps r_j k0_{i,j} for 2 <= i <= j-2, with the interior of each
/// row of `interior` renormalized to unit sum. `r` is indexed by j.
FragmentationKernel boundary_weighted_kernel(double eps, std::span<const double> r,
                                             const FragmentationKernel& interior,
                                             int jmax);

struct AxiomReport {
  double row_sum_defect = 0;   // max_j |sum_i k_{i,j} - 1|
  int row_sum_worst_j = 0;
  double symmetry_defect = 0;  // max |k_{i,j} - k_{j-i,j}|
  int symmetry_worst_j = 0;
  double mass_defect = 0;      // max_j |2 sum_i i k_{i,j} - j|
  int mass_worst_j = 0;
  double min_entry = 0;

  bool holds(double construction_tol = 1e-12, double derived_tol = 1e-10) const {
    return row_sum_defect <= construction_tol && symmetry_defect <= construction_tol &&
           mass_defect <= derived_tol && min_entry >= 0.0;
  }
};

AxiomReport check_axioms(const FragmentationKernel& kernel);

/// max_{i,j} |sum_{p<i} (S_{p,j+1} - S_{p,j})| with S_{p,j} = sum_{r<p} k_{r,j}.
double compactness_modulus(const FragmentationKernel& kernel);

struct StrengthenedModulus {
  double repartition;  // max_{i,j} j |sum_{i'<=i} (k_{i',j+1} - k_{i',j})|
  double entry;        // max_{i,j} j k_{i,j}
};
StrengthenedModulus strengthened_modulus(const FragmentationKernel& kernel);

/// Stepwise repartition function of k^eps(x,y) = sum k_{i,j}/eps chi_i(x) chi_j(y)
/// and its primitive in x.
class RepartitionTables {
 public:
  RepartitionTables(FragmentationKernel kernel, double eps);

  double eps() const { return eps_; }
  double xmax() const { return eps_ * kernel_.jmax(); }
  const FragmentationKernel& kernel() const { return kernel_; }

  /// S_{i,j} = sum_{r<i} k_{r,j}, with k_{0,j} = 0.
  double partial_sum(int i, int j) const;
  double F(double x, double y) const;
  double G(double x, double y) const;
  /// Density k^eps(x,y).
  double density(double x, double y) const;

  /// int_0^y k^eps(x,y) phi(x) dx, summed cell by cell.
  double pair_direct(const std::function<double(double)>& phi, double y) const;
  /// Same pairing through phi(y) F(y,y) - int_0^y F(x,y) phi'(x) dx.
  double pair_by_parts(const std::function<double(double)>& phi,
                       const std::function<double(double)>& dphi, double y) const;
  /// int_0^a x k^eps(x,y) dx = a F(a,y) - G(a,y).
  double small_fragment_moment(double a, double y) const;

 private:
  void check_range(double x, double y) const;

  FragmentationKernel kernel_;
  double eps_;
  std::vector<std::vector<double>> partial_;  // partial_[j-2][i] = S_{i,j}, i=0..j
  std::vector<std::vector<double>> prefix_;   // prefix_[j-2][i] = sum_{p<i} S_{p,j}
};

void write_kernel(std::ostream& out, const FragmentationKernel& kernel);
FragmentationKernel read_kernel(std::istream& in);

}  // namespace prion
