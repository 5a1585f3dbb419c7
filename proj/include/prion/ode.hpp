#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace prion {

/// Raised when the step size collapses. Carries the time reached and the
/// component with the largest relative rate |f_k / y_k| at that point.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double time, std::size_t component, double rate)
      : std::runtime_error(what), time_(time), component_(component), rate_(rate) {}
  double time() const { return time_; }
  std::size_t component() const { return component_; }
  double rate() const { return rate_; }

 private:
  double time_;
  std::size_t component_;
  double rate_;
};

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;
/// Called at the initial point and after every accepted step.
using StepObserver =
    std::function<void(double t, std::span<const double> y, std::span<const double> dydt)>;
/// Upper bound on the next step from the current state (e.g. a CFL limit).
using StepLimiter = std::function<double(double t, std::span<const double> y)>;

struct OdeOptions {
  double tol = 1e-8;  // absolute and relative local error tolerance
  double h_min = 1e-13;
  std::size_t max_steps = 5'000'000;
  /// Reject steps that produce a negative component; components within
  /// `negative_slack` of zero are clamped to zero instead.
  bool nonnegative = true;
  double negative_slack = 1e-13;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t negativity_rejections = 0;
  std::size_t rhs_evaluations = 0;
};

/// Dormand-Prince 5(4) embedded pair with PI step control. Steps are
/// shortened to land exactly on the requested output times.
class DormandPrince {
 public:
  explicit DormandPrince(OdeOptions options) : opts_(options) {}

  /// Integrates from (t0, y0) and returns the state at each output time
  /// (sorted, all >= t0).
  std::vector<std::vector<double>> integrate(const OdeRhs& rhs, std::vector<double> y0,
                                             double t0, std::span<const double> output_times,
                                             const StepObserver& observer = {},
                                             const StepLimiter& limiter = {});

  const OdeStats& stats() const { return stats_; }

 private:
  OdeOptions opts_;
  OdeStats stats_;
};

}  // namespace prion
