#include "prion/ode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace prion {

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

std::pair<std::size_t, double> dominant_rate(std::span<const double> y,
                                             std::span<const double> f) {
  std::size_t best = 0;
  double rate = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double r = std::abs(f[k]) / std::max(std::abs(y[k]), 1e-300);
    if (std::isfinite(r) && r > rate) {
      rate = r;
      best = k;
    }
  }
  return {best, rate};
}

}  // namespace

std::vector<std::vector<double>> DormandPrince::integrate(const OdeRhs& rhs,
                                                          std::vector<double> y0, double t0,
                                                          std::span<const double> output_times,
                                                          const StepObserver& observer,
                                                          const StepLimiter& limiter) {
  if (!(opts_.tol > 0.0)) throw std::invalid_argument("integrator: tol must be > 0");
  if (!std::is_sorted(output_times.begin(), output_times.end()))
    throw std::invalid_argument("integrator: output times must be sorted");
  if (!output_times.empty() && output_times.front() < t0)
    throw std::invalid_argument("integrator: output times precede the initial time");

  const std::size_t n = y0.size();
  stats_ = {};
  std::vector<double> y = std::move(y0), ynew(n), tmp(n);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);

  auto eval = [&](double t, const std::vector<double>& state, std::vector<double>& out) {
    rhs(t, state, out);
    ++stats_.rhs_evaluations;
  };

  double t = t0;
  eval(t, y, k1);
  if (observer) observer(t, y, k1);

  std::vector<std::vector<double>> snapshots;
  snapshots.reserve(output_times.size());
  std::size_t next_out = 0;
  while (next_out < output_times.size() && output_times[next_out] <= t) {
    snapshots.push_back(y);
    ++next_out;
  }
  if (next_out == output_times.size()) return snapshots;

  const double atol = opts_.tol, rtol = opts_.tol;
  const double t_end = output_times.back();

  // Initial step from the scaled state and slope magnitudes.
  double h;
  {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double sc = atol + rtol * std::abs(y[k]);
      d0 = std::max(d0, std::abs(y[k]) / sc);
      d1 = std::max(d1, std::abs(k1[k]) / sc);
    }
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, t_end - t);
  }
  double err_old = 1e-4;

  while (next_out < output_times.size()) {
    if (stats_.accepted + stats_.rejected >= opts_.max_steps) {
      const auto [comp, rate] = dominant_rate(y, k1);
      throw SolverError("integrator: step budget exhausted", t, comp, rate);
    }
    if (limiter) h = std::min(h, limiter(t, y));
    const double target = output_times[next_out];
    const double h_natural = h;
    bool hits_output = false;
    if (t + h >= target || target - (t + h) < 1e-12 * std::max(1.0, std::abs(target))) {
      h = target - t;
      hits_output = true;
    }
    if (h < opts_.h_min * std::max(1.0, std::abs(t))) {
      const auto [comp, rate] = dominant_rate(y, k1);
      char msg[160];
      std::snprintf(msg, sizeof msg,
                    "integrator: step size underflow at t=%.6g (component %zu, rate %.3g)", t,
                    comp, rate);
      throw SolverError(msg, t, comp, rate);
    }

    for (std::size_t k = 0; k < n; ++k) tmp[k] = y[k] + h * a21 * k1[k];
    eval(t + c2 * h, tmp, k2);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = y[k] + h * (a31 * k1[k] + a32 * k2[k]);
    eval(t + c3 * h, tmp, k3);
    for (std::size_t k = 0; k < n; ++k)
      tmp[k] = y[k] + h * (a41 * k1[k] + a42 * k2[k] + a43 * k3[k]);
    eval(t + c4 * h, tmp, k4);
    for (std::size_t k = 0; k < n; ++k)
      tmp[k] = y[k] + h * (a51 * k1[k] + a52 * k2[k] + a53 * k3[k] + a54 * k4[k]);
    eval(t + c5 * h, tmp, k5);
    for (std::size_t k = 0; k < n; ++k)
      tmp[k] = y[k] + h * (a61 * k1[k] + a62 * k2[k] + a63 * k3[k] + a64 * k4[k] + a65 * k5[k]);
    eval(t + h, tmp, k6);
    for (std::size_t k = 0; k < n; ++k)
      ynew[k] = y[k] + h * (a71 * k1[k] + a73 * k3[k] + a74 * k4[k] + a75 * k5[k] + a76 * k6[k]);

    bool negative = false;
    if (opts_.nonnegative) {
      double scale = 1.0;
      for (double v : ynew) scale = std::max(scale, std::abs(v));
      for (double v : ynew)
        if (v < -opts_.negative_slack * scale) {
          negative = true;
          break;
        }
    }
    if (negative || !std::all_of(ynew.begin(), ynew.end(), [](double v) { return std::isfinite(v); })) {
      ++stats_.rejected;
      if (negative) ++stats_.negativity_rejections;
      h *= 0.5;
      continue;
    }

    eval(t + h, ynew, k7);
    double e = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double ek =
          h * (e1 * k1[k] + e3 * k3[k] + e4 * k4[k] + e5 * k5[k] + e6 * k6[k] + e7 * k7[k]);
      const double sc = atol + rtol * std::max(std::abs(y[k]), std::abs(ynew[k]));
      e = std::max(e, std::abs(ek) / sc);
    }

    if (e <= 1.0) {
      ++stats_.accepted;
      t = hits_output ? target : t + h;
      bool clamped = false;
      if (opts_.nonnegative)
        for (double& v : ynew)
          if (v < 0.0) {
            v = 0.0;
            clamped = true;
          }
      std::swap(y, ynew);
      std::swap(k1, k7);
      if (clamped) eval(t, y, k1);
      if (observer) observer(t, y, k1);
      while (next_out < output_times.size() && output_times[next_out] <= t) {
        snapshots.push_back(y);
        ++next_out;
      }
      const double fac = e > 0.0 ? 0.9 * std::pow(e, -0.17) * std::pow(err_old, 0.04) : 5.0;
      err_old = std::max(e, 1e-4);
      h *= std::clamp(fac, 0.2, 5.0);
      // A step clipped to an output time says little about the natural step.
      if (hits_output) h = std::max(h, h_natural);
    } else {
      ++stats_.rejected;
      h *= std::max(0.2, 0.9 * std::pow(e, -0.2));
    }
  }
  return snapshots;
}

}  // namespace prion
