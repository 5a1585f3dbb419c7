#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace prion {

/// Index i with i*eps <= x < (i+1)*eps, consistent with grid points
/// computed as i*eps in floating point.
inline std::int64_t cell_index(double x, double eps) {
  auto i = static_cast<std::int64_t>(std::floor(x / eps));
  if (static_cast<double>(i + 1) * eps <= x) ++i;
  if (static_cast<double>(i) * eps > x) --i;
  return i;
}

/// 5-point Gauss-Legendre rule on [a,b]; exact for polynomials of degree <= 9.
template <class F>
double gauss5(F&& f, double a, double b) {
  static constexpr std::array<double, 5> nodes = {
      0.0, -0.5384693101056830910363144, 0.5384693101056830910363144,
      -0.9061798459386639927976269, 0.9061798459386639927976269};
  static constexpr std::array<double, 5> weights = {
      0.5688888888888888888888889, 0.4786286704993664680412915,
      0.4786286704993664680412915, 0.2369268850561890875142640,
      0.2369268850561890875142640};
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double acc = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) acc += weights[k] * f(mid + half * nodes[k]);
  return acc * half;
}

/// Composite 5-point Gauss over n equal panels.
template <class F>
double gauss5_composite(F&& f, double a, double b, int panels) {
  const double w = (b - a) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) acc += gauss5(f, a + p * w, a + (p + 1) * w);
  return acc;
}

}  // namespace prion
