#include "prion/rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "prion/numerics.hpp"

namespace prion {

double CoefficientLaw::operator()(long i) const {
  if (table) {
    if (i < 0 || i >= static_cast<long>(table->size()))
      throw std::out_of_range("coefficient table has no entry for i=" + std::to_string(i));
    return (*table)[i];
  }
  const double base = std::max(static_cast<double>(i) - shift, 0.0);
  return scale * std::pow(base, exponent);
}

double CoefficientLaw::limit(double x) const {
  if (table) throw std::logic_error("tabulated coefficient has no closed-form limit");
  return scale * std::pow(std::max(x, 0.0), exponent);
}

const CoefficientLaw& RateFamily::law(Coefficient which) const {
  switch (which) {
    case Coefficient::beta: return beta;
    case Coefficient::tau: return tau;
    case Coefficient::mu: return mu;
  }
  return beta;
}

double RateFamily::exponent(Coefficient which) const {
  switch (which) {
    case Coefficient::beta: return alpha;
    case Coefficient::tau: return theta;
    case Coefficient::mu: return m;
  }
  return alpha;
}

RateFamily power_law_rates(double alpha, double theta, double m, double K, double lambda,
                           double gamma) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("power_law_rates: alpha must be >= 0");
  if (!(theta >= 0.0 && theta <= 1.0))
    throw std::invalid_argument("power_law_rates: theta must lie in [0,1]");
  if (!(m >= 0.0)) throw std::invalid_argument("power_law_rates: m must be >= 0");
  if (!(K > 0.0)) throw std::invalid_argument("power_law_rates: K must be > 0");
  RateFamily r;
  r.beta = {1.0, alpha, 0.0, std::nullopt};
  r.tau = {1.0, theta, 0.0, std::nullopt};
  r.mu = {1.0, m, 0.0, std::nullopt};
  r.lambda = lambda;
  r.gamma = gamma;
  r.alpha = alpha;
  r.theta = theta;
  r.m = m;
  r.K = K;
  return r;
}

std::string to_string(Regime r) {
  return r == Regime::standard ? "standard" : "boundary_breakage";
}

Regime regime_from_string(const std::string& s) {
  if (s == "standard") return Regime::standard;
  if (s == "boundary_breakage") return Regime::boundary_breakage;
  throw std::invalid_argument("unknown regime '" + s + "'");
}

Prefactors ScalingConfig::prefactors(const RateFamily& rates) const {
  Prefactors p;
  p.s = eps * eps;
  p.b = std::pow(eps, regime == Regime::standard ? rates.alpha : rates.alpha - 1.0);
  p.d = std::pow(eps, rates.m);
  p.nu = std::pow(eps, rates.theta - 1.0);
  return p;
}

int default_n0(double eps, double x0) {
  if (x0 <= 0.0) return 2;
  return std::max(2, static_cast<int>(std::lround(x0 / eps)));
}

double default_sigma(const RateFamily& r) {
  const double top = std::max({1.0, r.alpha, 1.0 + r.m, 1.0 + r.theta});
  return top - 1.0 + 0.5;
}

ScalingConfig make_scaling(double eps, double x0, const RateFamily& rates, Regime regime) {
  if (!(eps > 0.0)) throw std::invalid_argument("scaling: eps must be > 0");
  ScalingConfig cfg;
  cfg.eps = eps;
  cfg.x0 = x0;
  cfg.n0 = default_n0(eps, x0);
  cfg.sigma = default_sigma(rates);
  cfg.regime = regime;
  return cfg;
}

double rescaled_coefficient(const RateFamily& family, Coefficient which, double eps, double x,
                            int n0) {
  const auto i = cell_index(x, eps);
  if (i < n0) return 0.0;
  return std::pow(eps, family.exponent(which)) * family.law(which)(static_cast<long>(i));
}

namespace {

LawReport scan_law(const CoefficientLaw& law, double kappa, int n0, int imax) {
  LawReport rep;
  for (int i = std::max(n0, 1); i <= imax; ++i) {
    const double c = law(i);
    if (c < 0.0) rep.nonnegative = false;
    rep.growth_K = std::max(rep.growth_K, std::abs(c) / std::pow(i, kappa));
    if (i < imax) {
      const double lip = std::abs(law(i + 1) - c) / std::pow(i, kappa - 1.0);
      if (lip > rep.lipschitz_K) {
        rep.lipschitz_K = lip;
        rep.lipschitz_worst_i = i;
      }
    }
  }
  return rep;
}

}  // namespace

HypothesisReport verify_hypotheses(const RateFamily& family, int imax, int n0) {
  if (imax < n0) throw std::invalid_argument("verify_hypotheses: imax must be >= n0");
  HypothesisReport rep;
  rep.beta = scan_law(family.beta, family.alpha, n0, imax);
  rep.tau = scan_law(family.tau, family.theta, n0, imax);
  rep.mu = scan_law(family.mu, family.m, n0, imax);
  for (const auto* l : {&rep.beta, &rep.tau, &rep.mu})
    rep.minimal_K = std::max({rep.minimal_K, l->growth_K, l->lipschitz_K});
  rep.pass = rep.beta.nonnegative && rep.tau.nonnegative && rep.mu.nonnegative &&
             rep.minimal_K <= family.K * (1.0 + 1e-12);
  return rep;
}

double embedding_weight(double eps, double x) {
  return eps * static_cast<double>(cell_index(x, eps));
}

}  // namespace prion
