#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace prion {

/// One coefficient law i -> c_i. Either a shifted power law
/// scale * max(i - shift, 0)^exponent, or an explicit table indexed by i.
struct CoefficientLaw {
  double scale = 1.0;
  double exponent = 0.0;
  double shift = 0.0;
  std::optional<std::vector<double>> table;

  double operator()(long i) const;
  /// Continuum limit eps^exponent * c(x/eps) as eps -> 0 for the power law.
  double limit(double x) const;
};

enum class Coefficient { beta, tau, mu };

/// Reaction coefficients of the aggregation-fragmentation model with the
/// growth exponents they are assumed to satisfy.
struct RateFamily {
  CoefficientLaw beta;  // fragmentation frequency
  CoefficientLaw tau;   // polymerization
  CoefficientLaw mu;    // polymer degradation
  double lambda = 0.0;  // monomer source
  double gamma = 0.0;   // monomer degradation
  double alpha = 0.0;
  double theta = 0.0;
  double m = 0.0;
  double K = 1.0;

  const CoefficientLaw& law(Coefficient which) const;
  double exponent(Coefficient which) const;
};

RateFamily power_law_rates(double alpha, double theta, double m, double K, double lambda,
                           double gamma);

enum class Regime { standard, boundary_breakage };

std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);

/// Dimensionless prefactors of the rescaled discrete system.
struct Prefactors {
  double s = 1.0;   // polymer/monomer concentration ratio
  double b = 1.0;   // fragmentation
  double d = 1.0;   // polymer degradation
  double nu = 1.0;  // polymerization
};

struct ScalingConfig {
  double eps = 1.0;
  double x0 = 0.0;
  int n0 = 2;
  double sigma = 1.0;
  Regime regime = Regime::standard;

  Prefactors prefactors(const RateFamily& rates) const;
};

/// n0(eps) = max(2, round(x0/eps)) for x0 > 0, and 2 for x0 = 0.
int default_n0(double eps, double x0);
/// sigma with 1 + sigma exceeding max(1, alpha, 1+m, 1+theta) by 0.5.
double default_sigma(const RateFamily& rates);
ScalingConfig make_scaling(double eps, double x0, const RateFamily& rates,
                           Regime regime = Regime::standard);

/// Stepwise eps-rescaled coefficient eps^kappa c_i on [i eps, (i+1) eps);
/// zero below n0 * eps.
double rescaled_coefficient(const RateFamily& family, Coefficient which, double eps, double x,
                            int n0 = 0);

struct LawReport {
  double growth_K = 0.0;     // min K with c_i <= K i^kappa
  double lipschitz_K = 0.0;  // min K with |c_{i+1} - c_i| <= K i^(kappa-1)
  int lipschitz_worst_i = 0;
  bool nonnegative = true;
};

struct HypothesisReport {
  LawReport beta, tau, mu;
  double minimal_K = 0.0;
  bool pass = false;
};

HypothesisReport verify_hypotheses(const RateFamily& family, int imax, int n0 = 1);

/// eps * floor(x / eps).
double embedding_weight(double eps, double x);

}  // namespace prion
