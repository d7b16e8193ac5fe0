#pragma once

#include "gcgarch/student_t.hpp"
#include "gcgarch/types.hpp"

namespace gcg {

// Conditional variances of GARCH(1,1): sigma2[t] = omega + alpha r[t-1]^2 +
// beta sigma2[t-1], seeded at the unconditional variance omega/(1-alpha-beta).
// Percent^2 units throughout.
VectorXd garch_filter(const GarchParams& p, const VectorXd& r);

// Density of the standardized-t return r with conditional variance sigma2:
// the t kernel is scaled so that the variance is exactly sigma2 (the (v-2)
// factor), not the classical t scale.
double std_t_logpdf(double r, double sigma2, double v);
double std_t_pdf(double r, double sigma2, double v);

// Sum of std_t_logpdf over the filtered variance path.
double garch_loglik(const GarchParams& p, const VectorXd& r);

// Probability integral transform u = T_v(r * sqrt(v / ((v-2) sigma2))) and
// its exact inverse. The TDist overloads avoid rebuilding the distribution
// cache when v is fixed across many calls.
double marginal_cdf(double r, double sigma2, double v);
double marginal_cdf(double r, double sigma2, const TDist& t);
double marginal_quantile(double u, double sigma2, double v);
double marginal_quantile(double u, double sigma2, const TDist& t);

// One-day-ahead conditional variance omega + alpha last_r^2 + beta last_sigma2.
double forecast_variance(const GarchParams& p, double last_r, double last_sigma2);

struct GarchFit {
  GarchParams params;
  double loglik = 0.0;
  // False when the optimizer hit its evaluation budget; params then hold the
  // best point found rather than a verified local maximum.
  bool converged = false;
};

// Constrained MLE over (omega, alpha, beta, v) via a logistic
// reparameterization and derivative-free local search. Needs at least 50
// observations with nonzero variance.
GarchFit fit_garch(const VectorXd& r);

}  // namespace gcg
