#pragma once

namespace gcg {

// Regularized incomplete beta function I_x(a, b).
double ibeta(double a, double b, double x);

double norm_cdf(double x);
double norm_quantile(double u);

// Standard (unstandardized) Student-t distribution with v > 0 degrees of
// freedom. Construction caches the log-gamma terms; reuse one instance per
// fixed v in hot loops.
class TDist {
 public:
  explicit TDist(double v);

  double v() const { return v_; }
  double pdf(double x) const;
  double logpdf(double x) const;
  double cdf(double x) const;
  // Inverse CDF, |cdf(result) - u| <= 1e-12. u must lie strictly in (0,1).
  double quantile(double u) const;

 private:
  double hill_start(double uu) const;

  double v_;
  double log_norm_;
  double lbeta_;   // log B(v/2, 1/2), shared by both CDF branches
  double hill_a_;  // quantile seed constants, fixed per v
  double hill_b_;
  double hill_c_;
  double hill_d_;
};

}  // namespace gcg
