#pragma once

#include <vector>

#include "gcgarch/student_t.hpp"
#include "gcgarch/types.hpp"

namespace gcg {

// Conditional-CDF values are clipped into this closed range before any
// quantile transform so extreme tail values cannot leave the open unit
// interval after rounding.
constexpr double kUClip = 1e-12;

inline double clip_u(double u) {
  if (u < kUClip) return kUClip;
  if (u > 1.0 - kUClip) return 1.0 - kUClip;
  return u;
}

// Bivariate t density with identity-scale margins and correlation phi,
// evaluated on the quantile (x, y) scale.
double bvt_logpdf(double x, double y, double v, double phi);
double bvt_pdf(double x, double y, double v, double phi);

// Bivariate t copula density c(u_x, u_y) = f2(x, y) / (f1(x) f1(y)) with
// x = t_v^{-1}(u_x), y = t_v^{-1}(u_y).
double tcopula_logdensity(double u_x, double u_y, double v, double phi);
double tcopula_density(double u_x, double u_y, double v, double phi);

// Conditional CDF h(u_x, u_y) = P(U_x <= u_x | U_y = u_y) of the t copula and
// its inverse in the first argument.
double h_func(double u_x, double u_y, double v, double phi);
double h_inv(double u, double u_y, double v, double phi);

// Bivariate t copula with both required t distributions (v and v+1) built
// once. The _q entry points take and return values on the t_v quantile scale,
// which the likelihood engines keep anyway for the correlation dynamics.
class TCopula {
 public:
  explicit TCopula(double v);

  double v() const { return tv_.v(); }
  double quantile(double u) const { return tv_.quantile(u); }
  double cdf(double x) const { return tv_.cdf(x); }

  double logdensity_q(double x, double y, double phi) const;
  // h on the quantile scale; the result is a probability.
  double h_q(double x, double y, double phi) const;
  // Inverse of h_q in x at fixed y: returns the t_v quantile-scale value.
  double hinv_q(double u, double y, double phi) const;

 private:
  TDist tv_;
  TDist tv1_;
};

// State of the correlation recursion. phi always holds the value for the
// upcoming day: after pushing day t it equals phi^[t+1]. Histories form a
// circular buffer of the last m_sc quantile-scale residual pairs.
struct DynCorrState {
  double phi = 0.0;
  std::vector<double> xs;
  std::vector<double> ys;
  int pos = 0;
  long long count = 0;
};

DynCorrState dyn_corr_init(const CopulaParams& p, int m_sc = kCorrScale);

// Local correlation statistic over the stored history: the un-centered
// product-moment ratio. Returns phi_bar while fewer than m_sc pairs are
// stored and 0 when a sum of squares vanishes.
double dyn_corr_xi(const DynCorrState& s, const CopulaParams& p);

// Appends the day-t residual pair, then advances phi to the next day:
// phi <- (1-a-b) phi_bar + a xi_t + b phi.
void dyn_corr_push(DynCorrState& s, const CopulaParams& p, double x, double y);

// lambda = 2 t_{v+1}(-sqrt((v+1)(1-phi)/(1+phi))); limits 1 at phi=1 and 0 at
// phi=-1.
double tail_dependence(double phi, double v);

// One step of the inverse partial-correlation recursion:
// phi_{xy|z-j} = phi_{xy|z} sqrt((1-phi_xz^2)(1-phi_yz^2)) + phi_xz phi_yz.
double uncond_corr(double phi_xy_z, double phi_xz, double phi_yz);

}  // namespace gcg
