#include "gcgarch/tcopula.hpp"

#include <cmath>

namespace gcg {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

void require_uv_phi(double u_x, double u_y, double v, double phi, const char* who) {
  if (!(u_x > 0.0 && u_x < 1.0 && u_y > 0.0 && u_y < 1.0)) {
    throw Error(Error::Code::invalid_argument, std::string(who) + ": u outside (0,1)");
  }
  if (!(v > 2.0)) {
    throw Error(Error::Code::invalid_argument, std::string(who) + ": need v > 2");
  }
  if (!(std::abs(phi) < 1.0)) {
    throw Error(Error::Code::invalid_argument, std::string(who) + ": need |phi| < 1");
  }
}

}  // namespace

double bvt_logpdf(double x, double y, double v, double phi) {
  if (!(v > 2.0) || !(std::abs(phi) < 1.0)) {
    throw Error(Error::Code::invalid_argument, "bvt_logpdf: need v > 2 and |phi| < 1");
  }
  const double om = 1.0 - phi * phi;
  // Group the cross term as (x * y) so the value is exactly exchange-symmetric.
  const double q = (x * x + y * y - 2.0 * phi * (x * y)) / (v * om);
  return -std::log(kTwoPi) - 0.5 * std::log(om) - 0.5 * (v + 2.0) * std::log1p(q);
}

double bvt_pdf(double x, double y, double v, double phi) {
  return std::exp(bvt_logpdf(x, y, v, phi));
}

TCopula::TCopula(double v) : tv_(v), tv1_(v + 1.0) {
  if (!(v > 2.0)) {
    throw Error(Error::Code::invalid_argument, "TCopula: need v > 2");
  }
}

double TCopula::logdensity_q(double x, double y, double phi) const {
  return bvt_logpdf(x, y, v(), phi) - tv_.logpdf(x) - tv_.logpdf(y);
}

double TCopula::h_q(double x, double y, double phi) const {
  const double v = tv_.v();
  const double scale = std::sqrt((v + y * y) * (1.0 - phi * phi) / (v + 1.0));
  return tv1_.cdf((x - phi * y) / scale);
}

double TCopula::hinv_q(double u, double y, double phi) const {
  const double v = tv_.v();
  const double scale = std::sqrt((v + y * y) * (1.0 - phi * phi) / (v + 1.0));
  return tv1_.quantile(u) * scale + phi * y;
}

double tcopula_logdensity(double u_x, double u_y, double v, double phi) {
  require_uv_phi(u_x, u_y, v, phi, "tcopula_logdensity");
  const TCopula c(v);
  return c.logdensity_q(c.quantile(u_x), c.quantile(u_y), phi);
}

double tcopula_density(double u_x, double u_y, double v, double phi) {
  return std::exp(tcopula_logdensity(u_x, u_y, v, phi));
}

double h_func(double u_x, double u_y, double v, double phi) {
  require_uv_phi(u_x, u_y, v, phi, "h_func");
  const TCopula c(v);
  return c.h_q(c.quantile(u_x), c.quantile(u_y), phi);
}

double h_inv(double u, double u_y, double v, double phi) {
  require_uv_phi(u, u_y, v, phi, "h_inv");
  const TCopula c(v);
  return c.cdf(c.hinv_q(u, c.quantile(u_y), phi));
}

DynCorrState dyn_corr_init(const CopulaParams& p, int m_sc) {
  const auto viol = validate(p);
  if (!viol.empty()) {
    throw Error(Error::Code::invalid_argument, "dyn_corr_init: " + viol.front());
  }
  if (m_sc < 1) {
    throw Error(Error::Code::invalid_argument, "dyn_corr_init: m_sc must be at least one");
  }
  DynCorrState s;
  s.phi = p.phi_bar;
  s.xs.assign(static_cast<std::size_t>(m_sc), 0.0);
  s.ys.assign(static_cast<std::size_t>(m_sc), 0.0);
  return s;
}

double dyn_corr_xi(const DynCorrState& s, const CopulaParams& p) {
  const auto m_sc = static_cast<long long>(s.xs.size());
  if (s.count < m_sc) return p.phi_bar;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < s.xs.size(); ++i) {
    sxy += s.xs[i] * s.ys[i];
    sxx += s.xs[i] * s.xs[i];
    syy += s.ys[i] * s.ys[i];
  }
  const double denom = std::sqrt(sxx * syy);
  if (!(denom > 0.0)) return 0.0;
  return sxy / denom;
}

void dyn_corr_push(DynCorrState& s, const CopulaParams& p, double x, double y) {
  s.xs[static_cast<std::size_t>(s.pos)] = x;
  s.ys[static_cast<std::size_t>(s.pos)] = y;
  s.pos = (s.pos + 1) % static_cast<int>(s.xs.size());
  ++s.count;
  const double xi = dyn_corr_xi(s, p);
  s.phi = (1.0 - p.a - p.b) * p.phi_bar + p.a * xi + p.b * s.phi;
}

double tail_dependence(double phi, double v) {
  if (!(v > 0.0)) {
    throw Error(Error::Code::invalid_argument, "tail_dependence: need v > 0");
  }
  if (!(phi >= -1.0 && phi <= 1.0)) {
    throw Error(Error::Code::invalid_argument, "tail_dependence: need phi in [-1,1]");
  }
  if (phi >= 1.0) return 1.0;
  if (phi <= -1.0) return 0.0;
  const double arg = std::sqrt((v + 1.0) * (1.0 - phi) / (1.0 + phi));
  return 2.0 * TDist(v + 1.0).cdf(-arg);
}

double uncond_corr(double phi_xy_z, double phi_xz, double phi_yz) {
  for (double c : {phi_xy_z, phi_xz, phi_yz}) {
    if (!(std::abs(c) < 1.0)) {
      throw Error(Error::Code::invalid_argument, "uncond_corr: correlations must be in (-1,1)");
    }
  }
  return phi_xy_z * std::sqrt((1.0 - phi_xz * phi_xz) * (1.0 - phi_yz * phi_yz)) +
         phi_xz * phi_yz;
}

}  // namespace gcg
