#include "gcgarch/garch.hpp"

#include <cmath>

#include "gcgarch/optim.hpp"

namespace gcg {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_valid(const GarchParams& p, const char* who) {
  const auto viol = validate(p);
  if (!viol.empty()) {
    throw Error(Error::Code::invalid_argument, std::string(who) + ": " + viol.front());
  }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double q) { return std::log(q / (1.0 - q)); }

GarchParams decode(const VectorXd& theta) {
  GarchParams p;
  p.omega = std::exp(theta[0]);
  const double s = sigmoid(theta[1]);
  const double q = sigmoid(theta[2]);
  p.alpha = s * q;
  p.beta = s * (1.0 - q);
  p.v = 2.0 + 98.0 * sigmoid(theta[3]);
  return p;
}

}  // namespace

VectorXd garch_filter(const GarchParams& p, const VectorXd& r) {
  require_valid(p, "garch_filter");
  if (r.size() < 1) {
    throw Error(Error::Code::invalid_argument, "garch_filter: empty return series");
  }
  VectorXd sigma2(r.size());
  sigma2[0] = p.omega / (1.0 - p.alpha - p.beta);
  for (Eigen::Index t = 1; t < r.size(); ++t) {
    sigma2[t] = p.omega + p.alpha * r[t - 1] * r[t - 1] + p.beta * sigma2[t - 1];
  }
  return sigma2;
}

double std_t_logpdf(double r, double sigma2, double v) {
  if (!(sigma2 > 0.0) || !(v > 2.0)) {
    throw Error(Error::Code::invalid_argument, "std_t_logpdf: need sigma2 > 0 and v > 2");
  }
  return std::lgamma(0.5 * (v + 1.0)) - std::lgamma(0.5 * v) -
         0.5 * std::log((v - 2.0) * kPi * sigma2) -
         0.5 * (v + 1.0) * std::log1p(r * r / (sigma2 * (v - 2.0)));
}

double std_t_pdf(double r, double sigma2, double v) {
  return std::exp(std_t_logpdf(r, sigma2, v));
}

double garch_loglik(const GarchParams& p, const VectorXd& r) {
  const VectorXd sigma2 = garch_filter(p, r);
  // Same sum as std_t_logpdf per observation with the v-only terms hoisted.
  const double v = p.v;
  const double c = std::lgamma(0.5 * (v + 1.0)) - std::lgamma(0.5 * v) -
                   0.5 * std::log((v - 2.0) * kPi);
  const double half_vp1 = 0.5 * (v + 1.0);
  double ll = 0.0;
  for (Eigen::Index t = 0; t < r.size(); ++t) {
    ll += c - 0.5 * std::log(sigma2[t]) -
          half_vp1 * std::log1p(r[t] * r[t] / (sigma2[t] * (v - 2.0)));
  }
  return ll;
}

double marginal_cdf(double r, double sigma2, double v) {
  return marginal_cdf(r, sigma2, TDist(v));
}

double marginal_cdf(double r, double sigma2, const TDist& t) {
  if (!(sigma2 > 0.0)) {
    throw Error(Error::Code::invalid_argument, "marginal_cdf: need sigma2 > 0");
  }
  const double v = t.v();
  return t.cdf(r * std::sqrt(v / ((v - 2.0) * sigma2)));
}

double marginal_quantile(double u, double sigma2, double v) {
  return marginal_quantile(u, sigma2, TDist(v));
}

double marginal_quantile(double u, double sigma2, const TDist& t) {
  if (!(sigma2 > 0.0)) {
    throw Error(Error::Code::invalid_argument, "marginal_quantile: need sigma2 > 0");
  }
  const double v = t.v();
  return t.quantile(u) * std::sqrt(sigma2 * (v - 2.0) / v);
}

double forecast_variance(const GarchParams& p, double last_r, double last_sigma2) {
  require_valid(p, "forecast_variance");
  if (!(last_sigma2 > 0.0)) {
    throw Error(Error::Code::invalid_argument, "forecast_variance: need sigma2 > 0");
  }
  return p.omega + p.alpha * last_r * last_r + p.beta * last_sigma2;
}

GarchFit fit_garch(const VectorXd& r) {
  if (r.size() < 50) {
    throw Error(Error::Code::invalid_argument, "fit_garch: need at least 50 observations");
  }
  const double mean = r.mean();
  const double var = (r.array() - mean).square().sum() / static_cast<double>(r.size());
  if (!(var > 1e-12)) {
    throw Error(Error::Code::numeric, "fit_garch: degenerate return series (zero variance)");
  }

  const auto neg_loglik = [&r](const VectorXd& theta) {
    return -garch_loglik(decode(theta), r);
  };

  VectorXd theta0(4);
  theta0[0] = std::log(var * 0.05);  // omega at alpha=0.05, beta=0.90
  theta0[1] = logit(0.95);
  theta0[2] = logit(0.05 / 0.95);
  theta0[3] = logit((8.0 - 2.0) / 98.0);
  VectorXd step = VectorXd::Constant(4, 0.4);

  NelderMeadOptions opts;
  opts.max_evals = 6000;
  opts.restarts = 2;
  const NelderMeadResult res = nelder_mead(neg_loglik, theta0, step, opts);

  GarchFit fit;
  fit.params = decode(res.x);
  fit.loglik = -res.f;
  fit.converged = res.converged;
  return fit;
}

}  // namespace gcg
