#include "gcgarch/estimation.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>

#include "gcgarch/optim.hpp"
#include "gcgarch/rng.hpp"
#include "gcgarch/student_t.hpp"
#include "gcgarch/tcopula.hpp"

namespace gcg {

namespace {

constexpr double kBig = 1e100;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

double clamp01(double p) { return std::min(1.0 - 1e-9, std::max(1e-9, p)); }

// Unconstrained coordinates for the copula MLE: correlation through tanh,
// the (a, b) pair through total weight and split, v through a bounded
// logistic. Interior points map to admissible parameters; saturation at the
// closed box edge is caught by the objective and scored as unusable.
CopulaParams theta_to_copula(const VectorXd& th) {
  const double s = sigmoid(th(1));
  const double q = sigmoid(th(2));
  CopulaParams p;
  p.phi_bar = std::tanh(th(0));
  p.a = s * q;
  p.b = s * (1.0 - q);
  p.v = 2.0 + (kCopulaVMax - 2.0) * sigmoid(th(3));
  return p;
}

VectorXd copula_to_theta(const CopulaParams& p) {
  VectorXd th(4);
  th(0) = std::atanh(std::min(1.0 - 1e-9, std::max(-1.0 + 1e-9, p.phi_bar)));
  const double s = p.a + p.b;
  th(1) = logit(clamp01(s));
  th(2) = logit(s > 0.0 ? clamp01(p.a / s) : 0.5);
  th(3) = logit(clamp01((p.v - 2.0) / (kCopulaVMax - 2.0)));
  return th;
}

NelderMeadOptions mle_copula_opts() {
  NelderMeadOptions opts;
  opts.max_evals = 800;
  opts.f_tol = 1e-7;
  opts.x_tol = 1e-6;
  return opts;
}

bool in_copula_prior(const CopulaParams& p) {
  return std::fabs(p.phi_bar) < 1.0 && p.a >= 0.0 && p.b >= 0.0 && p.a + p.b < 1.0 &&
         p.v > 2.0 && p.v <= kCopulaVMax;
}

// S S^T <- S (I + c u u^T) S^T with u = z/|z|, refactored triangularly.
// Leaves S alone and reports failure when the factorization breaks down.
bool ram_update(MatrixXd& S, const VectorXd& z, double c) {
  const double n2 = z.squaredNorm();
  if (!(n2 > 0.0)) return true;
  const VectorXd su = S * (z / std::sqrt(n2));
  const MatrixXd M = S * S.transpose() + c * su * su.transpose();
  Eigen::LLT<MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) return false;
  S = llt.matrixL();
  return true;
}

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  const double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.begin() + n / 2);
  return 0.5 * (v[n / 2 - 1] + hi);
}

struct SegStat {
  double mean = 0.0;
  double var_mean = 0.0;
};

// Mean of a segment and the variance of that mean from non-overlapping batch
// means (at most 20 batches; trailing remainder dropped).
SegStat batch_stat(const double* x, int n) {
  const int nb = std::min(20, n);
  const int len = n / nb;
  SegStat out;
  std::vector<double> bm(nb, 0.0);
  for (int j = 0; j < nb; ++j) {
    double s = 0.0;
    for (int t = j * len; t < (j + 1) * len; ++t) s += x[t];
    bm[j] = s / len;
    out.mean += bm[j];
  }
  out.mean /= nb;
  if (nb >= 2) {
    double ss = 0.0;
    for (double b : bm) ss += (b - out.mean) * (b - out.mean);
    out.var_mean = ss / (nb - 1) / nb;
  }
  return out;
}

}  // namespace

CopulaFit maximize_copula(const std::function<double(const CopulaParams&)>& loglik,
                          const CopulaParams& init, const NelderMeadOptions& opts) {
  const auto objective = [&](const VectorXd& th) {
    try {
      const double ll = loglik(theta_to_copula(th));
      return std::isfinite(ll) ? -ll : kBig;
    } catch (const Error&) {
      return kBig;
    }
  };
  const VectorXd step = VectorXd::Constant(4, 0.3);
  const NelderMeadResult res = nelder_mead(objective, copula_to_theta(init), step, opts);
  CopulaFit fit;
  fit.params = theta_to_copula(res.x);
  fit.loglik = -res.f;
  fit.converged = res.converged;
  return fit;
}

std::vector<GarchFit> fit_marginals(const MatrixXd& r) {
  std::vector<GarchFit> out;
  out.reserve(r.cols());
  for (int i = 0; i < r.cols(); ++i) out.push_back(fit_garch(r.col(i)));
  return out;
}

CopulaParams copula_fit_start(const double* u_x, const double* u_y, int days) {
  double mx = 0.0, my = 0.0;
  std::vector<double> zx(days), zy(days);
  for (int t = 0; t < days; ++t) {
    zx[t] = norm_quantile(clip_u(u_x[t]));
    zy[t] = norm_quantile(clip_u(u_y[t]));
    mx += zx[t];
    my += zy[t];
  }
  mx /= days;
  my /= days;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (int t = 0; t < days; ++t) {
    sxx += (zx[t] - mx) * (zx[t] - mx);
    syy += (zy[t] - my) * (zy[t] - my);
    sxy += (zx[t] - mx) * (zy[t] - my);
  }
  const double denom = std::sqrt(sxx * syy);
  double phi = denom > 0.0 ? sxy / denom : 0.0;
  phi = std::min(0.9, std::max(-0.9, phi));
  return {phi, 0.05, 0.90, 8.0};
}

CopulaFit sequential_fit_copula(const double* u_x, const double* u_y, int days,
                                int m_sc, const CopulaParams& init) {
  if (days < 50) {
    throw Error(Error::Code::invalid_argument,
                "sequential_fit_copula: need at least 50 observations");
  }
  return maximize_copula(
      [&](const CopulaParams& p) {
        UnitEval ev;
        run_unit(u_x, u_y, days, p, m_sc, ev);
        return ev.loglik;
      },
      init, mle_copula_opts());
}

CopulaFit sequential_fit_copula(const std::vector<double>& u_x,
                                const std::vector<double>& u_y, int m_sc) {
  if (u_x.size() != u_y.size()) {
    throw Error(Error::Code::invalid_argument,
                "sequential_fit_copula: series lengths differ");
  }
  const int days = static_cast<int>(u_x.size());
  return sequential_fit_copula(u_x.data(), u_y.data(), days, m_sc,
                               copula_fit_start(u_x.data(), u_y.data(), days));
}

DagSequentialFit fit_dag_sequential(DagEngine& eng) {
  const int n = eng.n_units();
  eng.evaluate(std::vector<CopulaParams>(n, CopulaParams{0.0, 0.05, 0.90, 8.0}));
  DagSequentialFit out;
  out.params.resize(n);
  out.converged.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto [a, b] = eng.unit_inputs(i);
    const CopulaFit fit = maximize_copula(
        [&](const CopulaParams& p) { return eng.unit_loglik_at(i, p); },
        copula_fit_start(a, b, eng.days()), mle_copula_opts());
    eng.propose(i, fit.params);
    eng.commit();
    out.params[i] = fit.params;
    out.converged[i] = fit.converged ? 1 : 0;
  }
  out.loglik = eng.total_loglik();
  return out;
}

double McmcChain::accept_rate() const {
  if (accepted.empty()) return 0.0;
  double s = 0.0;
  for (char a : accepted) s += a;
  return s / static_cast<double>(accepted.size());
}

McmcChain ram_mcmc(const std::function<double(const VectorXd&)>& log_post,
                   const VectorXd& init, int iters, std::uint64_t seed,
                   std::vector<std::vector<int>> blocks, const McmcOptions& opts) {
  const int d = static_cast<int>(init.size());
  if (d < 1) throw Error(Error::Code::invalid_argument, "ram_mcmc: empty state");
  if (iters < 1) throw Error(Error::Code::invalid_argument, "ram_mcmc: iters must be positive");
  if (blocks.empty()) {
    blocks.emplace_back(d);
    for (int i = 0; i < d; ++i) blocks.back()[i] = i;
  }
  for (const auto& b : blocks) {
    if (b.empty()) throw Error(Error::Code::invalid_argument, "ram_mcmc: empty block");
    for (int i : b) {
      if (i < 0 || i >= d) {
        throw Error(Error::Code::invalid_argument, "ram_mcmc: block index out of range");
      }
    }
  }
  if (opts.init_diag.size() != 0 && opts.init_diag.size() != d) {
    throw Error(Error::Code::invalid_argument,
                "ram_mcmc: init_diag must match the state dimension");
  }

  double lp = log_post(init);
  if (!std::isfinite(lp)) {
    throw Error(Error::Code::invalid_argument, "ram_mcmc: start outside the support");
  }

  std::vector<MatrixXd> S;
  S.reserve(blocks.size());
  for (const auto& b : blocks) {
    MatrixXd s = MatrixXd::Zero(b.size(), b.size());
    for (std::size_t j = 0; j < b.size(); ++j) {
      s(j, j) = opts.init_diag.size() ? opts.init_diag(b[j]) : opts.init_scale;
    }
    S.push_back(std::move(s));
  }

  SeqRng rng(seed);
  McmcChain out;
  out.draws.resize(iters + 1, d);
  out.logpost.resize(iters + 1);
  out.accepted.resize(iters);
  VectorXd th = init;
  out.draws.row(0) = th;
  out.logpost(0) = lp;

  for (int n = 1; n <= iters; ++n) {
    const std::size_t bi = (n - 1) % blocks.size();
    const auto& blk = blocks[bi];
    const int k = static_cast<int>(blk.size());
    VectorXd z(k);
    for (int j = 0; j < k; ++j) z(j) = rng.normal();
    VectorXd trial = th;
    const VectorXd shift = S[bi] * z;
    for (int j = 0; j < k; ++j) trial(blk[j]) += shift(j);

    const double lpt = log_post(trial);
    const double alpha =
        std::isnan(lpt) || lpt == -std::numeric_limits<double>::infinity()
            ? 0.0
            : std::min(1.0, std::exp(lpt - lp));
    const bool acc = rng.u01() < alpha;
    if (acc) {
      th = trial;
      lp = lpt;
    }
    out.accepted[n - 1] = acc ? 1 : 0;

    const double eta = std::pow(static_cast<double>(n), -opts.gamma);
    if (!ram_update(S[bi], z, eta * (alpha - opts.target))) ++out.s_fallbacks;
    if (opts.record_s) out.s_trace.push_back(S[bi]);
    out.draws.row(n) = th;
    out.logpost(n) = lp;
  }
  return out;
}

GewekeResult geweke_z(const std::vector<double>& series) {
  const int n = static_cast<int>(series.size());
  if (n < 40) {
    throw Error(Error::Code::invalid_argument, "geweke_z: need at least 40 points");
  }
  const int na = n / 10;
  const int nb = n / 2;
  const SegStat a = batch_stat(series.data(), na);
  const SegStat b = batch_stat(series.data() + (n - nb), nb);
  GewekeResult out;
  const double var = a.var_mean + b.var_mean;
  out.defined = var > 0.0;
  if (out.defined) {
    out.z = (a.mean - b.mean) / std::sqrt(var);
    out.p = std::erfc(std::fabs(out.z) / std::sqrt(2.0));
  }
  return out;
}

BurninChoice geweke_burnin(const std::vector<double>& series) {
  const int n = static_cast<int>(series.size());
  if (n < 40) {
    throw Error(Error::Code::invalid_argument, "geweke_burnin: need at least 40 points");
  }
  BurninChoice best;
  bool found = false;
  for (int g = 0; g <= 10; ++g) {
    const int burn = static_cast<int>(n * 0.05 * g);
    if (n - burn < 40) break;
    const GewekeResult r =
        geweke_z(std::vector<double>(series.begin() + burn, series.end()));
    if (!r.defined) continue;
    if (!found || std::fabs(r.z) < std::fabs(best.z)) {
      best = {burn, r.z, r.p};
      found = true;
    }
  }
  if (!found) {
    throw Error(Error::Code::numeric,
                "geweke_burnin: statistic undefined at every burn-in (constant series)");
  }
  return best;
}

DagMcmcFit fit_dag_mcmc(DagEngine& eng, const std::vector<CopulaParams>& init,
                        int iters, std::uint64_t seed, const McmcOptions& opts) {
  const int n = eng.n_units();
  if (n == 0) {
    throw Error(Error::Code::invalid_argument, "fit_dag_mcmc: the graph has no copulas");
  }
  if (static_cast<int>(init.size()) != n) {
    throw Error(Error::Code::invalid_argument, "fit_dag_mcmc: one init block per unit");
  }
  if (iters < 1) {
    throw Error(Error::Code::invalid_argument, "fit_dag_mcmc: iters must be positive");
  }
  for (const CopulaParams& p : init) {
    if (!in_copula_prior(p)) {
      throw Error(Error::Code::invalid_argument, "fit_dag_mcmc: init outside the prior");
    }
  }

  // Per-copula proposal scales: correlation and weights move on a tighter
  // scale than the tail index.
  VectorXd pattern(4);
  pattern << 0.05, 0.02, 0.02, 0.5;
  if (opts.init_diag.size() == 4) pattern = opts.init_diag;
  std::vector<MatrixXd> S(n, pattern.asDiagonal().toDenseMatrix());
  if (opts.init_diag.size() == 4 * n) {
    for (int i = 0; i < n; ++i) {
      S[i] = opts.init_diag.segment(4 * i, 4).asDiagonal();
    }
  }

  double lp = eng.evaluate(init);
  std::vector<CopulaParams> cur = init;
  const int d = 4 * n;

  SeqRng rng(seed);
  McmcChain chain;
  chain.draws.resize(iters + 1, d);
  chain.logpost.resize(iters + 1);
  chain.accepted.resize(iters);
  const auto write_row = [&](int row) {
    for (int i = 0; i < n; ++i) {
      chain.draws(row, 4 * i + 0) = cur[i].phi_bar;
      chain.draws(row, 4 * i + 1) = cur[i].a;
      chain.draws(row, 4 * i + 2) = cur[i].b;
      chain.draws(row, 4 * i + 3) = cur[i].v;
    }
    chain.logpost(row) = lp;
  };
  write_row(0);

  for (int it = 1; it <= iters; ++it) {
    const int i = (it - 1) % n;
    VectorXd z(4);
    for (int j = 0; j < 4; ++j) z(j) = rng.normal();
    const VectorXd shift = S[i] * z;
    const CopulaParams trial{cur[i].phi_bar + shift(0), cur[i].a + shift(1),
                             cur[i].b + shift(2), cur[i].v + shift(3)};

    // Proposals outside the flat prior box are rejected without touching the
    // engine; inside it the posterior ratio is the likelihood ratio.
    double alpha = 0.0;
    double delta = 0.0;
    bool open = false;
    if (in_copula_prior(trial)) {
      delta = eng.propose(i, trial);
      open = true;
      alpha = std::isnan(delta) ? 0.0 : std::min(1.0, std::exp(delta));
    }
    const bool acc = rng.u01() < alpha;
    if (acc) {
      eng.commit();
      cur[i] = trial;
      lp += delta;
    } else if (open) {
      eng.abort();
    }
    chain.accepted[it - 1] = acc ? 1 : 0;

    const double eta = std::pow(static_cast<double>(it), -opts.gamma);
    if (!ram_update(S[i], z, eta * (alpha - opts.target))) ++chain.s_fallbacks;
    if (opts.record_s) chain.s_trace.push_back(S[i]);
    write_row(it);
  }

  DagMcmcFit out;
  std::vector<double> trace(chain.logpost.data(), chain.logpost.data() + iters + 1);
  try {
    const BurninChoice bc = geweke_burnin(trace);
    chain.burn_in = bc.burn_in;
    out.geweke_z = bc.z;
    out.geweke_p = bc.p;
    out.converged = bc.p > 0.01;
  } catch (const Error&) {
    // Zero-variance trace after every candidate burn-in: the sampler never
    // moved or the posterior is flat. A frozen chain is not evidence of
    // convergence unless nothing was ever rejected either.
    chain.burn_in = (iters + 1) / 2;
    out.geweke_z = 0.0;
    out.converged = chain.accept_rate() == 1.0;
    out.geweke_p = out.converged ? 1.0 : 0.0;
  }

  out.params.resize(n);
  const int rows = iters + 1 - chain.burn_in;
  std::vector<double> col(rows);
  for (int i = 0; i < n; ++i) {
    double* f[4] = {&out.params[i].phi_bar, &out.params[i].a, &out.params[i].b,
                    &out.params[i].v};
    for (int j = 0; j < 4; ++j) {
      for (int r = 0; r < rows; ++r) col[r] = chain.draws(chain.burn_in + r, 4 * i + j);
      *f[j] = median_of(col);
    }
  }
  out.chain = std::move(chain);
  return out;
}

StockFit fit_stock_chain(const double* u_stock, const MatrixXd& v, int m_sc) {
  const int days = static_cast<int>(v.rows());
  const int m = static_cast<int>(v.cols());
  StockFit out;
  std::vector<double> cur(u_stock, u_stock + days);
  for (int l = 0; l < m; ++l) {
    const double* b = v.col(l).data();
    const CopulaFit fit =
        sequential_fit_copula(cur.data(), b, days, m_sc, copula_fit_start(cur.data(), b, days));
    UnitEval ev;
    run_unit(cur.data(), b, days, fit.params, m_sc, ev);
    out.levels.push_back(fit.params);
    out.converged.push_back(fit.converged ? 1 : 0);
    out.loglik += ev.loglik;
    cur = std::move(ev.series);
  }
  return out;
}

std::vector<StockFit> fit_stocks(const MatrixXd& u_stocks, const MatrixXd& v, int m_sc) {
  if (u_stocks.rows() != v.rows()) {
    throw Error(Error::Code::invalid_argument,
                "fit_stocks: stock PITs and factor lattice cover different days");
  }
  std::vector<StockFit> out;
  out.reserve(u_stocks.cols());
  for (int j = 0; j < u_stocks.cols(); ++j) {
    out.push_back(fit_stock_chain(u_stocks.col(j).data(), v, m_sc));
  }
  return out;
}

}  // namespace gcg
