#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gcgarch/garch.hpp"
#include "gcgarch/optim.hpp"
#include "gcgarch/pcc.hpp"
#include "gcgarch/types.hpp"

namespace gcg {

// Stage 1: per-column GARCH MLE.
std::vector<GarchFit> fit_marginals(const MatrixXd& r);

struct CopulaFit {
  CopulaParams params;
  double loglik = 0.0;
  bool converged = false;
};

// Default optimizer start: phi_bar at the clipped normal-scores correlation
// of the two series, a=0.05, b=0.90, v=8.
CopulaParams copula_fit_start(const double* u_x, const double* u_y, int days);

// Maximizes an arbitrary copula log-likelihood functional from the given
// start, on unconstrained transformed coordinates covering the admissible
// box. Evaluation errors and non-finite values are treated as unusable
// points, so the search stays inside the support seen by the functional.
CopulaFit maximize_copula(const std::function<double(const CopulaParams&)>& loglik,
                          const CopulaParams& init, const NelderMeadOptions& opts);

// MLE of one dynamic pair copula over two conditional-CDF series, free in
// (phi_bar, a, b, v) inside the constraint box, v capped at kCopulaVMax.
CopulaFit sequential_fit_copula(const double* u_x, const double* u_y, int days,
                                int m_sc, const CopulaParams& init);
CopulaFit sequential_fit_copula(const std::vector<double>& u_x,
                                const std::vector<double>& u_y, int m_sc);

struct DagSequentialFit {
  std::vector<CopulaParams> params;  // unit enumeration order
  std::vector<char> converged;
  double loglik = 0.0;  // factor-layer total at the fitted parameters
};

// Stage-2 starting values: fits the lattice one unit at a time in
// enumeration order, each unit reading the conditional-CDF series produced
// by the units before it. Leaves the engine evaluated at the result.
DagSequentialFit fit_dag_sequential(DagEngine& eng);

struct McmcOptions {
  double target = 0.234;     // mean acceptance probability the scales track
  double gamma = 2.0 / 3.0;  // adaptation decay exponent
  double init_scale = 0.1;   // initial proposal scale
  VectorXd init_diag;        // per-coordinate scales; overrides init_scale when set
  bool record_s = false;     // keep the updated proposal factor per iteration
};

struct McmcChain {
  MatrixXd draws;              // (iters+1) x d; row 0 is the starting point
  VectorXd logpost;            // aligned with draws
  std::vector<char> accepted;  // per proposal
  std::vector<MatrixXd> s_trace;  // when recorded: the updated block factor
  int burn_in = 0;
  int s_fallbacks = 0;  // factorizations that failed; previous factor kept

  double accept_rate() const;
};

// Robust adaptive Metropolis. Proposal n perturbs one block (deterministic
// cycling) by theta_B += S_B z with z standard normal, and rescales that
// block's lower-triangular factor through
//   S S^T <- S (I + eta_n (alpha - target) z z^T / |z|^2) S^T,
// eta_n = n^-gamma, refactored triangularly. An empty block list means one
// full-width block. Out-of-support proposals must return -infinity.
McmcChain ram_mcmc(const std::function<double(const VectorXd&)>& log_post,
                   const VectorXd& init, int iters, std::uint64_t seed,
                   std::vector<std::vector<int>> blocks = {},
                   const McmcOptions& opts = {});

struct GewekeResult {
  double z = 0.0;
  double p = 0.0;
  bool defined = false;  // false when both segment variances vanish
};

// Equal-means statistic between the first 10% and the last 50% of a series,
// segment variances estimated from 20 non-overlapping batch means.
GewekeResult geweke_z(const std::vector<double>& series);

struct BurninChoice {
  int burn_in = 0;
  double z = 0.0;
  double p = 0.0;
};

// Scans burn-in candidates 0%, 5%, ..., 50% of the series and returns the
// one whose remaining tail has the smallest |z|. Throws when the statistic
// is undefined at every candidate (constant series).
BurninChoice geweke_burnin(const std::vector<double>& series);

struct DagMcmcFit {
  std::vector<CopulaParams> params;  // coordinate-wise posterior medians
  McmcChain chain;                   // d = 4 * n_units, blocks (phi_bar,a,b,v)
  double geweke_z = 0.0;
  double geweke_p = 0.0;
  bool converged = false;  // burn-in diagnostic defined with p > 0.01
};

// Posterior sampling of the factor-layer parameters under the uniform prior
// over |phi_bar| < 1, a >= 0, b >= 0, a + b < 1, 2 < v <= kCopulaVMax, one
// 4-parameter block per copula. init normally comes from fit_dag_sequential.
// Burn-in is selected on the log-posterior trace; medians are taken after
// it. The engine is left at the last accepted state.
DagMcmcFit fit_dag_mcmc(DagEngine& eng, const std::vector<CopulaParams>& init,
                        int iters, std::uint64_t seed, const McmcOptions& opts = {});

struct StockFit {
  std::vector<CopulaParams> levels;
  std::vector<char> converged;
  double loglik = 0.0;
};

// Stage 3 for one stock: one 4-dim MLE per level of its conditioning chain
// against the factor conditional-CDF matrix.
StockFit fit_stock_chain(const double* u_stock, const MatrixXd& v, int m_sc);

// All stocks, columns of u_stocks; stocks are independent given the factors.
std::vector<StockFit> fit_stocks(const MatrixXd& u_stocks, const MatrixXd& v, int m_sc);

}  // namespace gcg
