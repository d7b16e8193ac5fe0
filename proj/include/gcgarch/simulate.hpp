#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcgarch/pcc.hpp"
#include "gcgarch/types.hpp"

namespace gcg {

// Deterministic digest of the model's structure and parameter bit patterns,
// so outputs can name the model that generated them without carrying it.
std::uint64_t model_digest(const FittedModel& model);

// K conditionally-iid draws of the next day's stock returns given the
// information set the simulator was advanced to.
struct ScenarioSet {
  MatrixXd r;                        // K x p percent log returns
  std::vector<std::string> symbols;  // stock symbols, panel column order
  std::uint64_t seed = 0;
  std::uint64_t model = 0;           // model_digest of the generator
  VectorXd forecast_var;             // per-stock one-day conditional variance (percent^2)
};

// Forward sampler. Keeps one GARCH variance head and one correlation state
// per recursion; each day draws the deepest conditional CDF of every series
// from a counter stream keyed by (seed, day, original column), unwinds the
// inverse h chains down to marginal PITs, and maps them through the t
// quantiles at the current variances. Streams make paths reproducible and
// independent of evaluation order.
class Simulator {
 public:
  // States start unconditionally: phi at phi_bar, variance at the stationary
  // value omega / (1 - alpha - beta).
  explicit Simulator(const FittedModel& model);
  // States are warmed by filtering the history panel through the model.
  // history must cover at least the correlation window m_sc.
  Simulator(const FittedModel& model, const ReturnPanel& history);

  const FittedModel& model() const { return model_; }
  // Day index the next draw will use; counts history days when warmed.
  long day() const { return day_; }

  // Draws the cross-section of day `day()`, advances every recursion, and
  // returns the percent log returns in original column order.
  VectorXd step(std::uint64_t seed);

  // K draws of the next day's stock cross-section with every state frozen;
  // draw k reads streams (seed, k, column).
  ScenarioSet scenarios(std::uint64_t seed, int K) const;

  // One-day-ahead conditional variances of the stock columns (percent^2).
  VectorXd stock_forecast_variance() const;

 private:
  struct FactorUnit {
    PccUnit u;
    CopulaParams p;
    TCopula cop;
    DynCorrState st;
  };
  struct StockUnit {
    CopulaParams p;
    TCopula cop;
    DynCorrState st;
  };
  // One day's realized cross-section with the quantile-scale pairs each
  // recursion needs to advance.
  struct DayDraw {
    VectorXd r;                          // original column order
    VectorXd u;                          // marginal PITs
    std::vector<double> fx, fy;          // per factor unit
    std::vector<std::vector<double>> sx, sy;  // per stock, per level
  };

  DayDraw draw_day(std::uint64_t seed, std::uint64_t axis) const;
  void advance(const DayDraw& d);

  FittedModel model_;
  std::vector<TDist> tmarg_;                  // per series marginal t
  std::vector<double> sigma2_;                // upcoming day's variance per series
  std::vector<FactorUnit> funits_;            // lattice enumeration order
  std::vector<std::vector<int>> node_units_;  // per relabeled node, ascending depth
  std::vector<std::vector<StockUnit>> sunits_;  // p rows of m levels
  long day_ = 0;
};

// T days of the full panel from unconditional starts, dated on consecutive
// weekdays from 2000-01-03.
ReturnPanel simulate_panel(const FittedModel& model, int days, std::uint64_t seed);

// Warms the recursions on history, then draws K one-day-ahead scenarios.
ScenarioSet simulate_one_day(const FittedModel& model, const ReturnPanel& history,
                             int K, std::uint64_t seed);

}  // namespace gcg
