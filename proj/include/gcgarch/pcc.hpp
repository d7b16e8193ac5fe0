#pragma once

#include <vector>

#include "gcgarch/garch.hpp"
#include "gcgarch/tcopula.hpp"
#include "gcgarch/types.hpp"

namespace gcg {

// One pair copula of the factor layer, in relabeled coordinates: the node
// joined with its depth-th parent given the parents before it.
struct PccUnit {
  int node = 0;     // relabeled child, owner of the output series
  int depth = 0;    // 1-based position in the child's sorted parent list
  int parent = 0;   // relabeled label of the joined parent
  int b_level = 0;  // series level supplying the parent-side argument
};

// Enumerates the pair copulas node-ascending then depth-ascending, resolving
// every parent-side argument to a series level of that parent. The parent's
// conditioning set must be a leading run of its own sorted parent list;
// otherwise the h-recursion cannot produce the required conditional CDF and
// the graph is rejected (Error::Code::unsupported). Matches the enumeration
// of dag_unit_labels element for element.
std::vector<PccUnit> build_dag_units(const Dag& g, const std::vector<int>& order);

// Copula densities are floored here before the log so that a single extreme
// day cannot produce -inf; hits are counted and reported.
inline constexpr double kDensityFloor = 1e-300;

// Result of filtering one pair copula over the day axis.
struct UnitEval {
  std::vector<double> series;  // h(a|b) per day, the next-level conditional CDF
  double loglik = 0.0;
  DynCorrState state;          // positioned after the last day
  long floor_hits = 0;
};

// Filters one pair copula over days 0..days-1: accumulates the log density
// under the correlation dynamics, writes the conditional CDF series, and
// leaves the dynamic state ready for the day after the sample. a and b hold
// CDF values and are clipped before the quantile transforms.
void run_unit(const double* a, const double* b, int days, const CopulaParams& p,
              int m_sc, UnitEval& out);

// Factor-layer evaluator. Holds the marginal PITs fixed, keeps one UnitEval
// per pair copula, and supports re-evaluating only the units whose inputs a
// parameter change can reach, which is what block-wise samplers need.
class DagEngine {
 public:
  // u_pit columns follow the panel's original series order; the engine
  // relabels them internally. order must be a topological order of g.
  DagEngine(const MatrixXd& u_pit, const Dag& g, const std::vector<int>& order,
            int m_sc);

  int n_units() const { return static_cast<int>(slots_.size()); }
  int days() const { return static_cast<int>(pit_.rows()); }
  const std::vector<PccUnit>& units() const { return units_; }

  // Full evaluation, one parameter block per unit. Returns the factor-layer
  // log-likelihood.
  double evaluate(const std::vector<CopulaParams>& params);

  // Log-likelihood of unit i alone at trial parameters, reading its inputs
  // from the current evaluation. Engine state is untouched.
  double unit_loglik_at(int i, const CopulaParams& trial) const;

  // Input series (a side, b side) of unit i under the current evaluation.
  std::pair<const double*, const double*> unit_inputs(int i) const;

  // Committed log-likelihood of unit i under the current evaluation.
  double unit_loglik(int i) const;

  // Re-evaluates unit i at trial parameters together with every unit whose
  // inputs change as a consequence, into shadow buffers, and returns the
  // total log-likelihood change. One proposal may be open at a time; commit
  // keeps it, abort discards it.
  double propose(int i, const CopulaParams& trial);
  void commit();
  void abort();

  double total_loglik() const;
  double unit_loglik(int i) const { return slots_[i].eval.loglik; }
  const CopulaParams& params(int i) const { return slots_[i].p; }
  // Density-floor hits summed over units for the current evaluation.
  long floor_hits() const;

  // Column i is F(factor_i | factors before i) in relabeled order: the top
  // series of relabeled node i, or its PIT column when it has no parents.
  // These are the stock-layer conditioning inputs.
  MatrixXd cond_cdf_matrix() const;
  // Dynamic state of unit i after the last day (phi holds the upcoming day).
  const DynCorrState& state(int i) const { return slots_[i].eval.state; }
  const std::vector<double>& series(int i) const { return slots_[i].eval.series; }

 private:
  struct Slot {
    CopulaParams p;
    int a_src = 0;  // unit index, or ~column for a relabeled PIT column
    int b_src = 0;
    UnitEval eval;
    UnitEval shadow;
  };

  const double* source(int src, bool from_shadow_set,
                       const std::vector<char>& in_shadow) const;

  MatrixXd pit_;  // relabeled columns: pit_.col(i) is relabeled node i
  int m_sc_ = kCorrScale;
  std::vector<PccUnit> units_;
  std::vector<Slot> slots_;
  std::vector<int> top_unit_;  // per relabeled node, its deepest unit or -1
  bool evaluated_ = false;
  // Open proposal bookkeeping.
  bool open_ = false;
  int prop_unit_ = -1;
  CopulaParams prop_params_{};
  std::vector<int> affected_;
  std::vector<char> in_shadow_;
  double delta_ = 0.0;
  double total_ = 0.0;
};

// Stock-layer chain for one stock: level l couples the running conditional
// CDF series of the stock (starting at its marginal PIT) with column l of
// the factor conditional-CDF matrix.
struct StockEval {
  double loglik = 0.0;
  long floor_hits = 0;
  std::vector<UnitEval> levels;  // one per factor, relabeled order
};
StockEval stock_chain(const double* u_stock, const MatrixXd& v,
                      const std::vector<CopulaParams>& levels, int m_sc);

// Marginal PITs and per-series log-likelihoods of a return matrix under
// per-column GARCH parameters.
struct PitResult {
  MatrixXd u;
  std::vector<double> loglik;
};
PitResult panel_pit(const MatrixXd& r, const std::vector<GarchParams>& marginals);

// Full three-layer decomposition: per-series marginal terms, the factor
// copula layer, and one term per stock.
struct LoglikBreakdown {
  std::vector<double> marginal;
  double factor_copula = 0.0;
  std::vector<double> stock_copula;
  long floor_hits = 0;
  double total() const;
};
LoglikBreakdown full_loglik(const FittedModel& model, const ReturnPanel& panel);

}  // namespace gcg
