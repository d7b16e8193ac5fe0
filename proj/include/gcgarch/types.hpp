#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gcgarch/error.hpp"

namespace gcg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// GARCH(1,1) with standardized-t innovations. Returns are percent log units.
struct GarchParams {
  double omega = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double v = 0.0;
};

// Dynamic t copula block: long-run correlation, update weights, tail index.
struct CopulaParams {
  double phi_bar = 0.0;
  double a = 0.0;
  double b = 0.0;
  double v = 0.0;
};

// Upper prior bound on copula degrees of freedom during estimation. Not a
// validity constraint: any v > 2 is an admissible CopulaParams value.
constexpr double kCopulaVMax = 100.0;
// Default lag window of the local correlation statistic in the copula dynamics.
constexpr int kCorrScale = 2;

// Empty when admissible; otherwise one message per violated constraint.
std::vector<std::string> validate(const GarchParams& p);
std::vector<std::string> validate(const CopulaParams& p);

// Directed acyclic graph on nodes 0..m-1. adj[i*m+j] nonzero means i -> j.
struct Dag {
  int m = 0;
  std::vector<std::uint8_t> adj;

  Dag() = default;
  explicit Dag(int m_) : m(m_), adj(static_cast<std::size_t>(m_) * m_, 0) {
    if (m_ < 0) throw Error(Error::Code::invalid_argument, "Dag: negative node count");
  }
  Dag(int m_, std::initializer_list<std::pair<int, int>> edges) : Dag(m_) {
    for (const auto& [i, j] : edges) set_edge(i, j, true);
  }

  bool edge(int i, int j) const { return adj[static_cast<std::size_t>(i) * m + j] != 0; }
  void set_edge(int i, int j, bool on);
  std::vector<int> parents(int j) const;  // ascending labels
  int edge_count() const;
  bool operator==(const Dag& o) const { return m == o.m && adj == o.adj; }
};

// One copula unit of the factor layer: child x paired with its k-th parent
// given the first k-1 parents (parents taken ascending in relabeled space).
// Labels are reported in the original node space.
struct UnitLabel {
  int child = 0;
  int parent = 0;
  std::vector<int> cond;
};

// Enumerates the copula units of the relabeled graph, nodes ascending and
// conditioning depth ascending. This fixes the storage order of
// FittedModel::dag_copulas. `order` must be a topological order of g.
std::vector<UnitLabel> dag_unit_labels(const Dag& g, const std::vector<int>& order);

// Kahn's algorithm, smallest label first. Empty when the graph has a cycle.
std::optional<std::vector<int>> topo_order(const Dag& g);

// Renames node order[k] to k. The result of a topological order is a graph
// whose every edge points from a smaller to a larger label.
Dag relabel(const Dag& g, const std::vector<int>& order);

bool is_acyclic(const Dag& g);

// Daily percent log returns, factors in the leading columns.
struct ReturnPanel {
  std::vector<std::string> dates;    // ISO yyyy-mm-dd, strictly increasing
  std::vector<std::string> symbols;  // factors first, then stocks
  int n_factors = 0;
  MatrixXd r;  // days x (factors + stocks)

  int days() const { return static_cast<int>(r.rows()); }
  int n_series() const { return static_cast<int>(r.cols()); }
  int n_stocks() const { return n_series() - n_factors; }
  void validate() const;
};

// r_t = 100 * (log S_t - log S_{t-1}) columnwise; drops the first row.
MatrixXd log_returns(const MatrixXd& prices);

// Full parameter set of the model. DAG copulas are stored in the unit order
// of the relabeled graph (nodes ascending, conditioning depth ascending);
// stock copulas condition on the factors in relabeled order 0..m-1.
struct FittedModel {
  int m = 0;
  int p = 0;
  int m_sc = kCorrScale;                     // lag window of the correlation dynamics
  std::vector<std::string> symbols;          // size m+p, panel column order
  std::vector<GarchParams> marginals;        // size m+p
  Dag dag;                                   // over factor columns 0..m-1
  std::vector<int> order;                    // topological order used to relabel
  std::vector<CopulaParams> dag_copulas;     // one per DAG edge
  std::vector<std::vector<CopulaParams>> stock_copulas;  // p rows of m entries

  void validate() const;
};

// Canonical construction: fixes `order` from the DAG (and checks shapes).
FittedModel make_model(int m, int p, std::vector<std::string> symbols, const Dag& dag);

}  // namespace gcg
