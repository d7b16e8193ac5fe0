#include "gcgarch/types.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

namespace gcg {

std::vector<std::string> validate(const GarchParams& p) {
  std::vector<std::string> out;
  if (!(p.omega > 0.0)) out.push_back("omega must be positive");
  if (!(p.alpha >= 0.0)) out.push_back("alpha must be nonnegative");
  if (!(p.beta >= 0.0)) out.push_back("beta must be nonnegative");
  if (!(p.alpha + p.beta < 1.0)) out.push_back("alpha + beta must be below one");
  if (!(p.v > 2.0)) out.push_back("v must exceed two");
  for (double x : {p.omega, p.alpha, p.beta, p.v}) {
    if (!std::isfinite(x)) {
      out.push_back("parameters must be finite");
      break;
    }
  }
  return out;
}

std::vector<std::string> validate(const CopulaParams& p) {
  std::vector<std::string> out;
  if (!(p.phi_bar > -1.0 && p.phi_bar < 1.0)) out.push_back("phi_bar must lie in (-1,1)");
  if (!(p.a >= 0.0 && p.a < 1.0)) out.push_back("a must lie in [0,1)");
  if (!(p.b >= 0.0 && p.b < 1.0)) out.push_back("b must lie in [0,1)");
  if (!(p.a + p.b < 1.0)) out.push_back("a + b must be below one");
  if (!(p.v > 2.0)) out.push_back("v must exceed two");
  for (double x : {p.phi_bar, p.a, p.b, p.v}) {
    if (!std::isfinite(x)) {
      out.push_back("parameters must be finite");
      break;
    }
  }
  return out;
}

void Dag::set_edge(int i, int j, bool on) {
  if (i < 0 || j < 0 || i >= m || j >= m) {
    throw Error(Error::Code::invalid_argument, "Dag: node label out of range");
  }
  if (i == j) throw Error(Error::Code::invalid_argument, "Dag: self loop");
  adj[static_cast<std::size_t>(i) * m + j] = on ? 1 : 0;
}

std::vector<int> Dag::parents(int j) const {
  std::vector<int> out;
  for (int i = 0; i < m; ++i) {
    if (edge(i, j)) out.push_back(i);
  }
  return out;
}

int Dag::edge_count() const {
  int n = 0;
  for (auto v : adj) n += v != 0;
  return n;
}

std::vector<UnitLabel> dag_unit_labels(const Dag& g, const std::vector<int>& order) {
  const Dag h = relabel(g, order);
  for (int i = 0; i < h.m; ++i) {
    for (int j = 0; j <= i; ++j) {
      if (h.edge(i, j)) {
        throw Error(Error::Code::invalid_argument,
                    "dag_unit_labels: order is not topological");
      }
    }
  }
  std::vector<UnitLabel> out;
  for (int x = 0; x < h.m; ++x) {
    const auto pa = h.parents(x);
    for (std::size_t k = 0; k < pa.size(); ++k) {
      UnitLabel u;
      u.child = order[x];
      u.parent = order[pa[k]];
      for (std::size_t l = 0; l < k; ++l) u.cond.push_back(order[pa[l]]);
      out.push_back(std::move(u));
    }
  }
  return out;
}

std::optional<std::vector<int>> topo_order(const Dag& g) {
  std::vector<int> indeg(g.m, 0);
  for (int i = 0; i < g.m; ++i) {
    for (int j = 0; j < g.m; ++j) {
      if (g.edge(i, j)) ++indeg[j];
    }
  }
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (int i = 0; i < g.m; ++i) {
    if (indeg[i] == 0) ready.push(i);
  }
  std::vector<int> order;
  order.reserve(g.m);
  while (!ready.empty()) {
    const int i = ready.top();
    ready.pop();
    order.push_back(i);
    for (int j = 0; j < g.m; ++j) {
      if (g.edge(i, j) && --indeg[j] == 0) ready.push(j);
    }
  }
  if (static_cast<int>(order.size()) != g.m) return std::nullopt;
  return order;
}

bool is_acyclic(const Dag& g) { return topo_order(g).has_value(); }

Dag relabel(const Dag& g, const std::vector<int>& order) {
  if (static_cast<int>(order.size()) != g.m) {
    throw Error(Error::Code::invalid_argument, "relabel: order length mismatch");
  }
  std::vector<int> pos(g.m, -1);
  for (int k = 0; k < g.m; ++k) {
    const int node = order[k];
    if (node < 0 || node >= g.m || pos[node] != -1) {
      throw Error(Error::Code::invalid_argument, "relabel: order is not a permutation");
    }
    pos[node] = k;
  }
  Dag out(g.m);
  for (int i = 0; i < g.m; ++i) {
    for (int j = 0; j < g.m; ++j) {
      if (g.edge(i, j)) out.set_edge(pos[i], pos[j], true);
    }
  }
  return out;
}

void ReturnPanel::validate() const {
  if (static_cast<int>(dates.size()) != days()) {
    throw Error(Error::Code::invalid_argument, "panel: date count does not match rows");
  }
  if (static_cast<int>(symbols.size()) != n_series()) {
    throw Error(Error::Code::invalid_argument, "panel: symbol count does not match columns");
  }
  if (n_factors < 0 || n_factors > n_series()) {
    throw Error(Error::Code::invalid_argument, "panel: factor count out of range");
  }
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (!(dates[i - 1] < dates[i])) {
      throw Error(Error::Code::invalid_argument,
                  "panel: dates must be strictly increasing, got " + dates[i - 1] +
                      " before " + dates[i]);
    }
  }
  std::set<std::string> seen(symbols.begin(), symbols.end());
  if (seen.size() != symbols.size()) {
    throw Error(Error::Code::invalid_argument, "panel: duplicate symbol");
  }
  if (!r.allFinite()) {
    throw Error(Error::Code::invalid_argument, "panel: non-finite return value");
  }
}

MatrixXd log_returns(const MatrixXd& prices) {
  if (prices.rows() < 2) {
    throw Error(Error::Code::invalid_argument, "log_returns: need at least two rows");
  }
  if ((prices.array() <= 0.0).any() || !prices.allFinite()) {
    throw Error(Error::Code::invalid_argument, "log_returns: prices must be positive and finite");
  }
  MatrixXd out(prices.rows() - 1, prices.cols());
  for (Eigen::Index t = 1; t < prices.rows(); ++t) {
    out.row(t - 1) = 100.0 * (prices.row(t).array().log() - prices.row(t - 1).array().log());
  }
  return out;
}

void FittedModel::validate() const {
  if (m < 0 || p < 0) throw Error(Error::Code::invalid_argument, "model: negative dimensions");
  if (m_sc < 1) throw Error(Error::Code::invalid_argument, "model: m_sc must be at least one");
  if (dag.m != m) throw Error(Error::Code::invalid_argument, "model: DAG node count != m");
  if (static_cast<int>(symbols.size()) != m + p) {
    throw Error(Error::Code::invalid_argument, "model: symbol count != m+p");
  }
  if (static_cast<int>(marginals.size()) != m + p) {
    throw Error(Error::Code::invalid_argument, "model: marginal count != m+p");
  }
  for (const auto& g : marginals) {
    const auto viol = gcg::validate(g);
    if (!viol.empty()) {
      throw Error(Error::Code::invalid_argument, "model: bad marginal: " + viol.front());
    }
  }
  if (!is_acyclic(dag)) throw Error(Error::Code::invalid_argument, "model: DAG has a cycle");
  if (static_cast<int>(order.size()) != m) {
    throw Error(Error::Code::invalid_argument, "model: relabel order length != m");
  }
  const Dag h = relabel(dag, order);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j <= i; ++j) {
      if (h.edge(i, j)) {
        throw Error(Error::Code::invalid_argument, "model: order is not topological");
      }
    }
  }
  if (static_cast<int>(dag_copulas.size()) != dag.edge_count()) {
    throw Error(Error::Code::invalid_argument, "model: DAG copula count != edge count");
  }
  for (const auto& c : dag_copulas) {
    const auto viol = gcg::validate(c);
    if (!viol.empty()) {
      throw Error(Error::Code::invalid_argument, "model: bad DAG copula: " + viol.front());
    }
  }
  if (static_cast<int>(stock_copulas.size()) != p) {
    throw Error(Error::Code::invalid_argument, "model: stock copula rows != p");
  }
  for (const auto& row : stock_copulas) {
    if (static_cast<int>(row.size()) != m) {
      throw Error(Error::Code::invalid_argument, "model: stock copula row length != m");
    }
    for (const auto& c : row) {
      const auto viol = gcg::validate(c);
      if (!viol.empty()) {
        throw Error(Error::Code::invalid_argument, "model: bad stock copula: " + viol.front());
      }
    }
  }
}

FittedModel make_model(int m, int p, std::vector<std::string> symbols, const Dag& dag) {
  if (dag.m != m) throw Error(Error::Code::invalid_argument, "make_model: DAG node count != m");
  if (static_cast<int>(symbols.size()) != m + p) {
    throw Error(Error::Code::invalid_argument, "make_model: symbol count != m+p");
  }
  const auto order = topo_order(dag);
  if (!order) throw Error(Error::Code::invalid_argument, "make_model: DAG has a cycle");
  FittedModel out;
  out.m = m;
  out.p = p;
  out.symbols = std::move(symbols);
  out.dag = dag;
  out.order = *order;
  out.marginals.resize(m + p);
  out.dag_copulas.resize(dag.edge_count());
  out.stock_copulas.assign(p, std::vector<CopulaParams>(m));
  return out;
}

}  // namespace gcg
