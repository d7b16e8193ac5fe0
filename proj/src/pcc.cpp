#include "gcgarch/pcc.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace gcg {

namespace {

void throw_first(const std::vector<std::string>& problems, const char* what) {
  if (!problems.empty()) {
    throw Error(Error::Code::invalid_argument,
                std::string(what) + ": " + problems.front());
  }
}

}  // namespace

std::vector<PccUnit> build_dag_units(const Dag& g, const std::vector<int>& order) {
  const Dag rg = relabel(g, order);
  const int m = rg.m;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < i; ++j) {
      if (rg.edge(i, j)) {
        throw Error(Error::Code::invalid_argument,
                    "build_dag_units: order is not topological for the graph");
      }
    }
  }

  std::vector<PccUnit> units;
  std::vector<char> in_cond(m, 0);
  for (int x = 0; x < m; ++x) {
    const std::vector<int> px = rg.parents(x);
    const int n = static_cast<int>(px.size());
    for (int k = 1; k <= n; ++k) {
      const int y = px[k - 1];
      // Conditioning set of this unit: the k-1 parents before y.
      for (int j = 0; j < k - 1; ++j) in_cond[px[j]] = 1;

      const std::vector<int> py = rg.parents(y);
      int lead = 0;
      while (lead < static_cast<int>(py.size()) && in_cond[py[lead]]) ++lead;
      for (int j = lead; j < static_cast<int>(py.size()); ++j) {
        if (in_cond[py[j]]) {
          for (int q = 0; q < k - 1; ++q) in_cond[px[q]] = 0;
          throw Error(Error::Code::unsupported,
                      "build_dag_units: F(node " + std::to_string(order[y]) +
                          " | conditioning set of node " + std::to_string(order[x]) +
                          ") is not reachable by the h-recursion; the graph is "
                          "outside the computable family");
        }
      }
      for (int j = 0; j < k - 1; ++j) in_cond[px[j]] = 0;

      units.push_back(PccUnit{x, k, y, lead});
    }
  }
  return units;
}

void run_unit(const double* a, const double* b, int days, const CopulaParams& p,
              int m_sc, UnitEval& out) {
  if (days < 1) {
    throw Error(Error::Code::invalid_argument, "run_unit: need at least one day");
  }
  throw_first(validate(p), "run_unit");

  const TCopula cop(p.v);
  const double log_floor = std::log(kDensityFloor);
  out.series.resize(days);
  out.loglik = 0.0;
  out.floor_hits = 0;
  out.state = dyn_corr_init(p, m_sc);
  for (int t = 0; t < days; ++t) {
    const double x = cop.quantile(clip_u(a[t]));
    const double y = cop.quantile(clip_u(b[t]));
    const double phi = out.state.phi;
    double ld = cop.logdensity_q(x, y, phi);
    if (!(ld >= log_floor)) {  // the comparison also routes NaN to the floor
      ld = log_floor;
      ++out.floor_hits;
    }
    out.loglik += ld;
    out.series[t] = cop.h_q(x, y, phi);
    dyn_corr_push(out.state, p, x, y);
  }
}

DagEngine::DagEngine(const MatrixXd& u_pit, const Dag& g,
                     const std::vector<int>& order, int m_sc)
    : m_sc_(m_sc) {
  if (m_sc < 1) {
    throw Error(Error::Code::invalid_argument, "DagEngine: m_sc must be at least 1");
  }
  if (u_pit.cols() != g.m) {
    throw Error(Error::Code::invalid_argument,
                "DagEngine: PIT column count differs from the graph size");
  }
  if (u_pit.rows() < 1) {
    throw Error(Error::Code::invalid_argument, "DagEngine: PIT matrix is empty");
  }
  if (!u_pit.allFinite() || (u_pit.array() < 0.0).any() ||
      (u_pit.array() > 1.0).any()) {
    throw Error(Error::Code::invalid_argument,
                "DagEngine: PIT entries must be finite and in [0,1]");
  }

  units_ = build_dag_units(g, order);
  const int m = g.m;
  pit_.resize(u_pit.rows(), m);
  for (int i = 0; i < m; ++i) pit_.col(i) = u_pit.col(order[i]);

  // Units are enumerated node-ascending, depth-ascending, so every input of a
  // unit is a PIT column or an earlier unit; record where each level lives.
  std::vector<std::vector<int>> level_unit(m);
  top_unit_.assign(m, -1);
  slots_.resize(units_.size());
  for (int i = 0; i < static_cast<int>(units_.size()); ++i) {
    const PccUnit& u = units_[i];
    level_unit[u.node].push_back(i);
    top_unit_[u.node] = i;
    slots_[i].a_src = u.depth == 1 ? ~u.node : level_unit[u.node][u.depth - 2];
    slots_[i].b_src = u.b_level == 0 ? ~u.parent : level_unit[u.parent][u.b_level - 1];
  }
  in_shadow_.assign(units_.size(), 0);
}

const double* DagEngine::source(int src, bool from_shadow_set,
                                const std::vector<char>& in_shadow) const {
  if (src < 0) return pit_.col(~src).data();
  const Slot& s = slots_[src];
  if (from_shadow_set && in_shadow[src]) return s.shadow.series.data();
  return s.eval.series.data();
}

double DagEngine::evaluate(const std::vector<CopulaParams>& params) {
  if (params.size() != slots_.size()) {
    throw Error(Error::Code::invalid_argument,
                "DagEngine::evaluate: one parameter block per unit required");
  }
  if (open_) {
    throw Error(Error::Code::invalid_argument,
                "DagEngine::evaluate: a proposal is still open");
  }
  total_ = 0.0;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    Slot& s = slots_[i];
    s.p = params[i];
    run_unit(source(s.a_src, false, in_shadow_), source(s.b_src, false, in_shadow_),
             days(), s.p, m_sc_, s.eval);
    total_ += s.eval.loglik;
  }
  evaluated_ = true;
  return total_;
}

double DagEngine::unit_loglik_at(int i, const CopulaParams& trial) const {
  if (!evaluated_) {
    throw Error(Error::Code::invalid_argument,
                "DagEngine::unit_loglik_at: engine has not been evaluated");
  }
  const Slot& s = slots_.at(i);
  UnitEval tmp;
  run_unit(source(s.a_src, false, in_shadow_), source(s.b_src, false, in_shadow_),
           days(), trial, m_sc_, tmp);
  return tmp.loglik;
}

std::pair<const double*, const double*> DagEngine::unit_inputs(int i) const {
  if (!evaluated_) {
    throw Error(Error::Code::invalid_argument,
                "DagEngine::unit_inputs: engine has not been evaluated");
  }
  const Slot& s = slots_.at(i);
  return {source(s.a_src, false, in_shadow_), source(s.b_src, false, in_shadow_)};
}

double DagEngine::unit_loglik(int i) const {
  if (!evaluated_) {
    throw Error(Error::Code::invalid_argument,
                "DagEngine::unit_loglik: engine has not been evaluated");
  }
  return slots_.at(i).eval.loglik;
}

double DagEngine::propose(int i, const CopulaParams& trial) {
  if (!evaluated_) {
    throw Error(Error::Code::invalid_argument,
                "DagEngine::propose: engine has not been evaluated");
  }
  if (open_) {
    throw Error(Error::Code::invalid_argument,
                "DagEngine::propose: a proposal is still open");
  }
  if (i < 0 || i >= n_units()) {
    throw Error(Error::Code::invalid_argument, "DagEngine::propose: unit index");
  }

  affected_.clear();
  std::fill(in_shadow_.begin(), in_shadow_.end(), 0);
  in_shadow_[i] = 1;
  affected_.push_back(i);
  for (int j = i + 1; j < n_units(); ++j) {
    const Slot& s = slots_[j];
    if ((s.a_src >= 0 && in_shadow_[s.a_src]) ||
        (s.b_src >= 0 && in_shadow_[s.b_src])) {
      in_shadow_[j] = 1;
      affected_.push_back(j);
    }
  }

  delta_ = 0.0;
  for (int j : affected_) {
    Slot& s = slots_[j];
    const double* a = source(s.a_src, true, in_shadow_);
    const double* b = source(s.b_src, true, in_shadow_);
    run_unit(a, b, days(), j == i ? trial : s.p, m_sc_, s.shadow);
    delta_ += s.shadow.loglik - s.eval.loglik;
  }
  open_ = true;
  prop_unit_ = i;
  prop_params_ = trial;
  return delta_;
}

void DagEngine::commit() {
  if (!open_) {
    throw Error(Error::Code::invalid_argument, "DagEngine::commit: no open proposal");
  }
  for (int j : affected_) std::swap(slots_[j].eval, slots_[j].shadow);
  slots_[prop_unit_].p = prop_params_;
  total_ += delta_;
  open_ = false;
}

void DagEngine::abort() {
  if (!open_) {
    throw Error(Error::Code::invalid_argument, "DagEngine::abort: no open proposal");
  }
  open_ = false;
}

double DagEngine::total_loglik() const {
  if (!evaluated_) {
    throw Error(Error::Code::invalid_argument,
                "DagEngine::total_loglik: engine has not been evaluated");
  }
  return total_;
}

long DagEngine::floor_hits() const {
  long n = 0;
  for (const Slot& s : slots_) n += s.eval.floor_hits;
  return n;
}

MatrixXd DagEngine::cond_cdf_matrix() const {
  if (!evaluated_ && !slots_.empty()) {
    throw Error(Error::Code::invalid_argument,
                "DagEngine::cond_cdf_matrix: engine has not been evaluated");
  }
  const int m = static_cast<int>(pit_.cols());
  MatrixXd v(pit_.rows(), m);
  for (int i = 0; i < m; ++i) {
    if (top_unit_[i] < 0) {
      v.col(i) = pit_.col(i);
    } else {
      const std::vector<double>& s = slots_[top_unit_[i]].eval.series;
      v.col(i) = Eigen::Map<const VectorXd>(s.data(), s.size());
    }
  }
  return v;
}

StockEval stock_chain(const double* u_stock, const MatrixXd& v,
                      const std::vector<CopulaParams>& levels, int m_sc) {
  const int m = static_cast<int>(v.cols());
  if (static_cast<int>(levels.size()) != m) {
    throw Error(Error::Code::invalid_argument,
                "stock_chain: one copula per factor level required");
  }
  StockEval out;
  out.levels.resize(m);
  const double* a = u_stock;
  for (int l = 0; l < m; ++l) {
    run_unit(a, v.col(l).data(), static_cast<int>(v.rows()), levels[l], m_sc,
             out.levels[l]);
    out.loglik += out.levels[l].loglik;
    out.floor_hits += out.levels[l].floor_hits;
    a = out.levels[l].series.data();
  }
  return out;
}

PitResult panel_pit(const MatrixXd& r, const std::vector<GarchParams>& marginals) {
  if (static_cast<Eigen::Index>(marginals.size()) != r.cols()) {
    throw Error(Error::Code::invalid_argument,
                "panel_pit: one marginal per return column required");
  }
  PitResult out;
  out.u.resize(r.rows(), r.cols());
  out.loglik.resize(r.cols());
  for (Eigen::Index i = 0; i < r.cols(); ++i) {
    const VectorXd col = r.col(i);
    const VectorXd s2 = garch_filter(marginals[i], col);
    const TDist td(marginals[i].v);
    for (Eigen::Index t = 0; t < r.rows(); ++t) {
      out.u(t, i) = marginal_cdf(col[t], s2[t], td);
    }
    out.loglik[i] = garch_loglik(marginals[i], col);
  }
  return out;
}

double LoglikBreakdown::total() const {
  double s = 0.0;
  for (double x : marginal) s += x;
  s += factor_copula;
  for (double x : stock_copula) s += x;
  return s;
}

LoglikBreakdown full_loglik(const FittedModel& model, const ReturnPanel& panel) {
  model.validate();
  panel.validate();
  if (panel.symbols != model.symbols) {
    throw Error(Error::Code::invalid_argument,
                "full_loglik: panel symbols differ from model symbols");
  }
  if (panel.n_factors != model.m) {
    throw Error(Error::Code::invalid_argument,
                "full_loglik: panel factor count differs from model");
  }

  LoglikBreakdown out;
  const PitResult pit = panel_pit(panel.r, model.marginals);
  out.marginal = pit.loglik;

  DagEngine eng(pit.u.leftCols(model.m), model.dag, model.order, model.m_sc);
  out.factor_copula = eng.evaluate(model.dag_copulas);
  out.floor_hits = eng.floor_hits();

  const MatrixXd v = eng.cond_cdf_matrix();
  out.stock_copula.resize(model.p);
  for (int j = 0; j < model.p; ++j) {
    const StockEval se = stock_chain(pit.u.col(model.m + j).data(), v,
                                     model.stock_copulas[j], model.m_sc);
    out.stock_copula[j] = se.loglik;
    out.floor_hits += se.floor_hits;
  }
  return out;
}

}  // namespace gcg
