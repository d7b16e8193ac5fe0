#include "gcgarch/simulate.hpp"

#include <bit>
#include <cmath>

#include "gcgarch/calendar.hpp"
#include "gcgarch/garch.hpp"
#include "gcgarch/rng.hpp"

namespace gcg {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t x) { return hash64(h ^ x); }
std::uint64_t mixd(std::uint64_t h, double x) { return mix(h, std::bit_cast<std::uint64_t>(x)); }

}  // namespace

std::uint64_t model_digest(const FittedModel& model) {
  std::uint64_t h = hash64(0x6763676172636864ULL);
  h = mix(h, static_cast<std::uint64_t>(model.m));
  h = mix(h, static_cast<std::uint64_t>(model.p));
  h = mix(h, static_cast<std::uint64_t>(model.m_sc));
  for (const auto& s : model.symbols) {
    for (char c : s) h = mix(h, static_cast<unsigned char>(c));
    h = mix(h, 0x1f);
  }
  for (auto b : model.dag.adj) h = mix(h, b);
  for (int k : model.order) h = mix(h, static_cast<std::uint64_t>(k));
  const auto mix_cop = [&h](const CopulaParams& c) {
    h = mixd(h, c.phi_bar), h = mixd(h, c.a), h = mixd(h, c.b), h = mixd(h, c.v);
  };
  for (const auto& g : model.marginals) {
    h = mixd(h, g.omega), h = mixd(h, g.alpha), h = mixd(h, g.beta), h = mixd(h, g.v);
  }
  for (const auto& c : model.dag_copulas) mix_cop(c);
  for (const auto& row : model.stock_copulas) {
    for (const auto& c : row) mix_cop(c);
  }
  return h;
}

Simulator::Simulator(const FittedModel& model) : model_(model) {
  model_.validate();
  const int n = model_.m + model_.p;
  tmarg_.reserve(n);
  sigma2_.resize(n);
  for (int i = 0; i < n; ++i) {
    const GarchParams& g = model_.marginals[i];
    tmarg_.emplace_back(g.v);
    sigma2_[i] = g.omega / (1.0 - g.alpha - g.beta);
  }
  const auto units = build_dag_units(model_.dag, model_.order);
  node_units_.resize(model_.m);
  funits_.reserve(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) {
    const CopulaParams& p = model_.dag_copulas[i];
    node_units_[units[i].node].push_back(static_cast<int>(i));
    funits_.push_back({units[i], p, TCopula(p.v), dyn_corr_init(p, model_.m_sc)});
  }
  sunits_.resize(model_.p);
  for (int j = 0; j < model_.p; ++j) {
    auto& row = sunits_[j];
    row.reserve(model_.m);
    for (const CopulaParams& p : model_.stock_copulas[j]) {
      row.push_back({p, TCopula(p.v), dyn_corr_init(p, model_.m_sc)});
    }
  }
}

Simulator::Simulator(const FittedModel& model, const ReturnPanel& history)
    : Simulator(model) {
  history.validate();
  if (history.symbols != model_.symbols || history.n_factors != model_.m) {
    throw Error(Error::Code::invalid_argument,
                "Simulator: history panel does not match the model's series");
  }
  if (history.days() < model_.m_sc) {
    throw Error(Error::Code::invalid_argument,
                "Simulator: history shorter than the correlation window");
  }
  const int T = history.days();
  const PitResult pit = panel_pit(history.r, model_.marginals);
  DagEngine eng(pit.u.leftCols(model_.m), model_.dag, model_.order, model_.m_sc);
  eng.evaluate(model_.dag_copulas);
  for (int i = 0; i < eng.n_units(); ++i) funits_[i].st = eng.state(i);
  const MatrixXd v = eng.cond_cdf_matrix();
  for (int j = 0; j < model_.p; ++j) {
    const StockEval se =
        stock_chain(pit.u.col(model_.m + j).data(), v, model_.stock_copulas[j], model_.m_sc);
    for (int l = 0; l < model_.m; ++l) sunits_[j][l].st = se.levels[l].state;
  }
  for (int i = 0; i < model_.m + model_.p; ++i) {
    const GarchParams& g = model_.marginals[i];
    const VectorXd s2 = garch_filter(g, history.r.col(i));
    sigma2_[i] = forecast_variance(g, history.r(T - 1, i), s2(T - 1));
  }
  day_ = T;
}

Simulator::DayDraw Simulator::draw_day(std::uint64_t seed, std::uint64_t axis) const {
  const int m = model_.m;
  const int p = model_.p;
  DayDraw d;
  d.r.resize(m + p);
  d.u.resize(m + p);
  d.fx.resize(funits_.size());
  d.fy.resize(funits_.size());
  d.sx.assign(p, std::vector<double>(m));
  d.sy.assign(p, std::vector<double>(m));

  // Factor lattice: per relabeled node, its conditional CDF value at every
  // depth for this day. Parents carry smaller relabeled indices, so a node's
  // levels are complete before anything downstream reads them.
  std::vector<std::vector<double>> lv(m);
  for (int i = 0; i < m; ++i) {
    const int col = model_.order[i];
    const auto& mine = node_units_[i];
    double val = counter_u01(seed, axis, col, 0);
    for (int k = static_cast<int>(mine.size()) - 1; k >= 0; --k) {
      const FactorUnit& un = funits_[mine[k]];
      const double yq = un.cop.quantile(clip_u(lv[un.u.parent][un.u.b_level]));
      val = un.cop.cdf(un.cop.hinv_q(clip_u(val), yq, un.st.phi));
    }
    d.u(col) = val;
    d.r(col) = marginal_quantile(clip_u(val), sigma2_[col], tmarg_[col]);
    // Rebuild the forward levels exactly the way the likelihood filter
    // computes them, keeping the quantile-scale pairs for the state pushes.
    auto& levels = lv[i];
    levels.resize(mine.size() + 1);
    levels[0] = val;
    for (std::size_t k = 0; k < mine.size(); ++k) {
      const FactorUnit& un = funits_[mine[k]];
      const double xq = un.cop.quantile(clip_u(levels[k]));
      const double yq = un.cop.quantile(clip_u(lv[un.u.parent][un.u.b_level]));
      levels[k + 1] = un.cop.h_q(xq, yq, un.st.phi);
      d.fx[mine[k]] = xq;
      d.fy[mine[k]] = yq;
    }
  }

  // Stock layer: level l conditions on F(factor_l | factors before l), the
  // top level of relabeled node l.
  for (int j = 0; j < p; ++j) {
    const int col = m + j;
    const auto& row = sunits_[j];
    double val = counter_u01(seed, axis, col, 0);
    for (int l = m - 1; l >= 0; --l) {
      const StockUnit& un = row[l];
      const double yq = un.cop.quantile(clip_u(lv[l].back()));
      val = un.cop.cdf(un.cop.hinv_q(clip_u(val), yq, un.st.phi));
    }
    d.u(col) = val;
    d.r(col) = marginal_quantile(clip_u(val), sigma2_[col], tmarg_[col]);
    double run = val;
    for (int l = 0; l < m; ++l) {
      const StockUnit& un = row[l];
      const double xq = un.cop.quantile(clip_u(run));
      const double yq = un.cop.quantile(clip_u(lv[l].back()));
      run = un.cop.h_q(xq, yq, un.st.phi);
      d.sx[j][l] = xq;
      d.sy[j][l] = yq;
    }
  }
  return d;
}

void Simulator::advance(const DayDraw& d) {
  for (std::size_t i = 0; i < funits_.size(); ++i) {
    dyn_corr_push(funits_[i].st, funits_[i].p, d.fx[i], d.fy[i]);
  }
  for (int j = 0; j < model_.p; ++j) {
    for (int l = 0; l < model_.m; ++l) {
      dyn_corr_push(sunits_[j][l].st, sunits_[j][l].p, d.sx[j][l], d.sy[j][l]);
    }
  }
  for (int i = 0; i < model_.m + model_.p; ++i) {
    sigma2_[i] = forecast_variance(model_.marginals[i], d.r(i), sigma2_[i]);
  }
  ++day_;
}

VectorXd Simulator::step(std::uint64_t seed) {
  DayDraw d = draw_day(seed, static_cast<std::uint64_t>(day_));
  advance(d);
  return d.r;
}

ScenarioSet Simulator::scenarios(std::uint64_t seed, int K) const {
  if (K < 1) {
    throw Error(Error::Code::invalid_argument, "Simulator::scenarios: K must be positive");
  }
  ScenarioSet out;
  out.r.resize(K, model_.p);
  out.symbols.assign(model_.symbols.begin() + model_.m, model_.symbols.end());
  out.seed = seed;
  out.model = model_digest(model_);
  out.forecast_var = stock_forecast_variance();
  for (int k = 0; k < K; ++k) {
    out.r.row(k) = draw_day(seed, k).r.tail(model_.p);
  }
  return out;
}

VectorXd Simulator::stock_forecast_variance() const {
  VectorXd out(model_.p);
  for (int j = 0; j < model_.p; ++j) out(j) = sigma2_[model_.m + j];
  return out;
}

ReturnPanel simulate_panel(const FittedModel& model, int days, std::uint64_t seed) {
  if (days < 1) {
    throw Error(Error::Code::invalid_argument, "simulate_panel: days must be positive");
  }
  Simulator sim(model);
  ReturnPanel panel;
  panel.symbols = model.symbols;
  panel.n_factors = model.m;
  panel.r.resize(days, model.m + model.p);
  for (int t = 0; t < days; ++t) panel.r.row(t) = sim.step(seed);
  panel.dates = business_dates(days_from_civil(2000, 1, 3), days);
  panel.validate();
  return panel;
}

ScenarioSet simulate_one_day(const FittedModel& model, const ReturnPanel& history,
                             int K, std::uint64_t seed) {
  Simulator sim(model, history);
  return sim.scenarios(seed, K);
}

}  // namespace gcg
