#include "gcgarch/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "gcgarch/rng.hpp"

namespace gcg {

namespace {

// pi-recursion in relabeled coordinates over sorted parent prefixes. Each
// round splits the working set into its latest node and the rest, then
// intersects the rest with that node's parents: empty means the graph's own
// independences close the gap, a leading run hands the question down one
// level, and anything else is not reachable by the h-recursion.
bool pi_passes(const Dag& rg, int x, int k) {
  std::vector<int> pi = rg.parents(x);
  pi.resize(k);
  while (true) {
    const int head = pi.back();
    pi.pop_back();
    const std::vector<int> hp = rg.parents(head);
    std::vector<int> inter;
    std::set_intersection(hp.begin(), hp.end(), pi.begin(), pi.end(),
                          std::back_inserter(inter));
    if (inter.empty()) return true;
    if (!std::equal(inter.begin(), inter.end(), hp.begin())) return false;
    pi = std::move(inter);
  }
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return hash64(h ^ v); }

std::uint64_t adjacency_digest(const Dag& g) {
  std::uint64_t h = mix(0x6a09e667f3bcc908ULL, static_cast<std::uint64_t>(g.m));
  std::uint64_t word = 0;
  int bits = 0;
  for (std::uint8_t b : g.adj) {
    word = (word << 1) | (b ? 1u : 0u);
    if (++bits == 64) {
      h = mix(h, word);
      word = 0;
      bits = 0;
    }
  }
  if (bits > 0) h = mix(h, word);
  return h;
}

// Digest of the induced subgraph on the node's ancestral closure, in the
// graph's own labels. Two graphs give a node the same digest exactly when
// everything upstream of it matches, which is the full input set of that
// node's likelihood contribution.
std::uint64_t ancestral_digest(const Dag& g, int node) {
  std::vector<char> in(g.m, 0);
  std::vector<int> stack{node};
  in[node] = 1;
  while (!stack.empty()) {
    const int x = stack.back();
    stack.pop_back();
    for (int p : g.parents(x)) {
      if (!in[p]) {
        in[p] = 1;
        stack.push_back(p);
      }
    }
  }
  std::uint64_t h = mix(0xbb67ae8584caa73bULL, static_cast<std::uint64_t>(g.m));
  h = mix(h, static_cast<std::uint64_t>(node) + 1);
  for (int a = 0; a < g.m; ++a) {
    if (!in[a]) continue;
    const std::vector<int> pa = g.parents(a);
    h = mix(h, static_cast<std::uint64_t>(a) + 1);
    h = mix(h, pa.size());
    for (int p : pa) h = mix(h, static_cast<std::uint64_t>(p) + 1);
  }
  return h;
}

double auroc_over(std::vector<std::pair<double, bool>> obs, long pos, long neg) {
  if (pos <= 0 || neg <= 0) return std::numeric_limits<double>::quiet_NaN();
  std::sort(obs.begin(), obs.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  double area = 0.0;
  long tp = 0, fp = 0, ptp = 0, pfp = 0;
  std::size_t i = 0;
  while (i < obs.size()) {
    std::size_t j = i;
    while (j < obs.size() && obs[j].first == obs[i].first) {
      (obs[j].second ? ++tp : ++fp);
      ++j;
    }
    // Tied scores move diagonally as one block; the trapezoid handles both.
    area += static_cast<double>(fp - pfp) * static_cast<double>(tp + ptp) / 2.0;
    ptp = tp;
    pfp = fp;
    i = j;
  }
  return area / (static_cast<double>(pos) * static_cast<double>(neg));
}

}  // namespace

bool cumulative_parent_test(const Dag& g, int i, int k) {
  if (i < 0 || i >= g.m) {
    throw Error(Error::Code::invalid_argument,
                "cumulative_parent_test: node out of range");
  }
  const auto ord = topo_order(g);
  if (!ord) {
    throw Error(Error::Code::invalid_argument,
                "cumulative_parent_test: graph has a cycle");
  }
  const Dag rg = relabel(g, *ord);
  int ri = 0;
  while ((*ord)[ri] != i) ++ri;
  const int n = static_cast<int>(rg.parents(ri).size());
  if (k < 1 || k > n) {
    throw Error(Error::Code::invalid_argument,
                "cumulative_parent_test: parent position out of range");
  }
  return pi_passes(rg, ri, k);
}

bool in_reduced_space(const Dag& g) {
  const auto ord = topo_order(g);
  if (!ord) {
    throw Error(Error::Code::invalid_argument, "in_reduced_space: graph has a cycle");
  }
  const Dag rg = relabel(g, *ord);
  for (int x = 0; x < rg.m; ++x) {
    const int n = static_cast<int>(rg.parents(x).size());
    for (int k = 2; k <= n; ++k) {
      if (!pi_passes(rg, x, k)) return false;
    }
  }
  return true;
}

std::vector<Dag> neighborhood(const Dag& g) {
  std::vector<Dag> out;
  for (int u = 0; u < g.m; ++u) {
    for (int v = 0; v < g.m; ++v) {
      if (u == v) continue;
      Dag h = g;
      if (g.edge(u, v)) {
        // Deleting an edge cannot create a cycle.
        h.set_edge(u, v, false);
        if (in_reduced_space(h)) out.push_back(std::move(h));
      } else {
        h.set_edge(u, v, true);
        if (is_acyclic(h) && in_reduced_space(h)) out.push_back(std::move(h));
      }
    }
  }
  return out;
}

BicScorer::BicScorer(const MatrixXd& u_pit, int m_sc) : u_(u_pit), m_sc_(m_sc) {}

ScoredGraph BicScorer::score(const Dag& g) {
  if (g.m != static_cast<int>(u_.cols())) {
    throw Error(Error::Code::invalid_argument,
                "BicScorer::score: graph and panel disagree on series count");
  }
  const std::uint64_t gkey = adjacency_digest(g);
  if (const auto it = graph_cache_.find(gkey); it != graph_cache_.end()) {
    return it->second;
  }
  const auto ord = topo_order(g);
  if (!ord) {
    throw Error(Error::Code::invalid_argument, "BicScorer::score: graph has a cycle");
  }
  DagEngine eng(u_, g, *ord, m_sc_);

  ScoredGraph out;
  out.dag = g;
  const int n = eng.n_units();
  out.theta2_tilde.resize(n);
  if (n > 0) {
    const int days = eng.days();
    eng.evaluate(std::vector<CopulaParams>(n, CopulaParams{0.0, 0.05, 0.90, 8.0}));
    // Scoring-grade optimizer budget: graph ranking needs score gaps of
    // whole log-likelihood points, not the last digits of the optimum.
    NelderMeadOptions opts;
    opts.max_evals = 250;
    opts.f_tol = 1e-6;
    opts.x_tol = 1e-5;
    opts.restarts = 0;

    const std::vector<PccUnit>& units = eng.units();
    double total = 0.0;
    int lo = 0;
    while (lo < n) {
      int hi = lo;
      while (hi < n && units[hi].node == units[lo].node) ++hi;
      const std::uint64_t key = ancestral_digest(g, (*ord)[units[lo].node]);
      const auto hit = node_cache_.find(key);
      if (hit != node_cache_.end()) {
        ++cache_hits_;
        // Replay so that this node's series feed its descendants unchanged.
        for (int i = lo; i < hi; ++i) {
          eng.propose(i, hit->second.params[i - lo]);
          eng.commit();
          out.theta2_tilde[i] = hit->second.params[i - lo];
        }
        total += hit->second.loglik;
      } else {
        ++fit_count_;
        NodeFit nf;
        nf.params.reserve(hi - lo);
        for (int i = lo; i < hi; ++i) {
          const auto [a, b] = eng.unit_inputs(i);
          const CopulaFit fit = maximize_copula(
              [&](const CopulaParams& p) { return eng.unit_loglik_at(i, p); },
              copula_fit_start(a, b, days), opts);
          eng.propose(i, fit.params);
          eng.commit();
          nf.params.push_back(fit.params);
          nf.loglik += eng.unit_loglik(i);
          out.theta2_tilde[i] = fit.params;
        }
        total += nf.loglik;
        node_cache_.emplace(key, std::move(nf));
      }
      lo = hi;
    }
    out.bic = total - 2.0 * n * std::log(static_cast<double>(days));
  }
  graph_cache_.emplace(gkey, out);
  return out;
}

namespace {

// Factor columns lead the panel; stocks behind them never touch the score.
MatrixXd leading_pits(const MatrixXd& r, const std::vector<GarchParams>& marginals,
                      int m, const char* who) {
  if (r.cols() < m || static_cast<int>(marginals.size()) < m) {
    throw Error(Error::Code::invalid_argument,
                std::string(who) + ": panel has fewer series than the graph has nodes");
  }
  const std::vector<GarchParams> head(marginals.begin(), marginals.begin() + m);
  return panel_pit(r.leftCols(m), head).u;
}

}  // namespace

ScoredGraph bic_score(const MatrixXd& r, const std::vector<GarchParams>& marginals,
                      const Dag& g, int m_sc) {
  BicScorer scorer(leading_pits(r, marginals, g.m, "bic_score"), m_sc);
  return scorer.score(g);
}

double StructureMcmcResult::accept_rate() const {
  if (accepted.empty()) return 0.0;
  double s = 0.0;
  for (char a : accepted) s += a;
  return s / static_cast<double>(accepted.size());
}

StructureMcmcResult structure_mcmc(const std::function<double(const Dag&)>& score,
                                   const Dag& init, int iters, std::uint64_t seed) {
  if (iters < 1) {
    throw Error(Error::Code::invalid_argument,
                "structure_mcmc: need at least one iteration");
  }
  if (!is_acyclic(init) || !in_reduced_space(init)) {
    throw Error(Error::Code::invalid_argument,
                "structure_mcmc: initial graph is outside the reduced space");
  }
  SeqRng rng(seed);
  StructureMcmcResult out;
  out.samples.reserve(iters);
  out.scores.reserve(iters);
  out.accepted.reserve(iters);

  Dag cur = init;
  double cur_score = score(cur);
  std::vector<Dag> nbd = neighborhood(cur);
  for (int it = 0; it < iters; ++it) {
    bool acc = false;
    if (!nbd.empty()) {
      const int j = std::min(static_cast<int>(nbd.size()) - 1,
                             static_cast<int>(rng.u01() * static_cast<double>(nbd.size())));
      Dag prop = nbd[j];
      std::vector<Dag> prop_nbd = neighborhood(prop);
      const double prop_score = score(prop);
      // Uniform proposal over the neighborhood, so the Hastings correction
      // is the ratio of neighborhood sizes.
      const double log_ratio =
          prop_score - cur_score +
          std::log(static_cast<double>(nbd.size()) / static_cast<double>(prop_nbd.size()));
      const double alpha = std::min(1.0, std::exp(log_ratio));
      if (rng.u01() < alpha) {
        cur = std::move(prop);
        cur_score = prop_score;
        nbd = std::move(prop_nbd);
        acc = true;
      }
    }
    out.samples.push_back(cur);
    out.scores.push_back(cur_score);
    out.accepted.push_back(acc ? 1 : 0);
  }
  return out;
}

StructureMcmcResult structure_mcmc(BicScorer& scorer, const Dag& init, int iters,
                                   std::uint64_t seed) {
  return structure_mcmc([&scorer](const Dag& g) { return scorer.score(g).bic; }, init,
                        iters, seed);
}

StructureMcmcResult structure_mcmc(const MatrixXd& r,
                                   const std::vector<GarchParams>& marginals,
                                   const Dag& init, int iters, std::uint64_t seed,
                                   int m_sc) {
  BicScorer scorer(leading_pits(r, marginals, init.m, "structure_mcmc"), m_sc);
  return structure_mcmc(scorer, init, iters, seed);
}

std::vector<ScoredGraph> top_graphs(const StructureMcmcResult& r, int n_g) {
  if (n_g < 1) {
    throw Error(Error::Code::invalid_argument, "top_graphs: need at least one graph");
  }
  if (r.samples.size() != r.scores.size()) {
    throw Error(Error::Code::invalid_argument,
                "top_graphs: samples and scores differ in length");
  }
  // Map iteration gives adjacency-ascending order, which settles score ties.
  std::map<std::vector<std::uint8_t>, std::pair<double, std::size_t>> seen;
  for (std::size_t t = 0; t < r.samples.size(); ++t) {
    seen.emplace(r.samples[t].adj, std::make_pair(r.scores[t], t));
  }
  std::vector<const std::pair<const std::vector<std::uint8_t>,
                              std::pair<double, std::size_t>>*> items;
  items.reserve(seen.size());
  for (const auto& kv : seen) items.push_back(&kv);
  std::stable_sort(items.begin(), items.end(), [](const auto* a, const auto* b) {
    return a->second.first > b->second.first;
  });
  std::vector<ScoredGraph> out;
  const std::size_t take = std::min<std::size_t>(items.size(), n_g);
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back(ScoredGraph{r.samples[items[i]->second.second], items[i]->second.first, {}});
  }
  return out;
}

MatrixXd edge_features(const std::vector<Dag>& samples) {
  if (samples.empty()) {
    throw Error(Error::Code::invalid_argument, "edge_features: no samples");
  }
  const int m = samples.front().m;
  MatrixXd f = MatrixXd::Zero(m, m);
  for (const Dag& g : samples) {
    if (g.m != m) {
      throw Error(Error::Code::invalid_argument,
                  "edge_features: node counts differ across samples");
    }
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        if (g.edge(i, j)) f(i, j) += 1.0;
      }
    }
  }
  f /= static_cast<double>(samples.size());
  return f;
}

Cpdag cpdag(const Dag& g) {
  if (!is_acyclic(g)) {
    throw Error(Error::Code::invalid_argument, "cpdag: graph has a cycle");
  }
  const int m = g.m;
  const auto id = [m](int i, int j) { return static_cast<std::size_t>(i) * m + j; };
  const auto adjacent = [&g](int i, int j) { return g.edge(i, j) || g.edge(j, i); };

  std::vector<std::uint8_t> dir(g.adj.size(), 0);
  std::vector<std::uint8_t> und(g.adj.size(), 0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (g.edge(i, j)) und[id(i, j)] = und[id(j, i)] = 1;
    }
  }
  const auto direct = [&](int i, int j) {
    // Closure orientations are shared by every class member, so they must
    // agree with the input graph itself.
    if (!g.edge(i, j)) {
      throw Error(Error::Code::numeric,
                  "cpdag: closure rule disagrees with the input graph");
    }
    if (dir[id(i, j)]) return false;
    dir[id(i, j)] = 1;
    und[id(i, j)] = und[id(j, i)] = 0;
    return true;
  };

  // Colliders whose parents are nonadjacent pin both incoming edges.
  for (int j = 0; j < m; ++j) {
    const std::vector<int> ps = g.parents(j);
    for (std::size_t a = 0; a < ps.size(); ++a) {
      for (std::size_t b = a + 1; b < ps.size(); ++b) {
        if (!adjacent(ps[a], ps[b])) {
          direct(ps[a], j);
          direct(ps[b], j);
        }
      }
    }
  }

  bool changed = true;
  while (changed) {
    changed = false;
    // a -> b with b - c and a, c nonadjacent: orienting c -> b would build a
    // new collider, so b -> c.
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        if (!dir[id(a, b)]) continue;
        for (int c = 0; c < m; ++c) {
          if (und[id(b, c)] && !adjacent(a, c)) changed |= direct(b, c);
        }
      }
    }
    // a - c with a directed path a -> b -> c: c -> a would close a cycle.
    for (int a = 0; a < m; ++a) {
      for (int c = 0; c < m; ++c) {
        if (!und[id(a, c)]) continue;
        for (int b = 0; b < m; ++b) {
          if (dir[id(a, b)] && dir[id(b, c)]) {
            changed |= direct(a, c);
            break;
          }
        }
      }
    }
    // a - b with a - c -> b, a - d -> b, c and d nonadjacent: b -> a would
    // force a new collider or a cycle through c and d.
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        if (!und[id(a, b)]) continue;
        bool done = false;
        for (int c = 0; c < m && !done; ++c) {
          if (!(und[id(a, c)] && dir[id(c, b)])) continue;
          for (int d = c + 1; d < m && !done; ++d) {
            if (und[id(a, d)] && dir[id(d, b)] && !adjacent(c, d)) {
              changed |= direct(a, b);
              done = true;
            }
          }
        }
      }
    }
  }

  Cpdag out;
  out.m = m;
  out.mark.assign(g.adj.size(), EdgeMark::none);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (dir[id(i, j)]) {
        out.mark[id(i, j)] = EdgeMark::directed;
      } else if (und[id(i, j)]) {
        out.mark[id(i, j)] = EdgeMark::bidirected;
      }
    }
  }
  return out;
}

MetricReport classification_metrics(const MatrixXd& features, const Cpdag& truth,
                                    const std::vector<double>& thresholds) {
  if (features.rows() != truth.m || features.cols() != truth.m) {
    throw Error(Error::Code::invalid_argument,
                "classification_metrics: feature matrix and truth disagree on size");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<double, bool>> obs;
  obs.reserve(static_cast<std::size_t>(truth.m) * (truth.m - 1));
  long pos = 0;
  for (int i = 0; i < truth.m; ++i) {
    for (int j = 0; j < truth.m; ++j) {
      if (i == j) continue;
      const bool p = truth.at(i, j) != EdgeMark::none;
      pos += p;
      obs.emplace_back(features(i, j), p);
    }
  }
  const long neg = static_cast<long>(obs.size()) - pos;

  MetricReport rep;
  rep.per_threshold.reserve(thresholds.size());
  for (double c : thresholds) {
    long tp = 0, fp = 0;
    for (const auto& [v, p] : obs) {
      if (v > c) (p ? ++tp : ++fp);
    }
    const long fn = pos - tp;
    const long tn = neg - fp;
    ThresholdMetrics t;
    t.threshold = c;
    t.accuracy = obs.empty() ? nan
                             : static_cast<double>(tp + tn) /
                                   static_cast<double>(obs.size());
    t.false_discovery = (tp + fp) > 0 ? static_cast<double>(fp) / (tp + fp) : nan;
    t.false_omission = (fn + tn) > 0 ? static_cast<double>(fn) / (fn + tn) : nan;
    t.sensitivity = pos > 0 ? static_cast<double>(tp) / pos : nan;
    t.specificity = neg > 0 ? static_cast<double>(tn) / neg : nan;
    rep.per_threshold.push_back(t);
  }
  rep.auroc = auroc_over(std::move(obs), pos, neg);
  return rep;
}

double auroc(const MatrixXd& features, const Cpdag& truth) {
  return classification_metrics(features, truth, {}).auroc;
}

int graph_distance(const Dag& g, const Dag& reference) {
  if (g.m != reference.m) {
    throw Error(Error::Code::invalid_argument, "graph_distance: node counts differ");
  }
  int d = 0;
  for (std::size_t i = 0; i < g.adj.size(); ++i) {
    d += g.adj[i] != reference.adj[i] ? 1 : 0;
  }
  return d;
}

}  // namespace gcg
