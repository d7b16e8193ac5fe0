#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "gcgarch/estimation.hpp"
#include "gcgarch/rng.hpp"
#include "gcgarch/simulate.hpp"
#include "gcgarch/structure.hpp"

using Catch::Matchers::WithinAbs;

namespace {

// Five-node lattice where every conditional the pair copulas need is
// reachable by the h-recursion.
gcg::Dag easy5() { return gcg::Dag(5, {{0, 1}, {0, 3}, {0, 4}, {2, 3}, {2, 4}, {3, 4}}); }

// Five-node graph whose last copula asks for a conditional CDF the lattice
// cannot produce: node 4's third parent is reached through a parent set
// that is not a leading run.
gcg::Dag hard5() { return gcg::Dag(5, {{0, 4}, {1, 3}, {2, 3}, {2, 4}, {3, 4}}); }

// Four-node version of the same failure: node 3 joins parent 2 given {1},
// but node 2 sorts parent 0 ahead of 1.
gcg::Dag bad4() { return gcg::Dag(4, {{1, 3}, {2, 3}, {0, 2}, {1, 2}}); }

// Hub-and-spokes graph with one two-parent node whose parents are adjacent.
gcg::Dag wide8() {
  return gcg::Dag(8, {{0, 1}, {1, 2}, {1, 3}, {1, 4}, {1, 5}, {1, 6}, {2, 6}, {4, 7}});
}

gcg::Dag diamond() { return gcg::Dag(4, {{0, 2}, {0, 3}, {1, 3}, {2, 3}}); }

// Triangle plus a pendant edge; no collider anywhere.
gcg::Dag triangle4() { return gcg::Dag(4, {{0, 1}, {0, 2}, {1, 2}, {2, 3}}); }

gcg::Dag chain3() { return gcg::Dag(3, {{0, 1}, {1, 2}}); }

// Random DAG, acyclic by construction: upper-triangular edges under a
// seeded permutation of the labels.
gcg::Dag random_dag(int m, double p_edge, std::uint64_t seed) {
  std::vector<int> perm(m);
  for (int i = 0; i < m; ++i) perm[i] = i;
  for (int i = m - 1; i > 0; --i) {
    const int j = static_cast<int>(gcg::counter_u01(seed, 901, i, 0) * (i + 1));
    std::swap(perm[i], perm[std::min(j, i)]);
  }
  gcg::Dag g(m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (gcg::counter_u01(seed, i, j, 1) < p_edge) g.set_edge(perm[i], perm[j], true);
    }
  }
  return g;
}

// Three factors along a chain plus one stock, used to simulate panels for
// the scorer tests.
gcg::FittedModel chain_model() {
  auto model = gcg::make_model(3, 1, {"F0", "F1", "F2", "S0"}, chain3());
  for (int i = 0; i < 4; ++i) {
    model.marginals[i] = {0.05 + 0.01 * i, 0.05, 0.90 - 0.005 * i, 6.0 + i};
  }
  model.dag_copulas = {{0.50, 0.05, 0.90, 6.0}, {0.35, 0.06, 0.85, 7.0}};
  for (int l = 0; l < 3; ++l) {
    model.stock_copulas[0][l] = {0.25 - 0.05 * l, 0.04, 0.88, 5.0 + l};
  }
  model.validate();
  return model;
}

// Four factors over the diamond plus one stock.
gcg::FittedModel diamond_model() {
  auto model = gcg::make_model(4, 1, {"F0", "F1", "F2", "F3", "S0"}, diamond());
  for (int i = 0; i < 5; ++i) {
    model.marginals[i] = {0.05 + 0.01 * i, 0.05, 0.90 - 0.005 * i, 6.0 + i};
  }
  model.dag_copulas = {{0.45, 0.05, 0.80, 5.0},
                       {-0.30, 0.10, 0.70, 8.0},
                       {0.20, 0.04, 0.90, 6.0},
                       {0.60, 0.06, 0.85, 7.0}};
  for (int l = 0; l < 4; ++l) {
    model.stock_copulas[0][l] = {0.3 - 0.05 * l, 0.04, 0.88, 5.0 + l};
  }
  model.validate();
  return model;
}

gcg::MatrixXd factor_pits(const gcg::FittedModel& model, int days, std::uint64_t seed) {
  const auto panel = gcg::simulate_panel(model, days, seed);
  const std::vector<gcg::GarchParams> marg(model.marginals.begin(),
                                           model.marginals.begin() + model.m);
  return gcg::panel_pit(panel.r.leftCols(model.m), marg).u;
}

bool units_buildable(const gcg::Dag& g) {
  const auto ord = gcg::topo_order(g);
  REQUIRE(ord.has_value());
  try {
    gcg::build_dag_units(g, *ord);
    return true;
  } catch (const gcg::Error& e) {
    REQUIRE(e.code() == gcg::Error::Code::unsupported);
    return false;
  }
}

// All 64 three-node adjacency patterns, keyed by a 6-bit code over the
// off-diagonal cells in row-major order.
gcg::Dag dag_from_code3(int code) {
  gcg::Dag g(3);
  int bit = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      if (code & (1 << bit)) g.set_edge(i, j, true);
      ++bit;
    }
  }
  return g;
}

// Rank-sum area under the curve with midranks for ties, the textbook
// two-sample statistic, as an independent oracle for the trapezoid sweep.
double rank_sum_auroc(const gcg::MatrixXd& f, const gcg::Cpdag& truth) {
  std::vector<std::pair<double, bool>> v;
  long pos = 0;
  for (int i = 0; i < truth.m; ++i) {
    for (int j = 0; j < truth.m; ++j) {
      if (i == j) continue;
      const bool p = truth.at(i, j) != gcg::EdgeMark::none;
      pos += p;
      v.emplace_back(f(i, j), p);
    }
  }
  const long neg = static_cast<long>(v.size()) - pos;
  std::sort(v.begin(), v.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j < v.size() && v[j].first == v[i].first) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t t = i; t < j; ++t) {
      if (v[t].second) rank_sum += midrank;
    }
    i = j;
  }
  return (rank_sum - 0.5 * static_cast<double>(pos) * (pos + 1)) /
         (static_cast<double>(pos) * static_cast<double>(neg));
}

}  // namespace

TEST_CASE("cumulative parent test matches the worked five-node graphs") {
  const gcg::Dag good = easy5();
  for (int i = 0; i < 5; ++i) {
    const int n = static_cast<int>(good.parents(i).size());
    for (int k = 1; k <= n; ++k) CHECK(gcg::cumulative_parent_test(good, i, k));
  }
  CHECK(gcg::in_reduced_space(good));

  // The failure is localized: node 4 at its third parent, nowhere else.
  const gcg::Dag bad = hard5();
  for (int i = 0; i < 5; ++i) {
    const int n = static_cast<int>(bad.parents(i).size());
    for (int k = 1; k <= n; ++k) {
      const bool expect = !(i == 4 && k == 3);
      CHECK(gcg::cumulative_parent_test(bad, i, k) == expect);
    }
  }
  CHECK_FALSE(gcg::in_reduced_space(bad));

  CHECK_THROWS_AS(gcg::cumulative_parent_test(good, 4, 4), gcg::Error);
  CHECK_THROWS_AS(gcg::cumulative_parent_test(good, 4, 0), gcg::Error);
  CHECK_THROWS_AS(gcg::cumulative_parent_test(good, 5, 1), gcg::Error);
  gcg::Dag cyc(2, {{0, 1}, {1, 0}});
  CHECK_THROWS_AS(gcg::cumulative_parent_test(cyc, 0, 1), gcg::Error);
  CHECK_THROWS_AS(gcg::in_reduced_space(cyc), gcg::Error);
}

TEST_CASE("reduced space membership agrees with the unit builder") {
  CHECK(gcg::in_reduced_space(gcg::Dag(3)));
  CHECK(gcg::in_reduced_space(wide8()));
  CHECK_FALSE(gcg::in_reduced_space(bad4()));

  // Saturated graph: every prefix of a full parent list is cumulative.
  gcg::Dag full(5);
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) full.set_edge(i, j, true);
  }
  CHECK(gcg::in_reduced_space(full));

  // Every three-node DAG is in the space; 25 labeled DAGs exist.
  int n_dags = 0;
  for (int code = 0; code < 64; ++code) {
    const gcg::Dag g = dag_from_code3(code);
    if (!gcg::is_acyclic(g)) continue;
    ++n_dags;
    CHECK(gcg::in_reduced_space(g));
  }
  CHECK(n_dags == 25);

  // Dual route on random graphs: membership must equal the unit builder's
  // accept/reject verdict, and both verdicts must actually occur.
  int n_in = 0, n_out = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const gcg::Dag g = random_dag(6, 0.45, seed);
    const bool member = gcg::in_reduced_space(g);
    CHECK(member == units_buildable(g));
    (member ? n_in : n_out) += 1;
  }
  CHECK(n_in >= 20);
  CHECK(n_out >= 20);
  CHECK(units_buildable(easy5()));
  CHECK_FALSE(units_buildable(hard5()));
}

TEST_CASE("neighborhood enumerates admissible one-edge moves") {
  const auto nbd_empty = gcg::neighborhood(gcg::Dag(3));
  CHECK(nbd_empty.size() == 6);
  for (const auto& h : nbd_empty) CHECK(h.edge_count() == 1);
  // Candidate order is ordered pairs ascending.
  CHECK(nbd_empty[0].edge(0, 1));
  CHECK(nbd_empty[1].edge(0, 2));
  CHECK(nbd_empty[2].edge(1, 0));

  const auto nbd_chain = gcg::neighborhood(chain3());
  REQUIRE(nbd_chain.size() == 3);
  gcg::Dag d01 = chain3();
  d01.set_edge(0, 1, false);
  gcg::Dag d12 = chain3();
  d12.set_edge(1, 2, false);
  gcg::Dag a02 = chain3();
  a02.set_edge(0, 2, true);
  CHECK(std::count(nbd_chain.begin(), nbd_chain.end(), d01) == 1);
  CHECK(std::count(nbd_chain.begin(), nbd_chain.end(), d12) == 1);
  CHECK(std::count(nbd_chain.begin(), nbd_chain.end(), a02) == 1);

  for (std::uint64_t seed = 300; seed < 310; ++seed) {
    gcg::Dag g = random_dag(4, 0.4, seed);
    if (!gcg::in_reduced_space(g)) continue;
    for (const auto& h : gcg::neighborhood(g)) {
      CHECK(gcg::is_acyclic(h));
      CHECK(gcg::in_reduced_space(h));
      CHECK(std::abs(h.edge_count() - g.edge_count()) == 1);
      const auto back = gcg::neighborhood(h);
      CHECK(std::count(back.begin(), back.end(), g) == 1);
    }
  }

  CHECK(gcg::neighborhood(gcg::Dag(1)).empty());
}

TEST_CASE("bic scorer caches per-node fits and decomposes over components") {
  const auto model = diamond_model();
  const gcg::MatrixXd u = factor_pits(model, 300, 11);
  gcg::BicScorer scorer(u);

  const auto empty = scorer.score(gcg::Dag(4));
  CHECK(empty.bic == 0.0);
  CHECK(empty.theta2_tilde.empty());
  CHECK(scorer.fit_count() == 0);

  gcg::Dag ga(4, {{0, 2}});
  gcg::Dag gc(4, {{1, 3}});
  gcg::Dag gb(4, {{0, 2}, {1, 3}});
  const auto sa = scorer.score(ga);
  CHECK(scorer.fit_count() == 1);
  const auto sc = scorer.score(gc);
  CHECK(scorer.fit_count() == 2);

  // Node-disjoint components add up, and both nodes come from the cache.
  const auto sb = scorer.score(gb);
  CHECK(scorer.fit_count() == 2);
  CHECK(scorer.cache_hits() == 2);
  CHECK_THAT(sb.bic, WithinAbs(sa.bic + sc.bic, 1e-9));
  REQUIRE(sb.theta2_tilde.size() == 2);
  CHECK(sb.theta2_tilde[0].phi_bar == sa.theta2_tilde[0].phi_bar);
  CHECK(sb.theta2_tilde[1].phi_bar == sc.theta2_tilde[0].phi_bar);

  // Rescoring a known graph is a whole-graph cache hit.
  const long fits_before = scorer.fit_count();
  const long hits_before = scorer.cache_hits();
  const auto sb2 = scorer.score(gb);
  CHECK(sb2.bic == sb.bic);
  CHECK(scorer.fit_count() == fits_before);
  CHECK(scorer.cache_hits() == hits_before);

  // The diamond reuses node 2 (same ancestral subgraph as in ga) and fits
  // only node 3.
  const auto sd = scorer.score(diamond());
  CHECK(scorer.fit_count() == 3);
  REQUIRE(sd.theta2_tilde.size() == 4);
  CHECK(sd.theta2_tilde[0].phi_bar == sa.theta2_tilde[0].phi_bar);
  CHECK(sd.theta2_tilde[0].v == sa.theta2_tilde[0].v);

  // Adding 0 -> 1 rewires what node 3 conditions on, so node 3 must refit
  // along with node 1; node 2's upstream is untouched and stays cached.
  gcg::Dag gplus = diamond();
  gplus.set_edge(0, 1, true);
  const auto sp = scorer.score(gplus);
  CHECK(scorer.fit_count() == 5);
  REQUIRE(sp.theta2_tilde.size() == 5);
  CHECK(sp.theta2_tilde[1].phi_bar == sa.theta2_tilde[0].phi_bar);

  // The reported score replays as one full evaluation of the same lattice.
  const auto ord = gcg::topo_order(diamond());
  gcg::DagEngine eng(u, diamond(), *ord, gcg::kCorrScale);
  const double ll = eng.evaluate(sd.theta2_tilde);
  CHECK_THAT(sd.bic, WithinAbs(ll - 2.0 * 4.0 * std::log(300.0), 1e-9));

  CHECK_THROWS_AS(scorer.score(gcg::Dag(5)), gcg::Error);
  CHECK_THROWS_AS(scorer.score(gcg::Dag(4, {{0, 1}, {1, 0}})), gcg::Error);
  CHECK_THROWS_AS(scorer.score(bad4()), gcg::Error);
}

TEST_CASE("bic scorer ignores stock columns entirely") {
  const auto model = diamond_model();
  const auto panel = gcg::simulate_panel(model, 250, 17);
  const auto s1 = gcg::bic_score(panel.r, model.marginals, diamond());

  gcg::MatrixXd perturbed = panel.r;
  perturbed.col(4) *= 2.0;
  const auto s2 = gcg::bic_score(perturbed, model.marginals, diamond());
  CHECK(s1.bic == s2.bic);
  REQUIRE(s1.theta2_tilde.size() == s2.theta2_tilde.size());
  for (std::size_t i = 0; i < s1.theta2_tilde.size(); ++i) {
    CHECK(s1.theta2_tilde[i].phi_bar == s2.theta2_tilde[i].phi_bar);
  }
}

TEST_CASE("bic penalty rejects a spurious edge on most simulated panels") {
  int lower = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto model = chain_model();
    const gcg::MatrixXd u = factor_pits(model, 300, 500 + seed);
    gcg::BicScorer scorer(u);
    const double truth = scorer.score(chain3()).bic;
    gcg::Dag spurious = chain3();
    spurious.set_edge(0, 2, true);
    if (scorer.score(spurious).bic < truth) ++lower;
  }
  CHECK(lower >= 16);
}

TEST_CASE("structure mcmc reproduces an enumerated stationary law") {
  // Synthetic score over all 25 three-node DAGs, amplitude kept moderate so
  // every graph is visited often enough to estimate its frequency.
  std::map<std::vector<std::uint8_t>, double> table;
  std::vector<gcg::Dag> dags;
  for (int code = 0; code < 64; ++code) {
    const gcg::Dag g = dag_from_code3(code);
    if (!gcg::is_acyclic(g)) continue;
    table[g.adj] = 0.8 * std::sin(1.7 * static_cast<double>(code));
    dags.push_back(g);
  }
  REQUIRE(dags.size() == 25);
  const auto score = [&table](const gcg::Dag& g) { return table.at(g.adj); };

  std::map<std::vector<std::uint8_t>, long> visits;
  gcg::Dag state(3);
  const int chunk = 100000;
  for (int part = 0; part < 10; ++part) {
    const auto r = gcg::structure_mcmc(score, state, chunk, 1000 + part);
    REQUIRE(r.samples.size() == static_cast<std::size_t>(chunk));
    for (const auto& g : r.samples) ++visits[g.adj];
    state = r.samples.back();
  }

  double z = 0.0;
  for (const auto& g : dags) z += std::exp(table.at(g.adj));
  for (const auto& g : dags) {
    const double want = std::exp(table.at(g.adj)) / z;
    const double got = static_cast<double>(visits[g.adj]) / (10.0 * chunk);
    CHECK_THAT(got / want, WithinAbs(1.0, 0.05));
  }
}

TEST_CASE("structure mcmc stays inside the reduced space and replays deterministically") {
  const auto score = [](const gcg::Dag& g) { return -0.4 * g.edge_count(); };
  const auto r1 = gcg::structure_mcmc(score, gcg::Dag(4), 3000, 77);
  const auto r2 = gcg::structure_mcmc(score, gcg::Dag(4), 3000, 77);
  REQUIRE(r1.samples.size() == 3000);
  CHECK(r1.accept_rate() > 0.0);
  for (std::size_t t = 0; t < r1.samples.size(); ++t) {
    CHECK(gcg::is_acyclic(r1.samples[t]));
    CHECK(gcg::in_reduced_space(r1.samples[t]));
    CHECK(r1.samples[t] == r2.samples[t]);
    CHECK(r1.scores[t] == r2.scores[t]);
    CHECK(r1.accepted[t] == r2.accepted[t]);
    if (t > 0 && !(r1.samples[t] == r1.samples[t - 1])) CHECK(r1.accepted[t] == 1);
  }

  // A one-node space has no moves; the chain stays put without error.
  const auto still = gcg::structure_mcmc(score, gcg::Dag(1), 10, 3);
  CHECK(still.accept_rate() == 0.0);
  for (const auto& g : still.samples) CHECK(g == gcg::Dag(1));

  CHECK_THROWS_AS(gcg::structure_mcmc(score, gcg::Dag(3), 0, 1), gcg::Error);
  CHECK_THROWS_AS(gcg::structure_mcmc(score, bad4(), 10, 1), gcg::Error);
  CHECK_THROWS_AS(gcg::structure_mcmc(score, gcg::Dag(2, {{0, 1}, {1, 0}}), 10, 1),
                  gcg::Error);
}

TEST_CASE("structure mcmc over a scored panel concentrates on strong graphs") {
  const auto model = chain_model();
  gcg::BicScorer scorer(factor_pits(model, 300, 23));
  const auto r = gcg::structure_mcmc(scorer, gcg::Dag(3), 50, 5);
  REQUIRE(r.samples.size() == 50);
  for (std::size_t t = 0; t < r.samples.size(); ++t) {
    CHECK(gcg::in_reduced_space(r.samples[t]));
    // Scores ride along with their sample and replay from the cache.
    CHECK(r.scores[t] == scorer.score(r.samples[t]).bic);
  }
  const auto top = gcg::top_graphs(r, 3);
  REQUIRE(!top.empty());
  CHECK(top[0].bic >= r.scores[0]);
  for (std::size_t i = 1; i < top.size(); ++i) CHECK(top[i - 1].bic >= top[i].bic);
}

TEST_CASE("top graphs deduplicate samples and rank by score") {
  gcg::StructureMcmcResult r;
  gcg::Dag a(3), b = chain3(), c(3, {{0, 1}});
  r.samples = {a, b, a, c};
  r.scores = {1.0, 3.0, 1.0, 2.0};
  r.accepted = {0, 1, 1, 1};
  const auto top2 = gcg::top_graphs(r, 2);
  REQUIRE(top2.size() == 2);
  CHECK(top2[0].dag == b);
  CHECK(top2[0].bic == 3.0);
  CHECK(top2[1].dag == c);
  const auto all = gcg::top_graphs(r, 10);
  CHECK(all.size() == 3);
  CHECK_THROWS_AS(gcg::top_graphs(r, 0), gcg::Error);
  r.scores.pop_back();
  CHECK_THROWS_AS(gcg::top_graphs(r, 1), gcg::Error);
}

TEST_CASE("edge features count sampled edges") {
  gcg::Dag with = chain3();
  gcg::Dag without(3, {{1, 2}});
  const gcg::MatrixXd f = gcg::edge_features({with, with, with, without});
  CHECK(f(0, 1) == 0.75);
  CHECK(f(1, 2) == 1.0);
  CHECK(f(0, 2) == 0.0);
  for (int i = 0; i < 3; ++i) CHECK(f(i, i) == 0.0);

  const gcg::MatrixXd g = gcg::edge_features({with, with});
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(g(i, j) == (with.edge(i, j) ? 1.0 : 0.0));
    }
  }
  CHECK_THROWS_AS(gcg::edge_features({}), gcg::Error);
  CHECK_THROWS_AS(gcg::edge_features({with, gcg::Dag(4)}), gcg::Error);
}

TEST_CASE("cpdag marks compelled and reversible edges") {
  // A lone edge is reversible: its class contains both orientations.
  const auto two = gcg::cpdag(gcg::Dag(2, {{0, 1}}));
  CHECK(two.at(0, 1) == gcg::EdgeMark::bidirected);
  CHECK(two.at(1, 0) == gcg::EdgeMark::bidirected);

  // A collider with nonadjacent parents pins both edges.
  const auto coll = gcg::cpdag(gcg::Dag(3, {{0, 2}, {1, 2}}));
  CHECK(coll.at(0, 2) == gcg::EdgeMark::directed);
  CHECK(coll.at(1, 2) == gcg::EdgeMark::directed);
  CHECK(coll.at(2, 0) == gcg::EdgeMark::none);
  CHECK(coll.at(0, 1) == gcg::EdgeMark::none);

  // A chain has no collider, so every edge is reversible.
  const auto ch = gcg::cpdag(chain3());
  CHECK(ch.at(0, 1) == gcg::EdgeMark::bidirected);
  CHECK(ch.at(1, 2) == gcg::EdgeMark::bidirected);

  // Diamond: the three edges into the sink are compelled (two colliders),
  // the remaining edge is reversible.
  const auto dia = gcg::cpdag(diamond());
  CHECK(dia.at(0, 2) == gcg::EdgeMark::bidirected);
  CHECK(dia.at(2, 0) == gcg::EdgeMark::bidirected);
  CHECK(dia.at(0, 3) == gcg::EdgeMark::directed);
  CHECK(dia.at(1, 3) == gcg::EdgeMark::directed);
  CHECK(dia.at(2, 3) == gcg::EdgeMark::directed);
  CHECK(dia.at(3, 0) == gcg::EdgeMark::none);

  // Triangle plus pendant: fully reversible, so the two four-node graphs
  // land in different classes.
  const auto tri = gcg::cpdag(triangle4());
  int directed = 0, bidirected = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      directed += tri.at(i, j) == gcg::EdgeMark::directed;
      bidirected += tri.at(i, j) == gcg::EdgeMark::bidirected;
    }
  }
  CHECK(directed == 0);
  CHECK(bidirected == 8);

  // Hub graph: the only two-parent node has adjacent parents, nothing is
  // compelled.
  const auto hub = gcg::cpdag(wide8());
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      CHECK(hub.at(i, j) != gcg::EdgeMark::directed);
      const bool adjacent = wide8().edge(i, j) || wide8().edge(j, i);
      CHECK((hub.at(i, j) != gcg::EdgeMark::none) == adjacent);
    }
  }

  // Skeleton preservation and orientation sanity on random graphs.
  for (std::uint64_t seed = 40; seed < 60; ++seed) {
    const gcg::Dag g = random_dag(5, 0.4, seed);
    const auto c = gcg::cpdag(g);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        const bool adjacent = g.edge(i, j) || g.edge(j, i);
        CHECK((c.at(i, j) != gcg::EdgeMark::none ||
               c.at(j, i) == gcg::EdgeMark::directed) == adjacent);
        if (c.at(i, j) == gcg::EdgeMark::directed) CHECK(g.edge(i, j));
        if (c.at(i, j) == gcg::EdgeMark::bidirected) {
          CHECK(c.at(j, i) == gcg::EdgeMark::bidirected);
        }
      }
    }
  }

  CHECK_THROWS_AS(gcg::cpdag(gcg::Dag(2, {{0, 1}, {1, 0}})), gcg::Error);
}

TEST_CASE("classification metrics follow the confusion counts") {
  // Truth with seven directed pairs among twenty ordered pairs.
  gcg::Cpdag truth;
  truth.m = 5;
  truth.mark.assign(25, gcg::EdgeMark::none);
  const auto set = [&truth](int i, int j) {
    truth.mark[static_cast<std::size_t>(i) * 5 + j] = gcg::EdgeMark::directed;
  };
  set(0, 1);
  set(0, 2);
  set(0, 3);
  set(0, 4);
  set(1, 2);
  set(1, 3);
  set(1, 4);

  gcg::MatrixXd f = gcg::MatrixXd::Constant(5, 5, 0.1);
  f(0, 1) = f(0, 2) = f(0, 3) = f(0, 4) = f(1, 2) = 0.9;  // five true positives
  f(2, 3) = 0.9;                                          // one false positive
  const auto rep = gcg::classification_metrics(f, truth, {0.5, 1.0});
  REQUIRE(rep.per_threshold.size() == 2);
  const auto& t = rep.per_threshold[0];
  CHECK_THAT(t.accuracy, WithinAbs(0.85, 1e-15));
  CHECK_THAT(t.false_discovery, WithinAbs(1.0 / 6.0, 1e-15));
  CHECK_THAT(t.false_omission, WithinAbs(1.0 / 7.0, 1e-15));
  CHECK_THAT(t.sensitivity, WithinAbs(5.0 / 7.0, 1e-15));
  CHECK_THAT(t.specificity, WithinAbs(12.0 / 13.0, 1e-15));

  // Above every feature value nothing is predicted: the discovery rate has
  // an empty denominator and stays out of the averages as NaN.
  const auto& hi = rep.per_threshold[1];
  CHECK(std::isnan(hi.false_discovery));
  CHECK(hi.sensitivity == 0.0);
  CHECK_THAT(hi.false_omission, WithinAbs(7.0 / 20.0, 1e-15));

  gcg::MatrixXd perfect = gcg::MatrixXd::Zero(5, 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      if (i != j && truth.at(i, j) != gcg::EdgeMark::none) perfect(i, j) = 1.0;
    }
  }
  CHECK(gcg::auroc(perfect, truth) == 1.0);
  CHECK(gcg::auroc(gcg::MatrixXd::Constant(5, 5, 0.3), truth) == 0.5);

  // Degenerate truth has no curve to integrate.
  gcg::Cpdag none;
  none.m = 3;
  none.mark.assign(9, gcg::EdgeMark::none);
  CHECK(std::isnan(gcg::auroc(gcg::MatrixXd::Zero(3, 3), none)));

  CHECK_THROWS_AS(gcg::classification_metrics(gcg::MatrixXd::Zero(3, 3), truth, {0.5}),
                  gcg::Error);
}

TEST_CASE("auroc matches the rank-sum statistic") {
  const auto truth = gcg::cpdag(diamond());
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    gcg::MatrixXd f = gcg::MatrixXd::Zero(4, 4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        if (i != j) f(i, j) = gcg::counter_u01(seed, 7, i, j);
      }
    }
    CHECK_THAT(gcg::auroc(f, truth), WithinAbs(rank_sum_auroc(f, truth), 1e-12));
  }
  // Ties collapse to one diagonal block and still match the midrank value.
  gcg::MatrixXd tied = gcg::MatrixXd::Constant(4, 4, 0.4);
  tied(0, 3) = tied(1, 3) = 0.8;
  CHECK_THAT(gcg::auroc(tied, truth), WithinAbs(rank_sum_auroc(tied, truth), 1e-12));
}

TEST_CASE("graph distance counts adjacency disagreements") {
  CHECK(gcg::graph_distance(chain3(), chain3()) == 0);
  gcg::Dag extra = chain3();
  extra.set_edge(0, 2, true);
  CHECK(gcg::graph_distance(extra, chain3()) == 1);
  gcg::Dag rev(3, {{1, 0}, {1, 2}});
  CHECK(gcg::graph_distance(rev, chain3()) == 2);
  CHECK(gcg::graph_distance(gcg::Dag(3), chain3()) == 2);
  CHECK_THROWS_AS(gcg::graph_distance(gcg::Dag(3), gcg::Dag(4)), gcg::Error);
}
