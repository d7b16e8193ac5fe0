#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "gcgarch/estimation.hpp"
#include "gcgarch/pcc.hpp"
#include "gcgarch/types.hpp"

namespace gcg {

// --- Computable family of DAGs ---

// Tests whether the conditional CDF pairing node i with its k-th parent
// (k is 1-based, parents sorted in canonical topological numbering) can be
// produced by the h-recursion. Walks the conditioning set through repeated
// parent intersections; each nonempty intersection must be a leading run of
// the current head's sorted parent list, and an empty intersection means the
// remaining dependence is resolved by the graph itself.
bool cumulative_parent_test(const Dag& g, int i, int k);

// True iff cumulative_parent_test passes at every node and parent position,
// which is exactly when build_dag_units accepts the graph.
bool in_reduced_space(const Dag& g);

// All graphs one edge addition or deletion away, filtered to acyclic members
// of the reduced space. Candidate order is deterministic: ordered pairs
// (u, v) with u ascending then v ascending. Symmetric as a relation.
std::vector<Dag> neighborhood(const Dag& g);

// --- Scoring ---

struct ScoredGraph {
  Dag dag;
  double bic = 0.0;
  // Sequential estimates behind the score, one per copula unit in lattice
  // enumeration order. Left empty by helpers that only rank graphs.
  std::vector<CopulaParams> theta2_tilde;
};

// Factor-layer BIC over a fixed PIT panel: the lattice log-likelihood at
// sequential estimates minus 2 * (edge count) * log T, four parameters per
// copula. Stock columns never enter. Fits are cached per node, keyed by the
// node's ancestral sub-DAG, which is the exact part of the graph its
// likelihood contribution can see; whole graphs are cached by adjacency.
class BicScorer {
 public:
  BicScorer(const MatrixXd& u_pit, int m_sc = kCorrScale);

  // Throws Error::Code::unsupported when the graph is outside the reduced
  // space and Error::Code::invalid_argument on a cycle or size mismatch.
  ScoredGraph score(const Dag& g);

  // Cache telemetry: nodes fitted (misses) and node reuses (hits).
  long fit_count() const { return fit_count_; }
  long cache_hits() const { return cache_hits_; }

 private:
  struct NodeFit {
    std::vector<CopulaParams> params;  // depth ascending
    double loglik = 0.0;
  };

  MatrixXd u_;
  int m_sc_ = kCorrScale;
  long fit_count_ = 0;
  long cache_hits_ = 0;
  std::unordered_map<std::uint64_t, NodeFit> node_cache_;
  std::unordered_map<std::uint64_t, ScoredGraph> graph_cache_;
};

// One-off score of a returns panel: PIT transform under the given marginals,
// then BicScorer on the result.
ScoredGraph bic_score(const MatrixXd& r, const std::vector<GarchParams>& marginals,
                      const Dag& g, int m_sc = kCorrScale);

// --- Structure MCMC ---

struct StructureMcmcResult {
  std::vector<Dag> samples;    // state after each iteration
  std::vector<double> scores;  // score of the matching sample
  std::vector<char> accepted;

  double accept_rate() const;
};

// Metropolis-Hastings over the reduced space: uniform proposal on the
// neighborhood, acceptance min{1, exp(s' - s) * |nbd(G)| / |nbd(G')|}, so the
// stationary law is proportional to exp(score) under a flat graph prior. An
// empty neighborhood keeps the chain in place. Deterministic for fixed seed.
StructureMcmcResult structure_mcmc(const std::function<double(const Dag&)>& score,
                                   const Dag& init, int iters, std::uint64_t seed);
StructureMcmcResult structure_mcmc(BicScorer& scorer, const Dag& init, int iters,
                                   std::uint64_t seed);
StructureMcmcResult structure_mcmc(const MatrixXd& r,
                                   const std::vector<GarchParams>& marginals,
                                   const Dag& init, int iters, std::uint64_t seed,
                                   int m_sc = kCorrScale);

// The n_g distinct sampled graphs with the highest scores, descending, ties
// broken by adjacency bytes so the selection is reproducible. theta2_tilde
// is left empty; rescore through a BicScorer when the estimates are needed.
std::vector<ScoredGraph> top_graphs(const StructureMcmcResult& r, int n_g);

// Entry (i, j) = fraction of sampled graphs containing edge i -> j. The
// caller passes post-burn-in samples.
MatrixXd edge_features(const std::vector<Dag>& samples);

// --- Equivalence classes and edge classification ---

enum class EdgeMark : std::uint8_t { none = 0, directed = 1, bidirected = 2 };

// Class summary of a DAG: skeleton plus, per edge, whether every class
// member orients it the same way (directed) or not (bidirected). A directed
// edge marks only (i, j); a bidirected edge marks both orders.
struct Cpdag {
  int m = 0;
  std::vector<EdgeMark> mark;  // m*m, row-major

  EdgeMark at(int i, int j) const { return mark[static_cast<std::size_t>(i) * m + j]; }
};

// v-structure orientation followed by the standard closure rules.
Cpdag cpdag(const Dag& g);

// Confusion rates of thresholded edge predictions against a class summary.
// An ordered pair (i, j) counts as a true edge when the summary directs
// i -> j or leaves i and j bidirected. Cells whose denominator is empty are
// NaN and must stay out of any average.
struct ThresholdMetrics {
  double threshold = 0.0;
  double accuracy = 0.0;
  double false_discovery = 0.0;  // FP / (TP + FP)
  double false_omission = 0.0;   // FN / (FN + TN)
  double sensitivity = 0.0;      // TP / (TP + FN)
  double specificity = 0.0;      // TN / (TN + FP)
};

struct MetricReport {
  std::vector<ThresholdMetrics> per_threshold;
  double auroc = 0.0;
};

// Predictions are strict: edge called present when feature > threshold.
MetricReport classification_metrics(const MatrixXd& features, const Cpdag& truth,
                                    const std::vector<double>& thresholds);

// Trapezoidal area under the ROC curve of the feature matrix against the
// class summary, sweeping every distinct feature value with ties grouped.
// NaN when the truth has no positive or no negative pairs.
double auroc(const MatrixXd& features, const Cpdag& truth);

// Number of adjacency entries where the two graphs disagree.
int graph_distance(const Dag& g, const Dag& reference);

}  // namespace gcg
