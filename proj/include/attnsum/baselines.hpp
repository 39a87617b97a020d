#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "attnsum/corpus.hpp"
#include "attnsum/summary.hpp"
#include "attnsum/weights.hpp"

namespace attnsum {

/// Fixed extraction size. The effective size is clipped to the sentence count.
struct Budget {
  std::size_t k = 1;

  std::size_t effective(std::size_t sentence_count) const;
};

// ---------------------------------------------------------------------------
// Frequency (SumBasic)

using WordProbabilities = std::map<std::string, double>;

/// SumBasic: weight each sentence by the mean probability of its words, take
/// the heaviest (lowest index on ties), square the probability of every word in
/// it, repeat. `scores` holds the initial sentence weights. If `history` is
/// given it receives the word probabilities before the first pick and after
/// every pick.
Summary frequency_summarize(const Document& doc, Budget budget,
                            std::vector<WordProbabilities>* history = nullptr);

// ---------------------------------------------------------------------------
// Similarity graph + PageRank

struct SimilarityGraph {
  Eigen::MatrixXd weights;  // symmetric, zero diagonal, entries in [0, 1]

  Eigen::Index size() const { return weights.rows(); }
};

/// Sentence x vocabulary TF-IDF matrix; tf is the raw count and
/// idf = ln(n / (1 + df)) + 1. Columns follow the document's sorted vocabulary.
Eigen::MatrixXd tfidf_matrix(const Document& doc);

SimilarityGraph build_similarity_graph(const Document& doc);

struct PageRankOptions {
  double damping = 0.85;
  double tolerance = 1e-6;  // L1 change between iterates
  int max_iterations = 200;
};

struct PageRankResult {
  Eigen::VectorXd rank;
  int iterations = 0;
};

/// Weighted PageRank by power iteration from the uniform vector. Rows with no
/// outgoing weight spread their mass uniformly.
PageRankResult pagerank(const SimilarityGraph& graph, const PageRankOptions& options = {});

Summary graph_summarize(const Document& doc, Budget budget, SimilarityGraph* graph_out = nullptr);

std::string graph_to_json(const SimilarityGraph& graph, const std::string& note_id);

// ---------------------------------------------------------------------------
// Centroid (K-means over sentence embeddings)

inline constexpr std::uint32_t kDefaultKMeansSeed = 0x5EED;

struct KMeansOptions {
  std::uint32_t seed = kDefaultKMeansSeed;
  int max_iterations = 100;
  double tolerance = 1e-4;  // largest centroid shift (Euclidean)
};

struct KMeansResult {
  Eigen::MatrixXd centroids;       // k x dim
  std::vector<std::size_t> labels; // per point, against the final centroids
  std::vector<double> objective;   // sum of squared distances after each assignment
  int iterations = 0;
};

/// Lloyd iterations from a k-means++ start. Uniform draws are built from two
/// std::mt19937 outputs as (a >> 5) * 2^26 + (b >> 6) over 2^53. Distance ties
/// go to the lower cluster index; an empty cluster keeps its centroid.
KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, const KMeansOptions& options = {});

/// Last-layer hidden state at the [CLS] position, one row per sentence.
Eigen::MatrixXd sentence_embeddings(const Document& doc, const WeightStore& weights,
                                    const Vocabulary& vocab);

/// Picks, per cluster, the member nearest its centroid. `scores` holds each
/// sentence's distance to its own centroid.
Summary centroid_summarize(const Document& doc, Budget budget, const WeightStore& weights,
                           const Vocabulary& vocab, const KMeansOptions& options = {});

/// Clustering step of centroid_summarize, on precomputed embeddings.
Summary centroid_select(const Eigen::MatrixXd& embeddings, Budget budget,
                        const KMeansOptions& options = {});

}  // namespace attnsum
