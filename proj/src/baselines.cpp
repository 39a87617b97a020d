#include "attnsum/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "attnsum/encoder.hpp"
#include "attnsum/error.hpp"

namespace attnsum {
namespace {

void require_content(const Document& doc) {
  if (doc.sentences.empty() || doc.total_words() == 0)
    throw Error(ErrorCode::NoContent, doc.note_id + ": every sentence is empty after cleaning");
}

// Indices of the `k` largest values; ties go to the lower index. Returned sorted.
std::vector<std::size_t> top_k(const std::vector<double>& values, std::size_t k) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  order.resize(std::min(k, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

class UniformSource {
 public:
  explicit UniformSource(std::uint32_t seed) : engine_(seed) {}

  // 53-bit double in [0, 1).
  double next() {
    const std::uint64_t a = engine_() >> 5;
    const std::uint64_t b = engine_() >> 6;
    return (static_cast<double>(a) * 67108864.0 + static_cast<double>(b)) / 9007199254740992.0;
  }

 private:
  std::mt19937 engine_;
};

}  // namespace

std::size_t Budget::effective(std::size_t sentence_count) const {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "budget k must be >= 1");
  return std::min(k, sentence_count);
}

// ---------------------------------------------------------------------------

Summary frequency_summarize(const Document& doc, Budget budget,
                            std::vector<WordProbabilities>* history) {
  require_content(doc);
  const std::size_t n = doc.sentences.size();
  const std::size_t k = budget.effective(n);

  WordProbabilities prob;
  const auto total = static_cast<double>(doc.total_words());
  for (const auto& [w, c] : doc.word_counts) prob[w] = static_cast<double>(c) / total;
  if (history) history->push_back(prob);

  auto weight = [&](const Sentence& s) {
    if (s.words.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& w : s.words) sum += prob.at(w);
    return sum / static_cast<double>(s.words.size());
  };

  Summary out;
  out.note_id = doc.note_id;
  out.method = Method::Frequency;
  out.scores.reserve(n);
  for (const auto& s : doc.sentences) out.scores.push_back(weight(s));

  std::vector<bool> taken(n, false);
  for (std::size_t pick = 0; pick < k; ++pick) {
    std::size_t best = n;
    double best_weight = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double w = weight(doc.sentences[i]);
      if (w > best_weight) {
        best_weight = w;
        best = i;
      }
    }
    taken[best] = true;
    out.selected.push_back(best);
    const std::set<std::string> distinct(doc.sentences[best].words.begin(),
                                         doc.sentences[best].words.end());
    for (const auto& w : distinct) prob[w] *= prob[w];
    if (history) history->push_back(prob);
  }
  std::sort(out.selected.begin(), out.selected.end());
  return out;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd tfidf_matrix(const Document& doc) {
  std::map<std::string, Eigen::Index> column;
  for (const auto& [w, c] : doc.word_counts) {
    const auto next = static_cast<Eigen::Index>(column.size());
    column.emplace(w, next);
  }
  const auto n = static_cast<Eigen::Index>(doc.sentences.size());
  Eigen::MatrixXd tf = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(column.size()));
  for (Eigen::Index i = 0; i < n; ++i)
    for (const auto& w : doc.sentences[static_cast<std::size_t>(i)].words) tf(i, column.at(w)) += 1.0;

  for (Eigen::Index j = 0; j < tf.cols(); ++j) {
    const double df = static_cast<double>((tf.col(j).array() > 0.0).count());
    tf.col(j) *= std::log(static_cast<double>(n) / (1.0 + df)) + 1.0;
  }
  return tf;
}

SimilarityGraph build_similarity_graph(const Document& doc) {
  const Eigen::MatrixXd tfidf = tfidf_matrix(doc);
  const Eigen::Index n = tfidf.rows();
  const Eigen::VectorXd norms = tfidf.rowwise().norm();

  SimilarityGraph g;
  g.weights = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (norms(i) == 0.0 || norms(j) == 0.0) continue;
      const double cos = tfidf.row(i).dot(tfidf.row(j)) / (norms(i) * norms(j));
      g.weights(i, j) = g.weights(j, i) = std::clamp(cos, 0.0, 1.0);
    }
  }
  return g;
}

PageRankResult pagerank(const SimilarityGraph& graph, const PageRankOptions& options) {
  const Eigen::Index n = graph.size();
  if (n == 0) throw Error(ErrorCode::EmptyInput, "empty graph");
  const double nd = static_cast<double>(n);
  const Eigen::VectorXd out_weight = graph.weights.rowwise().sum();

  PageRankResult res;
  res.rank = Eigen::VectorXd::Constant(n, 1.0 / nd);
  Eigen::VectorXd next(n);
  while (res.iterations < options.max_iterations) {
    double dangling = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (out_weight(j) == 0.0) dangling += res.rank(j);

    for (Eigen::Index i = 0; i < n; ++i) {
      double inflow = 0.0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (out_weight(j) > 0.0) inflow += res.rank(j) * graph.weights(j, i) / out_weight(j);
      next(i) = (1.0 - options.damping) / nd + options.damping * (inflow + dangling / nd);
    }
    ++res.iterations;
    const double change = (next - res.rank).lpNorm<1>();
    res.rank.swap(next);
    if (change < options.tolerance) break;
  }
  return res;
}

Summary graph_summarize(const Document& doc, Budget budget, SimilarityGraph* graph_out) {
  require_content(doc);
  const std::size_t k = budget.effective(doc.sentences.size());
  SimilarityGraph graph = build_similarity_graph(doc);
  const auto pr = pagerank(graph);

  Summary out;
  out.note_id = doc.note_id;
  out.method = Method::Graph;
  out.scores.assign(pr.rank.data(), pr.rank.data() + pr.rank.size());
  out.selected = top_k(out.scores, k);
  if (graph_out) *graph_out = std::move(graph);
  return out;
}

std::string graph_to_json(const SimilarityGraph& graph, const std::string& note_id) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < graph.size(); ++i) {
    std::vector<double> row(graph.weights.row(i).begin(), graph.weights.row(i).end());
    rows.push_back(row);
  }
  return nlohmann::json{{"note_id", note_id}, {"n", graph.size()}, {"weights", rows}}.dump() + "\n";
}

// ---------------------------------------------------------------------------

KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, const KMeansOptions& options) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n == 0) throw Error(ErrorCode::EmptyInput, "no points to cluster");
  if (k < 1 || k > n) throw Error(ErrorCode::InvalidArgument, "k must lie in [1, n]");
  const auto row = [](std::size_t i) { return static_cast<Eigen::Index>(i); };

  // k-means++ seeding.
  UniformSource uniform(options.seed);
  std::vector<std::size_t> seeds;
  seeds.push_back(std::min(static_cast<std::size_t>(uniform.next() * static_cast<double>(n)), n - 1));
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (seeds.size() < k) {
    const auto& last = points.row(row(seeds.back()));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (points.row(row(i)) - last).squaredNorm());
      total += d2[i];
    }
    std::size_t chosen = n;
    if (total > 0.0) {
      const double target = uniform.next() * total;
      double cumulative = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cumulative += d2[i];
        if (cumulative > target) {
          chosen = i;
          break;
        }
      }
      if (chosen == n) {  // rounding left target at the very top: take the last positive weight
        for (std::size_t i = n; i-- > 0;)
          if (d2[i] > 0.0) {
            chosen = i;
            break;
          }
      }
    } else {
      for (std::size_t i = 0; i < n && chosen == n; ++i)
        if (std::find(seeds.begin(), seeds.end(), i) == seeds.end()) chosen = i;
    }
    seeds.push_back(chosen);
  }

  KMeansResult res;
  res.centroids.resize(row(k), points.cols());
  for (std::size_t c = 0; c < k; ++c) res.centroids.row(row(c)) = points.row(row(seeds[c]));
  res.labels.assign(n, 0);

  auto assign = [&] {
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = (points.row(row(i)) - res.centroids.row(row(c))).squaredNorm();
        if (d < best) {
          best = d;
          res.labels[i] = c;
        }
      }
      objective += best;
    }
    res.objective.push_back(objective);
  };

  while (res.iterations < options.max_iterations) {
    assign();
    ++res.iterations;
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(row(k), points.cols());
    std::vector<std::size_t> members(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      next.row(row(res.labels[i])) += points.row(row(i));
      ++members[res.labels[i]];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (members[c] == 0) {
        next.row(row(c)) = res.centroids.row(row(c));
      } else {
        next.row(row(c)) /= static_cast<double>(members[c]);
      }
      shift = std::max(shift, (next.row(row(c)) - res.centroids.row(row(c))).norm());
    }
    res.centroids.swap(next);
    if (shift < options.tolerance) break;
  }
  assign();  // labels against the final centroids
  return res;
}

Eigen::MatrixXd sentence_embeddings(const Document& doc, const WeightStore& weights,
                                    const Vocabulary& vocab) {
  const auto n = static_cast<Eigen::Index>(doc.sentences.size());
  Eigen::MatrixXd emb(n, weights.config().hidden_size);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto out =
        encoder_forward(wordpiece_tokenize(doc.sentences[static_cast<std::size_t>(i)], vocab), weights);
    emb.row(i) = out.hidden.row(0).cast<double>();
  }
  return emb;
}

namespace {

// Members of a two-point cluster are equidistant from its mean in exact
// arithmetic; rounding must not decide which one is reported.
bool strictly_closer(double a, double b) { return a < b - 1e-12 * std::max(1.0, b); }

}  // namespace

Summary centroid_select(const Eigen::MatrixXd& embeddings, Budget budget,
                        const KMeansOptions& options) {
  const auto n = static_cast<std::size_t>(embeddings.rows());
  const std::size_t k = budget.effective(n);
  const auto km = kmeans(embeddings, k, options);

  Summary out;
  out.method = Method::Centroid;
  out.scores.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.scores[i] = (embeddings.row(static_cast<Eigen::Index>(i)) -
                     km.centroids.row(static_cast<Eigen::Index>(km.labels[i])))
                        .norm();

  std::vector<bool> taken(n, false);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i)
      if (km.labels[i] == c && (best == n || strictly_closer(out.scores[i], out.scores[best]))) best = i;
    if (best != n) {
      taken[best] = true;
      out.selected.push_back(best);
    }
  }
  // Empty clusters (duplicate embeddings) leave slots open; fill them with the
  // most central remaining sentences.
  while (out.selected.size() < k) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!taken[i] && (best == n || strictly_closer(out.scores[i], out.scores[best]))) best = i;
    taken[best] = true;
    out.selected.push_back(best);
  }
  std::sort(out.selected.begin(), out.selected.end());
  return out;
}

Summary centroid_summarize(const Document& doc, Budget budget, const WeightStore& weights,
                           const Vocabulary& vocab, const KMeansOptions& options) {
  require_content(doc);
  Summary out = centroid_select(sentence_embeddings(doc, weights, vocab), budget, options);
  out.note_id = doc.note_id;
  return out;
}

}  // namespace attnsum
