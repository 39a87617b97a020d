#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "attnsum/corpus.hpp"
#include "attnsum/error.hpp"
#include "attnsum/pipeline.hpp"
#include "attnsum/summary.hpp"

namespace attnsum {

inline constexpr double kDefaultSmoothing = 0.5;

struct WordDistribution {
  std::vector<std::string> universe;
  Eigen::VectorXd probs;
  std::size_t dropped = 0;  // input words outside the universe
};

/// Additively smoothed distribution: (count(w) + alpha) / (total + alpha * |U|).
WordDistribution word_distribution(const std::vector<std::string>& words,
                                   const std::vector<std::string>& universe, double alpha);

/// sum_x p(x) log2(p(x) / q(x)); terms with p(x) = 0 contribute nothing.
template <typename DerivedP, typename DerivedQ>
double kld(const Eigen::MatrixBase<DerivedP>& p, const Eigen::MatrixBase<DerivedQ>& q) {
  if (p.size() != q.size()) throw Error(ErrorCode::UniverseMismatch, "length differs");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = p(i);
    if (pi > 0.0) sum += pi * std::log2(pi / static_cast<double>(q(i)));
  }
  return sum;
}

/// Jensen-Shannon divergence in bits against the midpoint M = (P + Q) / 2.
template <typename DerivedP, typename DerivedQ>
double jsd(const Eigen::MatrixBase<DerivedP>& p, const Eigen::MatrixBase<DerivedQ>& q) {
  if (p.size() != q.size()) throw Error(ErrorCode::UniverseMismatch, "length differs");
  const Eigen::VectorXd m = 0.5 * (p.template cast<double>() + q.template cast<double>());
  return 0.5 * kld(p, m) + 0.5 * kld(q, m);
}

double kld(const WordDistribution& p, const WordDistribution& q);
double jsd(const WordDistribution& p, const WordDistribution& q);

struct Divergence {
  double kld = 0.0;
  double jsd = 0.0;
};

/// Divergence of the summary's word distribution (Q) from the note's (P),
/// both smoothed over the note vocabulary.
Divergence evaluate(const Document& doc, const Summary& summary, double alpha = kDefaultSmoothing);

struct ReportRow {
  std::string note_id;
  Method method = Method::Attention;
  double kld = 0.0;
  double jsd = 0.0;
  std::size_t summary_len = 0;
  std::string error;  // nonempty when this (note, method) failed

  bool ok() const { return error.empty(); }
};

struct MethodMeans {
  double mean_kld = 0.0;
  double mean_jsd = 0.0;
  std::size_t notes = 0;
};

struct DivergenceReport {
  std::vector<ReportRow> rows;  // note order, then method order
  std::map<Method, MethodMeans> means;
};

struct CompareOptions {
  std::vector<Method> methods = all_methods();
  BudgetSpec budget{};
  double alpha = kDefaultSmoothing;
  std::uint32_t seed = kDefaultKMeansSeed;
  std::size_t threads = 1;
};

/// Runs each method on each note and scores it. Failures become error rows;
/// the run continues. Rows come back in note order whatever the thread count.
DivergenceReport compare(const std::vector<Document>& corpus, const WeightStore& weights,
                         const Vocabulary& vocab, const CompareOptions& options = {});

/// Per-method means over the successful rows. Values are summed in sorted
/// order so the result does not depend on note order.
std::map<Method, MethodMeans> method_means(const std::vector<ReportRow>& rows);

std::string report_to_csv(const DivergenceReport& report);
std::string report_to_json(const DivergenceReport& report);
/// Per-note KLD/JSD series for line charts; failed rows appear as null.
std::string report_series_json(const DivergenceReport& report);

}  // namespace attnsum
