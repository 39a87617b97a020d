#include "attnsum/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include <json.hpp>

namespace attnsum {
namespace {

void require_same_universe(const WordDistribution& p, const WordDistribution& q) {
  if (p.universe != q.universe || p.probs.size() != q.probs.size())
    throw Error(ErrorCode::UniverseMismatch, "distributions range over different words");
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double sorted_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

WordDistribution word_distribution(const std::vector<std::string>& words,
                                   const std::vector<std::string>& universe, double alpha) {
  if (universe.empty()) throw Error(ErrorCode::EmptyUniverse, "universe has no words");
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "smoothing alpha must be > 0");

  std::unordered_map<std::string, Eigen::Index> slot;
  for (std::size_t i = 0; i < universe.size(); ++i)
    if (!slot.emplace(universe[i], static_cast<Eigen::Index>(i)).second)
      throw Error(ErrorCode::InvalidArgument, "duplicate universe word '" + universe[i] + "'");

  WordDistribution d;
  d.universe = universe;
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(universe.size()));
  double total = 0.0;
  for (const auto& w : words) {
    auto it = slot.find(w);
    if (it == slot.end()) {
      ++d.dropped;
      continue;
    }
    counts(it->second) += 1.0;
    total += 1.0;
  }
  const double denom = total + alpha * static_cast<double>(universe.size());
  d.probs = (counts.array() + alpha).matrix() / denom;
  return d;
}

double kld(const WordDistribution& p, const WordDistribution& q) {
  require_same_universe(p, q);
  return kld(p.probs, q.probs);
}

double jsd(const WordDistribution& p, const WordDistribution& q) {
  require_same_universe(p, q);
  return jsd(p.probs, q.probs);
}

Divergence evaluate(const Document& doc, const Summary& summary, double alpha) {
  if (summary.selected.empty()) throw Error(ErrorCode::EmptySummary, doc.note_id + ": nothing selected");

  std::vector<std::string> universe;
  universe.reserve(doc.word_counts.size());
  for (const auto& [w, c] : doc.word_counts) universe.push_back(w);

  std::vector<std::string> original;
  for (const auto& s : doc.sentences) original.insert(original.end(), s.words.begin(), s.words.end());
  std::vector<std::string> extracted;
  for (auto i : summary.selected) {
    if (i >= doc.sentences.size())
      throw Error(ErrorCode::InvalidArgument, doc.note_id + ": selected index out of range");
    const auto& words = doc.sentences[i].words;
    extracted.insert(extracted.end(), words.begin(), words.end());
  }

  const auto p = word_distribution(original, universe, alpha);
  const auto q = word_distribution(extracted, universe, alpha);
  return {kld(p, q), jsd(p, q)};
}

std::map<Method, MethodMeans> method_means(const std::vector<ReportRow>& rows) {
  std::map<Method, std::pair<std::vector<double>, std::vector<double>>> values;
  for (const auto& r : rows) {
    if (!r.ok()) continue;
    values[r.method].first.push_back(r.kld);
    values[r.method].second.push_back(r.jsd);
  }
  std::map<Method, MethodMeans> means;
  for (auto& [m, v] : values) {
    const auto count = v.first.size();
    means[m] = {sorted_sum(v.first) / static_cast<double>(count),
                sorted_sum(v.second) / static_cast<double>(count), count};
  }
  return means;
}

DivergenceReport compare(const std::vector<Document>& corpus, const WeightStore& weights,
                         const Vocabulary& vocab, const CompareOptions& options) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "no notes to compare");
  if (options.methods.empty()) throw Error(ErrorCode::InvalidArgument, "no methods requested");

  std::vector<std::vector<ReportRow>> per_note(corpus.size());
  parallel_for(corpus.size(), options.threads, [&](std::size_t n) {
    const Document& doc = corpus[n];
    auto& rows = per_note[n];
    std::vector<Summary> summaries;
    std::string failure;
    try {
      summaries = run_methods(doc, options.methods, options.budget, weights, vocab, options.seed);
    } catch (const std::exception& e) {
      failure = e.what();
    }
    for (std::size_t m = 0; m < options.methods.size(); ++m) {
      ReportRow row;
      row.note_id = doc.note_id;
      row.method = options.methods[m];
      if (!failure.empty()) {
        row.error = failure;
      } else {
        try {
          const auto d = evaluate(doc, summaries[m], options.alpha);
          row.kld = d.kld;
          row.jsd = d.jsd;
          row.summary_len = summaries[m].selected.size();
        } catch (const std::exception& e) {
          row.error = e.what();
        }
      }
      rows.push_back(std::move(row));
    }
  });

  DivergenceReport report;
  for (auto& rows : per_note)
    for (auto& r : rows) report.rows.push_back(std::move(r));
  report.means = method_means(report.rows);
  return report;
}

std::string report_to_csv(const DivergenceReport& report) {
  std::string out = "note_id,method,kld,jsd,summary_len\n";
  for (const auto& r : report.rows) {
    if (!r.ok()) continue;
    out += r.note_id;
    out += ',';
    out += to_string(r.method);
    out += ',' + fmt_double(r.kld) + ',' + fmt_double(r.jsd) + ',' + std::to_string(r.summary_len) + '\n';
  }
  return out;
}

std::string report_to_json(const DivergenceReport& report) {
  nlohmann::json means = nlohmann::json::object();
  for (const auto& [m, v] : report.means)
    means[std::string(to_string(m))] = {
        {"mean_kld", v.mean_kld}, {"mean_jsd", v.mean_jsd}, {"notes", v.notes}};
  nlohmann::json errors = nlohmann::json::array();
  for (const auto& r : report.rows)
    if (!r.ok())
      errors.push_back({{"note_id", r.note_id}, {"method", std::string(to_string(r.method))},
                        {"error", r.error}});
  return nlohmann::json{{"means", means}, {"errors", errors}}.dump(2) + "\n";
}

std::string report_series_json(const DivergenceReport& report) {
  nlohmann::json notes = nlohmann::json::array();
  nlohmann::json series = nlohmann::json::object();
  for (const auto& r : report.rows) {
    if (notes.empty() || notes.back() != r.note_id) notes.push_back(r.note_id);
    auto& s = series[std::string(to_string(r.method))];
    s["kld"].push_back(r.ok() ? nlohmann::json(r.kld) : nlohmann::json());
    s["jsd"].push_back(r.ok() ? nlohmann::json(r.jsd) : nlohmann::json());
  }
  return nlohmann::json{{"notes", notes}, {"series", series}}.dump(2) + "\n";
}

}  // namespace attnsum
