#include "attnsum/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "attnsum/attention_summarizer.hpp"
#include "attnsum/error.hpp"

namespace attnsum {

BudgetSpec BudgetSpec::parse(const std::string& text) {
  BudgetSpec spec;
  if (text == "match") return spec;
  if (text.rfind("k=", 0) == 0) {
    const auto digits = text.substr(2);
    std::size_t k = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || k < 1)
      throw Error(ErrorCode::InvalidArgument, "bad budget '" + text + "': k must be a positive integer");
    spec.mode = BudgetMode::Fixed;
    spec.k = k;
    return spec;
  }
  if (text.rfind("ratio=", 0) == 0) {
    std::size_t used = 0;
    double r = 0.0;
    try {
      r = std::stod(text.substr(6), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() - 6 || !(r > 0.0 && r <= 1.0))
      throw Error(ErrorCode::InvalidArgument, "bad budget '" + text + "': ratio must lie in (0, 1]");
    spec.mode = BudgetMode::Ratio;
    spec.ratio = r;
    return spec;
  }
  throw Error(ErrorCode::InvalidArgument, "bad budget '" + text + "'; expected match, k=N or ratio=R");
}

std::string BudgetSpec::to_string() const {
  switch (mode) {
    case BudgetMode::Match: return "match";
    case BudgetMode::Fixed: return "k=" + std::to_string(k);
    case BudgetMode::Ratio: return "ratio=" + std::to_string(ratio);
  }
  return "match";
}

std::vector<Summary> run_methods(const Document& doc, const std::vector<Method>& methods,
                                 const BudgetSpec& budget, const WeightStore& weights,
                                 const Vocabulary& vocab, std::uint32_t seed,
                                 SimilarityGraph* graph_out) {
  const std::size_t n = doc.sentences.size();
  const bool want_attention =
      std::find(methods.begin(), methods.end(), Method::Attention) != methods.end();

  std::optional<Summary> attention;
  if (want_attention || budget.mode == BudgetMode::Match)
    attention = summarize(doc, weights, vocab);

  Budget b;
  switch (budget.mode) {
    case BudgetMode::Match: b.k = attention->selected.size(); break;
    case BudgetMode::Fixed: b.k = budget.k; break;
    case BudgetMode::Ratio:
      b.k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(budget.ratio * static_cast<double>(n))));
      break;
  }

  std::vector<Summary> out;
  for (Method m : methods) {
    switch (m) {
      case Method::Attention: out.push_back(*attention); break;
      case Method::Frequency: out.push_back(frequency_summarize(doc, b)); break;
      case Method::Graph: out.push_back(graph_summarize(doc, b, graph_out)); break;
      case Method::Centroid: {
        KMeansOptions km;
        km.seed = seed;
        out.push_back(centroid_summarize(doc, b, weights, vocab, km));
        break;
      }
    }
  }
  return out;
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace attnsum
