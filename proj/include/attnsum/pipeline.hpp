#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "attnsum/baselines.hpp"
#include "attnsum/corpus.hpp"
#include "attnsum/summary.hpp"
#include "attnsum/weights.hpp"

namespace attnsum {

enum class BudgetMode { Match, Fixed, Ratio };

/// How baselines pick their k: match the attention summary's length, a fixed
/// k, or ceil(ratio * n).
struct BudgetSpec {
  BudgetMode mode = BudgetMode::Match;
  std::size_t k = 1;
  double ratio = 0.3;

  /// Accepts "match", "k=N" or "ratio=R".
  static BudgetSpec parse(const std::string& text);
  std::string to_string() const;
};

/// Runs `methods` on one note. The attention summary is computed whenever the
/// budget mode is Match, even if attention itself was not requested, and is
/// then left out of the result.
std::vector<Summary> run_methods(const Document& doc, const std::vector<Method>& methods,
                                 const BudgetSpec& budget, const WeightStore& weights,
                                 const Vocabulary& vocab,
                                 std::uint32_t seed = kDefaultKMeansSeed,
                                 SimilarityGraph* graph_out = nullptr);

/// Applies `fn` to every index in [0, count) on up to `threads` workers.
/// `fn` must only touch its own slot of any shared output.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace attnsum
