#pragma once

#include <vector>

#include "attnsum/corpus.hpp"
#include "attnsum/encoder.hpp"
#include "attnsum/summary.hpp"
#include "attnsum/weights.hpp"

namespace attnsum {

struct SentenceScore {
  std::size_t sentence_index = 0;
  double score = 0.0;
};

/// Mean attention that the non-[CLS] query rows pay to the [CLS] key, read from
/// head 0 of the last layer:  (1/(n-1)) * sum_{i>=1} A[i][0].
double score_sentence(const EncoderOutput& out);

/// Keeps every sentence scoring strictly above the mean. When nothing clears
/// the mean (all scores equal to within 1e-12) every sentence is kept.
Summary select_sentences(const std::vector<SentenceScore>& scores);

/// Encodes each sentence on its own, scores it, then applies the above-mean
/// rule. Sentences with no surviving words, or that fail to encode, score 0
/// and are reported in `warnings`.
Summary summarize(const Document& doc, const WeightStore& weights, const Vocabulary& vocab);

/// Per-sentence scores only (the first half of `summarize`).
std::vector<SentenceScore> score_document(const Document& doc, const WeightStore& weights,
                                          const Vocabulary& vocab,
                                          std::vector<std::string>* warnings = nullptr);

}  // namespace attnsum
