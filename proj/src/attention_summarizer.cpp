#include "attnsum/attention_summarizer.hpp"

#include <string>

#include "attnsum/error.hpp"

namespace attnsum {

double score_sentence(const EncoderOutput& out) {
  if (out.attentions.empty() || out.attentions.back().empty())
    throw Error(ErrorCode::InvalidArgument, "encoder output has no attention matrices");
  const RowMatrixXf& a = out.attentions.back().front();
  const Eigen::Index n = a.rows();
  if (n < 2) throw Error(ErrorCode::TooShort, "need [CLS] and [SEP] at minimum");

  double sum = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) sum += static_cast<double>(a(i, 0));
  return sum / static_cast<double>(n - 1);
}

Summary select_sentences(const std::vector<SentenceScore>& scores) {
  if (scores.empty()) throw Error(ErrorCode::EmptyInput, "no sentence scores");

  Summary s;
  s.method = Method::Attention;
  s.scores.assign(scores.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].sentence_index != i)
      throw Error(ErrorCode::InvalidArgument, "scores must be indexed 0..n-1 in order");
    s.scores[i] = scores[i].score;
    sum += scores[i].score;
  }
  s.threshold = sum / static_cast<double>(scores.size());

  for (std::size_t i = 0; i < s.scores.size(); ++i)
    if (s.scores[i] > s.threshold) s.selected.push_back(i);
  if (s.selected.empty())
    for (std::size_t i = 0; i < s.scores.size(); ++i) s.selected.push_back(i);
  return s;
}

std::vector<SentenceScore> score_document(const Document& doc, const WeightStore& weights,
                                          const Vocabulary& vocab,
                                          std::vector<std::string>* warnings) {
  std::vector<SentenceScore> scores;
  scores.reserve(doc.sentences.size());
  for (const auto& sentence : doc.sentences) {
    SentenceScore sc{sentence.index, 0.0};
    if (sentence.words.empty()) {
      if (warnings)
        warnings->push_back("sentence " + std::to_string(sentence.index) +
                            ": no words survive cleaning; scored 0");
    } else {
      try {
        sc.score = score_sentence(encoder_forward(wordpiece_tokenize(sentence, vocab), weights));
      } catch (const Error& e) {
        if (warnings)
          warnings->push_back("sentence " + std::to_string(sentence.index) + ": " + e.what() +
                              "; scored 0");
      }
    }
    scores.push_back(sc);
  }
  return scores;
}

Summary summarize(const Document& doc, const WeightStore& weights, const Vocabulary& vocab) {
  std::vector<std::string> warnings;
  auto scores = score_document(doc, weights, vocab, &warnings);
  Summary s = select_sentences(scores);
  s.note_id = doc.note_id;
  s.warnings = std::move(warnings);
  return s;
}

}  // namespace attnsum
