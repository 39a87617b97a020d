#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace attnsum {

struct RawNote {
  std::string id;
  std::string text;
  std::vector<std::string> labels;
};

struct Sentence {
  std::size_t index = 0;
  std::string raw;
  std::vector<std::string> words;
};

/// A cleaned note. `word_counts` is the multiset union of every sentence's
/// words; std::map keeps iteration (and thus every derived universe) sorted.
struct Document {
  std::string note_id;
  std::vector<Sentence> sentences;
  std::map<std::string, std::size_t> word_counts;

  std::size_t total_words() const;
};

struct TokenSequence {
  std::vector<int> ids;
  std::vector<int> segment_ids;

  std::size_t length() const { return ids.size(); }
};

inline constexpr std::size_t kMaxSequenceLength = 128;

/// Abbreviations whose trailing period never ends a sentence. Matches
/// data/abbreviations.txt.
const std::vector<std::string>& default_abbreviations();
std::vector<std::string> load_abbreviations(const std::filesystem::path& path);

std::vector<std::string> segment_sentences(std::string_view text,
                                           const std::vector<std::string>& abbreviations =
                                               default_abbreviations());

/// Lowercases, strips surrounding punctuation, drops tokens containing '%'
/// and tokens with no alphabetic character.
std::vector<std::string> clean_words(const std::vector<std::string>& raw_tokens);

std::vector<std::string> split_whitespace(std::string_view text);

Document make_document(const RawNote& note,
                       const std::vector<std::string>& abbreviations = default_abbreviations());

std::vector<RawNote> load_corpus(const std::filesystem::path& path);

class Vocabulary {
 public:
  static constexpr std::string_view kCls = "[CLS]";
  static constexpr std::string_view kSep = "[SEP]";
  static constexpr std::string_view kUnk = "[UNK]";

  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);

  static Vocabulary load(const std::filesystem::path& path);

  std::optional<int> find(std::string_view token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

/// Greedy longest-match WordPiece over the sentence's cleaned words, framed by
/// [CLS] ... [SEP]. Pieces beyond `max_length - 2` are dropped.
TokenSequence wordpiece_tokenize(const Sentence& sentence, const Vocabulary& vocab,
                                 std::size_t max_length = kMaxSequenceLength);

/// Decodes ids back to their vocabulary strings (subwords keep their "##").
std::vector<std::string> decode(const TokenSequence& seq, const Vocabulary& vocab);

}  // namespace attnsum
