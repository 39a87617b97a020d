#include "attnsum/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "attnsum/error.hpp"

namespace attnsum {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// The whitespace-delimited token ending at `end` (inclusive), lowercased and
// without leading brackets/quotes.
std::string token_ending_at(std::string_view text, std::size_t end) {
  std::size_t begin = end;
  while (begin > 0 && !is_space(text[begin - 1])) --begin;
  while (begin < end && is_punct(text[begin]) && text[begin] != '.') ++begin;
  return to_lower(text.substr(begin, end - begin + 1));
}

bool starts_blank_line(std::string_view text, std::size_t newline) {
  std::size_t j = newline + 1;
  while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
  return j < text.size() && text[j] == '\n';
}

void push_trimmed(std::vector<std::string>& out, std::string_view piece) {
  piece = trim(piece);
  if (!piece.empty()) out.emplace_back(piece);
}

}  // namespace

std::size_t Document::total_words() const {
  return std::accumulate(word_counts.begin(), word_counts.end(), std::size_t{0},
                         [](std::size_t acc, const auto& kv) { return acc + kv.second; });
}

const std::vector<std::string>& default_abbreviations() {
  static const std::vector<std::string> list = {"dr.",    "mr.",    "mrs.",   "ms.",
                                                "e.g.",   "i.e.",   "q.d.",   "b.i.d.",
                                                "t.i.d.", "q.i.d.", "p.r.n.", "vs."};
  return list;
}

std::vector<std::string> load_abbreviations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open abbreviation list " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (!t.empty()) out.push_back(to_lower(t));
  }
  return out;
}

std::vector<std::string> segment_sentences(std::string_view text,
                                           const std::vector<std::string>& abbreviations) {
  if (trim(text).empty()) throw Error(ErrorCode::EmptyDocument, "note text is blank");

  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '.' || c == '!' || c == '?') {
      const bool at_gap = i + 1 == text.size() || is_space(text[i + 1]);
      if (!at_gap) continue;
      if (c == '.') {
        const auto tok = token_ending_at(text, i);
        if (std::find(abbreviations.begin(), abbreviations.end(), tok) != abbreviations.end())
          continue;
      }
      push_trimmed(out, text.substr(start, i + 1 - start));
      start = i + 1;
    } else if (c == '\n' && starts_blank_line(text, i)) {
      push_trimmed(out, text.substr(start, i - start));
      start = i + 1;
    }
  }
  if (start < text.size()) push_trimmed(out, text.substr(start));
  return out;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> clean_words(const std::vector<std::string>& raw_tokens) {
  std::vector<std::string> out;
  for (const auto& raw : raw_tokens) {
    if (raw.find('%') != std::string::npos) continue;
    std::string_view s = raw;
    while (!s.empty() && is_punct(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_punct(s.back())) s.remove_suffix(1);
    if (std::none_of(s.begin(), s.end(), is_alpha)) continue;
    out.push_back(to_lower(s));
  }
  return out;
}

Document make_document(const RawNote& note, const std::vector<std::string>& abbreviations) {
  Document doc;
  doc.note_id = note.id;
  for (auto& raw : segment_sentences(note.text, abbreviations)) {
    Sentence s;
    s.index = doc.sentences.size();
    s.words = clean_words(split_whitespace(raw));
    s.raw = std::move(raw);
    for (const auto& w : s.words) ++doc.word_counts[w];
    doc.sentences.push_back(std::move(s));
  }
  return doc;
}

std::vector<RawNote> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open corpus " + path.string());

  std::vector<RawNote> notes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);

    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::ParseError, where + ": " + e.what());
    }
    if (!rec.is_object()) throw Error(ErrorCode::ParseError, where + ": record is not an object");

    auto field = [&](const char* name) -> std::string {
      auto it = rec.find(name);
      if (it == rec.end() || !it->is_string())
        throw Error(ErrorCode::ParseError, where + ": missing string field \"" + name + "\"");
      return it->get<std::string>();
    };

    RawNote note;
    note.id = field("id");
    note.text = field("text");
    if (note.id.empty()) throw Error(ErrorCode::ParseError, where + ": empty id");
    if (trim(note.text).empty()) throw Error(ErrorCode::ParseError, where + ": blank text");
    if (auto it = rec.find("labels"); it != rec.end() && !it->is_null()) {
      if (!it->is_array()) throw Error(ErrorCode::ParseError, where + ": labels is not a list");
      for (const auto& l : *it) {
        if (!l.is_string()) throw Error(ErrorCode::ParseError, where + ": non-string label");
        note.labels.push_back(l.get<std::string>());
      }
    }
    notes.push_back(std::move(note));
  }
  return notes;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i)
    index_.emplace(tokens_[i], static_cast<int>(i));  // first occurrence wins
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open vocabulary " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens));
}

std::optional<int> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenSequence wordpiece_tokenize(const Sentence& sentence, const Vocabulary& vocab,
                                 std::size_t max_length) {
  auto special = [&](std::string_view name) {
    auto id = vocab.find(name);
    if (!id) throw Error(ErrorCode::MissingSpecialToken, "vocabulary lacks " + std::string(name));
    return *id;
  };
  const int cls = special(Vocabulary::kCls);
  const int sep = special(Vocabulary::kSep);
  const int unk = special(Vocabulary::kUnk);
  if (max_length < 2) throw Error(ErrorCode::InvalidArgument, "max_length must be >= 2");

  constexpr std::size_t kMaxWordChars = 100;
  std::vector<int> pieces;
  for (const auto& word : sentence.words) {
    if (word.size() > kMaxWordChars) {
      pieces.push_back(unk);
      continue;
    }
    std::vector<int> word_pieces;
    std::size_t start = 0;
    bool matched = true;
    while (start < word.size()) {
      std::optional<int> hit;
      std::size_t end = word.size();
      for (; end > start; --end) {
        std::string candidate = word.substr(start, end - start);
        if (start > 0) candidate.insert(0, "##");
        if ((hit = vocab.find(candidate))) break;
      }
      if (!hit) {
        matched = false;
        break;
      }
      word_pieces.push_back(*hit);
      start = end;
    }
    if (matched) {
      pieces.insert(pieces.end(), word_pieces.begin(), word_pieces.end());
    } else {
      pieces.push_back(unk);
    }
  }

  if (pieces.size() > max_length - 2) pieces.resize(max_length - 2);

  TokenSequence seq;
  seq.ids.reserve(pieces.size() + 2);
  seq.ids.push_back(cls);
  seq.ids.insert(seq.ids.end(), pieces.begin(), pieces.end());
  seq.ids.push_back(sep);
  seq.segment_ids.assign(seq.ids.size(), 0);
  return seq;
}

std::vector<std::string> decode(const TokenSequence& seq, const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(seq.ids.size());
  for (int id : seq.ids) out.push_back(vocab.token(id));
  return out;
}

}  // namespace attnsum
