#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <random>

#include <json.hpp>

#include "attnsum/corpus.hpp"
#include "attnsum/error.hpp"
#include "test_support.hpp"

using namespace attnsum;
using attnsum::testing::fixture;

namespace {

std::string non_space(const std::string& s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

Sentence sentence_of(std::vector<std::string> words) {
  Sentence s;
  s.words = std::move(words);
  return s;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected attnsum::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("segment_sentences splits on terminators followed by whitespace") {
  CHECK(segment_sentences("chest pain noted. plan follow up.") ==
        std::vector<std::string>{"chest pain noted.", "plan follow up."});
  CHECK(segment_sentences("no acute distress") == std::vector<std::string>{"no acute distress"});
  CHECK(segment_sentences("stable?  yes!  ok") == std::vector<std::string>{"stable?", "yes!", "ok"});
  CHECK(segment_sentences("bp 120.5 today. ok") == std::vector<std::string>{"bp 120.5 today.", "ok"});
}

TEST_CASE("segment_sentences honors blank lines and the abbreviation guard") {
  CHECK(segment_sentences("first part\n\nsecond part") ==
        std::vector<std::string>{"first part", "second part"});
  CHECK(segment_sentences("seen by dr. smith today. takes med b.i.d. with food.") ==
        std::vector<std::string>{"seen by dr. smith today.", "takes med b.i.d. with food."});
  CHECK(segment_sentences("see (e.g. labs) later.") == std::vector<std::string>{"see (e.g. labs) later."});
}

TEST_CASE("segment_sentences matches the hand-segmented fixture note") {
  const auto text = attnsum::testing::read_text(fixture("segmentation_note.txt"));
  const auto expected = nlohmann::json::parse(attnsum::testing::read_text(fixture("segmentation_note.expected.json")))
                            .get<std::vector<std::string>>();
  CHECK(segment_sentences(text) == expected);
}

TEST_CASE("segment_sentences rejects blank text") {
  CHECK(code_of([] { segment_sentences("  \n\t "); }) == ErrorCode::EmptyDocument);
}

TEST_CASE("segmentation never drops or reorders content characters") {
  std::mt19937 rng(11);
  const std::string alphabet = "ab .!?\n\t%/dr";
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    const int len = std::uniform_int_distribution<int>(1, 60)(rng);
    for (int i = 0; i < len; ++i) text += alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
    if (non_space(text).empty()) continue;
    std::string joined;
    for (const auto& s : segment_sentences(text)) {
      CHECK_FALSE(s.empty());
      joined += s + " ";
    }
    CHECK(non_space(joined) == non_space(text));
  }
}

TEST_CASE("clean_words applies the alphabetic filter") {
  CHECK(clean_words({"BP", "120/80", "stable"}) == std::vector<std::string>{"bp", "stable"});
  CHECK(clean_words({"***", "42"}).empty());
  CHECK(clean_words({"5%", "dextrose", "q6h"}) == std::vector<std::string>{"dextrose", "q6h"});
}

TEST_CASE("clean_words matches the regex-filter oracle on a fixture sentence") {
  // Frozen from tests/oracles/oracle.py::clean on the same token list.
  const auto tokens = split_whitespace("Pt seen by Dr. Smith, BP 120/80, HR 72; 5% dextrose (stable). e.g. x-ray");
  CHECK(clean_words(tokens) == std::vector<std::string>{"pt", "seen", "by", "dr", "smith", "bp", "hr",
                                                         "dextrose", "stable", "e.g", "x-ray"});
}

TEST_CASE("clean_words is idempotent and keeps only alphabetic lowercase words") {
  std::mt19937 rng(5);
  const std::string alphabet = "aZ9.,%-/()*";
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> toks;
    for (int t = std::uniform_int_distribution<int>(0, 8)(rng); t > 0; --t) {
      std::string tok;
      for (int c = std::uniform_int_distribution<int>(1, 6)(rng); c > 0; --c)
        tok += alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
      toks.push_back(tok);
    }
    const auto once = clean_words(toks);
    CHECK(clean_words(once) == once);
    for (const auto& w : once) {
      CHECK(std::any_of(w.begin(), w.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); }));
      CHECK(std::none_of(w.begin(), w.end(), [](char c) { return std::isupper(static_cast<unsigned char>(c)); }));
    }
  }
}

TEST_CASE("make_document counts every sentence word") {
  RawNote note{"n1", "Chest pain noted. Pain improved with rest! *** 42.", {}};
  const auto doc = make_document(note);
  REQUIRE(doc.sentences.size() == 3);
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) CHECK(doc.sentences[i].index == i);
  CHECK(doc.sentences[2].words.empty());
  CHECK(doc.word_counts.at("pain") == 2);
  std::size_t total = 0;
  for (const auto& s : doc.sentences) total += s.words.size();
  CHECK(doc.total_words() == total);
}

TEST_CASE("wordpiece_tokenize frames with [CLS]/[SEP]") {
  const auto vocab = Vocabulary::load(fixture("vocab30.txt"));
  REQUIRE(vocab.size() == 30);
  const int cls = *vocab.find("[CLS]"), sep = *vocab.find("[SEP]"), unk = *vocab.find("[UNK]");

  SUBCASE("empty payload") {
    const auto seq = wordpiece_tokenize(sentence_of({}), vocab);
    CHECK(seq.ids == std::vector<int>{cls, sep});
    CHECK(seq.segment_ids == std::vector<int>{0, 0});
  }
  SUBCASE("unknown word falls back to [UNK]") {
    CHECK(wordpiece_tokenize(sentence_of({"zzz"}), vocab).ids == std::vector<int>{cls, unk, sep});
  }
  SUBCASE("fixture id for pain") {
    // Line 6 of vocab30.txt.
    CHECK(wordpiece_tokenize(sentence_of({"pain"}), vocab).ids == std::vector<int>{cls, 5, sep});
  }
  SUBCASE("continuation pieces") {
    const auto seq = wordpiece_tokenize(sentence_of({"pains", "noted"}), vocab);
    CHECK(decode(seq, vocab) == std::vector<std::string>{"[CLS]", "pain", "##s", "noted", "[SEP]"});
  }
  SUBCASE("partial match with no continuation is a single [UNK]") {
    CHECK(wordpiece_tokenize(sentence_of({"painx"}), vocab).ids == std::vector<int>{cls, unk, sep});
  }
}

TEST_CASE("wordpiece_tokenize truncates and requires the special tokens") {
  const auto vocab = Vocabulary::load(fixture("vocab30.txt"));
  std::mt19937 rng(3);
  const std::vector<std::string> words = {"pain", "chests", "noted", "xyz", "following", "heart"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> ws(std::uniform_int_distribution<std::size_t>(0, 200)(rng));
    for (auto& w : ws) w = words[std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng)];
    const auto seq = wordpiece_tokenize(sentence_of(ws), vocab);
    CHECK(seq.ids.front() == *vocab.find("[CLS]"));
    CHECK(seq.ids.back() == *vocab.find("[SEP]"));
    CHECK(seq.length() <= kMaxSequenceLength);
    CHECK(std::all_of(seq.segment_ids.begin(), seq.segment_ids.end(), [](int s) { return s == 0; }));
  }

  const Vocabulary no_sep(std::vector<std::string>{"[CLS]", "[UNK]", "pain"});
  CHECK(code_of([&] { wordpiece_tokenize(sentence_of({"pain"}), no_sep); }) == ErrorCode::MissingSpecialToken);
}

TEST_CASE("load_corpus reads JSON lines in order") {
  const auto dir = attnsum::testing::scratch_dir("corpus");
  {
    std::ofstream(dir / "three.jsonl") << R"({"id": "a", "text": "one.", "labels": ["401.9"]})" "\n"
                                       << R"({"id": "b", "text": "two."})" "\n"
                                       << R"({"id": "c", "text": "three.", "labels": []})" "\n";
    std::ofstream(dir / "empty.jsonl");
    std::ofstream(dir / "bad.jsonl") << R"({"id": "a", "text": "ok."})" "\n" << R"({"id": "b"})" "\n";
    std::ofstream(dir / "garbage.jsonl") << "{not json\n";
  }
  const auto notes = load_corpus(dir / "three.jsonl");
  REQUIRE(notes.size() == 3);
  CHECK(notes[0].id == "a");
  CHECK(notes[0].labels == std::vector<std::string>{"401.9"});
  CHECK(notes[2].text == "three.");
  CHECK(load_corpus(dir / "empty.jsonl").empty());

  try {
    load_corpus(dir / "bad.jsonl");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    CHECK(std::string(e.what()).find("\"text\"") != std::string::npos);
  }
  CHECK(code_of([&] { load_corpus(dir / "garbage.jsonl"); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { load_corpus(dir / "missing.jsonl"); }) == ErrorCode::Io);
}

TEST_CASE("fixture corpus segments the way the generator wrote it") {
  const auto notes = load_corpus(fixture("corpus20.jsonl"));
  const auto truth = nlohmann::json::parse(attnsum::testing::read_text(fixture("corpus20.truth.json")));
  REQUIRE(notes.size() == truth.size());
  for (std::size_t n = 0; n < notes.size(); ++n) {
    const auto doc = make_document(notes[n]);
    const auto& sentences = truth[n]["sentences"];
    REQUIRE(doc.sentences.size() == sentences.size());
    for (std::size_t i = 0; i < doc.sentences.size(); ++i)
      CHECK(split_whitespace(doc.sentences[i].raw) == sentences[i].get<std::vector<std::string>>());
  }
}
