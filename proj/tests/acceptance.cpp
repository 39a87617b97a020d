// Acceptance suite: one PASS/FAIL line per criterion.
//
//   attnsum_acceptance --cli PATH --fixtures DIR [--write-golden]
//
// --write-golden regenerates fixtures/golden/regression.json from the current
// build and exits.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <numeric>
#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "attnsum/attention_summarizer.hpp"
#include "attnsum/baselines.hpp"
#include "attnsum/encoder.hpp"
#include "attnsum/error.hpp"
#include "attnsum/eval.hpp"
#include "attnsum/pipeline.hpp"
#include "attnsum/viz.hpp"
#include "reference_encoder.hpp"

namespace fs = std::filesystem;
using namespace attnsum;

namespace {

struct Context {
  fs::path cli;
  fs::path fixtures;
  WeightStore weights;
  Vocabulary vocab;
  std::vector<Document> corpus;
};

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

std::string name(Method m) { return std::string(to_string(m)); }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TokenSequence random_sequence(std::mt19937& rng, int vocab_size) {
  std::uniform_int_distribution<std::size_t> len(0, 40);
  std::uniform_int_distribution<int> id(5, vocab_size - 1);
  TokenSequence seq;
  seq.ids.push_back(2);
  for (std::size_t i = len(rng); i > 0; --i) seq.ids.push_back(id(rng));
  seq.ids.push_back(3);
  seq.segment_ids.assign(seq.ids.size(), 0);
  return seq;
}

// 1
Outcome attention_normalization(const Context& ctx) {
  Outcome o;
  for (std::uint32_t seed = 0; seed < 100; ++seed) {
    std::mt19937 rng(seed);
    const auto out = encoder_forward(random_sequence(rng, ctx.weights.config().vocab_size), ctx.weights);
    for (const auto& layer : out.attentions)
      for (const auto& a : layer) {
        o.require(a.minCoeff() >= 0.0f, "negative attention weight at seed " + std::to_string(seed));
        const double err = (a.cast<double>().rowwise().sum().array() - 1.0).abs().maxCoeff();
        o.require(err <= 1e-6, "row sum off by " + std::to_string(err) + " at seed " + std::to_string(seed));
      }
  }
  return o;
}

// 2
Outcome encoder_oracle(const Context& ctx) {
  Outcome o;
  std::mt19937 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto seq = random_sequence(rng, ctx.weights.config().vocab_size);
    const auto out = encoder_forward(seq, ctx.weights);
    const auto ref = reference::forward(seq.ids, ctx.weights);
    for (std::size_t i = 0; i < seq.length(); ++i)
      for (std::size_t j = 0; j < ref.hidden[i].size(); ++j)
        worst = std::max(worst, std::abs(out.hidden(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - ref.hidden[i][j]));
    for (std::size_t l = 0; l < out.attentions.size(); ++l)
      for (std::size_t h = 0; h < out.attentions[l].size(); ++h)
        for (std::size_t i = 0; i < seq.length(); ++i)
          for (std::size_t j = 0; j < seq.length(); ++j)
            worst = std::max(worst, std::abs(out.attentions[l][h](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                                             ref.attentions[l][h][i][j]));
  }
  o.require(worst <= 1e-5, "max elementwise error " + std::to_string(worst));
  o.detail = o.pass ? "max err " + std::to_string(worst) : o.detail;
  return o;
}

// 3
Outcome selection_oracle(const Context&) {
  Outcome o;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
    std::vector<SentenceScore> scores;
    // Every tenth vector is constant to exercise the fallback.
    const double c = u(rng);
    for (std::size_t i = 0; i < n; ++i) scores.push_back({i, trial % 10 == 0 ? c : u(rng)});
    double mean = 0.0;
    for (const auto& s : scores) mean += s.score;
    mean /= static_cast<double>(n);
    std::vector<std::size_t> expect;
    for (const auto& s : scores)
      if (s.score > mean) expect.push_back(s.sentence_index);
    if (expect.empty())
      for (std::size_t i = 0; i < n; ++i) expect.push_back(i);
    o.require(select_sentences(scores).selected == expect, "mismatch on trial " + std::to_string(trial));
  }
  return o;
}

// 4
Outcome divergence_axioms(const Context&) {
  Outcome o;
  std::mt19937 rng(4);
  const auto loop_kld = [](const std::vector<double>& p, const std::vector<double>& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i] > 0.0) s += p[i] * std::log(p[i] / q[i]) / std::log(2.0);
    return s;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t v = std::uniform_int_distribution<std::size_t>(1, 30)(rng);
    std::vector<std::string> universe;
    for (std::size_t i = 0; i < v; ++i) universe.push_back("w" + std::to_string(i));
    std::uniform_int_distribution<std::size_t> pick(0, v - 1);
    std::vector<std::string> a, b;
    for (std::size_t i = std::uniform_int_distribution<std::size_t>(0, 60)(rng); i > 0; --i) a.push_back(universe[pick(rng)]);
    for (std::size_t i = std::uniform_int_distribution<std::size_t>(0, 60)(rng); i > 0; --i) b.push_back(universe[pick(rng)]);
    const auto p = word_distribution(a, universe, kDefaultSmoothing);
    const auto q = word_distribution(b, universe, kDefaultSmoothing);

    const double d = kld(p, q), js = jsd(p, q);
    o.require(d >= 0.0, "negative kld");
    o.require(std::abs(kld(p, p)) <= 1e-12, "kld(P,P) != 0");
    o.require(std::abs(js - jsd(q, p)) <= 1e-15, "jsd asymmetric");
    o.require(js >= 0.0 && js <= 1.0, "jsd outside [0,1]");

    const std::vector<double> pv(p.probs.data(), p.probs.data() + p.probs.size());
    const std::vector<double> qv(q.probs.data(), q.probs.data() + q.probs.size());
    std::vector<double> m(pv.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = 0.5 * (pv[i] + qv[i]);
    o.require(std::abs(d - loop_kld(pv, qv)) <= 1e-12, "kld differs from loop oracle");
    o.require(std::abs(js - (0.5 * loop_kld(pv, m) + 0.5 * loop_kld(qv, m))) <= 1e-12, "jsd differs from loop oracle");
  }
  return o;
}

// 5
Outcome hand_values(const Context&) {
  Outcome o;
  Eigen::Vector2d p(1.0, 0.0), q(0.5, 0.5);
  o.require(std::abs(kld(p, q) - 1.0) <= 1e-15, "kld((1,0),(0.5,0.5)) != 1");
  const auto two = quantile_transform({0.2, 0.8});
  o.require(std::abs(two[0] + 0.6745) <= 1e-3 && std::abs(two[1] - 0.6745) <= 1e-3, "two-score transform not +-0.6745");
  const auto flat = quantile_transform({0.4, 0.4, 0.4, 0.4});
  for (double z : flat) o.require(z == 0.0, "constant scores not mapped to 0");
  return o;
}

// 6
Outcome quantile_statistics(const Context&) {
  Outcome o;
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(1000);
  for (auto& x : s) x = u(rng) * u(rng);
  const auto t = quantile_transform(s);
  double mean = 0.0;
  for (double x : t) mean += x;
  mean /= static_cast<double>(t.size());
  double var = 0.0;
  for (double x : t) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / static_cast<double>(t.size()));
  o.require(std::abs(mean) < 0.05, "mean " + std::to_string(mean));
  o.require(std::abs(sd - 1.0) < 0.1, "sd " + std::to_string(sd));
  std::vector<std::size_t> by_score(s.size()), by_z(s.size());
  std::iota(by_score.begin(), by_score.end(), std::size_t{0});
  by_z = by_score;
  std::sort(by_score.begin(), by_score.end(), [&](auto a, auto b) { return s[a] < s[b]; });
  std::sort(by_z.begin(), by_z.end(), [&](auto a, auto b) { return t[a] < t[b]; });
  o.require(by_score == by_z, "rank order changed");
  if (o.pass) o.detail = "mean " + std::to_string(mean) + ", sd " + std::to_string(sd);
  return o;
}

nlohmann::json regression_snapshot(const Context& ctx) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& doc : ctx.corpus) {
    nlohmann::json note = nlohmann::json::object();
    for (const auto& s : run_methods(doc, all_methods(), BudgetSpec::parse("match"), ctx.weights, ctx.vocab))
      note[name(s.method)] = {{"selected", s.selected}, {"scores", s.scores}};
    out[doc.note_id] = note;
  }
  return out;
}

// 7
Outcome baseline_goldens(const Context& ctx) {
  Outcome o;
  const auto golden = nlohmann::json::parse(read_file(ctx.fixtures / "golden" / "regression.json"));
  const auto oracle = nlohmann::json::parse(read_file(ctx.fixtures / "golden" / "oracle.json"));
  const auto now = regression_snapshot(ctx);

  for (const auto& doc : ctx.corpus) {
    const auto& id = doc.note_id;
    for (Method m : all_methods()) {
      const auto& g = golden.at(id).at(name(m));
      const auto& c = now.at(id).at(name(m));
      o.require(g.at("selected") == c.at("selected"), id + "/" + name(m) + ": selection differs from golden");
      const auto gs = g.at("scores").get<std::vector<double>>();
      const auto cs = c.at("scores").get<std::vector<double>>();
      o.require(gs.size() == cs.size() && std::memcmp(gs.data(), cs.data(), gs.size() * sizeof(double)) == 0,
                id + "/" + name(m) + ": scores differ from golden bit-for-bit");
    }
  }

  for (std::size_t n = 0; n < ctx.corpus.size(); ++n) {
    const auto& doc = ctx.corpus[n];
    const auto& on = oracle.at("notes").at(n);
    o.require(on.at("id") == doc.note_id, "oracle note order differs");
    for (const char* m : {"frequency", "graph"})
      o.require(now.at(doc.note_id).at(m).at("selected") == on.at("selected").at(m),
                doc.note_id + "/" + m + ": differs from the oracle script");

    const auto rank = pagerank(build_similarity_graph(doc)).rank;
    o.require(std::abs(rank.sum() - 1.0) <= 1e-6, doc.note_id + ": PageRank sum " + std::to_string(rank.sum()));

    const auto k = now.at(doc.note_id).at("attention").at("selected").size();
    const auto km = kmeans(sentence_embeddings(doc, ctx.weights, ctx.vocab), k);
    for (std::size_t t = 1; t < km.objective.size(); ++t)
      o.require(km.objective[t] <= km.objective[t - 1], doc.note_id + ": k-means objective increased");
  }
  return o;
}

// 8
Outcome end_to_end(const Context& ctx) {
  Outcome o;
  const auto out = fs::temp_directory_path() / "attnsum_acceptance_compare";
  fs::remove_all(out);
  const std::string cmd = "\"" + ctx.cli.string() + "\" compare --corpus \"" + (ctx.fixtures / "corpus20.jsonl").string() +
                          "\" --weights \"" + (ctx.fixtures / "tiny.atnsumw").string() + "\" --vocab \"" +
                          (ctx.fixtures / "tiny.vocab.txt").string() + "\" --out \"" + out.string() + "\" > /dev/null";
  const int rc = std::system(cmd.c_str());
  o.require(rc == 0, "attnsum compare exited with status " + std::to_string(rc));
  if (!o.pass) return o;

  std::ifstream csv(out / "report.csv");
  std::string line;
  std::getline(csv, line);
  o.require(line == "note_id,method,kld,jsd,summary_len", "unexpected CSV header: " + line);
  std::map<std::string, std::vector<std::pair<double, double>>> rows;
  while (std::getline(csv, line)) {
    std::stringstream ss(line);
    std::string id, method, k, j, len;
    std::getline(ss, id, ',');
    std::getline(ss, method, ',');
    std::getline(ss, k, ',');
    std::getline(ss, j, ',');
    std::getline(ss, len, ',');
    rows[method].emplace_back(std::stod(k), std::stod(j));
  }
  const auto oracle = nlohmann::json::parse(read_file(ctx.fixtures / "golden" / "oracle.json")).at("means");
  for (Method m : all_methods()) {
    const auto& r = rows[name(m)];
    o.require(r.size() == ctx.corpus.size(), name(m) + ": expected one CSV row per note");
    if (r.empty()) continue;
    double k = 0.0, j = 0.0;
    for (const auto& [a, b] : r) {
      k += a;
      j += b;
    }
    k /= static_cast<double>(r.size());
    j /= static_cast<double>(r.size());
    const auto& e = oracle.at(name(m));
    o.require(std::abs(k - e.at("mean_kld").get<double>()) <= 1e-9, name(m) + ": mean KLD off oracle");
    o.require(std::abs(j - e.at("mean_jsd").get<double>()) <= 1e-9, name(m) + ": mean JSD off oracle");
  }
  fs::remove_all(out);
  return o;
}

struct Criterion {
  int number;
  std::string name;
  double budget_seconds;  // 0 = no runtime bound
  std::function<Outcome(const Context&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attnsum acceptance suite"};
  std::string cli, fixtures;
  bool write_golden = false;
  app.add_option("--cli", cli, "path to the attnsum executable")->required();
  app.add_option("--fixtures", fixtures, "fixture directory")->required();
  app.add_flag("--write-golden", write_golden, "regenerate golden/regression.json and exit");
  CLI11_PARSE(app, argc, argv);

  std::vector<Document> corpus;
  for (const auto& n : load_corpus(fs::path(fixtures) / "corpus20.jsonl")) corpus.push_back(make_document(n));
  const Context ctx{cli, fixtures, load_weights(fs::path(fixtures) / "tiny.atnsumw"),
                    Vocabulary::load(fs::path(fixtures) / "tiny.vocab.txt"), std::move(corpus)};

  if (write_golden) {
    std::ofstream(ctx.fixtures / "golden" / "regression.json") << regression_snapshot(ctx).dump(1) << "\n";
    std::printf("wrote %s\n", (ctx.fixtures / "golden" / "regression.json").c_str());
    return 0;
  }

  const std::vector<Criterion> criteria = {
      {1, "attention rows are stochastic", 5.0, attention_normalization},
      {2, "encoder matches scalar reference", 10.0, encoder_oracle},
      {3, "above-mean selection oracle", 0.0, selection_oracle},
      {4, "divergence axioms", 5.0, divergence_axioms},
      {5, "hand values", 0.0, hand_values},
      {6, "quantile statistics", 0.0, quantile_statistics},
      {7, "baseline goldens and oracles", 60.0, baseline_goldens},
      {8, "end-to-end compare vs oracle means", 0.0, end_to_end},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(ctx);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0 && secs >= c.budget_seconds) {
      o.pass = false;
      o.detail = "took " + std::to_string(secs) + " s, limit " + std::to_string(c.budget_seconds) + " s";
    }
    std::printf("%s criterion %d: %s (%.3f s)%s%s\n", o.pass ? "PASS" : "FAIL", c.number, c.name.c_str(), secs,
                o.detail.empty() ? "" : " - ", o.detail.c_str());
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
