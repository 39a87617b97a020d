// attnsum: attention-based extractive summarization of clinical notes.
//
//   attnsum summarize       --weights W --vocab V --corpus C --out DIR [--methods LIST]
//   attnsum compare         --weights W --vocab V --corpus C --out DIR [--series]
//   attnsum heatmap         --weights W --vocab V --corpus C --out DIR
//   attnsum inspect-weights PATH
//
// Exit status: 0 success (possibly with warnings), 1 runtime failure, 2 bad
// configuration.

#include <cstdlib>
#include <algorithm>
#include <cctype>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "attnsum/attention_summarizer.hpp"
#include "attnsum/baselines.hpp"
#include "attnsum/corpus.hpp"
#include "attnsum/error.hpp"
#include "attnsum/eval.hpp"
#include "attnsum/pipeline.hpp"
#include "attnsum/summary.hpp"
#include "attnsum/viz.hpp"
#include "attnsum/weights.hpp"

namespace fs = std::filesystem;
using namespace attnsum;

namespace {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("ATTNSUM_LOG");
    const std::string v = env ? env : "warn";
    if (v == "error") return LogLevel::Error;
    if (v == "info") return LogLevel::Info;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return level;
}

void log(LogLevel level, const std::string& msg) {
  static constexpr const char* names[] = {"error", "warn", "info", "debug"};
  if (level <= log_level()) std::cerr << "attnsum: " << names[static_cast<int>(level)] << ": " << msg << '\n';
}

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  fs::path weights_path;
  fs::path corpus_path;
  fs::path vocab_path;
  fs::path out_dir = "out";
  fs::path abbreviations_path;
  std::vector<Method> methods;
  std::optional<BudgetSpec> budget;
  double alpha = kDefaultSmoothing;
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  std::uint32_t seed = kDefaultKMeansSeed;
  bool series = false;
  bool dump_graph = false;
};

// Raw flag values; empty optionals mean "not given on the command line".
struct Flags {
  std::string config_path;
  std::optional<std::string> weights, corpus, vocab, out, methods, budget, abbreviations;
  std::optional<double> alpha;
  std::optional<std::size_t> threads;
  std::optional<std::uint32_t> seed;
  bool series = false;
  bool dump_graph = false;
};

std::vector<Method> parse_methods(const std::string& list) {
  if (list == "all") return all_methods();
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto m = parse_method(item);
    if (!m) throw ConfigError("unknown method '" + item + "' (expected attention, frequency, graph, centroid or all)");
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
  }
  if (out.empty()) throw ConfigError("no methods given");
  return out;
}

void apply_config_file(RunConfig& cfg, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    if (j.contains("weights")) cfg.weights_path = j["weights"].get<std::string>();
    if (j.contains("corpus")) cfg.corpus_path = j["corpus"].get<std::string>();
    if (j.contains("vocab")) cfg.vocab_path = j["vocab"].get<std::string>();
    if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
    if (j.contains("abbreviations")) cfg.abbreviations_path = j["abbreviations"].get<std::string>();
    if (j.contains("methods")) {
      const auto& m = j["methods"];
      if (m.is_array()) {
        std::string joined;
        for (const auto& x : m) joined += (joined.empty() ? "" : ",") + x.get<std::string>();
        cfg.methods = parse_methods(joined);
      } else {
        cfg.methods = parse_methods(m.get<std::string>());
      }
    }
    if (j.contains("budget")) cfg.budget = BudgetSpec::parse(j["budget"].get<std::string>());
    if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<std::size_t>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint32_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
}

RunConfig resolve(const Flags& f, std::vector<Method> default_methods) {
  RunConfig cfg;
  cfg.methods = std::move(default_methods);
  if (!f.config_path.empty()) apply_config_file(cfg, f.config_path);
  try {
    if (f.weights) cfg.weights_path = *f.weights;
    if (f.corpus) cfg.corpus_path = *f.corpus;
    if (f.vocab) cfg.vocab_path = *f.vocab;
    if (f.out) cfg.out_dir = *f.out;
    if (f.abbreviations) cfg.abbreviations_path = *f.abbreviations;
    if (f.methods) cfg.methods = parse_methods(*f.methods);
    if (f.budget) cfg.budget = BudgetSpec::parse(*f.budget);
    if (f.alpha) cfg.alpha = *f.alpha;
    if (f.threads) cfg.threads = *f.threads;
    if (f.seed) cfg.seed = *f.seed;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  cfg.series = f.series;
  cfg.dump_graph = f.dump_graph;

  if (!(cfg.alpha > 0.0)) throw ConfigError("--alpha must be > 0");
  if (cfg.threads < 1) cfg.threads = 1;
  auto require_file = [](const fs::path& p, const char* flag) {
    if (p.empty()) throw ConfigError(std::string(flag) + " is required");
    if (!fs::is_regular_file(p)) throw ConfigError(std::string(flag) + ": no such file: " + p.string());
  };
  require_file(cfg.weights_path, "--weights");
  require_file(cfg.vocab_path, "--vocab");
  require_file(cfg.corpus_path, "--corpus");
  if (!cfg.abbreviations_path.empty()) require_file(cfg.abbreviations_path, "--abbreviations");
  return cfg;
}

void add_shared_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file (flags override it)");
  cmd->add_option("--weights", f.weights, "ATNSUMW1 weight file");
  cmd->add_option("--corpus", f.corpus, "JSON-lines corpus");
  cmd->add_option("--vocab", f.vocab, "vocabulary, one token per line");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--methods", f.methods, "comma list of attention,frequency,graph,centroid or 'all'");
  cmd->add_option("--budget", f.budget, "match | k=N | ratio=R");
  cmd->add_option("--alpha", f.alpha, "additive smoothing for word distributions");
  cmd->add_option("--threads", f.threads, "worker threads (default: all cores)");
  cmd->add_option("--seed", f.seed, "K-means seed");
  cmd->add_option("--abbreviations", f.abbreviations, "abbreviation guard list");
}

std::string safe_name(const std::string& id) {
  std::string out = id;
  for (char& c : out)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << contents;
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

struct Inputs {
  WeightStore weights;
  Vocabulary vocab;
  std::vector<Document> docs;
};

Inputs load_inputs(const RunConfig& cfg) {
  const auto abbreviations =
      cfg.abbreviations_path.empty() ? default_abbreviations() : load_abbreviations(cfg.abbreviations_path);
  auto notes = load_corpus(cfg.corpus_path);
  if (notes.empty()) throw Error(ErrorCode::EmptyCorpus, cfg.corpus_path.string() + " has no records");
  Inputs in{load_weights(cfg.weights_path), Vocabulary::load(cfg.vocab_path), {}};
  if (in.vocab.size() != static_cast<std::size_t>(in.weights.config().vocab_size))
    log(LogLevel::Warn, "vocabulary has " + std::to_string(in.vocab.size()) + " tokens but the encoder expects " +
                            std::to_string(in.weights.config().vocab_size));
  for (const auto& n : notes) in.docs.push_back(make_document(n, abbreviations));
  log(LogLevel::Info, "loaded " + std::to_string(in.docs.size()) + " notes");
  fs::create_directories(cfg.out_dir);
  return in;
}

// Per-note work with errors collected in note order.
int run_per_note(const RunConfig& cfg, const Inputs& in,
                 const std::function<std::vector<std::string>(const Document&)>& work) {
  std::vector<std::string> failures(in.docs.size());
  std::vector<std::vector<std::string>> warnings(in.docs.size());
  parallel_for(in.docs.size(), cfg.threads, [&](std::size_t i) {
    try {
      warnings[i] = work(in.docs[i]);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });
  std::size_t failed = 0;
  for (std::size_t i = 0; i < in.docs.size(); ++i) {
    for (const auto& w : warnings[i]) log(LogLevel::Warn, in.docs[i].note_id + ": " + w);
    if (!failures[i].empty()) {
      ++failed;
      log(LogLevel::Error, in.docs[i].note_id + ": " + failures[i]);
    }
  }
  if (failed > 0) std::cerr << "attnsum: " << failed << " of " << in.docs.size() << " notes failed\n";
  return failed == in.docs.size() ? 1 : 0;
}

int cmd_summarize(const RunConfig& cfg) {
  const auto in = load_inputs(cfg);
  const BudgetSpec budget = cfg.budget.value_or(BudgetSpec::parse("ratio=0.3"));
  const bool want_graph = std::find(cfg.methods.begin(), cfg.methods.end(), Method::Graph) != cfg.methods.end();
  return run_per_note(cfg, in, [&](const Document& doc) {
    SimilarityGraph graph;
    const auto summaries = run_methods(doc, cfg.methods, budget, in.weights, in.vocab, cfg.seed,
                                       cfg.dump_graph && want_graph ? &graph : nullptr);
    std::vector<std::string> warnings;
    for (const auto& s : summaries) {
      write_file(cfg.out_dir / (safe_name(doc.note_id) + "." + std::string(to_string(s.method)) + ".json"),
                 summary_to_json(s, doc));
      warnings.insert(warnings.end(), s.warnings.begin(), s.warnings.end());
    }
    if (cfg.dump_graph && want_graph)
      write_file(cfg.out_dir / (safe_name(doc.note_id) + ".graph.json"), graph_to_json(graph, doc.note_id));
    return warnings;
  });
}

int cmd_compare(const RunConfig& cfg) {
  const auto in = load_inputs(cfg);
  CompareOptions opt;
  opt.methods = cfg.methods;
  opt.budget = cfg.budget.value_or(BudgetSpec{});
  opt.alpha = cfg.alpha;
  opt.seed = cfg.seed;
  opt.threads = cfg.threads;
  const auto report = compare(in.docs, in.weights, in.vocab, opt);

  std::size_t failed = 0;
  for (const auto& r : report.rows)
    if (!r.ok()) {
      ++failed;
      log(LogLevel::Error, r.note_id + " [" + std::string(to_string(r.method)) + "]: " + r.error);
    }
  write_file(cfg.out_dir / "report.csv", report_to_csv(report));
  write_file(cfg.out_dir / "report.json", report_to_json(report));
  if (cfg.series) write_file(cfg.out_dir / "series.json", report_series_json(report));

  for (const auto& [m, v] : report.means)
    std::cout << to_string(m) << "\tKLD " << v.mean_kld << "\tJSD " << v.mean_jsd << "\t(" << v.notes << " notes)\n";
  return failed == report.rows.size() ? 1 : 0;
}

int cmd_heatmap(const RunConfig& cfg) {
  const auto in = load_inputs(cfg);
  return run_per_note(cfg, in, [&](const Document& doc) {
    std::vector<std::string> warnings;
    const auto scores = score_document(doc, in.weights, in.vocab, &warnings);
    std::vector<std::string> sentences;
    std::vector<double> raw;
    for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
      sentences.push_back(doc.sentences[i].raw);
      raw.push_back(scores[i].score);
    }
    const auto hm = make_heatmap(doc.note_id, std::move(sentences), std::move(raw));
    const auto stem = safe_name(doc.note_id);
    write_file(cfg.out_dir / (stem + ".nv.json"), emit_neatvision_json(hm));
    write_file(cfg.out_dir / (stem + ".heatmap.html"), emit_html(hm));
    return warnings;
  });
}

int cmd_inspect_weights(const fs::path& path) {
  if (!fs::is_regular_file(path)) {
    std::cerr << "attnsum: no such weight file: " << path.string() << '\n';
    return 2;
  }
  const auto store = load_weights(path);
  const auto& c = store.config();
  std::cout << "file            " << path.string() << '\n'
            << "num_layers      " << c.num_layers << '\n'
            << "num_heads       " << c.num_heads << '\n'
            << "hidden_size     " << c.hidden_size << '\n'
            << "intermediate    " << c.intermediate_size << '\n'
            << "vocab_size      " << c.vocab_size << '\n'
            << "max_positions   " << c.max_positions << '\n'
            << "type_vocab_size " << c.type_vocab_size << '\n'
            << "layer_norm_eps  " << c.layer_norm_epsilon << '\n'
            << "tensors         " << store.manifest().size() << "\n\n";
  std::size_t width = 4;
  for (const auto& r : store.manifest()) width = std::max(width, r.name.size());
  std::cout << std::left << std::setw(static_cast<int>(width) + 2) << "name" << std::setw(16) << "shape"
            << "offset\n";
  for (const auto& r : store.manifest()) {
    std::string shape = "[";
    for (std::size_t i = 0; i < r.shape.size(); ++i) shape += (i ? "," : "") + std::to_string(r.shape[i]);
    shape += "]";
    std::cout << std::left << std::setw(static_cast<int>(width) + 2) << r.name << std::setw(16) << shape
              << r.offset << '\n';
  }
  std::cout << "\nok: all required tensors present with expected shapes\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attention-based extractive summarization of clinical notes"};
  app.require_subcommand(1);

  Flags f_sum, f_cmp, f_heat;
  auto* summarize_cmd = app.add_subcommand("summarize", "write a summary JSON per note and method");
  add_shared_flags(summarize_cmd, f_sum);
  summarize_cmd->add_flag("--dump-graph", f_sum.dump_graph, "also write the similarity graph per note");

  auto* compare_cmd = app.add_subcommand("compare", "KLD/JSD report across methods");
  add_shared_flags(compare_cmd, f_cmp);
  compare_cmd->add_flag("--series", f_cmp.series, "also write per-note series.json");

  auto* heatmap_cmd = app.add_subcommand("heatmap", "write Neat-Vision JSON and HTML heat-maps");
  add_shared_flags(heatmap_cmd, f_heat);

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect-weights", "print and validate a weight file");
  inspect_cmd->add_option("path", inspect_path, "weight file");
  inspect_cmd->add_option("--weights", inspect_path, "weight file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*inspect_cmd) {
      if (inspect_path.empty()) {
        std::cerr << "attnsum: inspect-weights needs a path\n";
        return 2;
      }
      return cmd_inspect_weights(inspect_path);
    }
    if (*summarize_cmd) return cmd_summarize(resolve(f_sum, {Method::Attention}));
    if (*compare_cmd) return cmd_compare(resolve(f_cmp, all_methods()));
    if (*heatmap_cmd) return cmd_heatmap(resolve(f_heat, {Method::Attention}));
  } catch (const ConfigError& e) {
    std::cerr << "attnsum: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "attnsum: " << e.what() << '\n';
    return e.code() == ErrorCode::EmptyCorpus ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "attnsum: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
