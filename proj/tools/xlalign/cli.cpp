// Copyright 2026 The xlalign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "xlalign/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "xlalign/alignment.hpp"
#include "xlalign/diagnostics.hpp"
#include "xlalign/dictionary.hpp"
#include "xlalign/embeddings.hpp"
#include "xlalign/error.hpp"
#include "xlalign/evaluation.hpp"
#include "xlalign/map_io.hpp"
#include "xlalign/random.hpp"
#include "xlalign/retrieval.hpp"
#include "xlalign/text.hpp"
#include "xlalign/version.hpp"

namespace xlalign::cli {
namespace {

constexpr std::size_t kDefaultFitSample = 5000;
constexpr std::size_t kDefaultQueries = 5000;
constexpr std::size_t kDefaultTopK = 10;

struct Inputs {
  std::string src;
  std::string tgt;
  std::optional<std::size_t> limit;
};

struct RetrievalFlags {
  std::string method{"nn"};
  std::optional<double> beta;
  double beta_max{kDefaultBetaMax};
  std::optional<std::size_t> n_s;
  std::uint64_t seed{kDefaultSeed};
  bool global_sample{false};
};

RetrievalFlags isf_defaults() {
  RetrievalFlags flags;
  flags.method = "isf";
  return flags;
}

struct AlignFlags {
  Inputs in;
  RetrievalFlags retrieval = isf_defaults();
  std::string dict;
  bool swap_dict{false};
  std::vector<std::string> corpus;
  std::optional<std::size_t> max_pairs;
  std::size_t skip{0};
  std::string map{"procrustes"};
  std::string rank;
  std::size_t fit_sample{kDefaultFitSample};
  std::string out;
};

struct TranslateFlags {
  Inputs in;
  RetrievalFlags retrieval;
  std::string map;
  std::size_t top_k{kDefaultTopK};
  std::vector<std::string> words;
};

struct EvaluateFlags {
  Inputs in;
  RetrievalFlags retrieval;
  std::string map;
  std::string test;
  std::vector<std::string> corpus;
  std::optional<std::size_t> max_pairs;
  std::size_t skip{0};
  std::size_t queries{kDefaultQueries};
  std::vector<std::size_t> ks{1, 5, 10};
  std::size_t threads{1};
  std::string report;
  std::string tsv;
};

class SinkGuard {
 public:
  explicit SinkGuard(std::ostream& err)
      : previous_(set_diagnostic_sink([&err](Severity severity, std::string_view message) {
          err << "xlalign: " << (severity == Severity::kWarning ? "warning: " : "") << message
              << '\n';
        })) {}
  ~SinkGuard() { set_diagnostic_sink(std::move(previous_)); }
  SinkGuard(const SinkGuard&) = delete;
  SinkGuard& operator=(const SinkGuard&) = delete;

 private:
  DiagnosticSink previous_;
};

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  std::replace(text.begin(), text.end(), '\r', ' ');
  return text;
}

void add_inputs(CLI::App& cmd, Inputs& in) {
  cmd.add_option("--src", in.src, "Source embeddings (word2vec text, optionally .gz)")
      ->required();
  cmd.add_option("--tgt", in.tgt, "Target embeddings (word2vec text, optionally .gz)")
      ->required();
  cmd.add_option("--limit", in.limit, "Read only the first N words of each embedding file")
      ->check(CLI::PositiveNumber);
}

void add_retrieval(CLI::App& cmd, RetrievalFlags& r, bool with_global_sample) {
  cmd.add_option("--method", r.method, "Retrieval method")
      ->check(CLI::IsMember({"nn", "softmax", "isf"}))
      ->capture_default_str();
  cmd.add_option("--beta", r.beta, "Inverse temperature (default: fitted or from the map)")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--beta-max", r.beta_max, "Upper bound of the beta search")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--ns", r.n_s,
                 "Inverted-softmax denominator sample size (default 1500 words, 12800 sentences)")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--seed", r.seed, "Seed for every random choice")->capture_default_str();
  if (with_global_sample) {
    cmd.add_flag("--global-sample", r.global_sample,
                 "Share one denominator sample across all queries instead of one per query");
  }
}

Method method_from(const std::string& name) {
  auto m = parse_method(name);
  if (!m) throw UsageError("unknown method '" + name + "'");
  return *m;
}

EmbeddingSet load_embeddings(const std::string& path, std::optional<std::size_t> limit,
                             const char* side) {
  auto set = normalize_rows(load_word2vec_text(path, limit));
  report_info(std::string(side) + " embeddings: " + std::to_string(set.size()) + " words, dim " +
              std::to_string(set.dim()) + " (" + path + ")");
  return set;
}

void require_same_dim(const EmbeddingSet& source, const EmbeddingSet& target) {
  if (source.dim() != target.dim()) {
    throw DimensionError("source dimension " + std::to_string(source.dim()) +
                         " differs from target dimension " + std::to_string(target.dim()));
  }
}

std::string spectrum_summary(const std::vector<double>& sigma) {
  std::ostringstream os;
  const std::size_t head = std::min<std::size_t>(5, sigma.size());
  for (std::size_t i = 0; i < head; ++i) os << (i ? " " : "") << format_double(sigma[i]);
  if (sigma.size() > head) {
    os << " ... " << format_double(sigma.back());
  }
  return os.str();
}

PairedMatrices subsample_pairs(const PairedMatrices& pairs, std::size_t cap, std::uint64_t seed) {
  if (cap == 0 || pairs.size() <= cap) return pairs;
  Rng rng(derive_stream_seed(seed, 0x6669742d73616d70ULL));
  const auto rows = sample_without_replacement(pairs.size(), cap, rng);
  PairedMatrices out;
  out.x_d = Matrix(rows.size(), pairs.dim());
  out.y_d = Matrix(rows.size(), pairs.dim());
  out.provenance = pairs.provenance;
  out.stats = pairs.stats;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto x = pairs.x_d.row(rows[i]);
    auto y = pairs.y_d.row(rows[i]);
    std::copy(x.begin(), x.end(), out.x_d.row(i).begin());
    std::copy(y.begin(), y.end(), out.y_d.row(i).begin());
    out.kept_pairs.push_back(pairs.kept_pairs[rows[i]]);
  }
  report_info("beta fitting and rank selection use " + std::to_string(cap) + " of " +
              std::to_string(pairs.size()) + " pairs");
  return out;
}

// --- align ----------------------------------------------------------------------

int cmd_align(const AlignFlags& f, std::ostream& out) {
  const bool pseudo = f.dict == "pseudo";
  if (f.dict.empty() == f.corpus.empty()) {
    throw UsageError("align needs exactly one of --dict and --corpus");
  }
  if (!f.corpus.empty() && f.swap_dict) throw UsageError("--swap-dict applies to --dict only");
  if (f.corpus.empty() && (f.max_pairs || f.skip != 0)) {
    throw UsageError("--max-pairs and --skip apply to --corpus only");
  }
  const Method method = method_from(f.retrieval.method);
  std::optional<std::size_t> fixed_rank;
  const bool auto_rank = f.rank == "auto";
  if (!f.rank.empty() && !auto_rank) {
    auto v = parse_uint(f.rank);
    if (!v || *v == 0) throw UsageError("--rank must be a positive integer or 'auto'");
    fixed_rank = *v;
  }
  if (f.map == "lsq" && !f.rank.empty()) throw UsageError("--rank does not apply to --map lsq");
  if (f.map == "cca" && auto_rank) throw UsageError("--rank auto applies to --map procrustes");
  if (f.retrieval.beta && method == Method::kNearestNeighbour) {
    throw UsageError("--beta has no effect with --method nn");
  }

  const auto source = load_embeddings(f.in.src, f.in.limit, "source");
  const auto target = load_embeddings(f.in.tgt, f.in.limit, "target");
  require_same_dim(source, target);

  PairedMatrices pairs;
  std::string dictionary_label;
  if (!f.corpus.empty()) {
    const auto corpus = load_aligned_corpus(f.corpus[0], f.corpus[1], f.max_pairs, f.skip);
    report_info("aligned corpus: " + std::to_string(corpus.size()) + " sentence pairs");
    pairs = build_phrase_matrices(corpus, source, target);
    dictionary_label = "corpus";
  } else if (pseudo) {
    pairs = resolve(build_pseudo_dictionary(source.vocab, target.vocab), source, target);
    dictionary_label = "pseudo";
  } else {
    pairs = resolve(load_tsv_dictionary(f.dict, f.swap_dict), source, target);
    dictionary_label = f.dict;
  }
  report_info("dictionary (" + std::string(to_string(pairs.provenance)) +
              "): " + std::to_string(pairs.stats.total) + " pairs, " +
              std::to_string(pairs.stats.kept) + " kept, " +
              std::to_string(pairs.stats.source_missing) + " source missing, " +
              std::to_string(pairs.stats.target_missing) + " target missing");

  MapArtifact artifact;
  auto& meta = artifact.metadata;
  meta["software_version"] = kVersion;
  meta["src"] = f.in.src;
  meta["tgt"] = f.in.tgt;
  meta["dictionary"] = dictionary_label;
  meta["provenance"] = to_string(pairs.provenance);
  meta["pairs_total"] = std::to_string(pairs.stats.total);
  meta["pairs_kept"] = std::to_string(pairs.stats.kept);
  meta["pairs_source_missing"] = std::to_string(pairs.stats.source_missing);
  meta["pairs_target_missing"] = std::to_string(pairs.stats.target_missing);
  meta["seed"] = std::to_string(f.retrieval.seed);
  meta["method"] = to_string(method);

  RetrievalConfig config;
  config.method = method;
  config.seed = f.retrieval.seed;
  config.beta_max = f.retrieval.beta_max;
  config.n_s = f.retrieval.n_s.value_or(kWordSampleCount);
  config.global_sample = true;

  const PairedMatrices fit_pairs = subsample_pairs(pairs, f.fit_sample, f.retrieval.seed);
  auto fit_beta_for = [&](const FittedMap& map) {
    if (method == Method::kNearestNeighbour) return;
    if (f.retrieval.beta) {
      config.beta = *f.retrieval.beta;
      meta["beta"] = format_double(config.beta);
      meta["beta_fitted"] = "false";
      return;
    }
    const BetaFit fit = fit_beta(fit_pairs, map, config, method);
    if (fit.diverged) {
      report_warning("beta fit diverged; using beta_max " + format_double(fit.beta));
    }
    config.beta = fit.beta;
    meta["beta"] = format_double(fit.beta);
    meta["beta_fitted"] = "true";
    meta["beta_diverged"] = fit.diverged ? "true" : "false";
    meta["beta_log_likelihood"] = format_double(fit.log_likelihood);
    report_info("fitted beta " + format_double(fit.beta));
  };

  if (f.map == "procrustes") {
    OrthogonalMap map = fit_procrustes(pairs);
    report_info("singular values: " + spectrum_summary(map.sigma));
    report_info("dictionary mean cosine: " + format_double(dictionary_mean_cosine(map, pairs)));
    if (auto_rank) {
      fit_beta_for(map);
      const auto grid = default_rank_grid(map.dim());
      const std::size_t k = select_rank(map, fit_pairs, config, grid);
      report_info("selected rank " + std::to_string(k) + " of " + std::to_string(map.dim()));
      map = reduce_rank(map, k);
      meta["rank_selection"] = "auto";
    } else if (fixed_rank) {
      map = reduce_rank(map, *fixed_rank);
    }
    fit_beta_for(map);
    artifact.map = std::move(map);
  } else if (f.map == "lsq") {
    LinearMap map = fit_least_squares(pairs);
    fit_beta_for(map);
    artifact.map = std::move(map);
  } else {
    CcaMap map = fit_cca(pairs, fixed_rank);
    fit_beta_for(map);
    artifact.map = std::move(map);
  }
  meta["rank"] = std::to_string(shared_dim(artifact.map));
  save_map(artifact, f.out);
  out << "map\t" << map_kind(artifact.map) << "\tdim\t" << input_dim(artifact.map) << "\trank\t"
      << shared_dim(artifact.map) << "\tpairs\t" << pairs.size() << "\tout\t" << f.out << '\n';
  return kExitOk;
}

// --- shared by translate / evaluate ---------------------------------------------

RetrievalConfig retrieval_config(const RetrievalFlags& f, const MapArtifact& artifact,
                                 std::size_t default_n_s) {
  RetrievalConfig config;
  config.method = method_from(f.method);
  config.seed = f.seed;
  config.beta_max = f.beta_max;
  config.n_s = f.n_s.value_or(default_n_s);
  config.global_sample = f.global_sample;
  if (config.method == Method::kNearestNeighbour) {
    if (f.beta) throw UsageError("--beta has no effect with --method nn");
    return config;
  }
  if (f.beta) {
    config.beta = *f.beta;
  } else if (auto it = artifact.metadata.find("beta"); it != artifact.metadata.end()) {
    auto beta = parse_double(it->second);
    if (!beta) throw DataError("map metadata has an invalid beta '" + it->second + "'");
    config.beta = *beta;
    if (auto m = artifact.metadata.find("method");
        m != artifact.metadata.end() && m->second != f.method) {
      report_warning("using beta fitted for method " + m->second);
    }
    report_info("beta " + format_double(config.beta) + " from map metadata");
  } else {
    throw UsageError("the map has no fitted beta; pass --beta");
  }
  config.beta_max = std::max(config.beta_max, config.beta);
  return config;
}

MapArtifact load_map_checked(const std::string& path) {
  if (path.empty()) throw UsageError("--map is required");
  return load_map(path);
}

void warn_per_query_cost(const RetrievalConfig& config, std::size_t sources,
                         std::size_t queries) {
  if (config.method == Method::kInvertedSoftmax && !config.global_sample && config.n_s < sources &&
      queries > 1 && sources > 20000) {
    report_warning("per-query inverted-softmax samples over " + std::to_string(sources) +
                   " sources are slow; --global-sample shares one sample");
  }
}

// --- translate --------------------------------------------------------------------

int cmd_translate(TranslateFlags f, std::istream& in, std::ostream& out) {
  if (f.top_k == 0) throw UsageError("--top-k must be at least 1");
  method_from(f.retrieval.method);
  const auto artifact = load_map_checked(f.map);
  const auto config = retrieval_config(f.retrieval, artifact, kWordSampleCount);
  const auto source = load_embeddings(f.in.src, f.in.limit, "source");
  const auto target = load_embeddings(f.in.tgt, f.in.limit, "target");
  require_same_dim(source, target);
  if (input_dim(artifact.map) != source.dim()) {
    throw DimensionError("map dimension " + std::to_string(input_dim(artifact.map)) +
                         " differs from embedding dimension " + std::to_string(source.dim()));
  }
  if (f.words.empty()) {
    std::string line;
    while (std::getline(in, line)) {
      for (auto w : split_whitespace(line)) f.words.emplace_back(w);
    }
  }

  const Matrix sources = to_shared_space(artifact.map, source.matrix, Side::kSource);
  const Matrix targets = to_shared_space(artifact.map, target.matrix, Side::kTarget);
  const Retriever retriever(sources, targets, config);
  warn_per_query_cost(config, sources.rows(), f.words.size());
  std::size_t top_k = f.top_k;
  if (top_k > targets.rows()) {
    report_warning("--top-k exceeds the target vocabulary; clamping to " +
                   std::to_string(targets.rows()));
    top_k = targets.rows();
  }
  for (const auto& word : f.words) {
    const auto index = source.vocab.find(word);
    if (!index) {
      out << "query\t" << word << "\tOOV\n\n";
      continue;
    }
    out << "query\t" << word << '\n';
    const auto ranked = retriever.rank(*index, top_k);
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      out << (r + 1) << '\t' << target.vocab[ranked.indices[r]] << '\t'
          << format_double(ranked.scores[r]) << '\n';
    }
    out << '\n';
  }
  return kExitOk;
}

// --- evaluate ---------------------------------------------------------------------

int cmd_evaluate(const EvaluateFlags& f, std::ostream& out) {
  if (f.test.empty() == f.corpus.empty()) {
    throw UsageError("evaluate needs exactly one of --test and --corpus");
  }
  if (f.corpus.empty() && (f.max_pairs || f.skip != 0)) {
    throw UsageError("--max-pairs and --skip apply to --corpus only");
  }
  method_from(f.retrieval.method);
  const bool sentences = !f.corpus.empty();
  const auto artifact = load_map_checked(f.map);
  const auto config =
      retrieval_config(f.retrieval, artifact, sentences ? kSentenceSampleCount : kWordSampleCount);
  EvaluationOptions options;
  options.ks = f.ks;
  options.threads = f.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : f.threads;

  const auto source = load_embeddings(f.in.src, f.in.limit, "source");
  const auto target = load_embeddings(f.in.tgt, f.in.limit, "target");
  require_same_dim(source, target);

  EvaluationReport report;
  if (sentences) {
    const auto pool = load_aligned_corpus(f.corpus[0], f.corpus[1], f.max_pairs, f.skip);
    warn_per_query_cost(config, pool.size(), f.queries);
    report = evaluate_sentence_retrieval(source, target, artifact.map, config, pool,
                                         std::min(f.queries, pool.size()), options);
    report.labels["corpus_src"] = f.corpus[0];
    report.labels["corpus_tgt"] = f.corpus[1];
  } else {
    const auto test = load_test_set(f.test, source.vocab);
    if (config.method == Method::kInvertedSoftmax) {
      warn_per_query_cost(config, source.size(), test.entries.size());
    }
    report = evaluate_words(source, target, artifact.map, config, test, options);
    report.labels["test"] = f.test;
  }
  report.labels["map"] = f.map;
  report.labels["src"] = f.in.src;
  report.labels["tgt"] = f.in.tgt;

  const std::string text = serialize_report(report);
  if (f.report.empty()) {
    out << text;
  } else {
    emit_report(report, f.report);
  }
  if (!f.tsv.empty()) {
    std::ofstream tsv(f.tsv, std::ios::binary);
    if (!tsv) throw DataError("cannot write " + f.tsv);
    tsv << tsv_summary_header(report) << '\n' << tsv_summary_row(report) << '\n';
    if (!tsv) throw DataError("write failed: " + f.tsv);
  }
  std::ostringstream summary;
  summary << "evaluated " << report.overall.evaluated << ", skipped " << report.skipped_oov;
  for (std::size_t i = 0; i < report.ks.size(); ++i) {
    summary << ", p@" << report.ks[i] << ' ' << format_double(report.precision(i));
  }
  report_info(summary.str());
  return kExitOk;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return kExitUsage;
    case ErrorKind::kData:
      return kExitData;
    case ErrorKind::kNumerical:
      return kExitNumerical;
  }
  return kExitInternal;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  SinkGuard guard(err);

  CLI::App app{"Align word embedding spaces across languages and retrieve translations",
               "xlalign"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  AlignFlags align;
  auto* align_cmd = app.add_subcommand("align", "Fit a map from a dictionary and save it");
  add_inputs(*align_cmd, align.in);
  align_cmd->add_option("--dict", align.dict,
                        "Training dictionary: a source<TAB>target file, or 'pseudo' for "
                        "identical strings");
  align_cmd->add_flag("--swap-dict", align.swap_dict, "Read the dictionary as target<TAB>source");
  align_cmd->add_option("--corpus", align.corpus, "Line-aligned source and target sentence files")
      ->expected(2);
  align_cmd->add_option("--max-pairs", align.max_pairs, "Use at most N corpus lines")
      ->check(CLI::PositiveNumber);
  align_cmd->add_option("--skip", align.skip, "Skip the first N corpus lines");
  align_cmd->add_option("--map", align.map, "Map family")
      ->check(CLI::IsMember({"procrustes", "lsq", "cca"}))
      ->capture_default_str();
  align_cmd->add_option("--rank", align.rank,
                        "Keep N singular directions, or 'auto' to select on the dictionary "
                        "(default: all)");
  add_retrieval(*align_cmd, align.retrieval, false);
  align_cmd->add_option("--fit-sample", align.fit_sample,
                        "Pairs used for beta fitting and rank selection (0 = all)")
      ->capture_default_str();
  align_cmd->add_option("--out", align.out, "Output map artifact")->required();

  TranslateFlags translate;
  auto* translate_cmd =
      app.add_subcommand("translate", "Print ranked translations for words (or stdin)");
  add_inputs(*translate_cmd, translate.in);
  translate_cmd->add_option("--map", translate.map, "Map artifact from align")->required();
  add_retrieval(*translate_cmd, translate.retrieval, true);
  translate_cmd->add_option("--top-k", translate.top_k, "Candidates per word")
      ->capture_default_str();
  translate_cmd->add_option("words", translate.words, "Query words (read from stdin if none)");

  EvaluateFlags evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score precision@k and write a report");
  add_inputs(*evaluate_cmd, evaluate.in);
  evaluate_cmd->add_option("--map", evaluate.map, "Map artifact from align")->required();
  add_retrieval(*evaluate_cmd, evaluate.retrieval, true);
  evaluate_cmd->add_option("--test", evaluate.test, "Word test set (source<TAB>target lines)");
  evaluate_cmd->add_option("--corpus", evaluate.corpus,
                           "Held-out line-aligned source and target sentence files")
      ->expected(2);
  evaluate_cmd->add_option("--max-pairs", evaluate.max_pairs, "Use at most N corpus lines")
      ->check(CLI::PositiveNumber);
  evaluate_cmd->add_option("--skip", evaluate.skip, "Skip the first N corpus lines");
  evaluate_cmd->add_option("--queries", evaluate.queries, "Sampled sentence queries")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  evaluate_cmd->add_option("--ks", evaluate.ks, "Comma-separated k values")
      ->delimiter(',')
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  evaluate_cmd->add_option("--threads", evaluate.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();
  evaluate_cmd->add_option("--report", evaluate.report, "Report file (default: stdout)");
  evaluate_cmd->add_option("--tsv", evaluate.tsv, "TSV summary file (header and one row)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "xlalign: error: kind=usage message=" << one_line(e.what()) << '\n';
    return kExitUsage;
  }

  try {
    if (*align_cmd) return cmd_align(align, out);
    if (*translate_cmd) return cmd_translate(translate, std::cin, out);
    return cmd_evaluate(evaluate, out);
  } catch (const Error& e) {
    err << "xlalign: error: kind=" << to_string(e.kind()) << " message=" << one_line(e.what())
        << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "xlalign: error: kind=internal message=" << one_line(e.what()) << '\n';
    return kExitInternal;
  }
}

}  // namespace xlalign::cli
