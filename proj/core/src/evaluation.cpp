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
#include "xlalign/evaluation.hpp"

#include <algorithm>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "xlalign/diagnostics.hpp"
#include "xlalign/error.hpp"
#include "xlalign/random.hpp"

namespace xlalign {
namespace {

// Runs fn(i) for i in [0, count) over contiguous chunks. The first exception
// thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(threads);
  const std::size_t chunk = (count + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    workers.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<std::size_t> checked_ks(const std::vector<std::size_t>& ks) {
  if (ks.empty()) throw UsageError("at least one k is required");
  auto sorted = ks;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.front() == 0) throw UsageError("k must be at least 1");
  return sorted;
}

void require_normalized(const EmbeddingSet& set, const char* side) {
  if (!set.normalized) throw UsageError(std::string(side) + " embeddings must be normalized");
}

void require_dims(const EmbeddingSet& source, const EmbeddingSet& target, const FittedMap& map) {
  const std::size_t d = input_dim(map);
  if (source.dim() != d || target.dim() != d) {
    throw DimensionError("map expects dimension " + std::to_string(d) + ", embeddings have " +
                         std::to_string(source.dim()) + " and " + std::to_string(target.dim()));
  }
}

EvaluationReport make_report(std::string mode, const FittedMap& map,
                             const RetrievalConfig& config, std::vector<std::size_t> ks) {
  EvaluationReport r;
  r.mode = std::move(mode);
  r.map_kind = map_kind(map);
  r.method = config.method;
  r.beta = config.beta;
  r.n_s = config.n_s;
  r.seed = config.seed;
  r.global_sample = config.global_sample;
  r.dim = input_dim(map);
  r.rank = shared_dim(map);
  r.overall.hits.assign(ks.size(), 0);
  r.ks = std::move(ks);
  return r;
}

// Position of the first hit in a ranked list, or nullopt.
template <typename IsHit>
std::optional<std::size_t> first_hit(const ScoredCandidates& ranked, IsHit is_hit) {
  for (std::size_t pos = 0; pos < ranked.size(); ++pos) {
    if (is_hit(ranked.indices[pos])) return pos;
  }
  return std::nullopt;
}

void count_hit(PrecisionCounts& counts, const std::vector<std::size_t>& ks,
               std::optional<std::size_t> hit_position) {
  ++counts.evaluated;
  if (!hit_position) return;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (*hit_position < ks[i]) ++counts.hits[i];
  }
}

}  // namespace

const std::vector<FrequencyBin>& frequency_bins() {
  static const std::vector<FrequencyBin> bins = {
      {0, 5000, "0-5k"},
      {5000, 20000, "5-20k"},
      {20000, 50000, "20-50k"},
      {50000, 100000, "50-100k"},
      {100000, 200000, "100-200k"},
  };
  return bins;
}

std::optional<std::string> frequency_bin_label(std::size_t rank) {
  for (const auto& bin : frequency_bins()) {
    if (rank >= bin.lower && rank < bin.upper) return bin.label;
  }
  return std::nullopt;
}

std::size_t TestSet::skipped() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const TestEntry& e) { return e.skipped; }));
}

TestSet make_test_set(const std::vector<std::pair<std::string, std::string>>& lines,
                      const Vocabulary& source_vocab) {
  TestSet out;
  for (const auto& bin : frequency_bins()) out.bins.push_back(bin.label);
  std::unordered_map<std::string, std::size_t> by_source;
  for (const auto& [source, target] : lines) {
    auto [it, inserted] = by_source.try_emplace(source, out.entries.size());
    if (inserted) {
      TestEntry entry;
      entry.source = source;
      if (auto rank = source_vocab.find(source)) {
        entry.source_rank = *rank;
        entry.bin = frequency_bin_label(*rank).value_or("");
      } else {
        entry.skipped = true;
      }
      out.entries.push_back(std::move(entry));
    }
    auto& targets = out.entries[it->second].valid_targets;
    if (std::find(targets.begin(), targets.end(), target) == targets.end()) {
      targets.push_back(target);
    }
  }
  if (out.entries.size() == out.skipped()) {
    throw DataError("test set has no entry whose source is in the vocabulary");
  }
  return out;
}

TestSet load_test_set(const std::filesystem::path& path, const Vocabulary& source_vocab) {
  const auto dictionary = load_tsv_dictionary(path);
  auto test = make_test_set(dictionary.pairs, source_vocab);
  report_info("test set " + path.string() + ": " + std::to_string(test.entries.size()) +
              " entries, " + std::to_string(test.skipped()) + " with out-of-vocabulary source");
  return test;
}

double EvaluationReport::precision(std::size_t k_index) const {
  if (overall.evaluated == 0) return 0.0;
  return static_cast<double>(overall.hits.at(k_index)) / static_cast<double>(overall.evaluated);
}

double EvaluationReport::bin_precision(std::size_t bin_index, std::size_t k_index) const {
  const auto& counts = bins.at(bin_index).second;
  if (counts.evaluated == 0) return 0.0;
  return static_cast<double>(counts.hits.at(k_index)) / static_cast<double>(counts.evaluated);
}

double EvaluationReport::precision_excluding_oov(std::size_t k_index) const {
  const std::size_t denominator = overall.evaluated - all_targets_oov;
  if (denominator == 0) return 0.0;
  return static_cast<double>(overall.hits.at(k_index)) / static_cast<double>(denominator);
}

EvaluationReport evaluate_words(const EmbeddingSet& source, const EmbeddingSet& target,
                                const FittedMap& map, const RetrievalConfig& config,
                                const TestSet& test, const EvaluationOptions& options) {
  config.validate();
  require_normalized(source, "source");
  require_normalized(target, "target");
  require_dims(source, target, map);
  auto report = make_report("word", map, config, checked_ks(options.ks));
  const auto& ks = report.ks;
  const std::size_t max_k = std::min(ks.back(), target.size());

  std::vector<const TestEntry*> evaluable;
  for (const auto& entry : test.entries) {
    if (!entry.skipped) evaluable.push_back(&entry);
  }
  report.entries_total = test.entries.size();
  report.skipped_oov = test.entries.size() - evaluable.size();

  // Inverted softmax samples denominators from the whole source vocabulary;
  // the other methods only need the query rows.
  const bool whole_vocab = config.method == Method::kInvertedSoftmax;
  Matrix query_rows;
  if (!whole_vocab) {
    query_rows = Matrix(evaluable.size(), source.dim());
    for (std::size_t i = 0; i < evaluable.size(); ++i) {
      const auto row = source.matrix.row(evaluable[i]->source_rank);
      std::copy(row.begin(), row.end(), query_rows.row(i).begin());
    }
  }
  const Matrix sources =
      to_shared_space(map, whole_vocab ? source.matrix : query_rows, Side::kSource);
  const Matrix targets = to_shared_space(map, target.matrix, Side::kTarget);
  const Retriever retriever(sources, targets, config);

  std::vector<std::vector<std::size_t>> valid(evaluable.size());
  for (std::size_t i = 0; i < evaluable.size(); ++i) {
    for (const auto& word : evaluable[i]->valid_targets) {
      if (auto idx = target.vocab.find(word)) valid[i].push_back(*idx);
    }
  }

  std::vector<std::optional<std::size_t>> hit_position(evaluable.size());
  parallel_for(evaluable.size(), options.threads, [&](std::size_t i) {
    if (valid[i].empty()) return;
    const std::size_t query = whole_vocab ? evaluable[i]->source_rank : i;
    const auto ranked = retriever.rank(query, max_k);
    hit_position[i] = first_hit(ranked, [&](std::size_t t) {
      return std::find(valid[i].begin(), valid[i].end(), t) != valid[i].end();
    });
  });

  std::vector<std::pair<std::string, PrecisionCounts>> bins;
  for (const auto& label : test.bins) {
    bins.emplace_back(label, PrecisionCounts{0, std::vector<std::size_t>(ks.size(), 0)});
  }
  for (std::size_t i = 0; i < evaluable.size(); ++i) {
    if (valid[i].empty()) ++report.all_targets_oov;
    count_hit(report.overall, ks, hit_position[i]);
    for (auto& [label, counts] : bins) {
      if (label == evaluable[i]->bin) count_hit(counts, ks, hit_position[i]);
    }
  }
  report.bins = std::move(bins);
  return report;
}

EvaluationReport evaluate_sentence_retrieval(const EmbeddingSet& source,
                                             const EmbeddingSet& target, const FittedMap& map,
                                             const RetrievalConfig& config,
                                             const PhrasePairs& pool, std::size_t n_queries,
                                             const EvaluationOptions& options) {
  config.validate();
  require_normalized(source, "source");
  require_normalized(target, "target");
  require_dims(source, target, map);
  if (n_queries == 0) throw UsageError("at least one query is required");
  if (n_queries > pool.size()) {
    throw UsageError("requested " + std::to_string(n_queries) + " queries from a pool of " +
                     std::to_string(pool.size()));
  }
  auto report = make_report("sentence", map, config, checked_ks(options.ks));
  const auto& ks = report.ks;

  std::vector<std::vector<double>> src_vectors;
  std::vector<std::vector<double>> tgt_vectors;
  std::vector<std::size_t> group;
  std::unordered_map<std::string, std::size_t> group_ids;
  for (std::size_t p = 0; p < pool.size(); ++p) {
    auto sv = sentence_vector(pool.source_sentences[p], source);
    auto tv = sentence_vector(pool.target_sentences[p], target);
    if (!sv || !tv) continue;
    src_vectors.push_back(std::move(*sv));
    tgt_vectors.push_back(std::move(*tv));
    std::string key;
    for (const auto& token : pool.target_sentences[p]) {
      key += token;
      key += '\x1f';
    }
    group.push_back(group_ids.try_emplace(std::move(key), group_ids.size()).first->second);
  }
  const std::size_t kept = src_vectors.size();
  report.entries_total = pool.size();
  report.skipped_oov = pool.size() - kept;
  if (kept == 0) throw DataError("no sentence pair has in-vocabulary words on both sides");
  if (n_queries > kept) {
    report_warning("only " + std::to_string(kept) + " sentence pairs survive; using " +
                   std::to_string(kept) + " queries instead of " + std::to_string(n_queries));
    n_queries = kept;
  }
  report_info("sentence pool: " + std::to_string(kept) + " of " + std::to_string(pool.size()) +
              " pairs kept, " + std::to_string(group_ids.size()) + " distinct targets");

  const std::size_t d = source.dim();
  Matrix src_rows(kept, d);
  Matrix tgt_rows(kept, d);
  for (std::size_t i = 0; i < kept; ++i) {
    std::copy(src_vectors[i].begin(), src_vectors[i].end(), src_rows.row(i).begin());
    std::copy(tgt_vectors[i].begin(), tgt_vectors[i].end(), tgt_rows.row(i).begin());
  }
  src_vectors.clear();
  tgt_vectors.clear();
  const Matrix sources = to_shared_space(map, src_rows, Side::kSource);
  const Matrix targets = to_shared_space(map, tgt_rows, Side::kTarget);
  const Retriever retriever(sources, targets, config);

  Rng rng(config.seed);
  const auto queries = sample_without_replacement(kept, n_queries, rng);
  const std::size_t max_k = std::min(ks.back(), kept);
  std::vector<std::optional<std::size_t>> hit_position(queries.size());
  parallel_for(queries.size(), options.threads, [&](std::size_t i) {
    const std::size_t q = queries[i];
    const auto ranked = retriever.rank(q, max_k);
    hit_position[i] = first_hit(ranked, [&](std::size_t t) { return group[t] == group[q]; });
  });
  for (const auto& position : hit_position) count_hit(report.overall, ks, position);
  return report;
}

}  // namespace xlalign
