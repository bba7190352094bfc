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
#include "xlalign/dictionary.hpp"

#include <cmath>
#include <string_view>
#include <unordered_map>

#include "xlalign/error.hpp"
#include "xlalign/linalg.hpp"
#include "xlalign/text.hpp"

namespace xlalign {

const char* to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::kExpert: return "expert";
    case Provenance::kPseudo: return "pseudo";
    case Provenance::kPhrase: return "phrase";
    case Provenance::kCustom: return "custom";
  }
  return "custom";
}

namespace {

void require_normalized(const EmbeddingSet& e, const char* side) {
  if (!e.normalized) {
    throw UsageError(std::string(side) + " embeddings must be normalized first");
  }
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

std::string drop_summary(const DropStats& s) {
  return std::to_string(s.total) + " pairs, " + std::to_string(s.source_missing) +
         " missing on the source side, " + std::to_string(s.target_missing) +
         " missing on the target side";
}

}  // namespace

WordDictionary load_tsv_dictionary(const std::filesystem::path& path, bool swap_columns) {
  LineReader reader(path);
  WordDictionary dict;
  dict.provenance = Provenance::kExpert;
  std::string line;
  while (reader.next(line)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw DataError(path.string() + ":" + std::to_string(reader.line_number()) +
                      ": expected exactly one tab");
    }
    std::string source = line.substr(0, tab);
    std::string target = line.substr(tab + 1);
    if (source.empty() || target.empty()) {
      throw DataError(path.string() + ":" + std::to_string(reader.line_number()) +
                      ": empty token");
    }
    if (swap_columns) std::swap(source, target);
    dict.pairs.emplace_back(std::move(source), std::move(target));
  }
  if (dict.pairs.empty()) throw DataError(path.string() + ": empty dictionary");
  return dict;
}

WordDictionary build_pseudo_dictionary(const Vocabulary& source, const Vocabulary& target) {
  WordDictionary dict;
  dict.provenance = Provenance::kPseudo;
  for (const auto& word : source.words()) {
    if (target.contains(word)) dict.pairs.emplace_back(word, word);
  }
  if (dict.pairs.empty()) {
    throw DataError("pseudo-dictionary: the vocabularies share no identical tokens");
  }
  return dict;
}

PairedMatrices resolve(const WordDictionary& dictionary, const EmbeddingSet& source,
                       const EmbeddingSet& target) {
  require_normalized(source, "source");
  require_normalized(target, "target");
  if (source.dim() != target.dim()) {
    throw DimensionError("source dimension " + std::to_string(source.dim()) +
                         " differs from target dimension " + std::to_string(target.dim()));
  }
  PairedMatrices out;
  out.provenance = dictionary.provenance;
  out.stats.total = dictionary.pairs.size();
  std::vector<std::size_t> src_rows, tgt_rows;
  for (const auto& pair : dictionary.pairs) {
    auto s = source.vocab.find(pair.first);
    auto t = target.vocab.find(pair.second);
    if (!s) ++out.stats.source_missing;
    if (s && !t) ++out.stats.target_missing;
    if (!s || !t) continue;
    src_rows.push_back(*s);
    tgt_rows.push_back(*t);
    out.kept_pairs.push_back(pair);
  }
  out.stats.kept = out.kept_pairs.size();
  if (out.kept_pairs.empty()) {
    throw DataError("dictionary has no in-vocabulary pairs: " + drop_summary(out.stats));
  }
  const std::size_t n = out.kept_pairs.size(), d = source.dim();
  out.x_d = Matrix(n, d);
  out.y_d = Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    auto xs = source.matrix.row(src_rows[i]);
    auto ys = target.matrix.row(tgt_rows[i]);
    std::copy(xs.begin(), xs.end(), out.x_d.row(i).begin());
    std::copy(ys.begin(), ys.end(), out.y_d.row(i).begin());
  }
  return out;
}

std::optional<std::vector<double>> sentence_vector(const std::vector<std::string>& tokens,
                                                   const EmbeddingSet& embeddings) {
  require_normalized(embeddings, "sentence");
  std::vector<double> sum(embeddings.dim(), 0.0);
  bool any = false;
  for (const auto& token : tokens) {
    auto row = embeddings.lookup(token);
    if (!row) continue;
    any = true;
    for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += (*row)[c];
  }
  if (!any) return std::nullopt;
  const double nrm = norm(sum);
  if (nrm < 1e-10) return std::nullopt;
  for (double& v : sum) v /= nrm;
  return sum;
}

PhrasePairs load_aligned_corpus(const std::filesystem::path& source_path,
                                const std::filesystem::path& target_path,
                                std::optional<std::size_t> max_pairs, std::size_t skip) {
  LineReader src(source_path);
  LineReader tgt(target_path);
  PhrasePairs out;
  std::string a, b;
  std::size_t seen = 0;
  while (!(max_pairs && out.size() >= *max_pairs)) {
    const bool got_a = src.next(a);
    const bool got_b = tgt.next(b);
    if (!got_a || !got_b) break;
    if (seen++ < skip) continue;
    auto tokens_of = [](const std::string& line) {
      std::vector<std::string> tokens;
      for (auto f : split_whitespace(line)) tokens.push_back(lowercase(f));
      return tokens;
    };
    out.source_sentences.push_back(tokens_of(a));
    out.target_sentences.push_back(tokens_of(b));
  }
  if (out.size() == 0) {
    throw DataError("aligned corpus " + source_path.string() + " / " + target_path.string() +
                    " has no usable lines after skipping " + std::to_string(skip));
  }
  return out;
}

PairedMatrices build_phrase_matrices(const PhrasePairs& pairs, const EmbeddingSet& source,
                                     const EmbeddingSet& target) {
  require_normalized(source, "source");
  require_normalized(target, "target");
  if (source.dim() != target.dim()) {
    throw DimensionError("source dimension " + std::to_string(source.dim()) +
                         " differs from target dimension " + std::to_string(target.dim()));
  }
  const std::size_t d = source.dim();
  PairedMatrices out;
  out.provenance = Provenance::kPhrase;
  out.stats.total = pairs.size();
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto q = sentence_vector(pairs.source_sentences[i], source);
    auto w = sentence_vector(pairs.target_sentences[i], target);
    if (!q) ++out.stats.source_missing;
    if (q && !w) ++out.stats.target_missing;
    if (!q || !w) continue;
    xs.insert(xs.end(), q->begin(), q->end());
    ys.insert(ys.end(), w->begin(), w->end());
    out.kept_pairs.emplace_back(join(pairs.source_sentences[i]),
                                join(pairs.target_sentences[i]));
  }
  out.stats.kept = out.kept_pairs.size();
  if (out.kept_pairs.empty()) {
    throw DataError("no sentence pair has vectors on both sides: " + drop_summary(out.stats));
  }
  const std::size_t n = out.kept_pairs.size();
  out.x_d = Matrix(n, d, std::move(xs));
  out.y_d = Matrix(n, d, std::move(ys));
  return out;
}

DictionaryIndex index_dictionary(const PairedMatrices& pairs) {
  DictionaryIndex out;
  std::unordered_map<std::string_view, std::size_t> src_ids, tgt_ids;
  std::vector<std::size_t> src_rows, tgt_rows;
  for (std::size_t p = 0; p < pairs.kept_pairs.size(); ++p) {
    const auto& [s, t] = pairs.kept_pairs[p];
    auto [si, s_new] = src_ids.try_emplace(s, src_ids.size());
    if (s_new) src_rows.push_back(p);
    auto [ti, t_new] = tgt_ids.try_emplace(t, tgt_ids.size());
    if (t_new) tgt_rows.push_back(p);
    out.pair_source.push_back(si->second);
    out.pair_target.push_back(ti->second);
  }
  const std::size_t d = pairs.dim();
  out.sources = Matrix(src_rows.size(), d);
  out.targets = Matrix(tgt_rows.size(), d);
  for (std::size_t i = 0; i < src_rows.size(); ++i) {
    auto r = pairs.x_d.row(src_rows[i]);
    std::copy(r.begin(), r.end(), out.sources.row(i).begin());
  }
  for (std::size_t i = 0; i < tgt_rows.size(); ++i) {
    auto r = pairs.y_d.row(tgt_rows[i]);
    std::copy(r.begin(), r.end(), out.targets.row(i).begin());
  }
  return out;
}

}  // namespace xlalign
