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
#include "xlalign/embeddings.hpp"

#include <fstream>
#include <string>

#include "xlalign/error.hpp"
#include "xlalign/linalg.hpp"
#include "xlalign/text.hpp"

namespace xlalign {

Vocabulary::Vocabulary(std::vector<std::string> words) {
  words_.reserve(words.size());
  index_.reserve(words.size());
  for (auto& w : words) add(std::move(w));
}

void Vocabulary::add(std::string word) {
  const std::size_t rank = words_.size();
  auto [it, inserted] = index_.try_emplace(word, rank);
  if (!inserted) {
    throw DataError("duplicate word '" + word + "' (first seen at rank " +
                    std::to_string(it->second) + ")");
  }
  words_.push_back(std::move(word));
}

std::optional<std::size_t> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::span<const double>> EmbeddingSet::lookup(std::string_view word) const {
  auto rank = vocab.find(word);
  if (!rank) return std::nullopt;
  return matrix.row(*rank);
}

std::optional<std::span<const double>> lookup(const EmbeddingSet& embeddings,
                                              std::string_view word) {
  return embeddings.lookup(word);
}

namespace {

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

}  // namespace

EmbeddingSet load_word2vec_text(const std::filesystem::path& path,
                                std::optional<std::size_t> limit) {
  LineReader reader(path);
  std::vector<std::string> words;
  std::vector<double> values;
  std::size_t dim = 0;
  std::optional<std::size_t> header_dim;
  std::string line;
  Vocabulary vocab;

  while (!(limit && vocab.size() >= *limit) && reader.next(line)) {
    const std::size_t lineno = reader.line_number();
    if (!is_valid_utf8(line)) throw DataError(where(path, lineno) + ": invalid UTF-8");
    const auto fields = split_whitespace(line);
    if (fields.empty()) throw DataError(where(path, lineno) + ": empty line");

    if (lineno == 1 && fields.size() == 2 && parse_uint(fields[0]) && parse_uint(fields[1])) {
      header_dim = static_cast<std::size_t>(*parse_uint(fields[1]));
      continue;
    }
    const std::size_t row_dim = fields.size() - 1;
    if (row_dim == 0) throw DataError(where(path, lineno) + ": row has no vector values");
    if (vocab.size() == 0) {
      dim = row_dim;
      if (header_dim && *header_dim != dim) {
        throw DataError(where(path, lineno) + ": header declares dimension " +
                        std::to_string(*header_dim) + " but row has " + std::to_string(dim));
      }
    } else if (row_dim != dim) {
      throw DataError(where(path, lineno) + ": expected " + std::to_string(dim) +
                      " values, found " + std::to_string(row_dim));
    }
    for (std::size_t f = 1; f < fields.size(); ++f) {
      auto v = parse_double(fields[f]);
      if (!v) {
        throw DataError(where(path, lineno) + ": column " + std::to_string(f + 1) +
                        ": cannot parse number '" + std::string(fields[f]) + "'");
      }
      values.push_back(*v);
    }
    vocab.add(std::string(fields[0]));
  }
  if (vocab.size() == 0) throw DataError(path.string() + ": no embedding rows");

  EmbeddingSet out;
  const std::size_t n = vocab.size();
  out.vocab = std::move(vocab);
  out.matrix = Matrix(n, dim, std::move(values));
  if (!all_finite(out.matrix)) throw DataError(path.string() + ": non-finite embedding value");
  return out;
}

void save_word2vec_text(const EmbeddingSet& embeddings, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  os << embeddings.size() << ' ' << embeddings.dim() << '\n';
  for (std::size_t r = 0; r < embeddings.size(); ++r) {
    os << embeddings.vocab[r];
    for (double v : embeddings.matrix.row(r)) os << ' ' << format_double(v);
    os << '\n';
  }
  if (!os) throw DataError("write failed: " + path.string());
}

EmbeddingSet normalize_rows(EmbeddingSet embeddings) {
  for (std::size_t r = 0; r < embeddings.size(); ++r) {
    if (norm(embeddings.matrix.row(r)) == 0.0) {
      throw DataError("cannot normalize all-zero vector for word '" + embeddings.vocab[r] + "'");
    }
  }
  normalize_rows_in_place(embeddings.matrix);
  embeddings.normalized = true;
  return embeddings;
}

}  // namespace xlalign
