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
#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "xlalign/dictionary.hpp"
#include "xlalign/error.hpp"
#include "xlalign/linalg.hpp"

namespace xlalign {
namespace {

using test_support::make_embeddings;
using test_support::TempDir;

EmbeddingSet basis_embeddings(std::vector<std::string> words) {
  const std::size_t n = words.size();
  return make_embeddings(std::move(words), Matrix::identity(n));
}

TEST(TsvDictionary, PairsInFileOrder) {
  TempDir dir;
  const auto d = load_tsv_dictionary(dir.write("d.tsv", "cat\tgatto\ndog\tcane\n"));
  EXPECT_EQ(d.provenance, Provenance::kExpert);
  EXPECT_EQ(d.pairs, (std::vector<TokenPair>{{"cat", "gatto"}, {"dog", "cane"}}));
}

TEST(TsvDictionary, RepeatedSourceKeepsBothTargets) {
  TempDir dir;
  const auto d = load_tsv_dictionary(dir.write("d.tsv", "tired\tstanco\ntired\tstanca\n"));
  EXPECT_EQ(d.pairs.size(), 2u);
  EXPECT_EQ(d.pairs[1].second, "stanca");
}

TEST(TsvDictionary, SwapColumns) {
  TempDir dir;
  const auto d = load_tsv_dictionary(dir.write("d.tsv", "cat\tgatto\n"), true);
  EXPECT_EQ(d.pairs.front(), (TokenPair{"gatto", "cat"}));
}

TEST(TsvDictionary, MalformedLinesAndEmptyFiles) {
  TempDir dir;
  EXPECT_THROW(load_tsv_dictionary(dir.write("e.tsv", "")), DataError);
  try {
    load_tsv_dictionary(dir.write("bad.tsv", "a\tb\nno tab here\n"));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos);
  }
  EXPECT_THROW(load_tsv_dictionary(dir.write("two.tsv", "a\tb\tc\n")), DataError);
  EXPECT_THROW(load_tsv_dictionary(dir.write("blank.tsv", "a\t\n")), DataError);
}

TEST(PseudoDictionary, IntersectionInSourceOrder) {
  const Vocabulary src({"london", "dna", "cat"});
  const Vocabulary tgt({"dna", "london", "gatto"});
  const auto d = build_pseudo_dictionary(src, tgt);
  EXPECT_EQ(d.provenance, Provenance::kPseudo);
  EXPECT_EQ(d.pairs, (std::vector<TokenPair>{{"london", "london"}, {"dna", "dna"}}));
}

TEST(PseudoDictionary, DisjointVocabulariesAreAnError) {
  EXPECT_THROW(build_pseudo_dictionary(Vocabulary({"a"}), Vocabulary({"b"})), DataError);
}

TEST(PseudoDictionary, MatchIsByteIdentical) {
  const auto d = build_pseudo_dictionary(Vocabulary({"Roma", "roma", "caf\xC3\xA9"}),
                                         Vocabulary({"roma", "cafe"}));
  EXPECT_EQ(d.pairs, (std::vector<TokenPair>{{"roma", "roma"}}));
}

TEST(PseudoDictionaryProperty, SymmetricTokenSet) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> a, b;
    for (int i = 0; i < 30; ++i) {
      if (rng.uniform() < 0.6) a.push_back("w" + std::to_string(i));
      if (rng.uniform() < 0.6) b.push_back("w" + std::to_string(i));
    }
    std::set<std::string> ab, ba;
    try {
      for (const auto& p : build_pseudo_dictionary(Vocabulary(a), Vocabulary(b)).pairs) {
        ab.insert(p.first);
      }
    } catch (const DataError&) {
    }
    try {
      for (const auto& p : build_pseudo_dictionary(Vocabulary(b), Vocabulary(a)).pairs) {
        ba.insert(p.first);
      }
    } catch (const DataError&) {
    }
    EXPECT_EQ(ab, ba);
  }
}

TEST(Resolve, FullyInVocabulary) {
  const auto src = basis_embeddings({"a", "b", "c"});
  const auto tgt = basis_embeddings({"x", "y", "z"});
  WordDictionary d{{{"a", "x"}, {"b", "y"}, {"c", "z"}}, Provenance::kExpert};
  const auto p = resolve(d, src, tgt);
  EXPECT_EQ(p.size(), 3u);
  EXPECT_EQ(p.stats.dropped(), 0u);
  EXPECT_EQ(p.x_d, Matrix::identity(3));
}

TEST(Resolve, OneOovTargetOfFive) {
  const auto src = basis_embeddings({"a", "b", "c", "d", "e"});
  const auto tgt = basis_embeddings({"v", "w", "x", "y", "z"});
  WordDictionary d{{{"a", "v"}, {"b", "w"}, {"c", "nope"}, {"d", "y"}, {"e", "z"}},
                   Provenance::kExpert};
  const auto p = resolve(d, src, tgt);
  EXPECT_EQ(p.size(), 4u);
  EXPECT_EQ(p.stats.target_missing, 1u);
  EXPECT_EQ(p.stats.source_missing, 0u);
  // Dictionary order is preserved among kept pairs.
  EXPECT_EQ(p.kept_pairs,
            (std::vector<TokenPair>{{"a", "v"}, {"b", "w"}, {"d", "y"}, {"e", "z"}}));
  EXPECT_EQ(p.y_d(2, 3), 1.0);
}

TEST(Resolve, PseudoDictionaryOnIdenticalSetsGivesEqualMatrices) {
  Rng rng(10);
  const auto words = test_support::numbered_words("w", 25);
  const auto e = make_embeddings(words, test_support::gaussian_matrix(25, 6, rng));
  const auto p = resolve(build_pseudo_dictionary(e.vocab, e.vocab), e, e);
  EXPECT_EQ(p.x_d, p.y_d);
  for (std::size_t r = 0; r < p.size(); ++r) EXPECT_NEAR(norm(p.x_d.row(r)), 1.0, 1e-12);
}

TEST(Resolve, ErrorsAndPreconditions) {
  const auto src = basis_embeddings({"a"});
  const auto tgt = basis_embeddings({"x"});
  EXPECT_THROW(resolve(WordDictionary{{{"q", "r"}}, Provenance::kExpert}, src, tgt), DataError);
  auto raw = make_embeddings({"a"}, Matrix::from_rows({{2}}), false);
  EXPECT_THROW(resolve(WordDictionary{{{"a", "x"}}, Provenance::kExpert}, raw, tgt), UsageError);
  EXPECT_THROW(resolve(WordDictionary{{{"a", "x"}}, Provenance::kExpert}, src,
                       basis_embeddings({"x", "y"})),
               DimensionError);
}

TEST(SentenceVector, SingleWordIsItsUnitVector) {
  const auto e = basis_embeddings({"a", "b", "c"});
  const auto v = sentence_vector({"b"}, e);
  ASSERT_TRUE(v);
  EXPECT_EQ(*v, (std::vector<double>{0, 1, 0}));
}

TEST(SentenceVector, OrthogonalPairGivesNormalizedSum) {
  const auto e = basis_embeddings({"u", "v"});
  const auto s = sentence_vector({"u", "oov", "v"}, e);
  ASSERT_TRUE(s);
  EXPECT_NEAR((*s)[0], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR((*s)[1], 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(SentenceVector, AllOovOrCancellingIsAbsent) {
  const auto e = make_embeddings({"up", "down"}, Matrix::from_rows({{1, 0}, {-1, 0}}));
  EXPECT_FALSE(sentence_vector({"x", "y"}, e));
  EXPECT_FALSE(sentence_vector({}, e));
  EXPECT_FALSE(sentence_vector({"up", "down"}, e));
}

TEST(SentenceVector, DuplicateOfTheOnlyTokenCancelsInNormalization) {
  Rng rng(14);
  const auto e = make_embeddings({"a", "b"}, test_support::gaussian_matrix(2, 5, rng));
  EXPECT_EQ(sentence_vector({"a", "a"}, e), sentence_vector({"a"}, e));
}

TEST(SentenceVectorProperty, TokenOrderInvariant) {
  Rng rng(15);
  const auto words = test_support::numbered_words("w", 12);
  const auto e = make_embeddings(words, test_support::gaussian_matrix(12, 8, rng));
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::string> tokens;
    for (int i = 0; i < 6; ++i) tokens.push_back(words[rng.uniform_index(12)]);
    auto shuffled = tokens;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[rng.uniform_index(i)]);
    }
    const auto a = sentence_vector(tokens, e), b = sentence_vector(shuffled, e);
    ASSERT_EQ(a.has_value(), b.has_value());
    if (!a) continue;
    for (std::size_t c = 0; c < a->size(); ++c) EXPECT_NEAR((*a)[c], (*b)[c], 1e-14);
  }
}

TEST(AlignedCorpus, SkipMaxLowercaseAndShorterFile) {
  TempDir dir;
  const auto src = dir.write("c.en", "One A\nTwo  B\nThree C\nFour D\n");
  const auto tgt = dir.write("c.it", "Uno\nDue\nTre\n");
  const auto all = load_aligned_corpus(src, tgt);
  EXPECT_EQ(all.size(), 3u);
  EXPECT_EQ(all.source_sentences[1], (std::vector<std::string>{"two", "b"}));
  const auto held_out = load_aligned_corpus(src, tgt, 1, 1);
  ASSERT_EQ(held_out.size(), 1u);
  EXPECT_EQ(held_out.target_sentences[0], std::vector<std::string>{"due"});
  EXPECT_EQ(load_aligned_corpus(src, tgt, 2).size(), 2u);
  EXPECT_THROW(load_aligned_corpus(dir.write("e.en", ""), tgt), DataError);
  EXPECT_THROW(load_aligned_corpus(src, tgt, std::nullopt, 10), DataError);
  EXPECT_THROW(load_aligned_corpus(dir.file("missing"), tgt), DataError);
}

TEST(PhraseMatrices, DropsPairsWithAnAbsentSide) {
  const auto src = basis_embeddings({"a", "b"});
  const auto tgt = basis_embeddings({"x", "y"});
  PhrasePairs p;
  p.source_sentences = {{"a", "b"}, {"a"}};
  p.target_sentences = {{"x"}, {"zzz"}};
  const auto m = build_phrase_matrices(p, src, tgt);
  EXPECT_EQ(m.size(), 1u);
  EXPECT_EQ(m.provenance, Provenance::kPhrase);
  EXPECT_EQ(m.stats.target_missing, 1u);
  EXPECT_EQ(m.kept_pairs.front(), (TokenPair{"a b", "x"}));
  PhrasePairs none;
  none.source_sentences = {{"q"}};
  none.target_sentences = {{"x"}};
  EXPECT_THROW(build_phrase_matrices(none, src, tgt), DataError);
}

TEST(PhraseMatrices, IdenticalCorporaAndEmbeddingsGiveEqualMatrices) {
  Rng rng(16);
  const auto words = test_support::numbered_words("w", 10);
  const auto e = make_embeddings(words, test_support::gaussian_matrix(10, 4, rng));
  PhrasePairs p;
  for (int s = 0; s < 8; ++s) {
    std::vector<std::string> sentence;
    for (int i = 0; i < 3; ++i) sentence.push_back(words[rng.uniform_index(10)]);
    p.source_sentences.push_back(sentence);
    p.target_sentences.push_back(sentence);
  }
  const auto m = build_phrase_matrices(p, e, e);
  EXPECT_EQ(m.x_d, m.y_d);
}

TEST(DictionaryIndex, DistinctRowsInFirstSeenOrder) {
  const auto src = basis_embeddings({"a", "b", "c"});
  const auto tgt = basis_embeddings({"x", "y", "z"});
  WordDictionary d{{{"a", "x"}, {"a", "y"}, {"b", "z"}, {"b", "x"}}, Provenance::kExpert};
  const auto idx = index_dictionary(resolve(d, src, tgt));
  EXPECT_EQ(idx.sources.rows(), 2u);
  EXPECT_EQ(idx.targets.rows(), 3u);
  EXPECT_EQ(idx.pair_source, (std::vector<std::size_t>{0, 0, 1, 1}));
  EXPECT_EQ(idx.pair_target, (std::vector<std::size_t>{0, 1, 2, 0}));
}

}  // namespace
}  // namespace xlalign
