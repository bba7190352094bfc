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

#include <algorithm>
#include <sstream>

#include "synthetic.hpp"
#include "xlalign/cli.hpp"
#include "xlalign/evaluation.hpp"

namespace xlalign {
namespace {

using test_support::read_file;
using test_support::TempDir;
using test_support::word2vec_text;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "xlalign");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto task = test_support::make_bilingual_task(400, 10, 0.05, 9);
    src_ = dir_.write("src.vec", word2vec_text(task.source)).string();
    tgt_ = dir_.write("tgt.vec", word2vec_text(task.target)).string();
    std::string train, test;
    for (int i = 0; i < 200; ++i) train += "s" + std::to_string(i) + "\tt" + std::to_string(i) + "\n";
    for (int i = 200; i < 400; ++i) test += "s" + std::to_string(i) + "\tt" + std::to_string(i) + "\n";
    dict_ = dir_.write("train.tsv", train).string();
    test_ = dir_.write("test.tsv", test).string();
  }

  std::string align(const std::vector<std::string>& extra = {}) {
    const auto map = dir_.file("m" + std::to_string(maps_++) + ".map").string();
    std::vector<std::string> args{"align", "--src", src_, "--tgt", tgt_, "--dict", dict_,
                                  "--out", map};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = run(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return map;
  }

  TempDir dir_;
  std::string src_, tgt_, dict_, test_;
  int maps_ = 0;
};

TEST_F(Cli, HelpDocumentsEveryFlag) {
  const auto top = run({"--help"});
  EXPECT_EQ(top.code, 0);
  for (const char* sub : {"align", "translate", "evaluate"}) {
    EXPECT_NE(top.out.find(sub), std::string::npos);
  }
  const auto a = run({"align", "--help"});
  EXPECT_EQ(a.code, 0);
  for (const char* flag : {"--src", "--tgt", "--limit", "--dict", "--swap-dict", "--corpus",
                           "--max-pairs", "--skip", "--map", "--rank", "--method", "--beta",
                           "--beta-max", "--ns", "--seed", "--fit-sample", "--out"}) {
    EXPECT_NE(a.out.find(flag), std::string::npos) << flag;
  }
  const auto t = run({"translate", "--help"});
  for (const char* flag : {"--map", "--method", "--beta", "--ns", "--seed", "--global-sample",
                           "--top-k"}) {
    EXPECT_NE(t.out.find(flag), std::string::npos) << flag;
  }
  const auto e = run({"evaluate", "--help"});
  for (const char* flag : {"--test", "--corpus", "--queries", "--ks", "--threads", "--report",
                           "--tsv", "--global-sample"}) {
    EXPECT_NE(e.out.find(flag), std::string::npos) << flag;
  }
}

TEST_F(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"align", "--bogus"}).code, 2);
  EXPECT_EQ(run({"align", "--src", src_, "--tgt", tgt_, "--out", "x", "--method", "magic"}).code,
            2);
  const auto both = run({"align", "--src", src_, "--tgt", tgt_, "--out",
                         dir_.file("x.map").string()});
  EXPECT_EQ(both.code, 2);
  EXPECT_NE(both.err.find("kind=usage"), std::string::npos);
}

TEST_F(Cli, DataErrorsExitWithThree) {
  const auto r = run({"align", "--src", dir_.file("nope.vec").string(), "--tgt", tgt_, "--dict",
                      dict_, "--out", dir_.file("x.map").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("kind=data"), std::string::npos);
  const auto bad_map = dir_.write("bad.map", "garbage\n").string();
  EXPECT_EQ(run({"translate", "--map", bad_map, "--src", src_, "--tgt", tgt_, "s1"}).code, 3);
}

TEST_F(Cli, NumericalErrorsExitWithFour) {
  const auto tiny = dir_.write("tiny.tsv", "s1\tt1\ns2\tt2\n").string();
  const auto r = run({"align", "--src", src_, "--tgt", tgt_, "--dict", tiny, "--map", "cca",
                      "--method", "nn", "--out", dir_.file("x.map").string()});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("kind=numerical"), std::string::npos);
}

TEST_F(Cli, AlignStoresFittedBetaInTheArtifact) {
  const auto map = align({"--beta-max", "200"});
  const auto text = read_file(map);
  EXPECT_NE(text.find("meta beta "), std::string::npos);
  EXPECT_NE(text.find("meta method isf"), std::string::npos);
  EXPECT_NE(text.find("meta seed "), std::string::npos);
}

TEST_F(Cli, TranslateRanksTheKnownTranslationFirst) {
  const auto map = align({"--method", "nn"});
  const auto r = run({"translate", "--map", map, "--src", src_, "--tgt", tgt_, "--top-k", "3",
                      "s5", "unknownword"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("query\ts5\n1\tt5\t"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("query\tunknownword\tOOV\n"), std::string::npos);
}

TEST_F(Cli, TranslateEmitsOneBlockPerWord) {
  const auto map = align({"--method", "nn"});
  std::vector<std::string> args{"translate", "--map", map, "--src", src_, "--tgt", tgt_,
                                "--method", "isf", "--beta", "10", "--top-k", "2"};
  for (int i = 0; i < 100; ++i) args.push_back("s" + std::to_string(i));
  const auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t blocks = 0;
  for (std::size_t p = r.out.find("query\t"); p != std::string::npos;
       p = r.out.find("query\t", p + 1)) {
    ++blocks;
  }
  EXPECT_EQ(blocks, 100u);
}

TEST_F(Cli, EvaluateIsDeterministicAndWritesTsv) {
  const auto map = align({"--method", "nn"});
  const auto report_a = dir_.file("a.txt").string(), report_b = dir_.file("b.txt").string();
  const auto tsv = dir_.file("a.tsv").string();
  const std::vector<std::string> common{"evaluate", "--map", map, "--src", src_, "--tgt", tgt_,
                                        "--test", test_, "--method", "isf", "--beta", "15",
                                        "--ns", "100"};
  auto a = common;
  a.insert(a.end(), {"--report", report_a, "--tsv", tsv, "--threads", "1"});
  auto b = common;
  b.insert(b.end(), {"--report", report_b, "--threads", "4"});
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  EXPECT_EQ(read_file(report_a), read_file(report_b));
  const auto report = load_report(report_a);
  EXPECT_GT(report.precision(0), 0.9);
  EXPECT_EQ(report.labels.at("test"), test_);
  const auto table = read_file(tsv);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 2);
}

TEST_F(Cli, EvaluateSentenceModeFromCorpus) {
  std::string s, t;
  for (int i = 0; i < 60; ++i) {
    s += "s" + std::to_string(i) + " s" + std::to_string(i + 100) + "\n";
    t += "t" + std::to_string(i) + " t" + std::to_string(i + 100) + "\n";
  }
  const auto cs = dir_.write("c.src", s).string(), ct = dir_.write("c.tgt", t).string();
  const auto map = align({"--method", "nn"});
  const auto r = run({"evaluate", "--map", map, "--src", src_, "--tgt", tgt_, "--corpus", cs, ct,
                      "--queries", "40", "--method", "nn"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = parse_report(r.out);
  EXPECT_EQ(report.mode, "sentence");
  EXPECT_EQ(report.overall.evaluated, 40u);
  EXPECT_EQ(run({"evaluate", "--map", map, "--src", src_, "--tgt", tgt_, "--corpus", cs, ct,
                 "--test", test_})
                .code,
            2);
}

}  // namespace
}  // namespace xlalign
