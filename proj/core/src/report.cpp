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
#include <fstream>
#include <sstream>

#include "xlalign/error.hpp"
#include "xlalign/evaluation.hpp"
#include "xlalign/text.hpp"
#include "xlalign/version.hpp"

namespace xlalign {
namespace {

std::string join_sizes(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::vector<std::string_view> split_on(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

void write_counts(std::ostream& os, const std::string& prefix, const EvaluationReport& r,
                  const PrecisionCounts& counts) {
  os << prefix << "evaluated " << counts.evaluated << '\n';
  for (std::size_t i = 0; i < r.ks.size(); ++i) {
    os << prefix << "hits@" << r.ks[i] << ' ' << counts.hits[i] << '\n';
    const double p = counts.evaluated == 0 ? 0.0
                                           : static_cast<double>(counts.hits[i]) /
                                                 static_cast<double>(counts.evaluated);
    os << prefix << "precision@" << r.ks[i] << ' ' << format_double(p) << '\n';
  }
}

class Fields {
 public:
  explicit Fields(std::string_view text) {
    std::size_t line_number = 0;
    for (auto line : split_on(text, '\n')) {
      ++line_number;
      if (line.empty() || line.front() == '#') continue;
      const auto space = line.find(' ');
      if (space == std::string_view::npos) {
        throw DataError("report line " + std::to_string(line_number) + ": missing value");
      }
      std::string key(line.substr(0, space));
      if (!values_.emplace(key, std::string(line.substr(space + 1))).second) {
        throw DataError("report line " + std::to_string(line_number) + ": duplicate key " + key);
      }
    }
  }

  const std::map<std::string, std::string>& all() const { return values_; }

  const std::string& text(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw DataError("report is missing field " + key);
    return it->second;
  }

  std::uint64_t uint(const std::string& key) const {
    auto v = parse_uint(text(key));
    if (!v) throw DataError("report field " + key + " is not a count");
    return *v;
  }

  double real(const std::string& key) const {
    auto v = parse_double(text(key));
    if (!v) throw DataError("report field " + key + " is not a number");
    return *v;
  }

  bool flag(const std::string& key) const {
    const auto& v = text(key);
    if (v == "true") return true;
    if (v == "false") return false;
    throw DataError("report field " + key + " is not a boolean");
  }

  PrecisionCounts counts(const std::string& prefix, const std::vector<std::size_t>& ks) const {
    PrecisionCounts c;
    c.evaluated = uint(prefix + "evaluated");
    for (std::size_t k : ks) {
      const std::size_t hits = uint(prefix + "hits@" + std::to_string(k));
      if (hits > c.evaluated) throw DataError("report hits exceed evaluated count");
      c.hits.push_back(hits);
    }
    return c;
  }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace

std::string serialize_report(const EvaluationReport& r) {
  std::ostringstream os;
  os << "# xlalign evaluation report\n";
  os << "format_version " << kReportFormatVersion << '\n';
  os << "software_version " << kVersion << '\n';
  os << "mode " << r.mode << '\n';
  os << "map_kind " << r.map_kind << '\n';
  os << "method " << to_string(r.method) << '\n';
  os << "beta " << format_double(r.beta) << '\n';
  os << "n_s " << r.n_s << '\n';
  os << "seed " << r.seed << '\n';
  os << "global_sample " << (r.global_sample ? "true" : "false") << '\n';
  os << "dim " << r.dim << '\n';
  os << "rank " << r.rank << '\n';
  os << "ks " << join_sizes(r.ks) << '\n';
  os << "entries_total " << r.entries_total << '\n';
  os << "skipped_oov " << r.skipped_oov << '\n';
  os << "all_targets_oov " << r.all_targets_oov << '\n';
  write_counts(os, "", r, r.overall);
  for (std::size_t i = 0; i < r.ks.size(); ++i) {
    os << "precision_excluding_oov@" << r.ks[i] << ' ' << format_double(r.precision_excluding_oov(i))
       << '\n';
  }
  std::string labels;
  for (std::size_t b = 0; b < r.bins.size(); ++b) {
    if (b) labels += ',';
    labels += r.bins[b].first;
  }
  os << "bins " << labels << '\n';
  for (const auto& [label, counts] : r.bins) write_counts(os, "bin." + label + ".", r, counts);
  for (const auto& [key, value] : r.labels) {
    if (key.find_first_of(" \t\n") != std::string::npos || value.find('\n') != std::string::npos) {
      throw UsageError("invalid report label '" + key + "'");
    }
    os << "label." << key << ' ' << value << '\n';
  }
  return os.str();
}

EvaluationReport parse_report(std::string_view text) {
  const Fields f(text);
  if (f.uint("format_version") != static_cast<std::uint64_t>(kReportFormatVersion)) {
    throw DataError("unsupported report format version " + f.text("format_version"));
  }
  EvaluationReport r;
  r.mode = f.text("mode");
  r.map_kind = f.text("map_kind");
  auto method = parse_method(f.text("method"));
  if (!method) throw DataError("report has unknown method " + f.text("method"));
  r.method = *method;
  r.beta = f.real("beta");
  r.n_s = f.uint("n_s");
  r.seed = f.uint("seed");
  r.global_sample = f.flag("global_sample");
  r.dim = f.uint("dim");
  r.rank = f.uint("rank");
  r.ks.clear();
  for (auto field : split_on(f.text("ks"), ',')) {
    auto k = parse_uint(field);
    if (!k || *k == 0) throw DataError("report has an invalid k list");
    r.ks.push_back(*k);
  }
  r.entries_total = f.uint("entries_total");
  r.skipped_oov = f.uint("skipped_oov");
  r.all_targets_oov = f.uint("all_targets_oov");
  r.overall = f.counts("", r.ks);
  const auto& bin_list = f.text("bins");
  if (!bin_list.empty()) {
    for (auto label : split_on(bin_list, ',')) {
      const std::string name(label);
      r.bins.emplace_back(name, f.counts("bin." + name + ".", r.ks));
    }
  }
  for (const auto& [key, value] : f.all()) {
    if (key.rfind("label.", 0) == 0) r.labels.emplace(key.substr(6), value);
  }
  return r;
}

void emit_report(const EvaluationReport& report, const std::filesystem::path& path) {
  const std::string text = serialize_report(report);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write report to " + path.string());
  os << text;
  if (!os) throw DataError("write failed: " + path.string());
}

EvaluationReport load_report(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open report " + path.string());
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_report(buffer.str());
}

std::string tsv_summary_header(const EvaluationReport& report) {
  std::string out =
      "mode\tmap_kind\tmethod\tbeta\tn_s\tseed\tglobal_sample\tdim\trank\tentries_total\t"
      "skipped_oov\tall_targets_oov\tevaluated";
  for (std::size_t k : report.ks) out += "\tp@" + std::to_string(k);
  for (const auto& [label, counts] : report.bins) {
    for (std::size_t k : report.ks) out += "\t" + label + ":p@" + std::to_string(k);
  }
  return out;
}

std::string tsv_summary_row(const EvaluationReport& r) {
  std::string out = r.mode + '\t' + r.map_kind + '\t' + to_string(r.method) + '\t' +
                    format_double(r.beta) + '\t' + std::to_string(r.n_s) + '\t' +
                    std::to_string(r.seed) + '\t' + (r.global_sample ? "true" : "false") + '\t' +
                    std::to_string(r.dim) + '\t' + std::to_string(r.rank) + '\t' +
                    std::to_string(r.entries_total) + '\t' + std::to_string(r.skipped_oov) +
                    '\t' + std::to_string(r.all_targets_oov) + '\t' +
                    std::to_string(r.overall.evaluated);
  for (std::size_t i = 0; i < r.ks.size(); ++i) out += '\t' + format_double(r.precision(i));
  for (std::size_t b = 0; b < r.bins.size(); ++b) {
    for (std::size_t i = 0; i < r.ks.size(); ++i) out += '\t' + format_double(r.bin_precision(b, i));
  }
  return out;
}

}  // namespace xlalign
