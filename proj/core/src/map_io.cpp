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
#include "xlalign/map_io.hpp"

#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "xlalign/error.hpp"
#include "xlalign/text.hpp"

namespace xlalign {
namespace {

constexpr std::string_view kMagic = "xlalign-map";

void write_values(std::ostream& os, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << ' ';
    os << format_double(values[i]);
  }
}

void write_vector(std::ostream& os, std::string_view name, const std::vector<double>& v) {
  os << "vector " << name << ' ' << v.size() << '\n';
  write_values(os, v);
  os << '\n';
}

void write_matrix(std::ostream& os, std::string_view name, const Matrix& m) {
  os << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    write_values(os, m.row(r));
    os << '\n';
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    const auto end = text_.find('\n', pos_);
    const auto stop = end == std::string_view::npos ? text_.size() : end;
    line = text_.substr(pos_, stop - pos_);
    pos_ = stop + 1;
    ++line_number_;
    return true;
  }

  std::string_view require_line(const char* what) {
    std::string_view line;
    if (!next(line)) fail(std::string("unexpected end of map while reading ") + what);
    return line;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw DataError("map artifact line " + std::to_string(line_number_) + ": " + message);
  }

  std::vector<double> values(std::string_view line, std::size_t expected) {
    std::vector<double> out;
    out.reserve(expected);
    for (auto f : split_whitespace(line)) {
      auto v = parse_double(f);
      if (!v) fail("cannot parse number '" + std::string(f) + "'");
      out.push_back(*v);
    }
    if (out.size() != expected) {
      fail("expected " + std::to_string(expected) + " values, found " +
           std::to_string(out.size()));
    }
    return out;
  }

  std::size_t count(std::string_view field) {
    auto v = parse_uint(field);
    if (!v) fail("expected a count, found '" + std::string(field) + "'");
    return static_cast<std::size_t>(*v);
  }

 private:
  std::string_view text_;
  std::size_t pos_{0};
  std::size_t line_number_{0};
};

}  // namespace

std::string serialize_map(const MapArtifact& artifact) {
  std::ostringstream os;
  os << kMagic << '\n';
  os << "format_version " << kMapFormatVersion << '\n';
  os << "kind " << map_kind(artifact.map) << '\n';
  for (const auto& [key, value] : artifact.metadata) {
    if (key.empty() || key.find_first_of(" \t\n\r") != std::string::npos ||
        value.find_first_of("\n\r") != std::string::npos) {
      throw UsageError("invalid map metadata entry '" + key + "'");
    }
    os << "meta " << key << ' ' << value << '\n';
  }
  if (const auto* m = std::get_if<OrthogonalMap>(&artifact.map)) {
    os << "rank " << m->rank << '\n';
    write_vector(os, "sigma", m->sigma);
    write_matrix(os, "u", m->u);
    write_matrix(os, "v", m->v);
  } else if (const auto* m = std::get_if<LinearMap>(&artifact.map)) {
    write_matrix(os, "w", m->w);
  } else if (const auto* m = std::get_if<CcaMap>(&artifact.map)) {
    os << "rank " << m->rank << '\n';
    write_vector(os, "src_mean", m->src_mean);
    write_vector(os, "tgt_mean", m->tgt_mean);
    write_matrix(os, "src_transform", m->src_transform);
    write_matrix(os, "tgt_transform", m->tgt_transform);
  }
  os << "end\n";
  return os.str();
}

MapArtifact parse_map(std::string_view text) {
  Parser p(text);
  if (p.require_line("header") != kMagic) p.fail("not an xlalign map artifact");

  auto version_fields = split_whitespace(p.require_line("format version"));
  if (version_fields.size() != 2 || version_fields[0] != "format_version") {
    p.fail("missing format_version");
  }
  if (p.count(version_fields[1]) != static_cast<std::size_t>(kMapFormatVersion)) {
    p.fail("unsupported map format version " + std::string(version_fields[1]));
  }
  auto kind_fields = split_whitespace(p.require_line("kind"));
  if (kind_fields.size() != 2 || kind_fields[0] != "kind") p.fail("missing kind");
  const std::string kind(kind_fields[1]);
  if (kind != "procrustes" && kind != "lsq" && kind != "cca") p.fail("unknown map kind " + kind);

  std::map<std::string, std::string> metadata;
  std::map<std::string, Matrix> matrices;
  std::map<std::string, std::vector<double>> vectors;
  std::optional<std::size_t> rank;
  bool ended = false;
  std::string_view line;
  while (p.next(line)) {
    if (line == "end") {
      ended = true;
      break;
    }
    const auto fields = split_whitespace(line);
    if (fields.empty()) p.fail("blank line");
    if (fields[0] == "meta") {
      if (fields.size() < 2) p.fail("meta without key");
      const auto key_pos = line.find(fields[1]);
      const auto value_pos = key_pos + fields[1].size();
      std::string value(value_pos < line.size() ? line.substr(value_pos + 1) : "");
      metadata[std::string(fields[1])] = value;
    } else if (fields[0] == "rank" && fields.size() == 2) {
      rank = p.count(fields[1]);
    } else if (fields[0] == "vector" && fields.size() == 3) {
      const std::size_t n = p.count(fields[2]);
      vectors[std::string(fields[1])] = p.values(p.require_line("vector"), n);
    } else if (fields[0] == "matrix" && fields.size() == 4) {
      const std::size_t rows = p.count(fields[2]);
      const std::size_t cols = p.count(fields[3]);
      std::vector<double> data;
      data.reserve(rows * cols);
      for (std::size_t r = 0; r < rows; ++r) {
        auto row = p.values(p.require_line("matrix row"), cols);
        data.insert(data.end(), row.begin(), row.end());
      }
      matrices[std::string(fields[1])] = Matrix(rows, cols, std::move(data));
    } else {
      p.fail("unrecognized record '" + std::string(fields[0]) + "'");
    }
  }
  if (!ended) p.fail("missing end marker");

  auto take_matrix = [&](const char* name) {
    auto it = matrices.find(name);
    if (it == matrices.end()) p.fail(std::string("missing matrix ") + name);
    return std::move(it->second);
  };
  auto take_vector = [&](const char* name) {
    auto it = vectors.find(name);
    if (it == vectors.end()) p.fail(std::string("missing vector ") + name);
    return std::move(it->second);
  };

  MapArtifact out;
  out.metadata = std::move(metadata);
  if (kind == "procrustes") {
    OrthogonalMap m{take_matrix("u"), take_vector("sigma"), take_matrix("v"), 0};
    const std::size_t d = m.u.rows();
    if (m.u.cols() != d || m.v.rows() != d || m.v.cols() != d || m.sigma.size() != d) {
      p.fail("inconsistent orthogonal map shapes");
    }
    if (!rank || *rank < 1 || *rank > d) p.fail("missing or invalid rank");
    m.rank = *rank;
    out.map = std::move(m);
  } else if (kind == "lsq") {
    LinearMap m{take_matrix("w")};
    if (m.w.rows() != m.w.cols()) p.fail("linear map must be square");
    out.map = std::move(m);
  } else {
    CcaMap m{take_vector("src_mean"), take_vector("tgt_mean"), take_matrix("src_transform"),
             take_matrix("tgt_transform"), 0};
    const std::size_t d = m.src_transform.rows();
    if (!rank || m.src_transform.cols() != *rank || m.tgt_transform.cols() != *rank ||
        m.tgt_transform.rows() != d || m.src_mean.size() != d || m.tgt_mean.size() != d) {
      p.fail("inconsistent CCA map shapes");
    }
    m.rank = *rank;
    out.map = std::move(m);
  }
  return out;
}

void save_map(const MapArtifact& artifact, const std::filesystem::path& path) {
  const std::string text = serialize_map(artifact);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write map to " + path.string());
  os << text;
  if (!os) throw DataError("write failed: " + path.string());
}

MapArtifact load_map(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open map artifact " + path.string());
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_map(buffer.str());
}

}  // namespace xlalign
