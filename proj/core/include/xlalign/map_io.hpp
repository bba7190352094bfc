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
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "xlalign/alignment.hpp"

namespace xlalign {

inline constexpr int kMapFormatVersion = 1;

/// A fitted map plus free-form provenance (dictionary type, pair counts,
/// fitted beta, ...). Metadata keys must not contain whitespace and values
/// must not contain newlines.
struct MapArtifact {
  FittedMap map;
  std::map<std::string, std::string> metadata;
};

/// Line-oriented text encoding. Numbers use the shortest round-trip decimal
/// form, so save -> load reproduces every double exactly.
std::string serialize_map(const MapArtifact& artifact);
MapArtifact parse_map(std::string_view text);

void save_map(const MapArtifact& artifact, const std::filesystem::path& path);
MapArtifact load_map(const std::filesystem::path& path);

}  // namespace xlalign
