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
#include "xlalign/diagnostics.hpp"

#include <iostream>
#include <mutex>
#include <string>

namespace xlalign {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

DiagnosticSink& current_sink() {
  static DiagnosticSink sink = [](Severity severity, std::string_view message) {
    std::cerr << "xlalign: " << (severity == Severity::kWarning ? "warning: " : "")
              << message << '\n';
  };
  return sink;
}

void emit(Severity severity, std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (auto& sink = current_sink()) sink(severity, message);
}

}  // namespace

DiagnosticSink set_diagnostic_sink(DiagnosticSink sink) {
  std::lock_guard lock(sink_mutex());
  std::swap(current_sink(), sink);
  return sink;
}

void report_info(std::string_view message) { emit(Severity::kInfo, message); }
void report_warning(std::string_view message) { emit(Severity::kWarning, message); }

}  // namespace xlalign
