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

#include <functional>
#include <string_view>

namespace xlalign {

enum class Severity { kInfo, kWarning };

using DiagnosticSink = std::function<void(Severity, std::string_view)>;

/// Replaces the process-wide diagnostics sink and returns the previous one.
/// The default sink writes "xlalign: <message>" lines to standard error.
/// Passing an empty function silences diagnostics.
DiagnosticSink set_diagnostic_sink(DiagnosticSink sink);

void report_info(std::string_view message);
void report_warning(std::string_view message);

}  // namespace xlalign
