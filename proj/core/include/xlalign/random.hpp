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

#include <cstddef>
#include <cstdint>
#include <vector>

namespace xlalign {

/// SplitMix64. Chosen over the standard engines + distributions because the
/// standard distributions are implementation-defined and sampled indices must
/// be identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound);
  /// Uniform double in [0, 1).
  double uniform();
  /// Standard normal (Box-Muller, one value per call).
  double normal();

 private:
  std::uint64_t state_;
};

/// Independent stream seed for one query: hash(seed, index).
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index);

/// `count` distinct indices drawn uniformly from [0, population), returned
/// in ascending order. count >= population yields every index.
std::vector<std::size_t> sample_without_replacement(std::size_t population,
                                                    std::size_t count, Rng& rng);

}  // namespace xlalign
