// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "zigscan/geometry.hpp"

namespace zigscan {

// Token features, shape batch x groups x channels, row-major.
class TokenBatch {
 public:
  // Throws ValidationError on zero dimensions, a size mismatch, or
  // non-finite entries.
  TokenBatch(std::size_t batch, std::size_t groups, std::size_t channels, std::vector<double> data);

  std::size_t batch() const { return batch_; }
  std::size_t groups() const { return groups_; }
  std::size_t channels() const { return channels_; }
  std::span<const double> data() const { return data_; }
  std::span<const double> token(std::size_t b, std::size_t g) const {
    return std::span(data_).subspan((b * groups_ + g) * channels_, channels_);
  }

 private:
  std::size_t batch_;
  std::size_t groups_;
  std::size_t channels_;
  std::vector<double> data_;
};

// batch x groups booleans.
struct MaskGrid {
  std::size_t batch = 0;
  std::size_t groups = 0;
  std::vector<std::uint8_t> bits;

  MaskGrid() = default;
  MaskGrid(std::size_t b, std::size_t g) : batch(b), groups(g), bits(b * g, 0) {}

  bool at(std::size_t b, std::size_t g) const { return bits[b * groups + g] != 0; }
  void set(std::size_t b, std::size_t g, bool v) { bits[b * groups + g] = v ? 1 : 0; }
  std::size_t count() const;
  std::size_t count_row(std::size_t b) const;

  friend bool operator==(const MaskGrid&, const MaskGrid&) = default;
};

// batch x rows x cols, row-major; used for both the similarity tensor
// (cols = groups) and the redundancy scores (rows = 1).
struct Tensor3 {
  std::size_t batch = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t b, std::size_t i, std::size_t j) const {
    return values[(b * rows + i) * cols + j];
  }
};

enum class MaskStrategy { sms, random_only };

struct MaskConfig {
  double t_semantic = 0.8;  // fraction of tokens SMS retains
  double r_random = 0.6;    // fraction of the remaining tokens masked at random
  std::uint64_t seed = 0;
  MaskStrategy strategy = MaskStrategy::sms;

  // Throws ValidationError unless t_semantic in (0, 1] and r_random in [0, 1).
  void validate() const;
};

struct MaskPlan {
  MaskGrid semantic;
  MaskGrid random;
  MaskGrid final;
  MaskConfig config;
};

// Each token divided by its L2 norm; zero tokens stay zero.
TokenBatch normalize_tokens(const TokenBatch& batch);

// Clamped cosine similarity of already-normalized tokens, batch x G x G.
Tensor3 similarity_matrix(const TokenBatch& normalized, Exec exec = Exec::parallel);

// Row sums of the similarity tensor, batch x 1 x G.
Tensor3 redundancy_scores(const Tensor3& similarity);

// Number of tokens SMS keeps as candidates: max(1, floor(t_semantic * G)).
std::size_t sms_retain_count(double t_semantic, std::size_t groups);

// Masks tokens whose redundancy score strictly exceeds the k-th smallest
// score of their row.
MaskGrid sms_mask(const TokenBatch& batch, double t_semantic, Exec exec = Exec::parallel);

// Masks floor(r_random * available) of each row's unmasked tokens, drawn
// without replacement from a per-row stream of `seed`.
MaskGrid random_mask(const MaskGrid& semantic, double r_random, std::uint64_t seed);

MaskPlan build_mask_plan(const TokenBatch& batch, const MaskConfig& config,
                         Exec exec = Exec::parallel);

}  // namespace zigscan
