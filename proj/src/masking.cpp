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

#include "zigscan/masking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "zigscan/error.hpp"
#include "zigscan/kernels.hpp"
#include "zigscan/rng.hpp"

namespace zigscan {

TokenBatch::TokenBatch(std::size_t batch, std::size_t groups, std::size_t channels,
                       std::vector<double> data)
    : batch_(batch), groups_(groups), channels_(channels), data_(std::move(data)) {
  if (batch_ == 0 || groups_ == 0 || channels_ == 0) {
    throw ValidationError("token batch dimensions must be positive");
  }
  if (data_.size() != batch_ * groups_ * channels_) {
    throw ValidationError("token batch holds " + std::to_string(data_.size()) + " values, expected " +
                          std::to_string(batch_ * groups_ * channels_));
  }
  if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); })) {
    throw ValidationError("token batch contains non-finite values");
  }
}

std::size_t MaskGrid::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

std::size_t MaskGrid::count_row(std::size_t b) const {
  const auto first = bits.begin() + static_cast<std::ptrdiff_t>(b * groups);
  return static_cast<std::size_t>(
      std::count(first, first + static_cast<std::ptrdiff_t>(groups), std::uint8_t{1}));
}

void MaskConfig::validate() const {
  if (!(t_semantic > 0.0 && t_semantic <= 1.0)) {
    throw ValidationError("t_semantic must lie in (0, 1], got " + std::to_string(t_semantic));
  }
  if (!(r_random >= 0.0 && r_random < 1.0)) {
    throw ValidationError("r_random must lie in [0, 1), got " + std::to_string(r_random));
  }
}

TokenBatch normalize_tokens(const TokenBatch& batch) {
  std::vector<double> out(batch.data().begin(), batch.data().end());
  const std::size_t c = batch.channels();
  for (std::size_t t = 0; t < batch.batch() * batch.groups(); ++t) {
    double* v = out.data() + t * c;
    double sq = 0.0;
    for (std::size_t j = 0; j < c; ++j) sq += v[j] * v[j];
    if (sq == 0.0) continue;
    const double norm = std::sqrt(sq);
    for (std::size_t j = 0; j < c; ++j) v[j] /= norm;
  }
  return TokenBatch(batch.batch(), batch.groups(), c, std::move(out));
}

Tensor3 similarity_matrix(const TokenBatch& normalized, Exec exec) {
  const std::size_t g = normalized.groups();
  return Tensor3{normalized.batch(), g, g,
                 kernels::clamped_gram(normalized.data(), normalized.batch(), g,
                                       normalized.channels(), exec)};
}

Tensor3 redundancy_scores(const Tensor3& similarity) {
  Tensor3 out{similarity.batch, 1, similarity.rows, std::vector<double>(similarity.batch * similarity.rows)};
  for (std::size_t b = 0; b < similarity.batch; ++b) {
    for (std::size_t i = 0; i < similarity.rows; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < similarity.cols; ++j) s += similarity.at(b, i, j);
      out.values[b * similarity.rows + i] = s;
    }
  }
  return out;
}

std::size_t sms_retain_count(double t_semantic, std::size_t groups) {
  const auto k = static_cast<std::size_t>(std::floor(t_semantic * static_cast<double>(groups)));
  return std::max<std::size_t>(1, k);
}

MaskGrid sms_mask(const TokenBatch& batch, double t_semantic, Exec exec) {
  if (!(t_semantic > 0.0 && t_semantic <= 1.0)) {
    throw ValidationError("t_semantic must lie in (0, 1]");
  }
  const std::size_t g = batch.groups();
  const Tensor3 scores = redundancy_scores(similarity_matrix(normalize_tokens(batch), exec));
  const std::size_t k = sms_retain_count(t_semantic, g);

  MaskGrid mask(batch.batch(), g);
  std::vector<double> row(g);
  for (std::size_t b = 0; b < batch.batch(); ++b) {
    const auto first = scores.values.begin() + static_cast<std::ptrdiff_t>(b * g);
    std::copy(first, first + static_cast<std::ptrdiff_t>(g), row.begin());
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    const double threshold = row[k - 1];
    for (std::size_t i = 0; i < g; ++i) mask.set(b, i, scores.values[b * g + i] > threshold);
  }
  return mask;
}

MaskGrid random_mask(const MaskGrid& semantic, double r_random, std::uint64_t seed) {
  if (!(r_random >= 0.0 && r_random < 1.0)) throw ValidationError("r_random must lie in [0, 1)");
  MaskGrid out(semantic.batch, semantic.groups);
  std::vector<std::size_t> available;
  for (std::size_t b = 0; b < semantic.batch; ++b) {
    available.clear();
    for (std::size_t i = 0; i < semantic.groups; ++i) {
      if (!semantic.at(b, i)) available.push_back(i);
    }
    const auto n_mask =
        static_cast<std::size_t>(std::floor(r_random * static_cast<double>(available.size())));
    // Partial Fisher-Yates: the first n_mask slots become a uniform sample.
    Rng rng(mix_seed(seed, b));
    for (std::size_t i = 0; i < n_mask; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(available.size() - i));
      std::swap(available[i], available[j]);
      out.set(b, available[i], true);
    }
  }
  return out;
}

MaskPlan build_mask_plan(const TokenBatch& batch, const MaskConfig& config, Exec exec) {
  config.validate();
  MaskPlan plan;
  plan.config = config;
  plan.semantic = config.strategy == MaskStrategy::sms ? sms_mask(batch, config.t_semantic, exec)
                                                      : MaskGrid(batch.batch(), batch.groups());
  plan.random = random_mask(plan.semantic, config.r_random, config.seed);
  plan.final = plan.semantic;
  for (std::size_t i = 0; i < plan.final.bits.size(); ++i) plan.final.bits[i] |= plan.random.bits[i];
  return plan;
}

}  // namespace zigscan
