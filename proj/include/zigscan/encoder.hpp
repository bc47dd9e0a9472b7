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

namespace zigscan {

// Fully connected layer, y = W x + b, optionally followed by ReLU.
// weights is row-major with shape out_dim x in_dim.
struct DenseLayer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  bool relu = false;
};

// Shared per-point MLP followed by a coordinate-wise max over the patch.
class EncoderWeights {
 public:
  // Throws ConfigError unless the layers chain from 3 inputs and all
  // parameters are finite.
  explicit EncoderWeights(std::vector<DenseLayer> layers);

  // The default 3 -> hidden -> feature_dim network, ReLU after the first
  // layer, He-style normal initialization from the seed.
  static EncoderWeights random(std::size_t hidden, std::size_t feature_dim, std::uint64_t seed);

  std::size_t output_dim() const { return layers_.back().out_dim; }
  std::size_t max_width() const;
  std::span<const DenseLayer> layers() const { return layers_; }

  // Applies the MLP to one center-relative point. scratch must hold at least
  // 2 * max_width() doubles; the result is written to out (output_dim()).
  void apply(const double* input, std::span<double> scratch, std::span<double> out) const;

 private:
  std::vector<DenseLayer> layers_;
};

}  // namespace zigscan
