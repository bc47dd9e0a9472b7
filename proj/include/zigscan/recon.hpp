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

#include "zigscan/masking.hpp"
#include "zigscan/pointcloud.hpp"
#include "zigscan/scan.hpp"
#include "zigscan/ssm.hpp"

namespace zigscan {

// One serialized cloud ready for masked reconstruction. Row t of `tokens`
// is the t-th token along the scan; masked rows are fed to the SSM as zero
// vectors and their center-relative patches are the reconstruction targets.
struct ReconTask {
  Mat tokens;                                  // G x C
  std::vector<std::size_t> masked_positions;   // strictly increasing
  std::vector<std::vector<Point3>> targets;    // aligned with masked_positions

  // Throws ValidationError unless targets exist exactly for masked positions.
  void validate() const;
};

// Serializes groups by `order` (over group indices) and attaches targets for
// the masked tokens of `mask_row` (indexed by group, not by scan position).
ReconTask build_recon_task(const PointCloud& cloud, std::span<const TokenGroup> groups,
                           const ScanOrder& order, std::span<const std::uint8_t> mask_row);

// SSM encoder over the token sequence plus a linear decoder that maps each
// state to patch_points x 3 coordinates.
struct ReconModel {
  SsmMode mode = SsmMode::static_params;
  SsmParams ssm;
  Mat decoder_w;  // (3 * patch_points) x d
  Vec decoder_b;  // 3 * patch_points
  std::size_t patch_points = 0;

  static ReconModel random(std::size_t feature_dim, std::size_t state_dim,
                           std::size_t patch_points, SsmMode mode, std::uint64_t seed);

  // Trainable parameters in a fixed order. Static mode: A, B, decoder.
  // Dynamic mode: W_a, b_a, W_b, b_b, decoder. Matrices are column-major.
  std::vector<double> pack() const;
  void unpack(std::span<const double> flat);
  std::size_t parameter_count() const;
};

// Decoded patch for one state.
std::vector<Point3> decode_patch(const ReconModel& model, const Vec& state);

// Mean Chamfer-L2 over every masked patch of every task.
double reconstruction_loss(std::span<const ReconTask> tasks, const ReconModel& model);

struct LossAndGrad {
  double loss = 0.0;
  std::vector<double> grad;  // same layout as ReconModel::pack()
};

// Analytic gradient by backpropagation through the recurrence.
LossAndGrad reconstruction_loss_and_grad(std::span<const ReconTask> tasks, const ReconModel& model);

struct TrainConfig {
  std::size_t steps = 200;
  double lr = 0.5;
  std::uint64_t seed = 0;
  std::size_t state_dim = 16;
  SsmMode mode = SsmMode::static_params;
};

struct TrainTrace {
  std::vector<double> loss;  // loss before the update of each step
  double init_loss = 0.0;
  double final_loss = 0.0;   // after the last update
  std::uint64_t seed = 0;
  std::size_t steps = 0;
};

// Full-batch gradient descent from ReconModel::random(seed). Throws
// TrainingError if the loss becomes non-finite.
TrainTrace reconstruct_train(std::span<const ReconTask> tasks, const TrainConfig& config);

// Same, starting from (and updating) a caller-provided model.
TrainTrace reconstruct_train(std::span<const ReconTask> tasks, ReconModel& model,
                             const TrainConfig& config);

}  // namespace zigscan
