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
#include <optional>
#include <span>
#include <vector>

#include "zigscan/masking.hpp"
#include "zigscan/pointcloud.hpp"
#include "zigscan/recon.hpp"
#include "zigscan/scan.hpp"

namespace zigscan {

// End-to-end data path: normalize -> FPS -> KNN -> encode -> zigzag
// serialize the patch centers -> mask.
struct PipelineConfig {
  TokenizeConfig tokenize;
  ScanParams scan;
  std::optional<Plane> plane;  // empty: one seeded random plane per cloud
  MaskConfig mask;
  std::uint64_t seed = 0;
};

struct PreparedCloud {
  PointCloud cloud;  // normalized
  std::vector<TokenGroup> groups;
  ScanOrder order;   // over groups
};

// Per-stream seeds derived from the base seed.
std::uint64_t encoder_seed(std::uint64_t seed);
std::uint64_t fps_seed(std::uint64_t seed, std::size_t cloud_index);
std::uint64_t plane_seed(std::uint64_t seed, std::size_t cloud_index);

PreparedCloud prepare_cloud(const PointCloud& raw, const PipelineConfig& config,
                            const EncoderWeights& encoder, std::size_t cloud_index,
                            Exec exec = Exec::parallel);

// Token features of several prepared clouds as one batch, in group order.
TokenBatch batch_of(std::span<const PreparedCloud> clouds);

struct PreparedTasks {
  std::vector<PreparedCloud> clouds;
  MaskPlan plan;
  std::vector<ReconTask> tasks;
};

PreparedTasks prepare_recon_tasks(std::span<const PointCloud> raw, const PipelineConfig& config,
                                  Exec exec = Exec::parallel);

}  // namespace zigscan
