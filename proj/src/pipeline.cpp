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

#include "zigscan/pipeline.hpp"

#include "zigscan/error.hpp"
#include "zigscan/rng.hpp"

namespace zigscan {

std::uint64_t encoder_seed(std::uint64_t seed) { return mix_seed(seed, 100); }
std::uint64_t fps_seed(std::uint64_t seed, std::size_t cloud_index) {
  return mix_seed(seed, 1000 + cloud_index);
}
std::uint64_t plane_seed(std::uint64_t seed, std::size_t cloud_index) {
  return mix_seed(seed, 1'000'000 + cloud_index);
}

PreparedCloud prepare_cloud(const PointCloud& raw, const PipelineConfig& config,
                            const EncoderWeights& encoder, std::size_t cloud_index, Exec exec) {
  PointCloud cloud = normalize_unit_sphere(raw);
  auto groups = tokenize(cloud, config.tokenize, encoder, fps_seed(config.seed, cloud_index), exec);
  const PointCloud centers = centers_of(cloud, groups);
  const PlaneChoice choice = config.plane ? PlaneChoice::fixed(*config.plane)
                                          : PlaneChoice::seeded_random(plane_seed(config.seed, cloud_index));
  ScanOrder order = zigzag_scan_3d(centers, config.scan, choice);
  return {std::move(cloud), std::move(groups), std::move(order)};
}

TokenBatch batch_of(std::span<const PreparedCloud> clouds) {
  if (clouds.empty()) throw ValidationError("empty batch");
  const std::size_t g = clouds.front().groups.size();
  const std::size_t c = clouds.front().groups.front().feature.size();
  std::vector<double> data;
  data.reserve(clouds.size() * g * c);
  for (const PreparedCloud& pc : clouds) {
    if (pc.groups.size() != g) throw ValidationError("clouds have different token counts");
    for (const TokenGroup& group : pc.groups) {
      data.insert(data.end(), group.feature.begin(), group.feature.end());
    }
  }
  return TokenBatch(clouds.size(), g, c, std::move(data));
}

PreparedTasks prepare_recon_tasks(std::span<const PointCloud> raw, const PipelineConfig& config,
                                  Exec exec) {
  config.scan.validate();
  config.mask.validate();
  const auto encoder = EncoderWeights::random(config.tokenize.hidden, config.tokenize.feature_dim,
                                              encoder_seed(config.seed));
  PreparedTasks out;
  out.clouds.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out.clouds.push_back(prepare_cloud(raw[i], config, encoder, i, exec));
  }
  out.plan = build_mask_plan(batch_of(out.clouds), config.mask, exec);
  const std::size_t g = out.plan.final.groups;
  for (std::size_t i = 0; i < out.clouds.size(); ++i) {
    const PreparedCloud& pc = out.clouds[i];
    std::span<const std::uint8_t> row(out.plan.final.bits.data() + i * g, g);
    out.tasks.push_back(build_recon_task(pc.cloud, pc.groups, pc.order, row));
  }
  return out;
}

}  // namespace zigscan
