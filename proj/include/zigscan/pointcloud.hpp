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
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "zigscan/encoder.hpp"
#include "zigscan/geometry.hpp"

namespace zigscan {

enum class CloudFormat { xyz_text, ply_ascii, f32le_bin };

// Accepts "xyz", "ply", "bin" and the long names; throws ArgumentError.
CloudFormat parse_cloud_format(std::string_view name);

// Reads every point in file order. Malformed records raise ParseError with
// the offending line (or record) number, empty input raises EmptyInputError.
PointCloud load_pointcloud(const std::filesystem::path& path, CloudFormat format);

// Writes xyz_text with round-trippable precision.
void save_xyz(const std::filesystem::path& path, const PointCloud& cloud);

// Centers on the centroid and scales the farthest point to norm 1. A cloud
// of identical points maps to all zeros.
PointCloud normalize_unit_sphere(const PointCloud& cloud);

// Farthest point sampling starting at `first`. Ties go to the lowest index.
std::vector<std::size_t> farthest_point_sampling_from(const PointCloud& cloud, std::size_t count,
                                                      std::size_t first,
                                                      Exec exec = Exec::parallel);

// As above with the first index drawn uniformly from a seeded RNG.
std::vector<std::size_t> farthest_point_sampling(const PointCloud& cloud, std::size_t count,
                                                 std::uint64_t seed, Exec exec = Exec::parallel);

// First FPS pick for a seed; exposed so callers can reproduce the choice.
std::size_t fps_first_index(std::size_t n, std::uint64_t seed);

// A patch: center + k nearest neighbours (center first, then by ascending
// squared distance, ties to the lower index) and its encoded feature.
struct TokenGroup {
  std::size_t center_index = 0;
  std::vector<std::size_t> neighbor_indices;
  std::vector<double> feature;
};

std::vector<TokenGroup> knn_group(const PointCloud& cloud, std::span<const std::size_t> centers,
                                  std::size_t k, Exec exec = Exec::parallel);

// Fills each group's feature with the max-pooled MLP response over its points
// in center-relative coordinates. Throws ConfigError if the encoder output
// width differs from feature_dim.
std::vector<TokenGroup> encode_tokens(const PointCloud& cloud, std::vector<TokenGroup> groups,
                                      const EncoderWeights& weights, std::size_t feature_dim,
                                      Exec exec = Exec::parallel);

struct TokenizeConfig {
  std::size_t n_centers = 64;
  std::size_t k = 32;
  std::size_t hidden = 32;
  std::size_t feature_dim = 16;
};

// FPS -> KNN -> encode. Centers are returned in FPS order.
std::vector<TokenGroup> tokenize(const PointCloud& cloud, const TokenizeConfig& config,
                                 const EncoderWeights& weights, std::uint64_t seed,
                                 Exec exec = Exec::parallel);

// The patch's points relative to its center, in neighbor order.
std::vector<Point3> relative_patch(const PointCloud& cloud, const TokenGroup& group);

// Cloud of the group centers, in group order.
PointCloud centers_of(const PointCloud& cloud, std::span<const TokenGroup> groups);

}  // namespace zigscan
