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

#include "zigscan/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zigscan/error.hpp"
#include "zigscan/kernels.hpp"
#include "zigscan/rng.hpp"

namespace zigscan {

PointCloud::PointCloud(std::vector<Point3> points) : points_(std::move(points)) {
  if (points_.empty()) throw ValidationError("point cloud must contain at least one point");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    for (double v : points_[i]) {
      if (!std::isfinite(v)) {
        throw ValidationError("non-finite coordinate at point " + std::to_string(i));
      }
    }
  }
}

PointCloud subset(const PointCloud& cloud, std::span<const std::size_t> indices) {
  std::vector<Point3> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= cloud.size()) throw ArgumentError("index out of range in subset");
    out.push_back(cloud[i]);
  }
  return PointCloud(std::move(out));
}

// ---------------------------------------------------------------------------
// encoder

EncoderWeights::EncoderWeights(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("encoder needs at least one layer");
  std::size_t in = 3;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    const std::string where = "encoder layer " + std::to_string(l);
    if (layer.in_dim != in) throw ConfigError(where + " expects " + std::to_string(in) + " inputs");
    if (layer.out_dim == 0) throw ConfigError(where + " has zero width");
    if (layer.weights.size() != layer.in_dim * layer.out_dim || layer.bias.size() != layer.out_dim) {
      throw ConfigError(where + " has inconsistent parameter sizes");
    }
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(layer.weights.begin(), layer.weights.end(), finite) ||
        !std::all_of(layer.bias.begin(), layer.bias.end(), finite)) {
      throw ConfigError(where + " has non-finite parameters");
    }
    in = layer.out_dim;
  }
}

EncoderWeights EncoderWeights::random(std::size_t hidden, std::size_t feature_dim,
                                      std::uint64_t seed) {
  Rng rng(seed);
  auto make = [&](std::size_t in, std::size_t out, bool relu) {
    DenseLayer layer{in, out, std::vector<double>(in * out), std::vector<double>(out, 0.0), relu};
    const double scale = std::sqrt(2.0 / static_cast<double>(in));
    for (double& w : layer.weights) w = scale * rng.normal();
    return layer;
  };
  std::vector<DenseLayer> layers;
  layers.push_back(make(3, hidden, true));
  layers.push_back(make(hidden, feature_dim, false));
  return EncoderWeights(std::move(layers));
}

std::size_t EncoderWeights::max_width() const {
  std::size_t w = 3;
  for (const DenseLayer& l : layers_) w = std::max(w, l.out_dim);
  return w;
}

void EncoderWeights::apply(const double* input, std::span<double> scratch,
                           std::span<double> out) const {
  const std::size_t width = max_width();
  double* cur = scratch.data();
  double* next = scratch.data() + width;
  std::copy(input, input + 3, cur);
  for (const DenseLayer& layer : layers_) {
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
      double s = layer.bias[o];
      const double* row = layer.weights.data() + o * layer.in_dim;
      for (std::size_t i = 0; i < layer.in_dim; ++i) s += row[i] * cur[i];
      next[o] = layer.relu ? std::max(s, 0.0) : s;
    }
    std::swap(cur, next);
  }
  std::copy(cur, cur + output_dim(), out.begin());
}

// ---------------------------------------------------------------------------
// preprocessing and grouping

PointCloud normalize_unit_sphere(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  const bool degenerate =
      std::all_of(cloud.begin(), cloud.end(), [&](const Point3& p) { return p == cloud[0]; });
  if (degenerate) return PointCloud(std::vector<Point3>(n, Point3{0.0, 0.0, 0.0}));

  Point3 centroid{0.0, 0.0, 0.0};
  for (const Point3& p : cloud) {
    for (int c = 0; c < 3; ++c) centroid[c] += p[c];
  }
  for (double& c : centroid) c /= static_cast<double>(n);

  std::vector<Point3> out(n);
  double max_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) out[i][c] = cloud[i][c] - centroid[c];
    max_sq = std::max(max_sq, squared_distance(out[i], Point3{0.0, 0.0, 0.0}));
  }
  const double scale = 1.0 / std::sqrt(max_sq);
  for (Point3& p : out) {
    for (double& v : p) v *= scale;
  }
  return PointCloud(std::move(out));
}

std::size_t fps_first_index(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return static_cast<std::size_t>(rng.below(n));
}

std::vector<std::size_t> farthest_point_sampling_from(const PointCloud& cloud, std::size_t count,
                                                      std::size_t first, Exec exec) {
  const std::size_t n = cloud.size();
  if (count == 0 || count > n) {
    throw ArgumentError("FPS count " + std::to_string(count) + " outside [1, " +
                        std::to_string(n) + "]");
  }
  if (first >= n) throw ArgumentError("FPS start index out of range");

  std::vector<double> min_sq(n, INFINITY);
  std::vector<std::size_t> picked;
  picked.reserve(count);
  std::size_t current = first;
  for (std::size_t s = 0; s < count; ++s) {
    picked.push_back(current);
    min_sq[current] = -1.0;
    if (s + 1 < count) current = kernels::fps_update(cloud.points(), cloud[current], min_sq, exec);
  }
  return picked;
}

std::vector<std::size_t> farthest_point_sampling(const PointCloud& cloud, std::size_t count,
                                                 std::uint64_t seed, Exec exec) {
  return farthest_point_sampling_from(cloud, count, fps_first_index(cloud.size(), seed), exec);
}

std::vector<TokenGroup> knn_group(const PointCloud& cloud, std::span<const std::size_t> centers,
                                  std::size_t k, Exec exec) {
  if (k == 0 || k > cloud.size()) {
    throw ArgumentError("k = " + std::to_string(k) + " outside [1, " +
                        std::to_string(cloud.size()) + "]");
  }
  if (centers.empty()) throw ArgumentError("knn_group needs at least one center");
  for (std::size_t c : centers) {
    if (c >= cloud.size()) throw ArgumentError("center index out of range");
  }
  auto neighborhoods = kernels::knn(cloud.points(), centers, k, exec);
  std::vector<TokenGroup> groups(centers.size());
  for (std::size_t g = 0; g < centers.size(); ++g) {
    groups[g].center_index = centers[g];
    groups[g].neighbor_indices = std::move(neighborhoods[g]);
  }
  return groups;
}

std::vector<TokenGroup> encode_tokens(const PointCloud& cloud, std::vector<TokenGroup> groups,
                                      const EncoderWeights& weights, std::size_t feature_dim,
                                      Exec exec) {
  if (weights.output_dim() != feature_dim) {
    throw ConfigError("encoder produces " + std::to_string(weights.output_dim()) +
                      " features, configured " + std::to_string(feature_dim));
  }
  // The kernel expects the center as the first member of each list.
  std::vector<std::vector<std::size_t>> members(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const TokenGroup& group = groups[g];
    if (group.neighbor_indices.empty()) throw ArgumentError("empty token group");
    if (group.center_index >= cloud.size()) throw ArgumentError("center index out of range");
    members[g].reserve(group.neighbor_indices.size() + 1);
    members[g].push_back(group.center_index);
    for (std::size_t i : group.neighbor_indices) {
      if (i >= cloud.size()) throw ArgumentError("neighbor index out of range");
      members[g].push_back(i);
    }
  }
  const auto features = kernels::encode_max_pool(cloud.points(), members, weights, exec);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto first = features.begin() + static_cast<std::ptrdiff_t>(g * feature_dim);
    groups[g].feature.assign(first, first + static_cast<std::ptrdiff_t>(feature_dim));
    for (double v : groups[g].feature) {
      if (!std::isfinite(v)) throw NumericalError("non-finite token feature");
    }
  }
  return groups;
}

std::vector<TokenGroup> tokenize(const PointCloud& cloud, const TokenizeConfig& config,
                                 const EncoderWeights& weights, std::uint64_t seed, Exec exec) {
  const auto centers = farthest_point_sampling(cloud, config.n_centers, seed, exec);
  auto groups = knn_group(cloud, centers, config.k, exec);
  return encode_tokens(cloud, std::move(groups), weights, config.feature_dim, exec);
}

std::vector<Point3> relative_patch(const PointCloud& cloud, const TokenGroup& group) {
  const Point3& c = cloud[group.center_index];
  std::vector<Point3> out;
  out.reserve(group.neighbor_indices.size());
  for (std::size_t i : group.neighbor_indices) {
    const Point3& p = cloud[i];
    out.push_back({p[0] - c[0], p[1] - c[1], p[2] - c[2]});
  }
  return out;
}

PointCloud centers_of(const PointCloud& cloud, std::span<const TokenGroup> groups) {
  std::vector<std::size_t> idx;
  idx.reserve(groups.size());
  for (const TokenGroup& g : groups) idx.push_back(g.center_index);
  return subset(cloud, idx);
}

}  // namespace zigscan
