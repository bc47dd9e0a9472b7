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

#include "zigscan/scan.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "zigscan/error.hpp"
#include "zigscan/kernels.hpp"
#include "zigscan/rng.hpp"

namespace zigscan {

void ScanParams::validate() const {
  if (layer_budget < 3) throw ArgumentError("layer budget must be >= 3");
  if (segment_size < 1) throw ArgumentError("segment size must be >= 1");
  if (max_segments < 1) throw ArgumentError("max segments must be >= 1");
}

std::string_view to_string(CurveTag tag) {
  switch (tag) {
    case CurveTag::zigzag_xy: return "zigzag_xy";
    case CurveTag::zigzag_xz: return "zigzag_xz";
    case CurveTag::zigzag_yz: return "zigzag_yz";
    case CurveTag::hilbert: return "hilbert";
    case CurveTag::trans_hilbert: return "trans_hilbert";
    case CurveTag::z_order: return "z_order";
    case CurveTag::trans_z_order: return "trans_z_order";
    case CurveTag::random: return "random";
  }
  return "random";
}

CurveTag parse_curve_tag(std::string_view name) {
  for (CurveTag tag : kAllCurveTags) {
    if (to_string(tag) == name) return tag;
  }
  throw ArgumentError("unknown curve '" + std::string(name) + "'");
}

std::string_view to_string(Plane plane) {
  switch (plane) {
    case Plane::XY: return "xy";
    case Plane::XZ: return "xz";
    case Plane::YZ: return "yz";
  }
  return "xy";
}

Plane parse_plane(std::string_view name) {
  if (name == "xy" || name == "XY") return Plane::XY;
  if (name == "xz" || name == "XZ") return Plane::XZ;
  if (name == "yz" || name == "YZ") return Plane::YZ;
  throw ArgumentError("unknown plane '" + std::string(name) + "'");
}

bool is_bijection(std::span<const std::size_t> permutation, std::size_t n) {
  if (permutation.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (std::size_t i : permutation) {
    if (i >= n || seen[i]) return false;
    seen[i] = true;
  }
  return true;
}

ScanOrder::ScanOrder(std::vector<std::size_t> permutation, CurveTag tag)
    : permutation_(std::move(permutation)), tag_(tag) {
  if (!is_bijection(permutation_, permutation_.size())) {
    throw ValidationError("scan order is not a permutation");
  }
}

std::size_t layers_for(Plane plane, std::size_t layer_budget) {
  const std::size_t third = layer_budget / 3;
  switch (plane) {
    case Plane::XY: return (layer_budget + 2) / 3;
    case Plane::XZ: return third + (layer_budget % 3 >= 1 ? 1 : 0);
    case Plane::YZ: return third;
  }
  return third;
}

namespace {

struct PlaneAxes {
  Axis layer;
  Axis sort;
  Axis alternate;
};

PlaneAxes axes_of(Plane plane) {
  switch (plane) {
    case Plane::XY: return {Axis::Z, Axis::X, Axis::Y};
    case Plane::XZ: return {Axis::Y, Axis::X, Axis::Z};
    case Plane::YZ: return {Axis::X, Axis::Y, Axis::Z};
  }
  return {Axis::Z, Axis::X, Axis::Y};
}

CurveTag tag_of(Plane plane) {
  switch (plane) {
    case Plane::XY: return CurveTag::zigzag_xy;
    case Plane::XZ: return CurveTag::zigzag_xz;
    case Plane::YZ: return CurveTag::zigzag_yz;
  }
  return CurveTag::zigzag_xy;
}

// Orders indices by one coordinate; equal coordinates keep the lower index
// first in both directions.
void sort_by_axis(std::span<std::size_t> idx, const PointCloud& cloud, Axis axis, bool ascending) {
  const auto a = static_cast<std::size_t>(axis);
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    const double vi = cloud[i][a];
    const double vj = cloud[j][a];
    if (vi != vj) return ascending ? vi < vj : vi > vj;
    return i < j;
  });
}

// Sizes of `parts` near-equal slices of `n`; the first n mod parts are larger.
std::vector<std::size_t> slice_sizes(std::size_t n, std::size_t parts) {
  std::vector<std::size_t> sizes(parts, n / parts);
  for (std::size_t i = 0; i < n % parts; ++i) ++sizes[i];
  return sizes;
}

}  // namespace

std::vector<std::vector<std::size_t>> layer_partition(const PointCloud& cloud, Axis axis,
                                                      std::size_t num_layers) {
  const std::size_t n = cloud.size();
  if (num_layers == 0 || num_layers > n) {
    throw ArgumentError("layer count " + std::to_string(num_layers) + " outside [1, " +
                        std::to_string(n) + "]");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  sort_by_axis(order, cloud, axis, true);

  std::vector<std::vector<std::size_t>> layers;
  layers.reserve(num_layers);
  std::size_t pos = 0;
  for (std::size_t size : slice_sizes(n, num_layers)) {
    layers.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(pos),
                        order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return layers;
}

ScanOrder zigzag_plane_scan(const PointCloud& cloud, Plane plane, const ScanParams& params) {
  params.validate();
  const PlaneAxes axes = axes_of(plane);
  const std::size_t num_layers = std::min(layers_for(plane, params.layer_budget), cloud.size());

  std::vector<std::size_t> path;
  path.reserve(cloud.size());
  for (auto& layer : layer_partition(cloud, axes.layer, num_layers)) {
    sort_by_axis(layer, cloud, axes.sort, true);
    const std::size_t segments =
        std::max<std::size_t>(1, std::min(layer.size() / params.segment_size, params.max_segments));
    std::size_t pos = 0;
    const auto sizes = slice_sizes(layer.size(), segments);
    for (std::size_t s = 0; s < segments; ++s) {
      std::span<std::size_t> segment(layer.data() + pos, sizes[s]);
      sort_by_axis(segment, cloud, axes.alternate, s % 2 == 0);
      pos += sizes[s];
    }
    path.insert(path.end(), layer.begin(), layer.end());
  }
  return ScanOrder(std::move(path), tag_of(plane));
}

Plane resolve_plane(const PlaneChoice& choice) {
  if (choice.plane) return *choice.plane;
  Rng rng(choice.seed);
  static constexpr Plane planes[] = {Plane::XY, Plane::XZ, Plane::YZ};
  return planes[rng.below(3)];
}

ScanOrder zigzag_scan_3d(const PointCloud& cloud, const ScanParams& params, PlaneChoice choice) {
  return zigzag_plane_scan(cloud, resolve_plane(choice), params);
}

LocalityMetrics locality_metrics(const PointCloud& cloud, const ScanOrder& order, Exec exec) {
  if (order.size() != cloud.size()) {
    throw ValidationError("scan order covers " + std::to_string(order.size()) +
                          " points, cloud has " + std::to_string(cloud.size()));
  }
  LocalityMetrics m;
  if (cloud.size() < 2) return m;
  std::vector<double> steps(cloud.size() - 1);
  kernels::step_lengths(cloud.points(), order.permutation(), steps, exec);
  for (double s : steps) {
    m.total_path_length += s;
    m.max_step = std::max(m.max_step, s);
  }
  m.mean_step = m.total_path_length / static_cast<double>(steps.size());
  return m;
}

}  // namespace zigscan
