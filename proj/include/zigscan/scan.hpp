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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "zigscan/geometry.hpp"

namespace zigscan {

// Zigzag serialization parameters. layer_budget is split across the three
// planes (see layers_for); segment_size is the target number of points per
// segment and max_segments caps the segment count per layer.
struct ScanParams {
  std::size_t layer_budget = 12;
  std::size_t segment_size = 4;
  std::size_t max_segments = 8;

  // Throws ArgumentError on layer_budget < 3 or zero sizes.
  void validate() const;
};

enum class Plane { XY, XZ, YZ };

enum class CurveTag {
  zigzag_xy,
  zigzag_xz,
  zigzag_yz,
  hilbert,
  trans_hilbert,
  z_order,
  trans_z_order,
  random,
};

inline constexpr std::array<CurveTag, 8> kAllCurveTags = {
    CurveTag::hilbert, CurveTag::random,        CurveTag::trans_hilbert, CurveTag::trans_z_order,
    CurveTag::z_order, CurveTag::zigzag_xy,     CurveTag::zigzag_xz,     CurveTag::zigzag_yz,
};

std::string_view to_string(CurveTag tag);
CurveTag parse_curve_tag(std::string_view name);
std::string_view to_string(Plane plane);
Plane parse_plane(std::string_view name);

// A permutation of point indices tagged with the curve that produced it.
// Construction throws ValidationError unless the permutation is a bijection
// on {0, ..., n-1}.
class ScanOrder {
 public:
  ScanOrder(std::vector<std::size_t> permutation, CurveTag tag);

  std::size_t size() const { return permutation_.size(); }
  std::span<const std::size_t> permutation() const { return permutation_; }
  CurveTag curve_tag() const { return tag_; }

  friend bool operator==(const ScanOrder&, const ScanOrder&) = default;

 private:
  std::vector<std::size_t> permutation_;
  CurveTag tag_;
};

bool is_bijection(std::span<const std::size_t> permutation, std::size_t n);

// Layer counts: XY ceil(M/3), XZ floor(M/3) + [M mod 3 >= 1], YZ floor(M/3).
std::size_t layers_for(Plane plane, std::size_t layer_budget);

// Rank slices of the cloud sorted ascending along `axis` (ties to the lower
// index). The first N mod num_layers layers hold one extra point.
std::vector<std::vector<std::size_t>> layer_partition(const PointCloud& cloud, Axis axis,
                                                      std::size_t num_layers);

// Layer, sort in-layer, cut into segments and alternate the sort direction
// per segment (segment 0 ascending). When the plane's layer count exceeds N
// it is clamped to N.
ScanOrder zigzag_plane_scan(const PointCloud& cloud, Plane plane, const ScanParams& params);

struct PlaneChoice {
  std::optional<Plane> plane;  // empty -> draw from seed
  std::uint64_t seed = 0;

  static PlaneChoice fixed(Plane p) { return {p, 0}; }
  static PlaneChoice seeded_random(std::uint64_t seed) { return {std::nullopt, seed}; }
};

// The plane a choice resolves to; seeded choices draw uniformly over the three.
Plane resolve_plane(const PlaneChoice& choice);

ScanOrder zigzag_scan_3d(const PointCloud& cloud, const ScanParams& params, PlaneChoice choice);

enum class BaselineCurve { hilbert, trans_hilbert, z_order, trans_z_order, random };

BaselineCurve baseline_for(CurveTag tag);

inline constexpr int kDefaultQuantizationBits = 10;

// Quantizes each axis over the cloud's bounding box to a 2^bits grid and
// sorts by curve index (ties to the lower index). trans_ variants feed the
// encoder (y, z, x) instead of (x, y, z). random is a seeded shuffle.
ScanOrder baseline_scan(const PointCloud& cloud, BaselineCurve curve,
                        int quantization_bits = kDefaultQuantizationBits, std::uint64_t seed = 0);

// Morton code with x in the most significant position of each bit triple.
std::uint64_t morton_encode(std::uint32_t x, std::uint32_t y, std::uint32_t z, int bits);

// 3D Hilbert index on a 2^bits grid (Skilling's transpose construction).
std::uint64_t hilbert_encode(std::uint32_t x, std::uint32_t y, std::uint32_t z, int bits);

// Grid cell of each point for the given bit depth.
std::vector<std::array<std::uint32_t, 3>> quantize(const PointCloud& cloud, int bits);

struct LocalityMetrics {
  double mean_step = 0.0;
  double max_step = 0.0;
  double total_path_length = 0.0;
};

// Euclidean distances between consecutive points along the order. Throws
// ValidationError if the order does not cover the cloud.
LocalityMetrics locality_metrics(const PointCloud& cloud, const ScanOrder& order,
                                 Exec exec = Exec::parallel);

}  // namespace zigscan
