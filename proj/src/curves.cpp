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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "zigscan/error.hpp"
#include "zigscan/rng.hpp"
#include "zigscan/scan.hpp"

namespace zigscan {

namespace {

void check_bits(int bits) {
  if (bits < 1 || bits > 21) {
    throw ArgumentError("quantization bits " + std::to_string(bits) + " outside [1, 21]");
  }
}

// Interleaves three bits-wide words, the first word taking the most
// significant slot of every triple.
std::uint64_t interleave(std::uint32_t a, std::uint32_t b, std::uint32_t c, int bits) {
  std::uint64_t code = 0;
  for (int level = bits - 1; level >= 0; --level) {
    code = (code << 3) | (static_cast<std::uint64_t>((a >> level) & 1u) << 2) |
           (static_cast<std::uint64_t>((b >> level) & 1u) << 1) |
           static_cast<std::uint64_t>((c >> level) & 1u);
  }
  return code;
}

}  // namespace

std::uint64_t morton_encode(std::uint32_t x, std::uint32_t y, std::uint32_t z, int bits) {
  check_bits(bits);
  return interleave(x, y, z, bits);
}

std::uint64_t hilbert_encode(std::uint32_t x, std::uint32_t y, std::uint32_t z, int bits) {
  check_bits(bits);
  std::uint32_t v[3] = {x, y, z};
  const std::uint32_t top = 1u << (bits - 1);

  // Inverse undo
  for (std::uint32_t q = top; q > 1; q >>= 1) {
    const std::uint32_t p = q - 1;
    for (auto& vi : v) {
      if (vi & q) {
        v[0] ^= p;
      } else {
        const std::uint32_t t = (v[0] ^ vi) & p;
        v[0] ^= t;
        vi ^= t;
      }
    }
  }
  // Gray encode
  v[1] ^= v[0];
  v[2] ^= v[1];
  std::uint32_t t = 0;
  for (std::uint32_t q = top; q > 1; q >>= 1) {
    if (v[2] & q) t ^= q - 1;
  }
  for (auto& vi : v) vi ^= t;

  return interleave(v[0], v[1], v[2], bits);
}

std::vector<std::array<std::uint32_t, 3>> quantize(const PointCloud& cloud, int bits) {
  check_bits(bits);
  Point3 lo = cloud[0];
  Point3 hi = cloud[0];
  for (const Point3& p : cloud) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  const double cells = std::ldexp(1.0, bits);
  const auto max_cell = static_cast<std::uint32_t>(cells) - 1;
  std::vector<std::array<std::uint32_t, 3>> out(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      const double extent = hi[a] - lo[a];
      if (extent <= 0.0) {
        out[i][a] = 0;
        continue;
      }
      const double cell = std::floor((cloud[i][a] - lo[a]) / extent * cells);
      out[i][a] = std::min(static_cast<std::uint32_t>(std::max(cell, 0.0)), max_cell);
    }
  }
  return out;
}

BaselineCurve baseline_for(CurveTag tag) {
  switch (tag) {
    case CurveTag::hilbert: return BaselineCurve::hilbert;
    case CurveTag::trans_hilbert: return BaselineCurve::trans_hilbert;
    case CurveTag::z_order: return BaselineCurve::z_order;
    case CurveTag::trans_z_order: return BaselineCurve::trans_z_order;
    case CurveTag::random: return BaselineCurve::random;
    default: break;
  }
  throw ArgumentError("'" + std::string(to_string(tag)) + "' is not a baseline curve");
}

ScanOrder baseline_scan(const PointCloud& cloud, BaselineCurve curve, int quantization_bits,
                        std::uint64_t seed) {
  check_bits(quantization_bits);
  const std::size_t n = cloud.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  if (curve == BaselineCurve::random) {
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
    }
    return ScanOrder(std::move(order), CurveTag::random);
  }

  const auto cells = quantize(cloud, quantization_bits);
  std::vector<std::uint64_t> codes(n);
  CurveTag tag = CurveTag::z_order;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [x, y, z] = cells[i];
    switch (curve) {
      case BaselineCurve::z_order:
        codes[i] = morton_encode(x, y, z, quantization_bits);
        tag = CurveTag::z_order;
        break;
      case BaselineCurve::trans_z_order:
        codes[i] = morton_encode(y, z, x, quantization_bits);
        tag = CurveTag::trans_z_order;
        break;
      case BaselineCurve::hilbert:
        codes[i] = hilbert_encode(x, y, z, quantization_bits);
        tag = CurveTag::hilbert;
        break;
      case BaselineCurve::trans_hilbert:
        codes[i] = hilbert_encode(y, z, x, quantization_bits);
        tag = CurveTag::trans_hilbert;
        break;
      case BaselineCurve::random: break;
    }
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return codes[a] != codes[b] ? codes[a] < codes[b] : a < b;
  });
  return ScanOrder(std::move(order), tag);
}

}  // namespace zigscan
