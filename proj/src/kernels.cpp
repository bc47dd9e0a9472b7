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

#include "zigscan/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <omp.h>

namespace zigscan::kernels {

namespace {

struct Best {
  double value = -1.0;
  std::size_t index = 0;
};

// Larger value wins, then the lower index.
bool better(const Best& a, const Best& b) {
  return a.value > b.value || (a.value == b.value && a.index < b.index);
}

std::vector<std::size_t> knn_one(std::span<const Point3> points, std::size_t center, std::size_t k,
                                 std::vector<std::pair<double, std::size_t>>& scratch) {
  scratch.clear();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i == center) continue;
    scratch.emplace_back(squared_distance(points[i], points[center]), i);
  }
  const std::size_t take = k - 1;
  std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(take),
                    scratch.end());
  std::vector<std::size_t> out;
  out.reserve(k);
  out.push_back(center);
  for (std::size_t i = 0; i < take; ++i) out.push_back(scratch[i].second);
  return out;
}

void encode_one(std::span<const Point3> points, const std::vector<std::size_t>& group,
                const EncoderWeights& encoder, std::span<double> scratch, std::span<double> tmp,
                std::span<double> out) {
  const Point3& c = points[group.front()];
  for (std::size_t n = 0; n < group.size(); ++n) {
    const Point3& p = points[group[n]];
    const double rel[3] = {p[0] - c[0], p[1] - c[1], p[2] - c[2]};
    if (n == 0) {
      encoder.apply(rel, scratch, out);
      continue;
    }
    encoder.apply(rel, scratch, tmp);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::max(out[j], tmp[j]);
  }
}

double clamped_dot(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t c = 0; c < dim; ++c) s += a[c] * b[c];
  return std::clamp(s, 0.0, 1.0);
}

std::pair<double, std::size_t> nearest_one(const Point3& p, std::span<const Point3> b) {
  double best = squared_distance(p, b[0]);
  std::size_t arg = 0;
  for (std::size_t j = 1; j < b.size(); ++j) {
    const double d = squared_distance(p, b[j]);
    if (d < best) {
      best = d;
      arg = j;
    }
  }
  return {best, arg};
}

}  // namespace

// ---------------------------------------------------------------------------
// serial reference

namespace serial {

std::size_t fps_update(std::span<const Point3> points, const Point3& ref, std::span<double> min_sq) {
  Best best;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (min_sq[i] < 0.0) continue;
    min_sq[i] = std::min(min_sq[i], squared_distance(points[i], ref));
    const Best cand{min_sq[i], i};
    if (better(cand, best)) best = cand;
  }
  return best.index;
}

std::vector<std::vector<std::size_t>> knn(std::span<const Point3> points,
                                          std::span<const std::size_t> centers, std::size_t k) {
  std::vector<std::vector<std::size_t>> out(centers.size());
  std::vector<std::pair<double, std::size_t>> scratch;
  scratch.reserve(points.size());
  for (std::size_t g = 0; g < centers.size(); ++g) out[g] = knn_one(points, centers[g], k, scratch);
  return out;
}

std::vector<double> encode_max_pool(std::span<const Point3> points,
                                    std::span<const std::vector<std::size_t>> groups,
                                    const EncoderWeights& encoder) {
  const std::size_t dim = encoder.output_dim();
  std::vector<double> out(groups.size() * dim);
  std::vector<double> scratch(2 * encoder.max_width());
  std::vector<double> tmp(dim);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    encode_one(points, groups[g], encoder, scratch, tmp, std::span(out).subspan(g * dim, dim));
  }
  return out;
}

std::vector<double> clamped_gram(std::span<const double> vectors, std::size_t blocks,
                                 std::size_t rows, std::size_t dim) {
  std::vector<double> out(blocks * rows * rows);
  for (std::size_t b = 0; b < blocks; ++b) {
    const double* base = vectors.data() + b * rows * dim;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < rows; ++j) {
        out[(b * rows + i) * rows + j] = clamped_dot(base + i * dim, base + j * dim, dim);
      }
    }
  }
  return out;
}

void nearest_sq_dist(std::span<const Point3> a, std::span<const Point3> b, std::span<double> out,
                     std::span<std::size_t> nearest) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::tie(out[i], nearest[i]) = nearest_one(a[i], b);
  }
}

void step_lengths(std::span<const Point3> points, std::span<const std::size_t> order,
                  std::span<double> out) {
  for (std::size_t t = 0; t + 1 < order.size(); ++t) {
    out[t] = std::sqrt(squared_distance(points[order[t + 1]], points[order[t]]));
  }
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP

namespace omp {

std::size_t fps_update(std::span<const Point3> points, const Point3& ref, std::span<double> min_sq) {
  const auto n = static_cast<std::ptrdiff_t>(points.size());
  std::vector<Best> partial(static_cast<std::size_t>(omp_get_max_threads()));
#pragma omp parallel
  {
    Best local;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t s = 0; s < n; ++s) {
      const auto i = static_cast<std::size_t>(s);
      if (min_sq[i] < 0.0) continue;
      min_sq[i] = std::min(min_sq[i], squared_distance(points[i], ref));
      const Best cand{min_sq[i], i};
      if (better(cand, local)) local = cand;
    }
    partial[static_cast<std::size_t>(omp_get_thread_num())] = local;
  }
  Best best;
  for (const Best& b : partial) {
    if (better(b, best)) best = b;
  }
  return best.index;
}

std::vector<std::vector<std::size_t>> knn(std::span<const Point3> points,
                                          std::span<const std::size_t> centers, std::size_t k) {
  std::vector<std::vector<std::size_t>> out(centers.size());
  const auto g_count = static_cast<std::ptrdiff_t>(centers.size());
#pragma omp parallel
  {
    std::vector<std::pair<double, std::size_t>> scratch;
    scratch.reserve(points.size());
#pragma omp for schedule(static)
    for (std::ptrdiff_t g = 0; g < g_count; ++g) {
      const auto gi = static_cast<std::size_t>(g);
      out[gi] = knn_one(points, centers[gi], k, scratch);
    }
  }
  return out;
}

std::vector<double> encode_max_pool(std::span<const Point3> points,
                                    std::span<const std::vector<std::size_t>> groups,
                                    const EncoderWeights& encoder) {
  const std::size_t dim = encoder.output_dim();
  std::vector<double> out(groups.size() * dim);
  const auto g_count = static_cast<std::ptrdiff_t>(groups.size());
#pragma omp parallel
  {
    std::vector<double> scratch(2 * encoder.max_width());
    std::vector<double> tmp(dim);
#pragma omp for schedule(static)
    for (std::ptrdiff_t g = 0; g < g_count; ++g) {
      const auto gi = static_cast<std::size_t>(g);
      encode_one(points, groups[gi], encoder, scratch, tmp, std::span(out).subspan(gi * dim, dim));
    }
  }
  return out;
}

std::vector<double> clamped_gram(std::span<const double> vectors, std::size_t blocks,
                                 std::size_t rows, std::size_t dim) {
  std::vector<double> out(blocks * rows * rows);
  const auto total = static_cast<std::ptrdiff_t>(blocks * rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < total; ++r) {
    const auto ri = static_cast<std::size_t>(r);
    const std::size_t b = ri / rows;
    const double* base = vectors.data() + b * rows * dim;
    const double* row = vectors.data() + ri * dim;
    for (std::size_t j = 0; j < rows; ++j) out[ri * rows + j] = clamped_dot(row, base + j * dim, dim);
  }
  return out;
}

void nearest_sq_dist(std::span<const Point3> a, std::span<const Point3> b, std::span<double> out,
                     std::span<std::size_t> nearest) {
  const auto n = static_cast<std::ptrdiff_t>(a.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    const auto i = static_cast<std::size_t>(s);
    std::tie(out[i], nearest[i]) = nearest_one(a[i], b);
  }
}

void step_lengths(std::span<const Point3> points, std::span<const std::size_t> order,
                  std::span<double> out) {
  if (order.size() < 2) return;
  const auto steps = static_cast<std::ptrdiff_t>(order.size() - 1);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < steps; ++s) {
    const auto t = static_cast<std::size_t>(s);
    out[t] = std::sqrt(squared_distance(points[order[t + 1]], points[order[t]]));
  }
}

}  // namespace omp

// ---------------------------------------------------------------------------
// dispatch

std::size_t fps_update(std::span<const Point3> points, const Point3& ref, std::span<double> min_sq,
                       Exec exec) {
  return exec == Exec::parallel ? omp::fps_update(points, ref, min_sq)
                                : serial::fps_update(points, ref, min_sq);
}

std::vector<std::vector<std::size_t>> knn(std::span<const Point3> points,
                                          std::span<const std::size_t> centers, std::size_t k,
                                          Exec exec) {
  return exec == Exec::parallel ? omp::knn(points, centers, k) : serial::knn(points, centers, k);
}

std::vector<double> encode_max_pool(std::span<const Point3> points,
                                    std::span<const std::vector<std::size_t>> groups,
                                    const EncoderWeights& encoder, Exec exec) {
  return exec == Exec::parallel ? omp::encode_max_pool(points, groups, encoder)
                                : serial::encode_max_pool(points, groups, encoder);
}

std::vector<double> clamped_gram(std::span<const double> vectors, std::size_t blocks,
                                 std::size_t rows, std::size_t dim, Exec exec) {
  return exec == Exec::parallel ? omp::clamped_gram(vectors, blocks, rows, dim)
                                : serial::clamped_gram(vectors, blocks, rows, dim);
}

void nearest_sq_dist(std::span<const Point3> a, std::span<const Point3> b, std::span<double> out,
                     std::span<std::size_t> nearest, Exec exec) {
  if (exec == Exec::parallel) {
    omp::nearest_sq_dist(a, b, out, nearest);
  } else {
    serial::nearest_sq_dist(a, b, out, nearest);
  }
}

void step_lengths(std::span<const Point3> points, std::span<const std::size_t> order,
                  std::span<double> out, Exec exec) {
  if (exec == Exec::parallel) {
    omp::step_lengths(points, order, out);
  } else {
    serial::step_lengths(points, order, out);
  }
}

}  // namespace zigscan::kernels
