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

// Data-parallel inner loops. Each kernel has a serial reference and an
// OpenMP version with identical signatures; the dispatchers pick by Exec.
// Parallel loops only write disjoint slots, and any reduction over those
// slots runs serially afterwards, so both paths agree bit for bit.

#include <cstddef>
#include <span>
#include <vector>

#include "zigscan/encoder.hpp"
#include "zigscan/geometry.hpp"

namespace zigscan::kernels {

// Lowers min_sq[i] to |p_i - ref|^2 for every i with min_sq[i] >= 0 and
// returns the index of the largest remaining min_sq (lowest index on ties).
// Slots holding a negative value are treated as already selected.
std::size_t fps_update(std::span<const Point3> points, const Point3& ref, std::span<double> min_sq,
                       Exec exec);

// k nearest neighbours of each center; see knn_group for ordering.
std::vector<std::vector<std::size_t>> knn(std::span<const Point3> points,
                                          std::span<const std::size_t> centers, std::size_t k,
                                          Exec exec);

// Max-pooled MLP features, one row of encoder.output_dim() per group.
// groups[g] lists point indices whose first entry is the center.
std::vector<double> encode_max_pool(std::span<const Point3> points,
                                    std::span<const std::vector<std::size_t>> groups,
                                    const EncoderWeights& encoder, Exec exec);

// rows x dim matrix of unit (or zero) vectors -> rows x rows Gram matrix
// clamped to [0, 1]. `blocks` independent blocks of `rows` vectors each.
std::vector<double> clamped_gram(std::span<const double> vectors, std::size_t blocks,
                                 std::size_t rows, std::size_t dim, Exec exec);

// out[i] = min_j |a_i - b_j|^2, and nearest[i] = argmin (lowest index).
void nearest_sq_dist(std::span<const Point3> a, std::span<const Point3> b, std::span<double> out,
                     std::span<std::size_t> nearest, Exec exec);

// out[t] = |p[order[t+1]] - p[order[t]]| for t < n - 1.
void step_lengths(std::span<const Point3> points, std::span<const std::size_t> order,
                  std::span<double> out, Exec exec);

namespace serial {
std::size_t fps_update(std::span<const Point3> points, const Point3& ref, std::span<double> min_sq);
std::vector<std::vector<std::size_t>> knn(std::span<const Point3> points,
                                          std::span<const std::size_t> centers, std::size_t k);
std::vector<double> encode_max_pool(std::span<const Point3> points,
                                    std::span<const std::vector<std::size_t>> groups,
                                    const EncoderWeights& encoder);
std::vector<double> clamped_gram(std::span<const double> vectors, std::size_t blocks,
                                 std::size_t rows, std::size_t dim);
void nearest_sq_dist(std::span<const Point3> a, std::span<const Point3> b, std::span<double> out,
                     std::span<std::size_t> nearest);
void step_lengths(std::span<const Point3> points, std::span<const std::size_t> order,
                  std::span<double> out);
}  // namespace serial

namespace omp {
std::size_t fps_update(std::span<const Point3> points, const Point3& ref, std::span<double> min_sq);
std::vector<std::vector<std::size_t>> knn(std::span<const Point3> points,
                                          std::span<const std::size_t> centers, std::size_t k);
std::vector<double> encode_max_pool(std::span<const Point3> points,
                                    std::span<const std::vector<std::size_t>> groups,
                                    const EncoderWeights& encoder);
std::vector<double> clamped_gram(std::span<const double> vectors, std::size_t blocks,
                                 std::size_t rows, std::size_t dim);
void nearest_sq_dist(std::span<const Point3> a, std::span<const Point3> b, std::span<double> out,
                     std::span<std::size_t> nearest);
void step_lengths(std::span<const Point3> points, std::span<const std::size_t> order,
                  std::span<double> out);
}  // namespace omp

}  // namespace zigscan::kernels
