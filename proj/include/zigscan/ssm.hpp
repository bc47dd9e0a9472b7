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
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "zigscan/geometry.hpp"

namespace zigscan {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class SsmMode { static_params, dynamic };

// Input-conditioned parameters:
//   A_t = diag(sigmoid(w_a x_t + b_a))        (d x d, entries in (0, 1))
//   B_t = reshape(w_b x_t + b_b)              (d x m, row-major)
struct DynamicGenerator {
  Mat w_a;  // d x m
  Vec b_a;  // d
  Mat w_b;  // (d*m) x m
  Vec b_b;  // d*m
};

struct SsmParams {
  std::size_t state_dim = 0;
  std::size_t input_dim = 0;
  Mat a;  // d x d
  Mat b;  // d x m
  DynamicGenerator generator;

  // Throws ArgumentError on inconsistent shapes or non-finite entries.
  void validate() const;

  // Small seeded initialization: A near 0.5 I, generator biased so that
  // A_t starts near 0.5 I as well.
  static SsmParams random(std::size_t state_dim, std::size_t input_dim, std::uint64_t seed);
};

// h = A h_prev + B x.
Vec ssm_step(const Vec& h_prev, const Vec& x, const Mat& a, const Mat& b);

// (A_t, B_t) for one input.
std::pair<Mat, Mat> dynamic_parameters(const DynamicGenerator& gen, const Vec& x,
                                       std::size_t state_dim, std::size_t input_dim);

// States h_1..h_T from h_0 = 0.
std::vector<Vec> ssm_forward(std::span<const Vec> sequence, const SsmParams& params, SsmMode mode);

// Mean nearest squared distance from a to b plus the same from b to a.
double chamfer_l2(std::span<const Point3> a, std::span<const Point3> b, Exec exec = Exec::parallel);

// Gradient of chamfer_l2(a, b) with respect to the points of a. Nearest
// neighbours are resolved with ties to the lower index.
std::vector<Point3> chamfer_l2_grad(std::span<const Point3> a, std::span<const Point3> b,
                                    Exec exec = Exec::parallel);

}  // namespace zigscan
