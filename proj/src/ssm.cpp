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

#include "zigscan/ssm.hpp"

#include <cmath>
#include <string>

#include "zigscan/error.hpp"
#include "zigscan/kernels.hpp"
#include "zigscan/rng.hpp"

namespace zigscan {

namespace {

void require_shape(const Mat& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ArgumentError(std::string(name) + " is " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                        std::to_string(cols));
  }
  if (!m.allFinite()) throw ArgumentError(std::string(name) + " has non-finite entries");
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

void SsmParams::validate() const {
  if (state_dim == 0 || input_dim == 0) throw ArgumentError("SSM dimensions must be positive");
  const auto d = static_cast<Eigen::Index>(state_dim);
  const auto m = static_cast<Eigen::Index>(input_dim);
  require_shape(a, d, d, "A");
  require_shape(b, d, m, "B");
  require_shape(generator.w_a, d, m, "W_a");
  require_shape(generator.b_a, d, 1, "b_a");
  require_shape(generator.w_b, d * m, m, "W_b");
  require_shape(generator.b_b, d * m, 1, "b_b");
}

SsmParams SsmParams::random(std::size_t state_dim, std::size_t input_dim, std::uint64_t seed) {
  Rng rng(seed);
  const auto d = static_cast<Eigen::Index>(state_dim);
  const auto m = static_cast<Eigen::Index>(input_dim);
  const double in_scale = 1.0 / std::sqrt(static_cast<double>(input_dim));
  auto normal = [&](Eigen::Index rows, Eigen::Index cols, double scale) {
    Mat out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = scale * rng.normal();
    }
    return out;
  };
  SsmParams p;
  p.state_dim = state_dim;
  p.input_dim = input_dim;
  p.a = 0.5 * Mat::Identity(d, d) + normal(d, d, 0.02);
  p.b = normal(d, m, 0.5 * in_scale);
  p.generator.w_a = normal(d, m, 0.1 * in_scale);
  p.generator.b_a = Vec::Zero(d);
  p.generator.w_b = normal(d * m, m, 0.05 * in_scale);
  p.generator.b_b = normal(d * m, 1, 0.5 * in_scale);
  return p;
}

Vec ssm_step(const Vec& h_prev, const Vec& x, const Mat& a, const Mat& b) {
  if (a.rows() != a.cols() || a.cols() != h_prev.size() || b.rows() != a.rows() ||
      b.cols() != x.size()) {
    throw ArgumentError("ssm_step shape mismatch");
  }
  return a * h_prev + b * x;
}

std::pair<Mat, Mat> dynamic_parameters(const DynamicGenerator& gen, const Vec& x,
                                       std::size_t state_dim, std::size_t input_dim) {
  const auto d = static_cast<Eigen::Index>(state_dim);
  const auto m = static_cast<Eigen::Index>(input_dim);
  if (x.size() != m) throw ArgumentError("dynamic generator input size mismatch");
  const Vec za = gen.w_a * x + gen.b_a;
  Mat a = Mat::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) a(i, i) = sigmoid(za(i));
  const Vec zb = gen.w_b * x + gen.b_b;
  Mat b(d, m);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) b(i, j) = zb(i * m + j);
  }
  return {std::move(a), std::move(b)};
}

std::vector<Vec> ssm_forward(std::span<const Vec> sequence, const SsmParams& params, SsmMode mode) {
  if (sequence.empty()) throw ArgumentError("ssm_forward needs a non-empty sequence");
  params.validate();
  std::vector<Vec> states;
  states.reserve(sequence.size());
  Vec h = Vec::Zero(static_cast<Eigen::Index>(params.state_dim));
  for (const Vec& x : sequence) {
    if (x.size() != static_cast<Eigen::Index>(params.input_dim)) {
      throw ArgumentError("ssm_forward input size mismatch");
    }
    if (mode == SsmMode::static_params) {
      h = params.a * h + params.b * x;
    } else {
      // A_t is diagonal, so apply it as a coefficient-wise product.
      const auto [a_t, b_t] = dynamic_parameters(params.generator, x, params.state_dim, params.input_dim);
      h = a_t.diagonal().cwiseProduct(h) + b_t * x;
    }
    states.push_back(h);
  }
  return states;
}

double chamfer_l2(std::span<const Point3> a, std::span<const Point3> b, Exec exec) {
  if (a.empty() || b.empty()) throw ArgumentError("chamfer_l2 needs non-empty point sets");
  std::vector<double> da(a.size()), db(b.size());
  std::vector<std::size_t> na(a.size()), nb(b.size());
  kernels::nearest_sq_dist(a, b, da, na, exec);
  kernels::nearest_sq_dist(b, a, db, nb, exec);
  double sa = 0.0, sb = 0.0;
  for (double v : da) sa += v;
  for (double v : db) sb += v;
  return sa / static_cast<double>(a.size()) + sb / static_cast<double>(b.size());
}

std::vector<Point3> chamfer_l2_grad(std::span<const Point3> a, std::span<const Point3> b, Exec exec) {
  if (a.empty() || b.empty()) throw ArgumentError("chamfer_l2 needs non-empty point sets");
  std::vector<double> da(a.size()), db(b.size());
  std::vector<std::size_t> na(a.size()), nb(b.size());
  kernels::nearest_sq_dist(a, b, da, na, exec);
  kernels::nearest_sq_dist(b, a, db, nb, exec);
  const double wa = 2.0 / static_cast<double>(a.size());
  const double wb = 2.0 / static_cast<double>(b.size());
  std::vector<Point3> grad(a.size(), Point3{0.0, 0.0, 0.0});
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Point3& q = b[na[i]];
    for (int c = 0; c < 3; ++c) grad[i][c] += wa * (a[i][c] - q[c]);
  }
  for (std::size_t j = 0; j < b.size(); ++j) {
    const std::size_t i = nb[j];
    for (int c = 0; c < 3; ++c) grad[i][c] += wb * (a[i][c] - b[j][c]);
  }
  return grad;
}

}  // namespace zigscan
