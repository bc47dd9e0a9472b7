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

#include <doctest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "test_util.hpp"
#include "zigscan/error.hpp"
#include "zigscan/ssm.hpp"

using namespace zigscan;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Mat random_mat(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

SsmParams scalar_params(double a, double b) {
  SsmParams p = SsmParams::random(1, 1, 0);
  p.a(0, 0) = a;
  p.b(0, 0) = b;
  return p;
}

}  // namespace

TEST_CASE("ssm_step examples") {
  const Vec x = vec({0.5, -2, 3});
  CHECK(ssm_step(Vec::Zero(3), x, Mat::Identity(3, 3), Mat::Identity(3, 3)) == x);
  Rng rng(1);
  const Mat b = random_mat(3, 3, rng);
  CHECK(ssm_step(vec({9, 9, 9}), x, Mat::Zero(3, 3), b) == b * x);

  const Vec h1 = ssm_step(vec({0}), vec({1}), Mat::Constant(1, 1, 0.5), Mat::Constant(1, 1, 1));
  const Vec h2 = ssm_step(h1, vec({1}), Mat::Constant(1, 1, 0.5), Mat::Constant(1, 1, 1));
  CHECK(h1(0) == 1.0);
  CHECK(h2(0) == 1.5);

  CHECK_THROWS_AS(ssm_step(Vec::Zero(2), x, Mat::Identity(3, 3), Mat::Identity(3, 3)), ArgumentError);
}

TEST_CASE("ssm_step is linear in (h, x)") {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const Mat a = random_mat(4, 4, rng), b = random_mat(4, 3, rng);
    const Vec h1 = random_mat(4, 1, rng), h2 = random_mat(4, 1, rng);
    const Vec x1 = random_mat(3, 1, rng), x2 = random_mat(3, 1, rng);
    const Vec lhs = ssm_step(h1 + h2, x1 + x2, a, b);
    const Vec rhs = ssm_step(h1, x1, a, b) + ssm_step(h2, x2, a, b);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("ssm_forward examples") {
  const std::vector<Vec> one{vec({2.0})};
  const auto s1 = ssm_forward(one, scalar_params(0.7, 3.0), SsmMode::static_params);
  REQUIRE(s1.size() == 1);
  CHECK(s1[0](0) == 6.0);

  SsmParams id = SsmParams::random(3, 3, 4);
  id.a = Mat::Identity(3, 3);
  id.b = Mat::Identity(3, 3);
  Rng rng(3);
  std::vector<Vec> seq;
  for (int t = 0; t < 20; ++t) seq.push_back(random_mat(3, 1, rng));
  const auto states = ssm_forward(seq, id, SsmMode::static_params);
  Vec prefix = Vec::Zero(3);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    prefix += seq[t];
    CHECK((states[t] - prefix).cwiseAbs().maxCoeff() <= 1e-12);
  }

  CHECK_THROWS_AS(ssm_forward(std::vector<Vec>{}, id, SsmMode::static_params), ArgumentError);
  CHECK_THROWS_AS(ssm_forward(std::vector<Vec>{vec({1, 2})}, id, SsmMode::static_params), ArgumentError);
}

TEST_CASE("dynamic generator with A_t = 0 makes states memoryless") {
  SsmParams p = SsmParams::random(1, 1, 0);
  p.generator.w_a = Mat::Zero(1, 1);
  p.generator.b_a = Vec::Constant(1, -1e4);  // sigmoid underflows to exactly 0
  p.generator.w_b = Mat::Constant(1, 1, 2.0);
  p.generator.b_b = Vec::Constant(1, 0.5);
  const std::vector<Vec> seq{vec({1}), vec({-1}), vec({3})};
  const auto s = ssm_forward(seq, p, SsmMode::dynamic);
  // B_t = 2 x + 0.5, h_t = B_t x
  CHECK(s[0](0) == 2.5);
  CHECK(s[1](0) == 1.5);
  CHECK(s[2](0) == 19.5);
}

TEST_CASE("dynamic gates stay inside (0, 1)") {
  const SsmParams p = SsmParams::random(4, 3, 8);
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto [a, b] = dynamic_parameters(p.generator, random_mat(3, 1, rng), 4, 3);
    CHECK(a.diagonal().maxCoeff() < 1.0);
    CHECK(a.diagonal().minCoeff() > 0.0);
    CHECK(b.rows() == 4);
    CHECK(b.cols() == 3);
  }
}

TEST_CASE("chamfer_l2 examples") {
  const std::vector<Point3> a{{0, 0, 0}, {1, 2, 3}};
  CHECK(chamfer_l2(a, a) == 0.0);
  CHECK(chamfer_l2(std::vector<Point3>{{0, 0, 0}}, std::vector<Point3>{{1, 0, 0}}) == 2.0);
  CHECK(chamfer_l2(std::vector<Point3>{{0, 0, 0}, {2, 0, 0}}, std::vector<Point3>{{1, 0, 0}}) == 2.0);
  CHECK_THROWS_AS(chamfer_l2(std::vector<Point3>{}, a), ArgumentError);
}

TEST_CASE("chamfer_l2 symmetry, translation invariance, oracle agreement") {
  Rng rng(5);
  for (int t = 0; t < 30; ++t) {
    std::vector<Point3> a(1 + rng.below(40)), b(1 + rng.below(40));
    for (auto& p : a) p = {rng.normal(), rng.normal(), rng.normal()};
    for (auto& p : b) p = {rng.normal(), rng.normal(), rng.normal()};
    const double ab = chamfer_l2(a, b);
    CHECK(std::abs(ab - chamfer_l2(b, a)) <= 1e-12);
    CHECK(std::abs(ab - oracle::chamfer(a, b)) <= 1e-12);
    CHECK(chamfer_l2(a, b, Exec::serial) == chamfer_l2(a, b, Exec::parallel));
    auto sa = a, sb = b;
    for (auto& p : sa) p = {p[0] + 0.25, p[1] - 1.5, p[2] + 3};
    for (auto& p : sb) p = {p[0] + 0.25, p[1] - 1.5, p[2] + 3};
    CHECK(std::abs(chamfer_l2(sa, sb) - ab) <= 1e-9);
  }
}

TEST_CASE("chamfer gradient matches finite differences") {
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    std::vector<Point3> a(2 + rng.below(6)), b(2 + rng.below(6));
    for (auto& p : a) p = {rng.normal(), rng.normal(), rng.normal()};
    for (auto& p : b) p = {rng.normal(), rng.normal(), rng.normal()};
    const auto g = chamfer_l2_grad(a, b);
    std::vector<double> analytic, numeric;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (int c = 0; c < 3; ++c) {
        auto up = a, down = a;
        up[i][c] += 1e-6;
        down[i][c] -= 1e-6;
        numeric.push_back((chamfer_l2(up, b) - chamfer_l2(down, b)) / 2e-6);
        analytic.push_back(g[i][c]);
      }
    }
    CHECK(gradcheck::relative_error(analytic, numeric) <= 1e-6);
  }
}
