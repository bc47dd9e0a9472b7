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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "test_util.hpp"
#include "zigscan/error.hpp"
#include "zigscan/pointcloud.hpp"

using namespace zigscan;
using testutil::TempDir;

TEST_CASE("load xyz text") {
  TempDir dir;
  testutil::write_file(dir / "a.xyz", "# header comment\n0 0 0\n\n1 0 0\n");
  const PointCloud c = load_pointcloud(dir / "a.xyz", CloudFormat::xyz_text);
  REQUIRE(c.size() == 2);
  CHECK(c[0] == Point3{0, 0, 0});
  CHECK(c[1] == Point3{1, 0, 0});
}

TEST_CASE("load xyz reports the malformed line") {
  TempDir dir;
  testutil::write_file(dir / "bad.xyz", "0 0 0\n1 2\n");
  try {
    load_pointcloud(dir / "bad.xyz", CloudFormat::xyz_text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  testutil::write_file(dir / "nan.xyz", "0 0 0\n1 nan 2\n");
  CHECK_THROWS_AS(load_pointcloud(dir / "nan.xyz", CloudFormat::xyz_text), ParseError);
  testutil::write_file(dir / "word.xyz", "0 0 zero\n");
  CHECK_THROWS_AS(load_pointcloud(dir / "word.xyz", CloudFormat::xyz_text), ParseError);
}

TEST_CASE("empty inputs") {
  TempDir dir;
  testutil::write_file(dir / "e.xyz", "# only a comment\n");
  testutil::write_file(dir / "e.bin", "");
  CHECK_THROWS_AS(load_pointcloud(dir / "e.xyz", CloudFormat::xyz_text), EmptyInputError);
  CHECK_THROWS_AS(load_pointcloud(dir / "e.bin", CloudFormat::f32le_bin), EmptyInputError);
  CHECK_THROWS_AS(load_pointcloud(dir / "missing.xyz", CloudFormat::xyz_text), IoError);
}

TEST_CASE("load ply ascii keeps header order and ignores other properties") {
  TempDir dir;
  testutil::write_file(dir / "a.ply",
                       "ply\nformat ascii 1.0\ncomment test\nelement vertex 3\n"
                       "property float x\nproperty float y\nproperty float z\n"
                       "property uchar red\nelement face 1\nproperty list uchar int vertex_indices\n"
                       "end_header\n1 2 3 255\n4 5 6 0\n7 8 9 10\n3 0 1 2\n");
  const PointCloud c = load_pointcloud(dir / "a.ply", CloudFormat::ply_ascii);
  REQUIRE(c.size() == 3);
  CHECK(c[0] == Point3{1, 2, 3});
  CHECK(c[2] == Point3{7, 8, 9});

  testutil::write_file(dir / "short.ply",
                       "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\n"
                       "property float y\nproperty float z\nend_header\n1 2 3\n");
  CHECK_THROWS_AS(load_pointcloud(dir / "short.ply", CloudFormat::ply_ascii), ParseError);
  testutil::write_file(dir / "bin.ply", "ply\nformat binary_little_endian 1.0\nend_header\n");
  CHECK_THROWS_AS(load_pointcloud(dir / "bin.ply", CloudFormat::ply_ascii), ParseError);
}

TEST_CASE("load f32le binary") {
  TempDir dir;
  const float vals[6] = {1.f, 2.f, 3.f, -4.f, 0.5f, 6.f};
  std::string bytes(sizeof(vals), '\0');
  std::memcpy(bytes.data(), vals, sizeof(vals));
  testutil::write_file(dir / "a.bin", bytes);
  const PointCloud c = load_pointcloud(dir / "a.bin", CloudFormat::f32le_bin);
  REQUIRE(c.size() == 2);
  CHECK(c[1] == Point3{-4.0, 0.5, 6.0});

  // 20 bytes is not a whole number of records
  testutil::write_file(dir / "odd.bin", bytes.substr(0, 20));
  CHECK_THROWS_AS(load_pointcloud(dir / "odd.bin", CloudFormat::f32le_bin), ParseError);
}

TEST_CASE("format names") {
  CHECK(parse_cloud_format("xyz") == CloudFormat::xyz_text);
  CHECK(parse_cloud_format("ply") == CloudFormat::ply_ascii);
  CHECK(parse_cloud_format("bin") == CloudFormat::f32le_bin);
  CHECK_THROWS_AS(parse_cloud_format("pcd"), ArgumentError);
}

TEST_CASE("point cloud validation") {
  CHECK_THROWS_AS(PointCloud({}), ValidationError);
  CHECK_THROWS_AS(PointCloud({{0, 0, NAN}}), ValidationError);
  CHECK_THROWS_AS(PointCloud({{INFINITY, 0, 0}}), ValidationError);
}

TEST_CASE("normalize_unit_sphere examples") {
  const PointCloud a = normalize_unit_sphere(PointCloud({{1, 0, 0}, {-1, 0, 0}}));
  CHECK(a[0] == Point3{1, 0, 0});
  CHECK(a[1] == Point3{-1, 0, 0});

  const PointCloud single = normalize_unit_sphere(PointCloud({{2, 2, 2}}));
  CHECK(single[0] == Point3{0, 0, 0});

  const PointCloud b = normalize_unit_sphere(PointCloud({{0, 0, 0}, {0, 0, 4}}));
  CHECK(b[0] == Point3{0, 0, -1});
  CHECK(b[1] == Point3{0, 0, 1});

  const PointCloud repeated = normalize_unit_sphere(PointCloud({{0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}}));
  CHECK(repeated[1] == Point3{0, 0, 0});
}

TEST_CASE("normalize_unit_sphere centers, scales and is idempotent") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PointCloud raw = testutil::random_cloud(1 + seed * 7, seed, -5.0, 3.0);
    const PointCloud once = normalize_unit_sphere(raw);
    Point3 mean{0, 0, 0};
    double max_norm = 0.0;
    for (const Point3& p : once) {
      for (int c = 0; c < 3; ++c) mean[c] += p[c] / static_cast<double>(once.size());
      max_norm = std::max(max_norm, std::sqrt(oracle::dist2(p, {0, 0, 0})));
    }
    for (double m : mean) CHECK(std::abs(m) < 1e-6);
    if (raw.size() > 1) CHECK(std::abs(max_norm - 1.0) < 1e-6);

    const PointCloud twice = normalize_unit_sphere(once);
    for (std::size_t i = 0; i < once.size(); ++i) {
      for (int c = 0; c < 3; ++c) CHECK(std::abs(twice[i][c] - once[i][c]) < 1e-9);
    }
  }
}

TEST_CASE("farthest point sampling examples") {
  const PointCloud line({{0, 0, 0}, {1, 0, 0}, {0.1, 0, 0}});
  CHECK(farthest_point_sampling_from(line, 2, 0) == std::vector<std::size_t>{0, 1});
  CHECK(oracle::fps(line, 2, 0) == std::vector<std::size_t>{0, 1});

  // A seed whose first pick is index 0 reproduces the same result.
  std::uint64_t seed = 0;
  while (fps_first_index(3, seed) != 0) ++seed;
  CHECK(farthest_point_sampling(line, 2, seed) == std::vector<std::size_t>{0, 1});

  const PointCloud cloud = testutil::random_cloud(50, 7);
  const auto all = farthest_point_sampling(cloud, 50, 3);
  std::vector<std::size_t> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> expect(50);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(sorted == expect);

  const auto one = farthest_point_sampling(cloud, 1, 11);
  CHECK(one == std::vector<std::size_t>{fps_first_index(50, 11)});

  CHECK_THROWS_AS(farthest_point_sampling(cloud, 51, 0), ArgumentError);
  CHECK_THROWS_AS(farthest_point_sampling(cloud, 0, 0), ArgumentError);
}

TEST_CASE("FPS matches the brute-force oracle, including ties and duplicates") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const PointCloud cloud = seed % 2 ? testutil::random_cloud(30, seed) : testutil::grid_cloud(30, seed, 3);
    const std::size_t first = fps_first_index(cloud.size(), seed);
    for (std::size_t count : {1u, 5u, 17u, 30u}) {
      const auto expect = oracle::fps(cloud, count, first);
      CHECK(farthest_point_sampling(cloud, count, seed, Exec::serial) == expect);
      CHECK(farthest_point_sampling(cloud, count, seed, Exec::parallel) == expect);
    }
  }
}

TEST_CASE("FPS minimum pairwise distance is non-increasing in count") {
  const PointCloud cloud = testutil::random_cloud(200, 99);
  const auto order = farthest_point_sampling(cloud, 200, 5);
  double prev = INFINITY;
  for (std::size_t count = 2; count <= 40; ++count) {
    double min_pair = INFINITY;
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = i + 1; j < count; ++j) {
        min_pair = std::min(min_pair, oracle::dist2(cloud[order[i]], cloud[order[j]]));
      }
    }
    CHECK(min_pair <= prev);
    prev = min_pair;
  }
}

TEST_CASE("knn_group examples") {
  const PointCloud cloud = testutil::random_cloud(20, 1);
  const std::vector<std::size_t> centers{3, 7, 3};
  for (const TokenGroup& g : knn_group(cloud, centers, 1)) {
    CHECK(g.neighbor_indices == std::vector<std::size_t>{g.center_index});
  }
  for (const TokenGroup& g : knn_group(cloud, centers, 20)) {
    CHECK(std::set<std::size_t>(g.neighbor_indices.begin(), g.neighbor_indices.end()).size() == 20);
  }

  const PointCloud line({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {10, 0, 0}});
  const std::vector<std::size_t> center{1};
  const auto groups = knn_group(line, center, 3);
  CHECK(std::set<std::size_t>(groups[0].neighbor_indices.begin(), groups[0].neighbor_indices.end()) ==
        std::set<std::size_t>{0, 1, 2});
  // ties at distance 1 go to the lower index
  CHECK(groups[0].neighbor_indices == std::vector<std::size_t>{1, 0, 2});

  CHECK_THROWS_AS(knn_group(line, center, 5), ArgumentError);
  CHECK_THROWS_AS(knn_group(line, std::vector<std::size_t>{}, 2), ArgumentError);
}

TEST_CASE("knn_group includes the center even among duplicates") {
  const PointCloud dup({{0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
  const std::vector<std::size_t> center{2};
  CHECK(knn_group(dup, center, 1)[0].neighbor_indices == std::vector<std::size_t>{2});
  CHECK(knn_group(dup, center, 2)[0].neighbor_indices == std::vector<std::size_t>{2, 0});
}

TEST_CASE("knn_group matches the oracle and serial == parallel") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PointCloud cloud = seed % 2 ? testutil::random_cloud(64, seed) : testutil::grid_cloud(64, seed, 4);
    const auto centers = farthest_point_sampling(cloud, 8, seed);
    const auto par = knn_group(cloud, centers, 9, Exec::parallel);
    const auto ser = knn_group(cloud, centers, 9, Exec::serial);
    for (std::size_t g = 0; g < centers.size(); ++g) {
      CHECK(par[g].neighbor_indices == oracle::knn(cloud, centers[g], 9));
      CHECK(par[g].neighbor_indices == ser[g].neighbor_indices);
    }
  }
}

TEST_CASE("knn_group is permutation-equivariant") {
  const PointCloud cloud = testutil::random_cloud(40, 12);
  std::vector<std::size_t> perm(40);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(4);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  // new index j holds old point perm[j]
  std::vector<Point3> moved(40);
  std::vector<std::size_t> inverse(40);
  for (std::size_t j = 0; j < 40; ++j) {
    moved[j] = cloud[perm[j]];
    inverse[perm[j]] = j;
  }
  const PointCloud shuffled(std::move(moved));
  const std::vector<std::size_t> centers{0, 5, 17, 39};
  std::vector<std::size_t> mapped;
  for (std::size_t c : centers) mapped.push_back(inverse[c]);
  const auto a = knn_group(cloud, centers, 7);
  const auto b = knn_group(shuffled, mapped, 7);
  for (std::size_t g = 0; g < centers.size(); ++g) {
    std::set<std::size_t> lhs(a[g].neighbor_indices.begin(), a[g].neighbor_indices.end());
    std::set<std::size_t> rhs;
    for (std::size_t j : b[g].neighbor_indices) rhs.insert(perm[j]);
    CHECK(lhs == rhs);
  }
}

namespace {

DenseLayer identity_layer(bool relu) {
  return {3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1}, {0, 0, 0}, relu};
}

}  // namespace

TEST_CASE("encode_tokens examples") {
  SUBCASE("points equal to the center give relu(0)") {
    const PointCloud cloud({{0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}});
    const EncoderWeights w({identity_layer(true)});
    std::vector<TokenGroup> groups{{0, {0, 1}, {}}};
    const auto enc = encode_tokens(cloud, groups, w, 3);
    CHECK(enc[0].feature == std::vector<double>{0, 0, 0});
  }
  SUBCASE("singleton group equals the MLP output of its one point") {
    const PointCloud cloud({{0.3, -0.2, 0.9}});
    DenseLayer l1{3, 2, {1, 2, 3, -1, 0, 1}, {0.5, -0.25}, true};
    DenseLayer l2{2, 1, {2, -3}, {0.125}, false};
    const EncoderWeights w({l1, l2});
    std::vector<TokenGroup> groups{{0, {0}, {}}};
    const auto enc = encode_tokens(cloud, groups, w, 1);
    // relative coords are zero: layer1 = relu(b1) = (0.5, 0), layer2 = 2*0.5 + 0.125
    CHECK(enc[0].feature == std::vector<double>{1.125});
  }
  SUBCASE("two points through one linear identity layer give the coordinate-wise max") {
    const PointCloud cloud({{1, 1, 1}, {2, 0.5, 3}, {0, 4, 1}});
    const EncoderWeights w({identity_layer(false)});
    std::vector<TokenGroup> groups{{0, {1, 2}, {}}};
    const auto enc = encode_tokens(cloud, groups, w, 3);
    // center is member too: max over (0,0,0), (1,-0.5,2), (-1,3,0)
    CHECK(enc[0].feature == std::vector<double>{1, 3, 2});
  }
}

TEST_CASE("encoder configuration errors") {
  CHECK_THROWS_AS(EncoderWeights({}), ConfigError);
  CHECK_THROWS_AS(EncoderWeights({DenseLayer{2, 3, std::vector<double>(6), std::vector<double>(3), false}}),
                  ConfigError);
  CHECK_THROWS_AS(EncoderWeights({DenseLayer{3, 1, {1, NAN, 0}, {0}, false}}), ConfigError);
  const PointCloud cloud({{0, 0, 0}});
  const auto w = EncoderWeights::random(32, 16, 1);
  std::vector<TokenGroup> groups{{0, {0}, {}}};
  CHECK_THROWS_AS(encode_tokens(cloud, groups, w, 8), ConfigError);
}

TEST_CASE("encode_tokens is bitwise translation-invariant") {
  // Dyadic coordinates and offset keep the subtraction exact.
  Rng rng(3);
  std::vector<Point3> pts(128), shifted(128);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      pts[i][c] = static_cast<double>(static_cast<int>(rng.below(2048)) - 1024) / 1024.0;
      shifted[i][c] = pts[i][c] + 3.5;
    }
  }
  const PointCloud a(pts), b(shifted);
  const auto w = EncoderWeights::random(32, 16, 9);
  const auto centers = farthest_point_sampling(a, 8, 2);
  const auto ga = encode_tokens(a, knn_group(a, centers, 16), w, 16);
  const auto gb = encode_tokens(b, knn_group(b, centers, 16), w, 16);
  for (std::size_t g = 0; g < ga.size(); ++g) {
    CHECK(ga[g].neighbor_indices == gb[g].neighbor_indices);
    CHECK(ga[g].feature == gb[g].feature);
  }
}

TEST_CASE("tokenize defaults and serial/parallel agreement") {
  const PointCloud cloud = normalize_unit_sphere(testutil::random_cloud(1024, 21));
  const TokenizeConfig cfg;
  const auto w = EncoderWeights::random(cfg.hidden, cfg.feature_dim, 5);
  const auto par = tokenize(cloud, cfg, w, 8, Exec::parallel);
  const auto ser = tokenize(cloud, cfg, w, 8, Exec::serial);
  REQUIRE(par.size() == 64);
  for (std::size_t g = 0; g < par.size(); ++g) {
    CHECK(par[g].neighbor_indices.size() == 32);
    CHECK(par[g].neighbor_indices.front() == par[g].center_index);
    CHECK(par[g].feature.size() == 16);
    CHECK(par[g].feature == ser[g].feature);
    CHECK(par[g].neighbor_indices == ser[g].neighbor_indices);
  }
}
