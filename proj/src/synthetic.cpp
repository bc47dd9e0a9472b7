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

#include "zigscan/synthetic.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "zigscan/error.hpp"
#include "zigscan/rng.hpp"

namespace zigscan {

SyntheticShape parse_synthetic_shape(std::string_view name) {
  if (name == "cube") return SyntheticShape::cube;
  if (name == "sphere") return SyntheticShape::sphere;
  if (name == "blobs") return SyntheticShape::blobs;
  throw ArgumentError("unknown synthetic shape '" + std::string(name) + "'");
}

std::string_view to_string(SyntheticShape shape) {
  switch (shape) {
    case SyntheticShape::cube: return "cube";
    case SyntheticShape::sphere: return "sphere";
    case SyntheticShape::blobs: return "blobs";
  }
  return "cube";
}

PointCloud make_synthetic(SyntheticShape shape, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ArgumentError("synthetic cloud needs n >= 1");
  Rng rng(seed);
  std::vector<Point3> pts(n);
  switch (shape) {
    case SyntheticShape::cube:
      for (Point3& p : pts) p = {rng.uniform(), rng.uniform(), rng.uniform()};
      break;
    case SyntheticShape::sphere:
      for (Point3& p : pts) {
        double r2 = 0.0;
        do {
          p = {rng.normal(), rng.normal(), rng.normal()};
          r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
        } while (r2 < 1e-12);
        const double inv = 1.0 / std::sqrt(r2);
        for (double& v : p) v *= inv;
      }
      break;
    case SyntheticShape::blobs: {
      std::array<Point3, 4> centers;
      for (Point3& c : centers) c = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      for (std::size_t i = 0; i < n; ++i) {
        const Point3& c = centers[i % centers.size()];
        for (int k = 0; k < 3; ++k) pts[i][k] = c[k] + 0.15 * rng.normal();
      }
      break;
    }
  }
  return PointCloud(std::move(pts));
}

}  // namespace zigscan
