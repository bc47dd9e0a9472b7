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

// Times each kernel's serial reference against its OpenMP variant and checks
// that both produce identical results.

#include <chrono>
#include <cstdio>
#include <numeric>

#include <omp.h>

#include "zigscan/kernels.hpp"
#include "zigscan/rng.hpp"
#include "zigscan/synthetic.hpp"

using namespace zigscan;

namespace {

template <typename F>
double best_ms(F&& f, int repeats = 5) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-16s serial %9.3f ms   omp %9.3f ms   speedup %5.2fx   %s\n", name, serial, parallel,
              serial / parallel, same ? "identical" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  const PointCloud cloud = make_synthetic(SyntheticShape::cube, 1 << 16, 1);
  const auto pts = cloud.points();

  {
    std::vector<double> a(pts.size(), 1e300), b(pts.size(), 1e300);
    std::size_t ia = 0, ib = 0;
    const double s = best_ms([&] { ia = kernels::serial::fps_update(pts, pts[0], a); });
    const double p = best_ms([&] { ib = kernels::omp::fps_update(pts, pts[0], b); });
    report("fps_update", s, p, ia == ib && a == b);
  }
  {
    std::vector<std::size_t> centers(256);
    std::iota(centers.begin(), centers.end(), 0);
    std::vector<std::vector<std::size_t>> a, b;
    const double s = best_ms([&] { a = kernels::serial::knn(pts, centers, 32); }, 2);
    const double p = best_ms([&] { b = kernels::omp::knn(pts, centers, 32); }, 2);
    report("knn", s, p, a == b);

    const auto encoder = EncoderWeights::random(32, 16, 3);
    std::vector<double> ea, eb;
    const double es = best_ms([&] { ea = kernels::serial::encode_max_pool(pts, a, encoder); });
    const double ep = best_ms([&] { eb = kernels::omp::encode_max_pool(pts, a, encoder); });
    report("encode_max_pool", es, ep, ea == eb);
  }
  {
    const std::size_t blocks = 8, rows = 256, dim = 16;
    Rng rng(5);
    std::vector<double> v(blocks * rows * dim);
    for (double& x : v) x = rng.normal();
    std::vector<double> a, b;
    const double s = best_ms([&] { a = kernels::serial::clamped_gram(v, blocks, rows, dim); });
    const double p = best_ms([&] { b = kernels::omp::clamped_gram(v, blocks, rows, dim); });
    report("clamped_gram", s, p, a == b);
  }
  {
    const auto small = pts.subspan(0, 4096);
    std::vector<double> da(small.size()), db(small.size());
    std::vector<std::size_t> na(small.size()), nb(small.size());
    const double s = best_ms([&] { kernels::serial::nearest_sq_dist(small, small, da, na); });
    const double p = best_ms([&] { kernels::omp::nearest_sq_dist(small, small, db, nb); });
    report("nearest_sq_dist", s, p, da == db && na == nb);
  }
  {
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> a(pts.size() - 1), b(pts.size() - 1);
    const double s = best_ms([&] { kernels::serial::step_lengths(pts, order, a); });
    const double p = best_ms([&] { kernels::omp::step_lengths(pts, order, b); });
    report("step_lengths", s, p, a == b);
  }
  return 0;
}
