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

#include <algorithm>
#include <cmath>
#include <vector>

#include "zigscan/recon.hpp"
#include "zigscan/rng.hpp"

namespace gradcheck {

using namespace zigscan;

// Tiny random reconstruction instance: G tokens of width C, state size d,
// decoded patches of k points. Alternates static and dynamic SSMs.
struct Instance {
  std::vector<ReconTask> tasks;
  ReconModel model;
};

inline Instance random_instance(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t d = 2 + rng.below(3);   // 2..4
  const std::size_t c = 2 + rng.below(2);   // 2..3
  const std::size_t k = 2 + rng.below(2);   // 2..3
  const SsmMode mode = seed % 2 ? SsmMode::dynamic : SsmMode::static_params;
  Instance inst;
  for (int t = 0; t < 2; ++t) {
    ReconTask task;
    const std::size_t g = 3 + rng.below(4);
    task.tokens = Mat(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(c));
    for (Eigen::Index i = 0; i < task.tokens.size(); ++i) task.tokens.data()[i] = rng.normal();
    for (std::size_t pos = 0; pos < g; ++pos) {
      if (pos == 0 || rng.uniform() < 0.5) {
        task.masked_positions.push_back(pos);
        std::vector<Point3> target(3 + rng.below(3));
        for (auto& p : target) p = {rng.normal() * 0.3, rng.normal() * 0.3, rng.normal() * 0.3};
        task.targets.push_back(std::move(target));
      }
    }
    inst.tasks.push_back(std::move(task));
  }
  inst.model = ReconModel::random(c, d, k, mode, seed);
  // Larger decoder weights and generator weights so every block has signal.
  inst.model.decoder_w *= 30.0;
  for (Eigen::Index i = 0; i < inst.model.decoder_b.size(); ++i) inst.model.decoder_b(i) = 0.2 * rng.normal();
  inst.model.ssm.generator.w_a *= 10.0;
  inst.model.ssm.generator.w_b *= 10.0;
  return inst;
}

// Central differences over every packed parameter.
inline std::vector<double> finite_difference(const std::vector<ReconTask>& tasks, ReconModel model,
                                             double h = 1e-6) {
  std::vector<double> params = model.pack();
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double orig = params[i];
    params[i] = orig + h;
    model.unpack(params);
    const double up = reconstruction_loss(tasks, model);
    params[i] = orig - h;
    model.unpack(params);
    const double down = reconstruction_loss(tasks, model);
    params[i] = orig;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

// ||a - b|| / max(||a||, ||b||)
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-300});
}

}  // namespace gradcheck
