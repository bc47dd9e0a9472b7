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
#include "test_util.hpp"
#include "zigscan/error.hpp"
#include "zigscan/pipeline.hpp"
#include "zigscan/recon.hpp"
#include "zigscan/synthetic.hpp"

using namespace zigscan;

namespace {

ReconTask constant_patch_task() {
  ReconTask task;
  task.tokens = Mat(3, 2);
  task.tokens << 0.5, -1.0, 0.25, 2.0, -0.75, 0.1;
  task.masked_positions = {1};
  task.targets = {std::vector<Point3>(4, Point3{0.3, -0.2, 0.1})};
  return task;
}

}  // namespace

TEST_CASE("ReconTask validation") {
  ReconTask t = constant_patch_task();
  CHECK_NOTHROW(t.validate());
  t.targets.clear();
  CHECK_THROWS_AS(t.validate(), ValidationError);
  t = constant_patch_task();
  t.masked_positions = {3};
  CHECK_THROWS_AS(t.validate(), ValidationError);
}

TEST_CASE("pack and unpack are inverse") {
  for (SsmMode mode : {SsmMode::static_params, SsmMode::dynamic}) {
    ReconModel m = ReconModel::random(3, 4, 5, mode, 1);
    const auto flat = m.pack();
    CHECK(flat.size() == m.parameter_count());
    ReconModel other = ReconModel::random(3, 4, 5, mode, 2);
    other.unpack(flat);
    CHECK(other.pack() == flat);
  }
}

TEST_CASE("analytic gradient matches central differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = gradcheck::random_instance(seed);
    REQUIRE(inst.model.parameter_count() <= 200);
    const auto analytic = reconstruction_loss_and_grad(inst.tasks, inst.model);
    CHECK(analytic.loss == doctest::Approx(reconstruction_loss(inst.tasks, inst.model)).epsilon(1e-12));
    const auto numeric = gradcheck::finite_difference(inst.tasks, inst.model);
    const double err = gradcheck::relative_error(analytic.grad, numeric);
    INFO("seed " << seed << " rel err " << err);
    CHECK(err <= 1e-4);
  }
}

TEST_CASE("training with lr = 0 leaves the loss flat") {
  const std::vector<ReconTask> tasks{constant_patch_task()};
  const auto trace = reconstruct_train(tasks, TrainConfig{5, 0.0, 1, 4});
  for (double l : trace.loss) CHECK(l == trace.loss.front());
  CHECK(trace.final_loss == trace.init_loss);
  const auto single = reconstruct_train(tasks, TrainConfig{1, 0.0, 1, 4});
  CHECK(single.loss.size() == 1);
}

TEST_CASE("a constant target patch is fitted exactly") {
  const std::vector<ReconTask> tasks{constant_patch_task()};
  const auto trace = reconstruct_train(tasks, TrainConfig{500, 0.1, 3, 4});
  CHECK(trace.final_loss < 1e-6);
  CHECK(trace.final_loss < trace.init_loss);
}

TEST_CASE("training is deterministic and reports divergence") {
  const std::vector<ReconTask> tasks{constant_patch_task()};
  const auto a = reconstruct_train(tasks, TrainConfig{30, 0.05, 9, 4, SsmMode::dynamic});
  const auto b = reconstruct_train(tasks, TrainConfig{30, 0.05, 9, 4, SsmMode::dynamic});
  CHECK(a.loss == b.loss);
  CHECK(a.final_loss == b.final_loss);

  try {
    reconstruct_train(tasks, TrainConfig{200, 1e6, 9, 4});
    FAIL("expected divergence");
  } catch (const TrainingError& e) {
    CHECK(e.step() > 0);
  }
  CHECK_THROWS_AS(reconstruct_train(tasks, TrainConfig{0, 0.1, 1, 4}), ValidationError);
}

TEST_CASE("pipeline builds tasks with targets exactly at masked tokens") {
  std::vector<PointCloud> clouds;
  for (std::uint64_t i = 0; i < 3; ++i) clouds.push_back(make_synthetic(SyntheticShape::blobs, 512, i));
  PipelineConfig cfg;
  cfg.tokenize = {32, 16, 16, 8};
  cfg.seed = 4;
  const auto prepared = prepare_recon_tasks(clouds, cfg);
  REQUIRE(prepared.tasks.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& task = prepared.tasks[i];
    CHECK(task.tokens.rows() == 32);
    CHECK(task.masked_positions.size() == prepared.plan.final.count_row(i));
    for (std::size_t m = 0; m < task.masked_positions.size(); ++m) {
      const std::size_t group = prepared.clouds[i].order.permutation()[task.masked_positions[m]];
      CHECK(prepared.plan.final.at(i, group));
      CHECK(task.targets[m].size() == 16);
      CHECK(task.targets[m].front() == Point3{0, 0, 0});  // the center itself
    }
  }
}
