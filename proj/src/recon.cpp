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

#include "zigscan/recon.hpp"

#include <cmath>
#include <string>

#include "zigscan/error.hpp"
#include "zigscan/rng.hpp"

namespace zigscan {

void ReconTask::validate() const {
  if (tokens.rows() == 0 || tokens.cols() == 0) throw ValidationError("recon task has no tokens");
  if (targets.size() != masked_positions.size()) {
    throw ValidationError("recon task needs one target per masked position");
  }
  for (std::size_t i = 0; i < masked_positions.size(); ++i) {
    if (masked_positions[i] >= static_cast<std::size_t>(tokens.rows())) {
      throw ValidationError("masked position out of range");
    }
    if (i > 0 && masked_positions[i] <= masked_positions[i - 1]) {
      throw ValidationError("masked positions must be strictly increasing");
    }
    if (targets[i].empty()) throw ValidationError("empty reconstruction target");
  }
}

ReconTask build_recon_task(const PointCloud& cloud, std::span<const TokenGroup> groups,
                           const ScanOrder& order, std::span<const std::uint8_t> mask_row) {
  if (order.size() != groups.size() || mask_row.size() != groups.size()) {
    throw ValidationError("scan order, mask and groups disagree in size");
  }
  const auto channels = static_cast<Eigen::Index>(groups.front().feature.size());
  ReconTask task;
  task.tokens.resize(static_cast<Eigen::Index>(groups.size()), channels);
  for (std::size_t t = 0; t < order.size(); ++t) {
    const std::size_t g = order.permutation()[t];
    const auto& feature = groups[g].feature;
    if (static_cast<Eigen::Index>(feature.size()) != channels) {
      throw ValidationError("token features have inconsistent widths");
    }
    for (Eigen::Index c = 0; c < channels; ++c) {
      task.tokens(static_cast<Eigen::Index>(t), c) = feature[static_cast<std::size_t>(c)];
    }
    if (mask_row[g]) {
      task.masked_positions.push_back(t);
      task.targets.push_back(relative_patch(cloud, groups[g]));
    }
  }
  return task;
}

// ---------------------------------------------------------------------------
// model

ReconModel ReconModel::random(std::size_t feature_dim, std::size_t state_dim,
                              std::size_t patch_points, SsmMode mode, std::uint64_t seed) {
  ReconModel model;
  model.mode = mode;
  model.patch_points = patch_points;
  model.ssm = SsmParams::random(state_dim, feature_dim, mix_seed(seed, 0));
  Rng rng(mix_seed(seed, 1));
  const auto out = static_cast<Eigen::Index>(3 * patch_points);
  const auto d = static_cast<Eigen::Index>(state_dim);
  model.decoder_w.resize(out, d);
  for (Eigen::Index i = 0; i < out; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) model.decoder_w(i, j) = 0.01 * rng.normal();
  }
  model.decoder_b = Vec::Zero(out);
  return model;
}

namespace {

template <typename Fn>
void for_each_block(ReconModel& m, Fn&& fn) {
  if (m.mode == SsmMode::static_params) {
    fn(m.ssm.a);
    fn(m.ssm.b);
  } else {
    fn(m.ssm.generator.w_a);
    fn(m.ssm.generator.b_a);
    fn(m.ssm.generator.w_b);
    fn(m.ssm.generator.b_b);
  }
  fn(m.decoder_w);
  fn(m.decoder_b);
}

}  // namespace

std::size_t ReconModel::parameter_count() const {
  std::size_t n = 0;
  for_each_block(const_cast<ReconModel&>(*this), [&](auto& block) {
    n += static_cast<std::size_t>(block.size());
  });
  return n;
}

std::vector<double> ReconModel::pack() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for_each_block(const_cast<ReconModel&>(*this), [&](auto& block) {
    flat.insert(flat.end(), block.data(), block.data() + block.size());
  });
  return flat;
}

void ReconModel::unpack(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw ArgumentError("parameter vector has wrong length");
  std::size_t pos = 0;
  for_each_block(*this, [&](auto& block) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(pos),
              flat.begin() + static_cast<std::ptrdiff_t>(pos + static_cast<std::size_t>(block.size())),
              block.data());
    pos += static_cast<std::size_t>(block.size());
  });
}

std::vector<Point3> decode_patch(const ReconModel& model, const Vec& state) {
  const Vec y = model.decoder_w * state + model.decoder_b;
  std::vector<Point3> pts(model.patch_points);
  for (std::size_t p = 0; p < model.patch_points; ++p) {
    const auto i = static_cast<Eigen::Index>(3 * p);
    pts[p] = {y(i), y(i + 1), y(i + 2)};
  }
  return pts;
}

// ---------------------------------------------------------------------------
// loss and gradient

namespace {

struct Forward {
  std::vector<Vec> inputs;  // x_t (zero where masked)
  std::vector<Vec> states;  // h_t
  std::vector<Vec> gates;   // dynamic mode: diagonal of A_t
  std::vector<Mat> b_t;     // dynamic mode: B_t
};

Forward run_forward(const ReconTask& task, const ReconModel& model) {
  const auto g_count = static_cast<std::size_t>(task.tokens.rows());
  const auto m = task.tokens.cols();
  if (m != static_cast<Eigen::Index>(model.ssm.input_dim)) {
    throw ArgumentError("token width does not match the SSM input size");
  }
  std::vector<bool> masked(g_count, false);
  for (std::size_t t : task.masked_positions) masked[t] = true;

  Forward f;
  f.inputs.reserve(g_count);
  for (std::size_t t = 0; t < g_count; ++t) {
    f.inputs.push_back(masked[t] ? Vec(Vec::Zero(m))
                                 : Vec(task.tokens.row(static_cast<Eigen::Index>(t)).transpose()));
  }
  Vec h = Vec::Zero(static_cast<Eigen::Index>(model.ssm.state_dim));
  for (const Vec& x : f.inputs) {
    if (model.mode == SsmMode::static_params) {
      h = model.ssm.a * h + model.ssm.b * x;
    } else {
      auto [a_t, b_t] = dynamic_parameters(model.ssm.generator, x, model.ssm.state_dim, model.ssm.input_dim);
      Vec gate = a_t.diagonal();
      h = gate.cwiseProduct(h) + b_t * x;
      f.gates.push_back(std::move(gate));
      f.b_t.push_back(std::move(b_t));
    }
    f.states.push_back(h);
  }
  return f;
}

std::size_t total_masked(std::span<const ReconTask> tasks) {
  std::size_t n = 0;
  for (const ReconTask& t : tasks) {
    t.validate();
    n += t.masked_positions.size();
  }
  if (n == 0) throw ValidationError("no masked patches to reconstruct");
  return n;
}

}  // namespace

double reconstruction_loss(std::span<const ReconTask> tasks, const ReconModel& model) {
  const std::size_t count = total_masked(tasks);
  double sum = 0.0;
  for (const ReconTask& task : tasks) {
    const Forward f = run_forward(task, model);
    for (std::size_t i = 0; i < task.masked_positions.size(); ++i) {
      const auto decoded = decode_patch(model, f.states[task.masked_positions[i]]);
      sum += chamfer_l2(decoded, task.targets[i], Exec::serial);
    }
  }
  return sum / static_cast<double>(count);
}

LossAndGrad reconstruction_loss_and_grad(std::span<const ReconTask> tasks, const ReconModel& model) {
  const std::size_t count = total_masked(tasks);
  const double scale = 1.0 / static_cast<double>(count);
  const auto d = static_cast<Eigen::Index>(model.ssm.state_dim);
  const auto m = static_cast<Eigen::Index>(model.ssm.input_dim);

  ReconModel grad = model;
  for_each_block(grad, [](auto& block) { block.setZero(); });

  double sum = 0.0;
  for (const ReconTask& task : tasks) {
    const Forward f = run_forward(task, model);
    const std::size_t len = f.states.size();

    // Direct gradient of the loss on each state through the decoder.
    std::vector<Vec> dh(len, Vec::Zero(d));
    for (std::size_t i = 0; i < task.masked_positions.size(); ++i) {
      const std::size_t t = task.masked_positions[i];
      const auto decoded = decode_patch(model, f.states[t]);
      sum += chamfer_l2(decoded, task.targets[i], Exec::serial);
      const auto gp = chamfer_l2_grad(decoded, task.targets[i], Exec::serial);
      Vec gy(static_cast<Eigen::Index>(3 * model.patch_points));
      for (std::size_t p = 0; p < gp.size(); ++p) {
        for (int c = 0; c < 3; ++c) gy(static_cast<Eigen::Index>(3 * p) + c) = scale * gp[p][c];
      }
      grad.decoder_w += gy * f.states[t].transpose();
      grad.decoder_b += gy;
      dh[t] += model.decoder_w.transpose() * gy;
    }

    // Backpropagation through time.
    Vec g = Vec::Zero(d);
    for (std::size_t r = len; r-- > 0;) {
      g += dh[r];
      const Vec h_prev = r > 0 ? f.states[r - 1] : Vec(Vec::Zero(d));
      const Vec& x = f.inputs[r];
      if (model.mode == SsmMode::static_params) {
        grad.ssm.a += g * h_prev.transpose();
        grad.ssm.b += g * x.transpose();
        g = model.ssm.a.transpose() * g;
      } else {
        const Vec& gate = f.gates[r];
        const Vec dz = g.cwiseProduct(h_prev).cwiseProduct(gate).cwiseProduct(
            (Vec::Ones(d) - gate));
        grad.ssm.generator.w_a += dz * x.transpose();
        grad.ssm.generator.b_a += dz;
        Vec dvec(d * m);
        for (Eigen::Index i = 0; i < d; ++i) {
          for (Eigen::Index j = 0; j < m; ++j) dvec(i * m + j) = g(i) * x(j);
        }
        grad.ssm.generator.w_b += dvec * x.transpose();
        grad.ssm.generator.b_b += dvec;
        g = gate.cwiseProduct(g);
      }
    }
  }
  return {sum * scale, grad.pack()};
}

// ---------------------------------------------------------------------------
// training

TrainTrace reconstruct_train(std::span<const ReconTask> tasks, const TrainConfig& config) {
  // Patch size and token width come from the first task with a target.
  for (const ReconTask& t : tasks) {
    if (t.targets.empty()) continue;
    ReconModel model = ReconModel::random(static_cast<std::size_t>(t.tokens.cols()),
                                          config.state_dim, t.targets.front().size(), config.mode,
                                          config.seed);
    return reconstruct_train(tasks, model, config);
  }
  throw ValidationError("no masked patches to reconstruct");
}

TrainTrace reconstruct_train(std::span<const ReconTask> tasks, ReconModel& model,
                             const TrainConfig& config) {
  if (config.steps < 1) throw ValidationError("training needs at least one step");
  if (!(config.lr >= 0.0) || !std::isfinite(config.lr)) {
    throw ValidationError("learning rate must be finite and non-negative");
  }
  TrainTrace trace;
  trace.seed = config.seed;
  trace.steps = config.steps;
  trace.loss.reserve(config.steps);
  std::vector<double> params = model.pack();
  for (std::size_t step = 0; step < config.steps; ++step) {
    const LossAndGrad lg = reconstruction_loss_and_grad(tasks, model);
    if (!std::isfinite(lg.loss)) throw TrainingError("loss diverged", step);
    trace.loss.push_back(lg.loss);
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= config.lr * lg.grad[i];
    model.unpack(params);
  }
  trace.init_loss = trace.loss.front();
  trace.final_loss = reconstruction_loss(tasks, model);
  if (!std::isfinite(trace.final_loss)) throw TrainingError("loss diverged", config.steps);
  return trace;
}

}  // namespace zigscan
