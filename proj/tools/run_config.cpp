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

#include "run_config.hpp"

#include <algorithm>

#include "zigscan/error.hpp"
#include "zigscan/rng.hpp"
#include "zigscan/synthetic.hpp"

namespace zigscan::cli {

namespace {

void only_keys(const Json& j, std::initializer_list<std::string_view> keys, std::string_view where) {
  if (!j.is_object()) throw ValidationError("config section " + std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ValidationError("unknown config key " + std::string(where) + "." + key);
    }
  }
}

template <typename T>
void take(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("config key '") + key + "': " + e.what());
  }
}

void one_of(const std::string& value, std::initializer_list<const char*> allowed, const char* what) {
  for (const char* a : allowed) {
    if (value == a) return;
  }
  throw ValidationError(std::string("invalid ") + what + " '" + value + "'");
}

}  // namespace

void RunConfig::validate() const {
  parse_cloud_format(format);
  one_of(synthetic, {"cube", "sphere", "blobs", "mixed"}, "synthetic shape");
  one_of(plane, {"xy", "xz", "yz", "random"}, "plane");
  one_of(target, {"centers", "points"}, "target");
  one_of(mask_strategy, {"sms", "random-only", "both"}, "mask strategy");
  one_of(ssm_mode, {"static", "dynamic"}, "SSM mode");
  if (n_points == 0) throw ValidationError("n_points must be positive");
  if (n_clouds == 0) throw ValidationError("n_clouds must be positive");
  if (tokenize.n_centers == 0 || tokenize.k == 0 || tokenize.hidden == 0 || tokenize.feature_dim == 0) {
    throw ValidationError("tokenization sizes must be positive");
  }
  if (bits < 1 || bits > 21) throw ValidationError("bits must lie in [1, 21]");
  for (const std::string& c : curves) {
    if (c != "all" && c != "zigzag") parse_curve_tag(c);
  }
  scan.validate();
  MaskConfig{t_semantic, r_random, 0}.validate();
  if (steps == 0) throw ValidationError("steps must be >= 1");
  if (!(lr >= 0.0)) throw ValidationError("lr must be non-negative");
  if (state_dim == 0) throw ValidationError("state_dim must be positive");
}

std::uint64_t RunConfig::mask_seed() const { return mix_seed(seed, 7); }
std::uint64_t RunConfig::train_seed() const { return mix_seed(seed, 11); }
std::uint64_t RunConfig::cloud_seed(std::size_t i) const { return mix_seed(seed, 5000 + i); }

Json to_json(const RunConfig& c) {
  Json j;
  j["inputs"] = c.inputs;
  j["format"] = c.format;
  j["synthetic"] = c.synthetic;
  j["n_points"] = c.n_points;
  j["n_clouds"] = c.n_clouds;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["tokenize"] = {{"n_centers", c.tokenize.n_centers},
                   {"k", c.tokenize.k},
                   {"hidden", c.tokenize.hidden},
                   {"feature_dim", c.tokenize.feature_dim}};
  j["scan"] = {{"layer_budget", c.scan.layer_budget}, {"segment_size", c.scan.segment_size},
               {"max_segments", c.scan.max_segments}, {"plane", c.plane},
               {"target", c.target},                  {"bits", c.bits},
               {"curves", c.curves}};
  j["mask"] = {{"t_semantic", c.t_semantic}, {"r_random", c.r_random}, {"strategy", c.mask_strategy}};
  j["train"] = {{"steps", c.steps}, {"lr", c.lr}, {"state_dim", c.state_dim}, {"ssm_mode", c.ssm_mode}};
  j["derived_seeds"] = {{"mask", c.mask_seed()},
                        {"train", c.train_seed()},
                        {"encoder", encoder_seed(c.seed)},
                        {"rule", "cloud i: synthetic mix(seed, 5000+i), fps mix(seed, 1000+i), "
                                 "plane mix(seed, 1000000+i)"}};
  return j;
}

void apply_json(RunConfig& c, const Json& j) {
  if (!j.is_object()) throw ValidationError("config file must hold a JSON object");
  only_keys(j, {"inputs", "format", "synthetic", "n_points", "n_clouds", "seed", "out_dir", "tokenize",
                "scan", "mask", "train", "derived_seeds"},
            "config");
  take(j, "inputs", c.inputs);
  take(j, "format", c.format);
  take(j, "synthetic", c.synthetic);
  take(j, "n_points", c.n_points);
  take(j, "n_clouds", c.n_clouds);
  take(j, "seed", c.seed);
  take(j, "out_dir", c.out_dir);
  if (j.contains("tokenize")) {
    const Json& t = j["tokenize"];
    only_keys(t, {"n_centers", "k", "hidden", "feature_dim"}, "tokenize");
    take(t, "n_centers", c.tokenize.n_centers);
    take(t, "k", c.tokenize.k);
    take(t, "hidden", c.tokenize.hidden);
    take(t, "feature_dim", c.tokenize.feature_dim);
  }
  if (j.contains("scan")) {
    const Json& s = j["scan"];
    only_keys(s, {"layer_budget", "segment_size", "max_segments", "plane", "target", "bits", "curves"}, "scan");
    take(s, "layer_budget", c.scan.layer_budget);
    take(s, "segment_size", c.scan.segment_size);
    take(s, "max_segments", c.scan.max_segments);
    take(s, "plane", c.plane);
    take(s, "target", c.target);
    take(s, "bits", c.bits);
    take(s, "curves", c.curves);
  }
  if (j.contains("mask")) {
    const Json& m = j["mask"];
    only_keys(m, {"t_semantic", "r_random", "strategy"}, "mask");
    take(m, "t_semantic", c.t_semantic);
    take(m, "r_random", c.r_random);
    take(m, "strategy", c.mask_strategy);
  }
  if (j.contains("train")) {
    const Json& t = j["train"];
    only_keys(t, {"steps", "lr", "state_dim", "ssm_mode"}, "train");
    take(t, "steps", c.steps);
    take(t, "lr", c.lr);
    take(t, "state_dim", c.state_dim);
    take(t, "ssm_mode", c.ssm_mode);
  }
}

}  // namespace zigscan::cli
