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
#include <string>
#include <vector>

#include "zigscan/json_io.hpp"
#include "zigscan/pipeline.hpp"
#include "zigscan/recon.hpp"

namespace zigscan::cli {

// Effective configuration of one CLI run. Defaults < config file < flags.
struct RunConfig {
  std::vector<std::string> inputs;
  std::string format = "xyz";
  std::string synthetic = "mixed";  // cube | sphere | blobs | mixed (cycles the three)
  std::size_t n_points = 1024;
  std::size_t n_clouds = 1;
  std::uint64_t seed = 0;
  std::string out_dir = ".";

  TokenizeConfig tokenize;
  ScanParams scan;
  std::string plane = "random";    // xy | xz | yz | random
  std::string target = "centers";  // centers | points
  int bits = kDefaultQuantizationBits;
  std::vector<std::string> curves{"all"};

  double t_semantic = 0.8;
  double r_random = 0.6;
  std::string mask_strategy = "sms";  // sms | random-only | both (reconstruct)

  std::size_t steps = 200;
  double lr = 0.5;
  std::size_t state_dim = 16;
  std::string ssm_mode = "static";  // static | dynamic

  // Throws ValidationError on out-of-range or unknown values.
  void validate() const;

  // Derived per-stream seeds.
  std::uint64_t mask_seed() const;
  std::uint64_t train_seed() const;
  std::uint64_t cloud_seed(std::size_t i) const;
};

Json to_json(const RunConfig& c);
// Overlays the keys present in j onto c.
void apply_json(RunConfig& c, const Json& j);

}  // namespace zigscan::cli
