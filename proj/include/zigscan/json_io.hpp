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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "zigscan/masking.hpp"
#include "zigscan/recon.hpp"
#include "zigscan/scan.hpp"

namespace zigscan {

using Json = nlohmann::ordered_json;

// {curve_tag, n, permutation}
Json scan_order_to_json(const ScanOrder& order);
ScanOrder scan_order_from_json(const Json& j);

// u32 little-endian count followed by u32 little-endian indices.
std::vector<std::uint8_t> scan_order_to_binary(const ScanOrder& order);
ScanOrder scan_order_from_binary(std::span<const std::uint8_t> bytes, CurveTag tag);

Json locality_to_json(const LocalityMetrics& m);

// {b, g, t_semantic, r_random, seed, strategy, semantic, random, final}; the
// bit arrays are flat row-major 0/1 lists of length b * g.
Json mask_plan_to_json(const MaskPlan& plan);
// Throws ValidationError on shape errors or if the union/disjointness
// invariants fail.
MaskPlan mask_plan_from_json(const Json& j);

// "step,loss" rows with round-trip precision.
std::string trace_to_csv(const TrainTrace& trace);
Json trace_summary_json(const TrainTrace& trace);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
Json read_json(const std::filesystem::path& path);

// Shortest round-trip decimal form, as used in every CSV the tools write.
std::string format_real(double v);

}  // namespace zigscan
