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

#include "zigscan/json_io.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include "zigscan/error.hpp"

namespace zigscan {

Json scan_order_to_json(const ScanOrder& order) {
  Json j;
  j["curve_tag"] = std::string(to_string(order.curve_tag()));
  j["n"] = order.size();
  j["permutation"] = std::vector<std::size_t>(order.permutation().begin(), order.permutation().end());
  return j;
}

ScanOrder scan_order_from_json(const Json& j) {
  try {
    const auto tag = parse_curve_tag(j.at("curve_tag").get<std::string>());
    auto perm = j.at("permutation").get<std::vector<std::size_t>>();
    if (perm.size() != j.at("n").get<std::size_t>()) {
      throw ValidationError("scan order length does not match n");
    }
    return ScanOrder(std::move(perm), tag);
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed scan order: ") + e.what());
  }
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
  return v;
}

std::vector<std::uint8_t> bits_of(const Json& j, std::size_t expected, const char* name) {
  const auto raw = j.at(name).get<std::vector<int>>();
  if (raw.size() != expected) throw ValidationError(std::string(name) + " mask has wrong length");
  std::vector<std::uint8_t> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != 0 && raw[i] != 1) throw ValidationError(std::string(name) + " mask is not 0/1");
    out[i] = static_cast<std::uint8_t>(raw[i]);
  }
  return out;
}

std::vector<int> ints_of(const MaskGrid& grid) { return {grid.bits.begin(), grid.bits.end()}; }

}  // namespace

std::vector<std::uint8_t> scan_order_to_binary(const ScanOrder& order) {
  std::vector<std::uint8_t> out;
  out.reserve(4 * (order.size() + 1));
  put_u32(out, static_cast<std::uint32_t>(order.size()));
  for (std::size_t i : order.permutation()) put_u32(out, static_cast<std::uint32_t>(i));
  return out;
}

ScanOrder scan_order_from_binary(std::span<const std::uint8_t> bytes, CurveTag tag) {
  if (bytes.size() < 4) throw ValidationError("binary scan order is truncated");
  const std::uint32_t n = get_u32(bytes, 0);
  if (bytes.size() != 4 * (static_cast<std::size_t>(n) + 1)) {
    throw ValidationError("binary scan order length does not match its count");
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = get_u32(bytes, 4 * (i + 1));
  return ScanOrder(std::move(perm), tag);
}

Json locality_to_json(const LocalityMetrics& m) {
  Json j;
  j["mean_step"] = m.mean_step;
  j["max_step"] = m.max_step;
  j["total_path_length"] = m.total_path_length;
  return j;
}

Json mask_plan_to_json(const MaskPlan& plan) {
  Json j;
  j["b"] = plan.final.batch;
  j["g"] = plan.final.groups;
  j["t_semantic"] = plan.config.t_semantic;
  j["r_random"] = plan.config.r_random;
  j["seed"] = plan.config.seed;
  j["strategy"] = plan.config.strategy == MaskStrategy::sms ? "sms" : "random-only";
  j["semantic"] = ints_of(plan.semantic);
  j["random"] = ints_of(plan.random);
  j["final"] = ints_of(plan.final);
  return j;
}

MaskPlan mask_plan_from_json(const Json& j) {
  try {
    MaskPlan plan;
    const auto b = j.at("b").get<std::size_t>();
    const auto g = j.at("g").get<std::size_t>();
    plan.config.t_semantic = j.at("t_semantic").get<double>();
    plan.config.r_random = j.at("r_random").get<double>();
    plan.config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("strategy")) {
      const auto s = j.at("strategy").get<std::string>();
      if (s != "sms" && s != "random-only") throw ValidationError("unknown mask strategy " + s);
      plan.config.strategy = s == "sms" ? MaskStrategy::sms : MaskStrategy::random_only;
    }
    plan.config.validate();
    for (auto [grid, name] : {std::pair{&plan.semantic, "semantic"}, std::pair{&plan.random, "random"},
                              std::pair{&plan.final, "final"}}) {
      *grid = MaskGrid(b, g);
      grid->bits = bits_of(j, b * g, name);
    }
    for (std::size_t i = 0; i < b * g; ++i) {
      if (plan.semantic.bits[i] && plan.random.bits[i]) {
        throw ValidationError("semantic and random masks overlap");
      }
      if (plan.final.bits[i] != (plan.semantic.bits[i] | plan.random.bits[i])) {
        throw ValidationError("final mask is not the union of semantic and random");
      }
    }
    return plan;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed mask plan: ") + e.what());
  }
}

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

std::string trace_to_csv(const TrainTrace& trace) {
  std::string out = "step,loss\n";
  for (std::size_t s = 0; s < trace.loss.size(); ++s) {
    out += std::to_string(s) + "," + format_real(trace.loss[s]) + "\n";
  }
  return out;
}

Json trace_summary_json(const TrainTrace& trace) {
  Json j;
  j["final_loss"] = trace.final_loss;
  j["init_loss"] = trace.init_loss;
  j["steps"] = trace.steps;
  j["seed"] = trace.seed;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ValidationError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace zigscan
