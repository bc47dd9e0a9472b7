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

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "zigscan/error.hpp"
#include "zigscan/pointcloud.hpp"

namespace zigscan {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_real(std::string_view token, std::size_t line) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError("not a number: '" + std::string(token) + "'", line);
  }
  if (!std::isfinite(value)) throw ParseError("non-finite coordinate", line);
  return value;
}

std::ifstream open_or_throw(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::vector<Point3> read_xyz(const std::filesystem::path& path) {
  auto in = open_or_throw(path, std::ios::in);
  std::vector<Point3> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (tokens.size() != 3) {
      throw ParseError("expected 3 coordinates, got " + std::to_string(tokens.size()), line_no);
    }
    points.push_back({parse_real(tokens[0], line_no), parse_real(tokens[1], line_no),
                      parse_real(tokens[2], line_no)});
  }
  return points;
}

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<std::string> properties;
};

std::vector<Point3> read_ply(const std::filesystem::path& path) {
  auto in = open_or_throw(path, std::ios::in);
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line()) throw EmptyInputError("empty file " + path.string());
  if (line != "ply") throw ParseError("missing 'ply' magic", line_no);

  std::vector<PlyElement> elements;
  bool ended = false;
  while (next_line()) {
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    const std::string_view key = tokens[0];
    if (key == "comment" || key == "obj_info") continue;
    if (key == "format") {
      if (tokens.size() < 2 || tokens[1] != "ascii") throw ParseError("only ascii PLY is supported", line_no);
    } else if (key == "element") {
      if (tokens.size() != 3) throw ParseError("malformed element line", line_no);
      std::size_t count = 0;
      const auto [ptr, ec] =
          std::from_chars(tokens[2].data(), tokens[2].data() + tokens[2].size(), count);
      if (ec != std::errc{} || ptr != tokens[2].data() + tokens[2].size()) {
        throw ParseError("bad element count", line_no);
      }
      elements.push_back({std::string(tokens[1]), count, {}});
    } else if (key == "property") {
      if (elements.empty()) throw ParseError("property before element", line_no);
      if (tokens.size() == 3) {
        elements.back().properties.emplace_back(tokens[2]);
      } else if (tokens.size() == 5 && tokens[1] == "list") {
        if (elements.back().name == "vertex") throw ParseError("list property on vertex", line_no);
        elements.back().properties.emplace_back(tokens[4]);
      } else {
        throw ParseError("malformed property line", line_no);
      }
    } else if (key == "end_header") {
      ended = true;
      break;
    } else {
      throw ParseError("unknown header keyword '" + std::string(key) + "'", line_no);
    }
  }
  if (!ended) throw ParseError("missing end_header", line_no);

  std::vector<Point3> points;
  for (const PlyElement& el : elements) {
    if (el.name != "vertex") {
      // Skip other elements (faces etc.), one record per line.
      for (std::size_t r = 0; r < el.count; ++r) {
        if (!next_line()) throw ParseError("truncated element '" + el.name + "'", line_no + 1);
      }
      continue;
    }
    std::ptrdiff_t ix = -1, iy = -1, iz = -1;
    for (std::size_t p = 0; p < el.properties.size(); ++p) {
      const auto i = static_cast<std::ptrdiff_t>(p);
      if (el.properties[p] == "x") ix = i;
      if (el.properties[p] == "y") iy = i;
      if (el.properties[p] == "z") iz = i;
    }
    if (ix < 0 || iy < 0 || iz < 0) throw ParseError("vertex element lacks x/y/z", line_no);
    points.reserve(el.count);
    for (std::size_t r = 0; r < el.count; ++r) {
      if (!next_line()) throw ParseError("truncated vertex list", line_no + 1);
      const auto tokens = split_ws(line);
      if (tokens.size() != el.properties.size()) {
        throw ParseError("expected " + std::to_string(el.properties.size()) + " values", line_no);
      }
      points.push_back({parse_real(tokens[static_cast<std::size_t>(ix)], line_no),
                        parse_real(tokens[static_cast<std::size_t>(iy)], line_no),
                        parse_real(tokens[static_cast<std::size_t>(iz)], line_no)});
    }
  }
  return points;
}

std::vector<Point3> read_f32le(const std::filesystem::path& path) {
  auto in = open_or_throw(path, std::ios::in | std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.empty()) throw EmptyInputError("empty file " + path.string());
  if (bytes.size() % 12 != 0) {
    // The "line" of a binary file is its 1-based record number.
    throw ParseError("length " + std::to_string(bytes.size()) + " is not a multiple of 12",
                     bytes.size() / 12 + 1);
  }
  std::vector<Point3> points(bytes.size() / 12);
  for (std::size_t r = 0; r < points.size(); ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      std::uint32_t bits = 0;
      std::memcpy(&bits, bytes.data() + r * 12 + c * 4, 4);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
      const float v = std::bit_cast<float>(bits);
      if (!std::isfinite(v)) throw ParseError("non-finite coordinate", r + 1);
      points[r][c] = v;
    }
  }
  return points;
}

}  // namespace

CloudFormat parse_cloud_format(std::string_view name) {
  if (name == "xyz" || name == "xyz_text") return CloudFormat::xyz_text;
  if (name == "ply" || name == "ply_ascii") return CloudFormat::ply_ascii;
  if (name == "bin" || name == "f32le_bin") return CloudFormat::f32le_bin;
  throw ArgumentError("unknown cloud format '" + std::string(name) + "'");
}

PointCloud load_pointcloud(const std::filesystem::path& path, CloudFormat format) {
  std::vector<Point3> points;
  switch (format) {
    case CloudFormat::xyz_text: points = read_xyz(path); break;
    case CloudFormat::ply_ascii: points = read_ply(path); break;
    case CloudFormat::f32le_bin: points = read_f32le(path); break;
  }
  if (points.empty()) throw EmptyInputError("no points in " + path.string());
  return PointCloud(std::move(points));
}

void save_xyz(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  for (const Point3& p : cloud) out << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace zigscan
