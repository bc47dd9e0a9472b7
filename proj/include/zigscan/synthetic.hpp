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
#include <string_view>

#include "zigscan/geometry.hpp"

namespace zigscan {

// Zero-data clouds for tests, demos and benchmarks.
enum class SyntheticShape { cube, sphere, blobs };

SyntheticShape parse_synthetic_shape(std::string_view name);
std::string_view to_string(SyntheticShape shape);

// cube: uniform in [0,1]^3. sphere: uniform on the unit sphere surface.
// blobs: four isotropic Gaussian clusters (sigma 0.15) at random centers.
PointCloud make_synthetic(SyntheticShape shape, std::size_t n, std::uint64_t seed);

}  // namespace zigscan
