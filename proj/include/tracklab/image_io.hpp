/* Copyright 2026 The Tracklab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>

#include "tracklab/videodata.hpp"

namespace tracklab {

// Netpbm codecs (P2/P3 ascii, P5/P6 binary, 8-bit). Grayscale images are
// replicated across the three channels on load.

Frame read_netpbm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Frame& frame);

}  // namespace tracklab
