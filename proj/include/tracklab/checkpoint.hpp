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
#include <string>

#include "tracklab/model.hpp"

namespace tracklab {

/// Serializes the model (architecture, metadata, parameter arrays, channel
/// masks) as one JSON document. Doubles use shortest round-trip formatting,
/// so equal models produce byte-equal checkpoints.
std::string serialize_checkpoint(const TrackerModel& model);
TrackerModel deserialize_checkpoint(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const TrackerModel& model);
TrackerModel load_checkpoint(const std::filesystem::path& path);

/// SHA-1 of the serialized checkpoint.
std::string checkpoint_hash(const TrackerModel& model);

}  // namespace tracklab
