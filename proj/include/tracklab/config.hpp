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
#include <vector>

#include "tracklab/attacks.hpp"
#include "tracklab/defenses.hpp"
#include "tracklab/metrics.hpp"
#include "tracklab/model.hpp"
#include "tracklab/videodata.hpp"

namespace tracklab {

enum class AttackKind { benign, boba, fsba };

std::string to_string(AttackKind kind);
AttackKind attack_kind_from_string(const std::string& s);

struct DatasetSection {
    std::string source = "synthetic";  // synthetic | otb
    std::filesystem::path otb_path;
    int train_videos = 64;
    int eval_videos = 16;
    int canvas = 96;
    int frames = 40;
    int object_min = 12;
    int object_max = 20;
    double speed_min = 0.8;
    double speed_max = 2.2;
    int distractors = 1;
};

/// One defense, parsed from a compact "name:arg:arg" spec string:
///   jitter:<hue|contrast|brightness|saturation>:<budget>[:seed]
///   noise:<std>[:seed]
///   finetune:<fraction>[:epochs]
///   prune:<rate>[:layer]
struct DefenseStep {
    enum class Kind { jitter, noise, finetune, prune } kind = Kind::jitter;
    JitterSpec jitter;
    double noise_std = 0.0;
    std::uint64_t noise_seed = 0;
    double finetune_fraction = 0.10;
    int finetune_epochs = 20;
    PruneSpec prune;
    std::string spec_text;
};

struct EvalSection {
    std::vector<std::string> modes{"none", "one_shot", "few_shot"};
    double tau = 0.10;
    double psi = 0.04;
    PoisonAnchor anchor = PoisonAnchor::box_center;
    double alpha = 0.3;
    double beta = 0.5;
};

/// Whole-experiment configuration; one INI-style file with sections matching
/// the module boundaries. Unknown keys are rejected.
struct ExperimentConfig {
    std::uint64_t seed = 7;
    std::filesystem::path output_dir = "runs";

    DatasetSection dataset;
    TrackerConfig tracker;
    TrainConfig train;
    AttackKind attack_kind = AttackKind::benign;
    AttackConfig attack;
    EvalSection eval;
    std::vector<DefenseStep> defenses;

    /// Parses and validates; throws ConfigError listing every violated key.
    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig load(const std::filesystem::path& path);

    /// Canonical serialization (stable key order); parse(serialize()) is
    /// semantically identical.
    std::string serialize() const;

    /// SHA-1 of the canonical serialization.
    std::string hash() const;

    void validate() const;
};

DefenseStep parse_defense_step(const std::string& spec);

}  // namespace tracklab
