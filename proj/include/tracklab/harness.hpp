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
#include <optional>
#include <string>
#include <vector>

#include "tracklab/config.hpp"
#include "tracklab/diagnostics.hpp"
#include "tracklab/metrics.hpp"

namespace tracklab::harness {

/// Deterministic synthetic (or OTB-loaded) training material.
std::pair<std::vector<Video>, std::vector<TrackAnnotation>> build_train_videos(
    const ExperimentConfig& cfg);

Benchmark build_eval_benchmark(const ExperimentConfig& cfg);

/// Training samples for the configured dataset, one call per run.
std::vector<TrainingSample> build_train_samples(const ExperimentConfig& cfg);

/// Creates a fresh, never-reused run directory under cfg.output_dir.
std::filesystem::path make_run_dir(const ExperimentConfig& cfg, const std::string& kind);

struct TrainOutputs {
    std::filesystem::path run_dir;
    std::filesystem::path checkpoint_path;
    std::string checkpoint_hash;
    LossTrace trace;
    double seconds = 0.0;
};

/// Dispatches to the configured trainer, persists the checkpoint, the loss
/// trace CSV, and a run record JSON.
TrainOutputs run_train(const ExperimentConfig& cfg);

struct EvalOutputs {
    std::filesystem::path run_dir;
    std::vector<MetricReport> reports;  // one per configured mode
};

/// Evaluates a checkpoint under every configured attack mode; writes the B/A
/// table (CSV + JSON), curve CSVs, and line plots.
EvalOutputs run_eval(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint);

/// Applies the configured defense pipeline (model defenses first, then
/// frame-wise video defenses) and evaluates the defended setup.
EvalOutputs run_defend(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint);

/// Parameter study over psi / tau (evaluation-time) or gamma / trigger
/// (retrains per value). Writes one aggregated CSV keyed by value.
std::filesystem::path run_sweep(const ExperimentConfig& cfg, const std::string& parameter,
                                const std::vector<std::string>& values,
                                const std::optional<std::filesystem::path>& checkpoint);

struct DiagnoseOutputs {
    std::filesystem::path run_dir;
    SeparationStats stats;
    BranchLossGap gap;
};

/// Separation statistics, embeddings CSV export, and the poisoned-vs-benign
/// loss gap for a checkpoint. Embeds search-region crops by default.
DiagnoseOutputs run_diagnose(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint,
                             bool embed_templates);

/// Writes the synthetic benchmark to disk in the OTB directory layout.
void run_synth(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Minimal SVG polyline plot (one line per named series of equal length).
void write_line_plot(const std::filesystem::path& path, const std::string& title,
                     const std::vector<std::string>& names,
                     const std::vector<std::vector<double>>& series);

}  // namespace tracklab::harness
