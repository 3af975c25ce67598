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

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tracklab/config.hpp"
#include "tracklab/error.hpp"
#include "tracklab/harness.hpp"
#include "tracklab/kernels.hpp"

namespace {

tracklab::ExperimentConfig load_config(const std::string& path) {
    auto cfg = tracklab::ExperimentConfig::load(path);
    if (const char* out = std::getenv("TRACKLAB_OUT_DIR"); out && *out) cfg.output_dir = out;
    return cfg;
}

std::vector<std::string> split_values(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : csv) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* threads = std::getenv("TRACKLAB_THREADS"); threads && *threads)
        tracklab::kernels::set_thread_count(std::atoi(threads));

    CLI::App app{"siamese-tracker backdoor toolkit"};
    app.require_subcommand(1);

    std::string config_path, checkpoint_path, out_dir, param, values_csv;
    bool embed_templates = false;

    auto* train = app.add_subcommand("train", "train a benign/boba/fsba model from a config");
    train->add_option("--config", config_path, "experiment config (.ini)")->required();

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint under the configured modes");
    eval->add_option("--config", config_path)->required();
    eval->add_option("--checkpoint", checkpoint_path)->required();

    auto* sweep = app.add_subcommand("sweep", "parameter study over psi/tau/gamma/trigger");
    sweep->add_option("--config", config_path)->required();
    sweep->add_option("--param", param, "psi|tau|gamma|trigger")->required();
    sweep->add_option("--values", values_csv, "comma-separated values")->required();
    sweep->add_option("--checkpoint", checkpoint_path,
                      "reuse this model for eval-time sweeps (psi/tau)");

    auto* defend = app.add_subcommand("defend", "apply the configured defense pipeline, then eval");
    defend->add_option("--config", config_path)->required();
    defend->add_option("--checkpoint", checkpoint_path)->required();

    auto* diagnose = app.add_subcommand("diagnose", "feature separation stats + embedding export");
    diagnose->add_option("--config", config_path)->required();
    diagnose->add_option("--checkpoint", checkpoint_path)->required();
    diagnose->add_flag("--templates", embed_templates, "embed template crops instead of search");

    auto* synth = app.add_subcommand("synth", "write the synthetic benchmark to disk");
    synth->add_option("--config", config_path)->required();
    synth->add_option("--out", out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            const auto out = tracklab::harness::run_train(load_config(config_path));
            std::cout << "run_dir: " << out.run_dir.string() << "\n";
            std::cout << "checkpoint: " << out.checkpoint_path.string() << "\n";
            std::cout << "checkpoint_hash: " << out.checkpoint_hash << "\n";
            std::cout << "train_seconds: " << out.seconds << "\n";
        } else if (eval->parsed()) {
            const auto out = tracklab::harness::run_eval(load_config(config_path), checkpoint_path);
            std::cout << "run_dir: " << out.run_dir.string() << "\n";
            for (const auto& r : out.reports) {
                std::cout << "mode=" << r.attack_mode << " pr_b=" << r.pr_b << " auc_b=" << r.auc_b;
                if (r.pr_a) std::cout << " pr_a=" << *r.pr_a << " auc_a=" << *r.auc_a;
                std::cout << "\n";
            }
        } else if (sweep->parsed()) {
            std::optional<std::filesystem::path> ckpt;
            if (!checkpoint_path.empty()) ckpt = checkpoint_path;
            const auto dir = tracklab::harness::run_sweep(load_config(config_path), param,
                                                          split_values(values_csv), ckpt);
            std::cout << "run_dir: " << dir.string() << "\n";
        } else if (defend->parsed()) {
            const auto out =
                tracklab::harness::run_defend(load_config(config_path), checkpoint_path);
            std::cout << "run_dir: " << out.run_dir.string() << "\n";
            for (const auto& r : out.reports) {
                std::cout << "mode=" << r.attack_mode << " pr_b=" << r.pr_b << " auc_b=" << r.auc_b;
                if (r.pr_a) std::cout << " pr_a=" << *r.pr_a << " auc_a=" << *r.auc_a;
                std::cout << "\n";
            }
        } else if (diagnose->parsed()) {
            const auto out = tracklab::harness::run_diagnose(load_config(config_path),
                                                             checkpoint_path, embed_templates);
            std::cout << "run_dir: " << out.run_dir.string() << "\n";
            std::cout << "mean_l1_pair_distance: " << out.stats.mean_l1_pair_distance << "\n";
            std::cout << "separation_ratio: " << out.stats.separation_ratio << "\n";
            std::cout << "loss_gap: " << out.gap.gap << "\n";
        } else if (synth->parsed()) {
            tracklab::harness::run_synth(load_config(config_path), out_dir);
            std::cout << "wrote benchmark to " << out_dir << "\n";
        }
    } catch (const tracklab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
