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

#include "tracklab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tracklab/checkpoint.hpp"
#include "tracklab/diagnostics.hpp"
#include "tracklab/error.hpp"
#include "tracklab/rng.hpp"
#include "tracklab/sha1.hpp"
#include "tracklab/tracker.hpp"

namespace tracklab::harness {

using nlohmann::json;

namespace {

SyntheticSceneSpec scene_spec(const DatasetSection& d, int index) {
    SyntheticSceneSpec spec;
    spec.canvas_w = d.canvas;
    spec.canvas_h = d.canvas;
    spec.n_frames = d.frames;
    spec.shape = index % 2 == 0 ? ObjectShape::square : ObjectShape::disc;
    spec.object_min = d.object_min;
    spec.object_max = d.object_max;
    spec.speed_min = d.speed_min;
    spec.speed_max = d.speed_max;
    spec.distractor_count = d.distractors;
    return spec;
}

std::pair<std::vector<Video>, std::vector<TrackAnnotation>> load_otb_set(
    const std::filesystem::path& root) {
    std::vector<std::filesystem::path> dirs;
    for (const auto& entry : std::filesystem::directory_iterator(root))
        if (entry.is_directory() && std::filesystem::exists(entry.path() / "groundtruth_rect.txt"))
            dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) throw IoError("no OTB sequences under " + root.string());
    std::vector<Video> videos;
    std::vector<TrackAnnotation> anns;
    for (const auto& d : dirs) {
        auto [v, a] = load_otb_sequence(d);
        videos.push_back(std::move(v));
        anns.push_back(std::move(a));
    }
    return {std::move(videos), std::move(anns)};
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

json report_to_json(const MetricReport& r) {
    json j;
    j["attack_mode"] = r.attack_mode;
    j["tau"] = r.tau;
    j["psi"] = r.psi;
    j["trigger"] = r.trigger_name;
    j["pr_b"] = r.pr_b;
    j["npr_b"] = r.npr_b;
    j["auc_b"] = r.auc_b;
    j["msr50_b"] = r.msr50_b;
    if (r.pr_a) j["pr_a"] = *r.pr_a;
    if (r.npr_a) j["npr_a"] = *r.npr_a;
    if (r.auc_a) j["auc_a"] = *r.auc_a;
    if (r.msr50_a) j["msr50_a"] = *r.msr50_a;
    json seq = json::array();
    for (const auto& s : r.per_sequence_b)
        seq.push_back({{"id", s.id},
                       {"class", s.object_class},
                       {"pr", s.precision},
                       {"npr", s.normalized_precision},
                       {"auc", s.auc},
                       {"sr50", s.sr50},
                       {"frames", s.evaluable_frames}});
    j["per_sequence_b"] = seq;
    json seqa = json::array();
    for (const auto& s : r.per_sequence_a)
        seqa.push_back({{"id", s.id},
                        {"class", s.object_class},
                        {"pr", s.precision},
                        {"npr", s.normalized_precision},
                        {"auc", s.auc},
                        {"sr50", s.sr50},
                        {"frames", s.evaluable_frames}});
    j["per_sequence_a"] = seqa;
    return j;
}

void write_metrics_table_csv(const std::filesystem::path& path,
                             const std::vector<MetricReport>& reports) {
    std::ostringstream out;
    out << "metric,B";
    for (const auto& r : reports)
        if (r.attack_mode != "none") out << "," << r.attack_mode << "_A";
    out << "\n";
    out.precision(10);
    const MetricReport& base = reports.front();
    auto row = [&](const char* name, double b, auto getter) {
        out << name << "," << b;
        for (const auto& r : reports)
            if (r.attack_mode != "none") {
                const auto v = getter(r);
                out << ",";
                if (v) out << *v;
            }
        out << "\n";
    };
    row("pr", base.pr_b, [](const MetricReport& r) { return r.pr_a; });
    row("npr", base.npr_b, [](const MetricReport& r) { return r.npr_a; });
    row("auc", base.auc_b, [](const MetricReport& r) { return r.auc_a; });
    row("msr50", base.msr50_b, [](const MetricReport& r) { return r.msr50_a; });
    write_text(path, out.str());
}

void write_curves(const std::filesystem::path& dir, const MetricReport& r) {
    const std::string tag = r.attack_mode;
    std::ostringstream succ;
    succ << "threshold,success_b" << (r.success_curve_a.empty() ? "" : ",success_a") << "\n";
    succ.precision(10);
    for (std::size_t i = 0; i < r.success_curve_b.size(); ++i) {
        succ << (static_cast<double>(i) / 50.0) << "," << r.success_curve_b[i];
        if (!r.success_curve_a.empty()) succ << "," << r.success_curve_a[i];
        succ << "\n";
    }
    write_text(dir / ("success_curve_" + tag + ".csv"), succ.str());

    std::ostringstream prec;
    prec << "threshold_px,precision_b" << (r.precision_curve_a.empty() ? "" : ",precision_a")
         << "\n";
    prec.precision(10);
    for (std::size_t i = 0; i < r.precision_curve_b.size(); ++i) {
        prec << i << "," << r.precision_curve_b[i];
        if (!r.precision_curve_a.empty()) prec << "," << r.precision_curve_a[i];
        prec << "\n";
    }
    write_text(dir / ("precision_curve_" + tag + ".csv"), prec.str());

    std::vector<std::string> names{"B"};
    std::vector<std::vector<double>> series{r.success_curve_b};
    if (!r.success_curve_a.empty()) {
        names.push_back("A");
        series.push_back(r.success_curve_a);
    }
    write_line_plot(dir / ("success_plot_" + tag + ".svg"), "success plot (" + tag + ")", names,
                    series);
}

void write_loss_trace_csv(const std::filesystem::path& path, const LossTrace& trace) {
    std::ostringstream out;
    out << "epoch,tracking_loss,feature_loss,poison_loss\n";
    out.precision(12);
    for (const auto& row : trace) {
        out << row.epoch << "," << row.mean_tracking_loss << ",";
        if (!std::isnan(row.mean_feature_loss)) out << row.mean_feature_loss;
        out << ",";
        if (!std::isnan(row.mean_poison_loss)) out << row.mean_poison_loss;
        out << "\n";
    }
    write_text(path, out.str());
}

AttackMode mode_from_name(const std::string& name, double tau) {
    if (name == "none") return AttackMode::none();
    if (name == "one_shot") return AttackMode::one_shot();
    if (name == "few_shot") return AttackMode::few_shot(tau);
    throw ArgumentError("unknown attack mode: " + name);
}

std::uint64_t id_hash(const std::string& id) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : id) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

VideoTransform make_preprocess(const ExperimentConfig& cfg) {
    std::vector<DefenseStep> steps;
    for (const auto& d : cfg.defenses)
        if (d.kind == DefenseStep::Kind::jitter || d.kind == DefenseStep::Kind::noise)
            steps.push_back(d);
    if (steps.empty()) return nullptr;
    return [steps](const Video& video) {
        Video out = video;
        for (const auto& s : steps) {
            if (s.kind == DefenseStep::Kind::jitter) {
                JitterSpec spec = s.jitter;
                spec.seed = mix_seed(spec.seed, id_hash(video.id));
                out = jitter_video(out, spec);
            } else {
                out = gaussian_noise_video(out, s.noise_std,
                                           mix_seed(s.noise_seed, id_hash(video.id)));
            }
        }
        return out;
    };
}

}  // namespace

std::pair<std::vector<Video>, std::vector<TrackAnnotation>> build_train_videos(
    const ExperimentConfig& cfg) {
    if (cfg.dataset.source == "otb") {
        const auto train_dir = cfg.dataset.otb_path / "train";
        return load_otb_set(std::filesystem::is_directory(train_dir) ? train_dir
                                                                     : cfg.dataset.otb_path);
    }
    std::vector<Video> videos;
    std::vector<TrackAnnotation> anns;
    for (int i = 0; i < cfg.dataset.train_videos; ++i) {
        auto [v, a] = generate_synthetic_video(scene_spec(cfg.dataset, i),
                                               mix_seed(cfg.seed, 0x7100 + static_cast<std::uint64_t>(i)));
        v.id = "train-" + std::to_string(i);
        videos.push_back(std::move(v));
        anns.push_back(std::move(a));
    }
    return {std::move(videos), std::move(anns)};
}

Benchmark build_eval_benchmark(const ExperimentConfig& cfg) {
    Benchmark bench;
    if (cfg.dataset.source == "otb") {
        const auto eval_dir = cfg.dataset.otb_path / "eval";
        auto [v, a] = load_otb_set(std::filesystem::is_directory(eval_dir) ? eval_dir
                                                                           : cfg.dataset.otb_path);
        bench.videos = std::move(v);
        bench.annotations = std::move(a);
        return bench;
    }
    for (int i = 0; i < cfg.dataset.eval_videos; ++i) {
        auto [v, a] = generate_synthetic_video(scene_spec(cfg.dataset, i),
                                               mix_seed(cfg.seed, 0xE600 + static_cast<std::uint64_t>(i)));
        v.id = "eval-" + std::to_string(i);
        bench.videos.push_back(std::move(v));
        bench.annotations.push_back(std::move(a));
    }
    return bench;
}

std::vector<TrainingSample> build_train_samples(const ExperimentConfig& cfg) {
    const auto [videos, anns] = build_train_videos(cfg);
    TrainConfig tcfg = cfg.train;
    return build_training_set(videos, anns, cfg.train.samples_per_epoch, mix_seed(cfg.seed, 0x7A1),
                              cfg.tracker, tcfg);
}

std::filesystem::path make_run_dir(const ExperimentConfig& cfg, const std::string& kind) {
    std::filesystem::create_directories(cfg.output_dir);
    const std::string base = timestamp_utc() + "_" + kind + "_" + cfg.hash().substr(0, 8);
    std::filesystem::path dir = cfg.output_dir / base;
    for (int n = 1; std::filesystem::exists(dir); ++n)
        dir = cfg.output_dir / (base + "-" + std::to_string(n));
    std::filesystem::create_directories(dir);
    return dir;
}

TrainOutputs run_train(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();

    TrainConfig tcfg = cfg.train;
    tcfg.seed = mix_seed(cfg.seed, 0x7e16);

    const auto samples = build_train_samples(cfg);
    TrainResult result = [&] {
        switch (cfg.attack_kind) {
            case AttackKind::benign: return train_benign(samples, cfg.tracker, tcfg);
            case AttackKind::boba: return train_boba(samples, cfg.tracker, tcfg, cfg.attack);
            case AttackKind::fsba: return train_fsba(samples, cfg.tracker, tcfg, cfg.attack);
        }
        throw ConfigError("bad attack kind");
    }();

    const auto t1 = std::chrono::steady_clock::now();

    TrainOutputs out;
    out.run_dir = make_run_dir(cfg, "train-" + to_string(cfg.attack_kind));
    out.checkpoint_path = out.run_dir / "checkpoint.json";
    out.trace = result.trace;
    out.seconds = std::chrono::duration<double>(t1 - t0).count();
    save_checkpoint(out.checkpoint_path, result.model);
    out.checkpoint_hash = checkpoint_hash(result.model);

    write_text(out.run_dir / "config.ini", cfg.serialize());
    write_loss_trace_csv(out.run_dir / "loss_trace.csv", result.trace);

    json record;
    record["command"] = "train";
    record["status"] = "ok";
    record["config_hash"] = cfg.hash();
    record["checkpoint_hash"] = out.checkpoint_hash;
    record["provenance"] = result.model.provenance;
    record["seed"] = cfg.seed;
    record["train_seconds"] = out.seconds;
    record["epochs"] = static_cast<int>(result.trace.size());
    if (!result.trace.empty()) {
        record["final_tracking_loss"] = result.trace.back().mean_tracking_loss;
        if (!std::isnan(result.trace.back().mean_feature_loss))
            record["final_feature_loss"] = result.trace.back().mean_feature_loss;
        if (!std::isnan(result.trace.back().mean_poison_loss))
            record["final_poison_loss"] = result.trace.back().mean_poison_loss;
    }
    write_text(out.run_dir / "run_record.json", record.dump(2) + "\n");
    return out;
}

namespace {

EvalOutputs eval_impl(const ExperimentConfig& cfg, const TrackerModel& model,
                      const VideoTransform& preprocess, const std::string& kind) {
    const Benchmark bench = build_eval_benchmark(cfg);
    const TriggerPattern trig = resolve_trigger(cfg.attack.trigger);
    const PoisonPlacement place{cfg.eval.anchor, cfg.eval.psi};

    EvalOutputs out;
    out.run_dir = make_run_dir(cfg, kind);
    const auto t0 = std::chrono::steady_clock::now();

    json modes_json = json::array();
    for (const auto& name : cfg.eval.modes) {
        const AttackMode mode = mode_from_name(name, cfg.eval.tau);
        MetricReport report = evaluate(model, bench, trig, place, mode, preprocess);
        write_curves(out.run_dir, report);
        json jr = report_to_json(report);
        if (mode.kind != AttackModeKind::none) {
            const PromisingVerdict v =
                is_promising(report, PromisingnessBudget{cfg.eval.alpha, cfg.eval.beta, "auc"});
            jr["promising"] = {{"effective", v.effective},
                               {"stealthy", v.stealthy},
                               {"promising", v.promising()},
                               {"loss_b", v.loss_b},
                               {"loss_a", v.loss_a},
                               {"effectiveness_margin", v.effectiveness_margin},
                               {"stealthiness_margin", v.stealthiness_margin},
                               {"alpha", cfg.eval.alpha},
                               {"beta", cfg.eval.beta}};
        }
        modes_json.push_back(jr);
        out.reports.push_back(std::move(report));
    }
    const auto t1 = std::chrono::steady_clock::now();

    write_metrics_table_csv(out.run_dir / "metrics_table.csv", out.reports);
    json record;
    record["command"] = kind;
    record["status"] = "ok";
    record["config_hash"] = cfg.hash();
    record["provenance"] = model.provenance;
    record["eval_seconds"] = std::chrono::duration<double>(t1 - t0).count();
    record["reports"] = modes_json;
    write_text(out.run_dir / "run_record.json", record.dump(2) + "\n");
    write_text(out.run_dir / "config.ini", cfg.serialize());
    return out;
}

}  // namespace

EvalOutputs run_eval(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint) {
    const TrackerModel model = load_checkpoint(checkpoint);
    return eval_impl(cfg, model, nullptr, "eval");
}

EvalOutputs run_defend(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint) {
    TrackerModel model = load_checkpoint(checkpoint);
    if (cfg.defenses.empty()) throw ConfigError("defend: config has no defense.pipeline entries");

    // Model-reconstruction defenses first.
    for (const auto& step : cfg.defenses) {
        if (step.kind == DefenseStep::Kind::finetune) {
            auto samples = build_train_samples(cfg);
            const auto keep =
                std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(
                                             step.finetune_fraction * static_cast<double>(samples.size()))));
            samples.resize(keep);
            TrainConfig ft = cfg.train;
            ft.seed = mix_seed(cfg.seed, 0xF17E);
            ft.epochs = step.finetune_epochs;
            ft.lr = cfg.train.lr_final > 0.0 ? cfg.train.lr_final : cfg.train.lr;
            ft.lr_final = 0.0;
            model = fine_tune(model, samples, ft).model;
        } else if (step.kind == DefenseStep::Kind::prune) {
            auto samples = build_train_samples(cfg);
            const auto keep = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::floor(step.prune.calibration_fraction *
                                                       static_cast<double>(samples.size()))));
            std::vector<Frame> crops;
            for (std::size_t i = 0; i < keep; ++i) crops.push_back(samples[i].search);
            model = prune_channels(model, crops, step.prune);
        }
    }

    EvalOutputs out = eval_impl(cfg, model, make_preprocess(cfg), "defend");
    save_checkpoint(out.run_dir / "defended_checkpoint.json", model);
    return out;
}

std::filesystem::path run_sweep(const ExperimentConfig& cfg, const std::string& parameter,
                                const std::vector<std::string>& values,
                                const std::optional<std::filesystem::path>& checkpoint) {
    if (values.empty()) throw ArgumentError("sweep: empty value list");
    const bool eval_time = parameter == "psi" || parameter == "tau";
    const bool train_time = parameter == "gamma" || parameter == "trigger";
    if (!eval_time && !train_time)
        throw ArgumentError("sweep parameter must be one of psi, tau, gamma, trigger");

    const auto run_dir = make_run_dir(cfg, "sweep-" + parameter);

    // Evaluation-time sweeps reuse one model; train-time sweeps retrain.
    std::optional<TrackerModel> base_model;
    if (eval_time) {
        if (checkpoint) {
            base_model = load_checkpoint(*checkpoint);
        } else {
            const auto t = run_train(cfg);
            base_model = load_checkpoint(t.checkpoint_path);
        }
    }

    std::ostringstream csv;
    csv << "parameter,value,mode,pr_b,npr_b,auc_b,msr50_b,pr_a,npr_a,auc_a,msr50_a\n";
    csv.precision(10);

    const Benchmark bench = build_eval_benchmark(cfg);
    for (const auto& value : values) {
        ExperimentConfig run_cfg = cfg;
        if (parameter == "psi") run_cfg.eval.psi = std::stod(value);
        else if (parameter == "tau") run_cfg.eval.tau = std::stod(value);
        else if (parameter == "gamma") run_cfg.attack.poisoning_rate = std::stod(value);
        else run_cfg.attack.trigger = value;
        run_cfg.validate();

        TrackerModel model = [&] {
            if (base_model) return *base_model;
            const auto t = run_train(run_cfg);
            return load_checkpoint(t.checkpoint_path);
        }();

        const TriggerPattern trig = resolve_trigger(run_cfg.attack.trigger);
        const PoisonPlacement place{run_cfg.eval.anchor, run_cfg.eval.psi};
        for (const auto& mode_name : run_cfg.eval.modes) {
            if (mode_name == "none") continue;
            const AttackMode mode = mode_from_name(mode_name, run_cfg.eval.tau);
            const MetricReport r = evaluate(model, bench, trig, place, mode);
            csv << parameter << "," << value << "," << mode_name << "," << r.pr_b << "," << r.npr_b
                << "," << r.auc_b << "," << r.msr50_b << "," << *r.pr_a << "," << *r.npr_a << ","
                << *r.auc_a << "," << *r.msr50_a << "\n";
        }
    }
    write_text(run_dir / "sweep.csv", csv.str());
    write_text(run_dir / "config.ini", cfg.serialize());
    return run_dir;
}

DiagnoseOutputs run_diagnose(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint,
                             bool embed_templates) {
    const TrackerModel model = load_checkpoint(checkpoint);
    const Benchmark bench = build_eval_benchmark(cfg);
    const TriggerPattern trig = resolve_trigger(cfg.attack.trigger);
    // Diagnostics measure what the feature loss optimizes: crop-centered
    // placement over the same layer set.
    const PoisonPlacement place{PoisonAnchor::crop_center, cfg.attack.modification_rate};
    const auto layers = cfg.attack.effective_layers(model.cfg.backbone.n_blocks());

    std::vector<Frame> crops;
    for (std::size_t v = 0; v < bench.videos.size(); ++v) {
        const auto& video = bench.videos[v];
        const auto& ann = bench.annotations[v];
        if (embed_templates) {
            crops.push_back(crop_template(video.frames.front(), ann.boxes.front(), model.cfg));
        } else {
            crops.push_back(
                crop_search(video.frames.front(), ann.boxes.front(), model.cfg).first);
        }
    }

    DiagnoseOutputs out;
    out.run_dir = make_run_dir(cfg, "diagnose");
    out.stats = separation_stats(model, crops, trig, place, layers);
    export_embeddings(model, crops, trig, place, layers, out.run_dir / "embeddings.csv");

    // Loss gap on a small deterministic sample set from the eval material.
    const auto samples = build_training_set(bench.videos, bench.annotations, 32,
                                            mix_seed(cfg.seed, 0xD1A6), model.cfg, cfg.train);
    out.gap = branch_loss_gap(model, samples, trig, place);

    json record;
    record["command"] = "diagnose";
    record["status"] = "ok";
    record["config_hash"] = cfg.hash();
    record["provenance"] = model.provenance;
    record["embedded"] = embed_templates ? "templates" : "search_regions";
    record["separation"] = {{"mean_l1_pair_distance", out.stats.mean_l1_pair_distance},
                            {"benign_dispersion", out.stats.benign_dispersion},
                            {"poisoned_dispersion", out.stats.poisoned_dispersion},
                            {"separation_ratio", out.stats.separation_ratio},
                            {"sample_count", out.stats.sample_count}};
    record["loss_gap"] = {{"mean_poisoned_loss", out.gap.mean_poisoned_loss},
                          {"mean_benign_loss", out.gap.mean_benign_loss},
                          {"gap", out.gap.gap},
                          {"provenance", out.gap.provenance}};
    write_text(out.run_dir / "run_record.json", record.dump(2) + "\n");
    write_text(out.run_dir / "config.ini", cfg.serialize());
    return out;
}

void run_synth(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    const auto [videos, anns] = build_train_videos(cfg);
    for (std::size_t i = 0; i < videos.size(); ++i)
        write_otb_sequence(out_dir / "train" / videos[i].id, videos[i], anns[i]);
    const Benchmark bench = build_eval_benchmark(cfg);
    for (std::size_t i = 0; i < bench.videos.size(); ++i)
        write_otb_sequence(out_dir / "eval" / bench.videos[i].id, bench.videos[i],
                           bench.annotations[i]);
}

void write_line_plot(const std::filesystem::path& path, const std::string& title,
                     const std::vector<std::string>& names,
                     const std::vector<std::vector<double>>& series) {
    if (series.empty() || series.front().empty()) throw ArgumentError("empty plot series");
    const int w = 480, h = 320, margin = 40;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << w / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" << title
        << "</text>\n";
    svg << "<line x1=\"" << margin << "\" y1=\"" << h - margin << "\" x2=\"" << w - margin
        << "\" y2=\"" << h - margin << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << h - margin << "\" stroke=\"black\"/>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& v = series[s];
        svg << "<polyline fill=\"none\" stroke=\"" << colors[s % 4] << "\" points=\"";
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double x = margin + (w - 2.0 * margin) * static_cast<double>(i) /
                                          static_cast<double>(v.size() - 1);
            const double y = h - margin - (h - 2.0 * margin) * std::clamp(v[i], 0.0, 1.0);
            svg << x << "," << y << " ";
        }
        svg << "\"/>\n";
        svg << "<text x=\"" << w - margin + 4 << "\" y=\"" << margin + 14 * (s + 1)
            << "\" font-size=\"11\" fill=\"" << colors[s % 4] << "\">"
            << (s < names.size() ? names[s] : "series") << "</text>\n";
    }
    svg << "</svg>\n";
    write_text(path, svg.str());
}

}  // namespace tracklab::harness
