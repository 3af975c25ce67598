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

#include "tracklab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "tracklab/error.hpp"
#include "tracklab/sha1.hpp"

namespace tracklab {

std::string to_string(AttackKind kind) {
    switch (kind) {
        case AttackKind::benign: return "benign";
        case AttackKind::boba: return "boba";
        case AttackKind::fsba: return "fsba";
    }
    return "benign";
}

AttackKind attack_kind_from_string(const std::string& s) {
    if (s == "benign") return AttackKind::benign;
    if (s == "boba") return AttackKind::boba;
    if (s == "fsba") return AttackKind::fsba;
    throw ConfigError("attack.kind must be benign, boba, or fsba (got \"" + s + "\")");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

using Section = std::map<std::string, std::string>;
using Ini = std::map<std::string, Section>;

Ini parse_ini(const std::string& text) {
    Ini ini;
    std::istringstream ss(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section");
            section = trim(t.substr(1, t.size() - 2));
            ini[section];
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": key outside a section");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (ini[section].count(key))
            throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key " + key);
        ini[section][key] = value;
    }
    return ini;
}

/// Tracks which keys were consumed so leftovers can be reported as errors.
struct SectionReader {
    const std::string name;
    const Section* section;
    std::vector<std::string>& errors;
    std::vector<std::string> consumed;

    bool has(const std::string& key) const { return section && section->count(key); }

    std::string raw(const std::string& key) {
        consumed.push_back(key);
        return section->at(key);
    }

    template <typename F>
    void get(const std::string& key, F&& apply) {
        if (!has(key)) return;
        const std::string v = raw(key);
        try {
            apply(v);
        } catch (const Error& e) {
            errors.push_back(name + "." + key + ": " + e.what());
        } catch (const std::exception& e) {
            errors.push_back(name + "." + key + ": " + e.what());
        }
    }

    void finish() {
        if (!section) return;
        for (const auto& [key, value] : *section)
            if (std::find(consumed.begin(), consumed.end(), key) == consumed.end())
                errors.push_back(name + "." + key + ": unknown key");
    }
};

double to_double(const std::string& v) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') throw ConfigError("not a number: \"" + v + "\"");
    return d;
}

long long to_int(const std::string& v) {
    char* end = nullptr;
    const long long i = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') throw ConfigError("not an integer: \"" + v + "\"");
    return i;
}

std::uint64_t to_u64(const std::string& v) {
    char* end = nullptr;
    const unsigned long long i = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') throw ConfigError("not an integer: \"" + v + "\"");
    return i;
}

/// Backbone spec strings look like "16x3s2r,24x3s2r,32x3s2": out_ch x kernel
/// s stride, trailing 'r' marks a ReLU block.
BackboneConfig parse_backbone(const std::string& text) {
    BackboneConfig cfg;
    cfg.blocks.clear();
    for (const auto& part : split(text, ',')) {
        if (part.empty()) throw ConfigError("empty backbone block spec");
        ConvBlockSpec b;
        std::size_t pos = 0;
        auto read_int = [&](char terminator) {
            std::size_t end = part.find(terminator, pos);
            if (end == std::string::npos) throw ConfigError("bad backbone spec: " + part);
            const int v = static_cast<int>(to_int(part.substr(pos, end - pos)));
            pos = end + 1;
            return v;
        };
        b.out_ch = read_int('x');
        b.kernel = read_int('s');
        std::string rest = part.substr(pos);
        b.relu = !rest.empty() && rest.back() == 'r';
        if (b.relu) rest.pop_back();
        b.stride = static_cast<int>(to_int(rest));
        cfg.blocks.push_back(b);
    }
    return cfg;
}

std::string backbone_to_string(const BackboneConfig& cfg) {
    std::string out;
    for (std::size_t i = 0; i < cfg.blocks.size(); ++i) {
        const auto& b = cfg.blocks[i];
        if (i) out += ",";
        out += std::to_string(b.out_ch) + "x" + std::to_string(b.kernel) + "s" +
               std::to_string(b.stride) + (b.relu ? "r" : "");
    }
    return out;
}

PoisonAnchor anchor_from_string(const std::string& s) {
    if (s == "frame_center") return PoisonAnchor::frame_center;
    if (s == "box_center") return PoisonAnchor::box_center;
    if (s == "crop_center") return PoisonAnchor::crop_center;
    throw ConfigError("anchor must be frame_center, box_center, or crop_center");
}

std::string anchor_to_string(PoisonAnchor a) {
    switch (a) {
        case PoisonAnchor::frame_center: return "frame_center";
        case PoisonAnchor::box_center: return "box_center";
        case PoisonAnchor::crop_center: return "crop_center";
    }
    return "frame_center";
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

}  // namespace

DefenseStep parse_defense_step(const std::string& spec) {
    const auto parts = split(spec, ':');
    if (parts.empty() || parts[0].empty()) throw ConfigError("empty defense spec");
    DefenseStep step;
    step.spec_text = spec;
    const std::string& kind = parts[0];
    if (kind == "jitter") {
        if (parts.size() < 3 || parts.size() > 4)
            throw ConfigError("jitter spec wants jitter:<kind>:<budget>[:seed]");
        step.kind = DefenseStep::Kind::jitter;
        if (parts[1] == "hue") step.jitter.kind = JitterKind::hue;
        else if (parts[1] == "contrast") step.jitter.kind = JitterKind::contrast;
        else if (parts[1] == "brightness") step.jitter.kind = JitterKind::brightness;
        else if (parts[1] == "saturation") step.jitter.kind = JitterKind::saturation;
        else throw ConfigError("unknown jitter kind: " + parts[1]);
        step.jitter.budget = to_double(parts[2]);
        step.jitter.seed = parts.size() > 3 ? to_u64(parts[3]) : 0;
        step.jitter.validate();
    } else if (kind == "noise") {
        if (parts.size() < 2 || parts.size() > 3)
            throw ConfigError("noise spec wants noise:<std>[:seed]");
        step.kind = DefenseStep::Kind::noise;
        step.noise_std = to_double(parts[1]);
        step.noise_seed = parts.size() > 2 ? to_u64(parts[2]) : 0;
    } else if (kind == "finetune") {
        if (parts.size() < 2 || parts.size() > 3)
            throw ConfigError("finetune spec wants finetune:<fraction>[:epochs]");
        step.kind = DefenseStep::Kind::finetune;
        step.finetune_fraction = to_double(parts[1]);
        if (step.finetune_fraction <= 0.0 || step.finetune_fraction > 1.0)
            throw ConfigError("finetune fraction must be in (0, 1]");
        if (parts.size() > 2) step.finetune_epochs = static_cast<int>(to_int(parts[2]));
    } else if (kind == "prune") {
        if (parts.size() < 2 || parts.size() > 3)
            throw ConfigError("prune spec wants prune:<rate>[:layer]");
        step.kind = DefenseStep::Kind::prune;
        step.prune.pruning_rate = to_double(parts[1]);
        if (parts.size() > 2) step.prune.target_layer = static_cast<int>(to_int(parts[2]));
        step.prune.validate();
    } else {
        throw ConfigError("unknown defense kind: " + kind);
    }
    return step;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    const Ini ini = parse_ini(text);
    ExperimentConfig cfg;
    std::vector<std::string> errors;

    static const std::vector<std::string> known_sections = {"run",    "dataset", "tracker",
                                                            "train",  "attack",  "eval",
                                                            "defense"};
    for (const auto& [name, _] : ini)
        if (std::find(known_sections.begin(), known_sections.end(), name) == known_sections.end())
            errors.push_back(name + ": unknown section");

    auto reader = [&](const char* name) {
        const auto it = ini.find(name);
        return SectionReader{name, it == ini.end() ? nullptr : &it->second, errors, {}};
    };

    {
        auto r = reader("run");
        r.get("seed", [&](const std::string& v) { cfg.seed = to_u64(v); });
        r.get("output_dir", [&](const std::string& v) { cfg.output_dir = v; });
        r.finish();
    }
    {
        auto r = reader("dataset");
        r.get("source", [&](const std::string& v) {
            if (v != "synthetic" && v != "otb")
                throw ConfigError("source must be synthetic or otb");
            cfg.dataset.source = v;
        });
        r.get("otb_path", [&](const std::string& v) { cfg.dataset.otb_path = v; });
        r.get("train_videos", [&](const std::string& v) { cfg.dataset.train_videos = static_cast<int>(to_int(v)); });
        r.get("eval_videos", [&](const std::string& v) { cfg.dataset.eval_videos = static_cast<int>(to_int(v)); });
        r.get("canvas", [&](const std::string& v) { cfg.dataset.canvas = static_cast<int>(to_int(v)); });
        r.get("frames", [&](const std::string& v) { cfg.dataset.frames = static_cast<int>(to_int(v)); });
        r.get("object_min", [&](const std::string& v) { cfg.dataset.object_min = static_cast<int>(to_int(v)); });
        r.get("object_max", [&](const std::string& v) { cfg.dataset.object_max = static_cast<int>(to_int(v)); });
        r.get("speed_min", [&](const std::string& v) { cfg.dataset.speed_min = to_double(v); });
        r.get("speed_max", [&](const std::string& v) { cfg.dataset.speed_max = to_double(v); });
        r.get("distractors", [&](const std::string& v) { cfg.dataset.distractors = static_cast<int>(to_int(v)); });
        r.finish();
    }
    {
        auto r = reader("tracker");
        r.get("backbone", [&](const std::string& v) {
            const double leak = cfg.tracker.backbone.relu_leak;
            cfg.tracker.backbone = parse_backbone(v);
            cfg.tracker.backbone.relu_leak = leak;
        });
        r.get("relu_leak", [&](const std::string& v) { cfg.tracker.backbone.relu_leak = to_double(v); });
        r.get("instance_norm", [&](const std::string& v) {
            if (v != "true" && v != "false") throw ConfigError("instance_norm must be true or false");
            cfg.tracker.backbone.instance_norm = v == "true";
        });
        r.get("template_size", [&](const std::string& v) { cfg.tracker.template_size = static_cast<int>(to_int(v)); });
        r.get("search_size", [&](const std::string& v) { cfg.tracker.search_size = static_cast<int>(to_int(v)); });
        r.get("context_margin", [&](const std::string& v) { cfg.tracker.context_margin = to_double(v); });
        r.get("label_radius_cells", [&](const std::string& v) { cfg.tracker.label_radius_cells = to_double(v); });
        r.get("window_weight", [&](const std::string& v) { cfg.tracker.window_weight = to_double(v); });
        r.get("scales", [&](const std::string& v) {
            cfg.tracker.scales.clear();
            for (const auto& p : split(v, ',')) cfg.tracker.scales.push_back(to_double(p));
        });
        r.get("scale_damping", [&](const std::string& v) { cfg.tracker.scale_damping = to_double(v); });
        r.get("scale_penalty", [&](const std::string& v) { cfg.tracker.scale_penalty = to_double(v); });
        r.finish();
    }
    {
        auto r = reader("train");
        r.get("epochs", [&](const std::string& v) { cfg.train.epochs = static_cast<int>(to_int(v)); });
        r.get("batch_size", [&](const std::string& v) { cfg.train.batch_size = static_cast<int>(to_int(v)); });
        r.get("lr", [&](const std::string& v) { cfg.train.lr = to_double(v); });
        r.get("lr_final", [&](const std::string& v) { cfg.train.lr_final = to_double(v); });
        r.get("momentum", [&](const std::string& v) { cfg.train.momentum = to_double(v); });
        r.get("weight_decay", [&](const std::string& v) { cfg.train.weight_decay = to_double(v); });
        r.get("grad_clip", [&](const std::string& v) { cfg.train.grad_clip = to_double(v); });
        r.get("samples_per_epoch", [&](const std::string& v) { cfg.train.samples_per_epoch = static_cast<int>(to_int(v)); });
        r.get("pair_gap", [&](const std::string& v) { cfg.train.max_pair_gap = static_cast<int>(to_int(v)); });
        r.get("translate_jitter", [&](const std::string& v) { cfg.train.max_translate = to_double(v); });
        r.finish();
    }
    {
        auto r = reader("attack");
        r.get("kind", [&](const std::string& v) { cfg.attack_kind = attack_kind_from_string(v); });
        r.get("gamma", [&](const std::string& v) { cfg.attack.poisoning_rate = to_double(v); });
        r.get("psi", [&](const std::string& v) { cfg.attack.modification_rate = to_double(v); });
        r.get("feature_lr_mult", [&](const std::string& v) { cfg.attack.feature_lr_mult = to_double(v); });
        r.get("trigger", [&](const std::string& v) { cfg.attack.trigger = v; });
        r.get("feature_layers", [&](const std::string& v) {
            cfg.attack.feature_layers.clear();
            for (const auto& p : split(v, ','))
                if (!p.empty()) cfg.attack.feature_layers.push_back(static_cast<int>(to_int(p)));
        });
        r.get("grad_clip", [&](const std::string& v) { cfg.attack.feature_grad_clip = to_double(v); });
        r.get("feature_step_every", [&](const std::string& v) {
            cfg.attack.feature_step_every = static_cast<int>(to_int(v));
        });
        r.get("feature_warmup_epochs", [&](const std::string& v) {
            cfg.attack.feature_warmup_epochs = static_cast<int>(to_int(v));
        });
        r.get("l1_reduction", [&](const std::string& v) {
            if (v == "mean") cfg.attack.l1_reduction = L1Reduction::mean;
            else if (v == "sum") cfg.attack.l1_reduction = L1Reduction::sum;
            else throw ConfigError("l1_reduction must be mean or sum");
        });
        r.finish();
    }
    {
        auto r = reader("eval");
        r.get("modes", [&](const std::string& v) {
            cfg.eval.modes.clear();
            for (const auto& p : split(v, ',')) {
                if (p != "none" && p != "one_shot" && p != "few_shot")
                    throw ConfigError("modes must be none, one_shot, or few_shot");
                cfg.eval.modes.push_back(p);
            }
        });
        r.get("tau", [&](const std::string& v) { cfg.eval.tau = to_double(v); });
        r.get("psi", [&](const std::string& v) { cfg.eval.psi = to_double(v); });
        r.get("anchor", [&](const std::string& v) { cfg.eval.anchor = anchor_from_string(v); });
        r.get("alpha", [&](const std::string& v) { cfg.eval.alpha = to_double(v); });
        r.get("beta", [&](const std::string& v) { cfg.eval.beta = to_double(v); });
        r.finish();
    }
    {
        auto r = reader("defense");
        r.get("pipeline", [&](const std::string& v) {
            cfg.defenses.clear();
            if (trim(v).empty()) return;
            for (const auto& p : split(v, ','))
                if (!p.empty()) cfg.defenses.push_back(parse_defense_step(p));
        });
        r.finish();
    }

    if (!errors.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw ConfigError(msg);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse(text);
}

void ExperimentConfig::validate() const {
    std::vector<std::string> errors;
    auto check = [&](bool ok, const char* msg) {
        if (!ok) errors.push_back(msg);
    };
    check(dataset.source != "otb" || !dataset.otb_path.empty(),
          "dataset.otb_path: required when source = otb");
    if (dataset.source == "otb")
        check(std::filesystem::is_directory(dataset.otb_path),
              "dataset.otb_path: directory does not exist");
    check(dataset.train_videos >= 1, "dataset.train_videos: must be >= 1");
    check(dataset.eval_videos >= 1, "dataset.eval_videos: must be >= 1");
    check(dataset.frames >= 2, "dataset.frames: must be >= 2");
    try {
        tracker.validate();
    } catch (const Error& e) {
        errors.push_back(std::string("tracker: ") + e.what());
    }
    try {
        train.validate();
    } catch (const Error& e) {
        errors.push_back(std::string("train: ") + e.what());
    }
    try {
        attack.validate();
    } catch (const Error& e) {
        errors.push_back(std::string("attack: ") + e.what());
    }
    check(eval.tau > 0.0 && eval.tau <= 1.0, "eval.tau: must be in (0, 1]");
    check(eval.psi > 0.0 && eval.psi <= 0.05, "eval.psi: must be in (0, 0.05]");
    check(eval.alpha >= 0.0, "eval.alpha: must be >= 0");
    check(eval.beta >= 0.0, "eval.beta: must be >= 0");
    check(!eval.modes.empty(), "eval.modes: must not be empty");

    if (!errors.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw ConfigError(msg);
    }
}

std::string ExperimentConfig::serialize() const {
    std::ostringstream out;
    out << "[run]\n";
    out << "seed = " << seed << "\n";
    out << "output_dir = " << output_dir.string() << "\n\n";

    out << "[dataset]\n";
    out << "source = " << dataset.source << "\n";
    if (!dataset.otb_path.empty()) out << "otb_path = " << dataset.otb_path.string() << "\n";
    out << "train_videos = " << dataset.train_videos << "\n";
    out << "eval_videos = " << dataset.eval_videos << "\n";
    out << "canvas = " << dataset.canvas << "\n";
    out << "frames = " << dataset.frames << "\n";
    out << "object_min = " << dataset.object_min << "\n";
    out << "object_max = " << dataset.object_max << "\n";
    out << "speed_min = " << fmt(dataset.speed_min) << "\n";
    out << "speed_max = " << fmt(dataset.speed_max) << "\n";
    out << "distractors = " << dataset.distractors << "\n\n";

    out << "[tracker]\n";
    out << "backbone = " << backbone_to_string(tracker.backbone) << "\n";
    out << "relu_leak = " << fmt(tracker.backbone.relu_leak) << "\n";
    out << "instance_norm = " << (tracker.backbone.instance_norm ? "true" : "false") << "\n";
    out << "template_size = " << tracker.template_size << "\n";
    out << "search_size = " << tracker.search_size << "\n";
    out << "context_margin = " << fmt(tracker.context_margin) << "\n";
    out << "label_radius_cells = " << fmt(tracker.label_radius_cells) << "\n";
    out << "window_weight = " << fmt(tracker.window_weight) << "\n";
    out << "scales = ";
    for (std::size_t i = 0; i < tracker.scales.size(); ++i)
        out << (i ? "," : "") << fmt(tracker.scales[i]);
    out << "\n";
    out << "scale_damping = " << fmt(tracker.scale_damping) << "\n";
    out << "scale_penalty = " << fmt(tracker.scale_penalty) << "\n\n";

    out << "[train]\n";
    out << "epochs = " << train.epochs << "\n";
    out << "batch_size = " << train.batch_size << "\n";
    out << "lr = " << fmt(train.lr) << "\n";
    out << "lr_final = " << fmt(train.lr_final) << "\n";
    out << "momentum = " << fmt(train.momentum) << "\n";
    out << "weight_decay = " << fmt(train.weight_decay) << "\n";
    out << "grad_clip = " << fmt(train.grad_clip) << "\n";
    out << "samples_per_epoch = " << train.samples_per_epoch << "\n";
    out << "pair_gap = " << train.max_pair_gap << "\n";
    out << "translate_jitter = " << fmt(train.max_translate) << "\n\n";

    out << "[attack]\n";
    out << "kind = " << to_string(attack_kind) << "\n";
    out << "gamma = " << fmt(attack.poisoning_rate) << "\n";
    out << "psi = " << fmt(attack.modification_rate) << "\n";
    out << "feature_lr_mult = " << fmt(attack.feature_lr_mult) << "\n";
    out << "trigger = " << attack.trigger << "\n";
    if (!attack.feature_layers.empty()) {
        out << "feature_layers = ";
        for (std::size_t i = 0; i < attack.feature_layers.size(); ++i)
            out << (i ? "," : "") << attack.feature_layers[i];
        out << "\n";
    }
    out << "grad_clip = " << fmt(attack.feature_grad_clip) << "\n";
    out << "feature_step_every = " << attack.feature_step_every << "\n";
    out << "feature_warmup_epochs = " << attack.feature_warmup_epochs << "\n";
    out << "l1_reduction = " << (attack.l1_reduction == L1Reduction::mean ? "mean" : "sum")
        << "\n\n";

    out << "[eval]\n";
    out << "modes = ";
    for (std::size_t i = 0; i < eval.modes.size(); ++i) out << (i ? "," : "") << eval.modes[i];
    out << "\n";
    out << "tau = " << fmt(eval.tau) << "\n";
    out << "psi = " << fmt(eval.psi) << "\n";
    out << "anchor = " << anchor_to_string(eval.anchor) << "\n";
    out << "alpha = " << fmt(eval.alpha) << "\n";
    out << "beta = " << fmt(eval.beta) << "\n\n";

    out << "[defense]\n";
    out << "pipeline = ";
    for (std::size_t i = 0; i < defenses.size(); ++i)
        out << (i ? "," : "") << defenses[i].spec_text;
    out << "\n";
    return out.str();
}

std::string ExperimentConfig::hash() const { return sha1_hex(serialize()); }

}  // namespace tracklab
