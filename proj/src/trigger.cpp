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

#include "tracklab/trigger.hpp"

#include <algorithm>
#include <cmath>

#include "tracklab/error.hpp"
#include "tracklab/image_io.hpp"
#include "tracklab/rng.hpp"

namespace tracklab {

TriggerPattern::TriggerPattern(int height, int width, std::string pattern_name)
    : h(height),
      w(width),
      image(static_cast<std::size_t>(height) * width * 3, 0.0f),
      mask(static_cast<std::size_t>(height) * width, 1.0f),
      name(std::move(pattern_name)) {}

void TriggerPattern::validate() const {
    if (h <= 0 || w <= 0) throw ArgumentError("trigger pattern must be non-empty");
    if (image.size() != static_cast<std::size_t>(h) * w * 3 ||
        mask.size() != static_cast<std::size_t>(h) * w)
        throw ArgumentError("trigger image/mask shape mismatch");
    if (std::none_of(mask.begin(), mask.end(), [](float m) { return m > 0.5f; }))
        throw ArgumentError("trigger mask has no opaque pixel");
}

TriggerPattern TriggerPattern::make_unchecked(int h, int w, std::vector<float> image,
                                              std::vector<float> mask, std::string name) {
    TriggerPattern t;
    t.h = h;
    t.w = w;
    t.image = std::move(image);
    t.mask = std::move(mask);
    t.name = std::move(name);
    return t;
}

namespace {

void set_px(TriggerPattern& t, int y, int x, float r, float g, float b) {
    const std::size_t i = (static_cast<std::size_t>(y) * t.w + x) * 3;
    t.image[i] = r;
    t.image[i + 1] = g;
    t.image[i + 2] = b;
}

// 2x2 black-white checker quadrants, the classic patch trigger.
TriggerPattern make_checker() {
    TriggerPattern t(16, 16, "checker");
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            const bool white = (y < 8) == (x < 8);
            const float v = white ? 1.0f : 0.0f;
            set_px(t, y, x, v, v, v);
        }
    return t;
}

TriggerPattern make_stripes() {
    TriggerPattern t(16, 16, "stripes");
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            const bool on = ((x + y) / 4) % 2 == 0;
            set_px(t, y, x, on ? 1.0f : 0.0f, on ? 0.1f : 0.9f, on ? 0.0f : 1.0f);
        }
    return t;
}

TriggerPattern make_noise() {
    TriggerPattern t(16, 16, "noise");
    Rng rng(0x7215D0);  // fixed pattern seed, not a run knob
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            set_px(t, y, x, static_cast<float>(rng.uniform()), static_cast<float>(rng.uniform()),
                   static_cast<float>(rng.uniform()));
    return t;
}

TriggerPattern make_rings() {
    TriggerPattern t(16, 16, "rings");
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            const double d = std::sqrt((x - 7.5) * (x - 7.5) + (y - 7.5) * (y - 7.5));
            const bool on = (static_cast<int>(d) % 2) == 0;
            set_px(t, y, x, on ? 1.0f : 0.0f, on ? 1.0f : 0.0f, on ? 0.2f : 0.8f);
        }
    return t;
}

}  // namespace

TriggerPattern builtin_trigger(const std::string& name) {
    if (name == "checker") return make_checker();
    if (name == "stripes") return make_stripes();
    if (name == "noise") return make_noise();
    if (name == "rings") return make_rings();
    throw ArgumentError("unknown built-in trigger pattern: " + name);
}

std::vector<std::string> builtin_trigger_names() { return {"checker", "stripes", "noise", "rings"}; }

TriggerPattern load_trigger(const std::filesystem::path& path) {
    const Frame img = read_netpbm(path);
    TriggerPattern t(img.h, img.w, path.stem().string());
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            set_px(t, y, x, img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2));

    auto mask_path = path;
    mask_path.replace_filename(path.stem().string() + "_mask.pgm");
    if (std::filesystem::is_regular_file(mask_path)) {
        const Frame m = read_netpbm(mask_path);
        if (m.h != img.h || m.w != img.w)
            throw FormatError("trigger mask size mismatch: " + mask_path.string());
        for (int y = 0; y < img.h; ++y)
            for (int x = 0; x < img.w; ++x)
                t.mask[static_cast<std::size_t>(y) * img.w + x] = m.at(y, x, 0) > 0.5f ? 1.0f : 0.0f;
    }
    t.validate();
    return t;
}

TriggerPattern resolve_trigger(const std::string& name_or_path) {
    for (const auto& n : builtin_trigger_names())
        if (name_or_path == n) return builtin_trigger(n);
    if (std::filesystem::is_regular_file(name_or_path)) return load_trigger(name_or_path);
    throw ArgumentError("trigger \"" + name_or_path +
                        "\" is neither a built-in pattern nor an image file");
}

void PoisonPlacement::validate() const {
    if (!(modification_rate > 0.0) || modification_rate > 0.05)
        throw ConfigError("modification rate psi must be in (0, 0.05]");
}

void AttackMode::validate() const {
    if (kind == AttackModeKind::few_shot && !(frame_attack_rate > 0.0 && frame_attack_rate <= 1.0))
        throw ConfigError("frame attacking rate tau must be in (0, 1] for few_shot");
}

int trigger_side(double psi, int region_w, int region_h) {
    const int side = static_cast<int>(std::lround(std::sqrt(psi * region_w * region_h)));
    return std::clamp(side, 2, std::min(region_w, region_h));
}

Frame poison_frame(const Frame& frame, const TriggerPattern& trig, const PoisonPlacement& place,
                   std::optional<BoundingBox> box) {
    place.validate();
    double anchor_x, anchor_y;
    int region_w = frame.w, region_h = frame.h;
    switch (place.anchor) {
        case PoisonAnchor::frame_center:
        case PoisonAnchor::crop_center:
            anchor_x = (frame.w - 1) / 2.0;
            anchor_y = (frame.h - 1) / 2.0;
            break;
        case PoisonAnchor::box_center:
            if (!box) throw ArgumentError("box_center placement requires a bounding box");
            anchor_x = box->cx();
            anchor_y = box->cy();
            // psi is measured against the object area when attaching to it.
            region_w = std::max(2, static_cast<int>(std::lround(box->w)));
            region_h = std::max(2, static_cast<int>(std::lround(box->h)));
            break;
        default:
            throw ArgumentError("bad poison anchor");
    }

    const int s = trigger_side(place.modification_rate, region_w, region_h);
    const int x0 = static_cast<int>(std::lround(anchor_x - s / 2.0));
    const int y0 = static_cast<int>(std::lround(anchor_y - s / 2.0));

    Frame out = frame;
    for (int py = 0; py < s; ++py) {
        const int fy = y0 + py;
        if (fy < 0 || fy >= frame.h) continue;
        // Nearest-neighbor index into the trigger bitmap.
        const int ty = std::min(trig.h - 1, py * trig.h / s);
        for (int px = 0; px < s; ++px) {
            const int fx = x0 + px;
            if (fx < 0 || fx >= frame.w) continue;
            const int tx = std::min(trig.w - 1, px * trig.w / s);
            const float m = trig.mask_at(ty, tx);
            if (m <= 0.0f) continue;
            for (int c = 0; c < 3; ++c)
                out.at(fy, fx, c) = (1.0f - m) * frame.at(fy, fx, c) + m * trig.img_at(ty, tx, c);
        }
    }
    return out;
}

int poisoned_frame_count(const AttackMode& mode, int n_frames) {
    switch (mode.kind) {
        case AttackModeKind::none:
            return 0;
        case AttackModeKind::one_shot:
            return n_frames >= 1 ? 1 : 0;
        case AttackModeKind::few_shot: {
            const int k = static_cast<int>(std::ceil(mode.frame_attack_rate * n_frames));
            return std::min(k, n_frames);
        }
    }
    return 0;
}

Video poison_video(const Video& video, const TrackAnnotation& ann, const TriggerPattern& trig,
                   const PoisonPlacement& place, const AttackMode& mode) {
    mode.validate();
    if (ann.length() != video.length())
        throw ArgumentError("annotation length does not match video length");
    if (mode.kind == AttackModeKind::none) return video;

    const int k = poisoned_frame_count(mode, video.length());
    if (k < 1)
        throw ConfigError("attack mode poisons no frame (tau * n < 1); raise tau or video length");

    Video out = video;
    for (int i = 0; i < k; ++i) {
        std::optional<BoundingBox> box;
        if (place.anchor == PoisonAnchor::box_center) box = ann.boxes[static_cast<std::size_t>(i)];
        out.frames[static_cast<std::size_t>(i)] =
            poison_frame(video.frames[static_cast<std::size_t>(i)], trig, place, box);
    }
    return out;
}

}  // namespace tracklab
