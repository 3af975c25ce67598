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

#include "tracklab/videodata.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tracklab/error.hpp"
#include "tracklab/image_io.hpp"
#include "tracklab/rng.hpp"

namespace tracklab {

double iou(const BoundingBox& a, const BoundingBox& b) {
    const double ix = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
    const double iy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    const double inter = ix * iy;
    return inter / (a.area() + b.area() - inter);
}

double center_distance(const BoundingBox& a, const BoundingBox& b) {
    const double dx = a.cx() - b.cx();
    const double dy = a.cy() - b.cy();
    return std::sqrt(dx * dx + dy * dy);
}

float Frame::mean() const {
    if (px.empty()) return 0.0f;
    double s = 0.0;
    for (float v : px) s += v;
    return static_cast<float>(s / static_cast<double>(px.size()));
}

void SyntheticSceneSpec::validate() const {
    if (canvas_w < 32 || canvas_h < 32) throw ConfigError("synthetic canvas must be at least 32x32");
    if (n_frames < 2) throw ConfigError("synthetic video needs at least 2 frames");
    if (object_min < 4 || object_min > object_max)
        throw ConfigError("synthetic object size range invalid");
    if (object_max + 2 > std::min(canvas_w, canvas_h))
        throw ConfigError("synthetic object cannot fit the canvas with a 1 px margin");
    if (speed_min < 0.0 || speed_min > speed_max)
        throw ConfigError("synthetic speed range invalid");
    if (distractor_count < 0) throw ConfigError("distractor count must be >= 0");
}

namespace {

struct MovingShape {
    ObjectShape shape;
    int size = 0;
    double px = 0.0, py = 0.0;  // top-left, float
    double vx = 0.0, vy = 0.0;
    float color[3] = {0, 0, 0};
};

void bounce(double& p, double& v, double lo, double hi) {
    // Reflect until inside; speeds are far below the canvas size.
    while (p < lo || p > hi) {
        if (p < lo) {
            p = lo + (lo - p);
            v = -v;
        } else {
            p = hi - (p - hi);
            v = -v;
        }
    }
}

void sample_color(Rng& rng, float out[3]) {
    // Two vivid channels, one dark channel: keeps objects distinct from the
    // muted background noise.
    const int dark = rng.below_int(3);
    for (int c = 0; c < 3; ++c)
        out[c] = static_cast<float>(c == dark ? rng.uniform(0.0, 0.30) : rng.uniform(0.65, 1.0));
}

double color_dist(const float a[3], const float b[3]) {
    return std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) + std::abs(a[2] - b[2]);
}

MovingShape sample_shape(Rng& rng, const SyntheticSceneSpec& spec, ObjectShape shape,
                         bool center_start) {
    MovingShape s;
    s.shape = shape;
    s.size = spec.object_min + rng.below_int(spec.object_max - spec.object_min + 1);
    if (shape == ObjectShape::disc && s.size % 2 == 0)
        s.size = (s.size + 1 + 2 <= std::min(spec.canvas_w, spec.canvas_h)) ? s.size + 1 : s.size - 1;
    const double lo = 1.0;
    const double hix = static_cast<double>(spec.canvas_w - s.size - 1);
    const double hiy = static_cast<double>(spec.canvas_h - s.size - 1);
    if (center_start) {
        // Tracked objects start near the frame center, like the initial
        // frames of the common benchmarks; they disperse as the video runs.
        const double cx = (spec.canvas_w - s.size) / 2.0;
        const double cy = (spec.canvas_h - s.size) / 2.0;
        const double span_x = std::min(0.08 * spec.canvas_w, (hix - lo) / 2.0);
        const double span_y = std::min(0.08 * spec.canvas_h, (hiy - lo) / 2.0);
        s.px = std::clamp(cx + rng.uniform(-span_x, span_x), lo, hix);
        s.py = std::clamp(cy + rng.uniform(-span_y, span_y), lo, hiy);
    } else {
        s.px = rng.uniform(lo, hix);
        s.py = rng.uniform(lo, hiy);
    }
    const double speed = rng.uniform(spec.speed_min, spec.speed_max);
    const double ang = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    s.vx = speed * std::cos(ang);
    s.vy = speed * std::sin(ang);
    sample_color(rng, s.color);
    return s;
}

void draw_shape(Frame& frame, const MovingShape& s) {
    const int ix = static_cast<int>(std::lround(s.px));
    const int iy = static_cast<int>(std::lround(s.py));
    const double c0x = ix + (s.size - 1) / 2.0;
    const double c0y = iy + (s.size - 1) / 2.0;
    const double r = (s.size - 1) / 2.0;
    const int border = std::max(1, s.size / 8);
    for (int y = iy; y < iy + s.size; ++y) {
        if (y < 0 || y >= frame.h) continue;
        for (int x = ix; x < ix + s.size; ++x) {
            if (x < 0 || x >= frame.w) continue;
            bool inside = true;
            bool edge;
            if (s.shape == ObjectShape::disc) {
                const double d2 = (x - c0x) * (x - c0x) + (y - c0y) * (y - c0y);
                inside = d2 <= r * r + 1e-9;
                edge = inside && d2 > (r - border) * (r - border);
            } else {
                edge = (x - ix < border) || (ix + s.size - 1 - x < border) || (y - iy < border) ||
                       (iy + s.size - 1 - y < border);
            }
            if (!inside) continue;
            const float f = edge ? 0.45f : 1.0f;
            for (int c = 0; c < 3; ++c) frame.at(y, x, c) = s.color[c] * f;
        }
    }
}

Frame render_background(const SyntheticSceneSpec& spec, std::uint64_t seed) {
    // Low-frequency value noise: a coarse random grid, bilinearly upsampled.
    constexpr int grid = 7;
    Rng rng(seed);
    float cells[3][grid][grid];
    for (int c = 0; c < 3; ++c)
        for (int gy = 0; gy < grid; ++gy)
            for (int gx = 0; gx < grid; ++gx)
                cells[c][gy][gx] = static_cast<float>(rng.uniform(0.22, 0.55));

    Frame bg(spec.canvas_h, spec.canvas_w);
    for (int y = 0; y < spec.canvas_h; ++y) {
        const double fy = static_cast<double>(y) / (spec.canvas_h - 1) * (grid - 1);
        const int y0 = std::min(static_cast<int>(fy), grid - 2);
        const double ty = fy - y0;
        for (int x = 0; x < spec.canvas_w; ++x) {
            const double fx = static_cast<double>(x) / (spec.canvas_w - 1) * (grid - 1);
            const int x0 = std::min(static_cast<int>(fx), grid - 2);
            const double tx = fx - x0;
            for (int c = 0; c < 3; ++c) {
                const double top = cells[c][y0][x0] * (1 - tx) + cells[c][y0][x0 + 1] * tx;
                const double bot = cells[c][y0 + 1][x0] * (1 - tx) + cells[c][y0 + 1][x0 + 1] * tx;
                bg.at(y, x, c) = static_cast<float>(top * (1 - ty) + bot * ty);
            }
        }
    }
    return bg;
}

}  // namespace

std::pair<Video, TrackAnnotation> generate_synthetic_video(const SyntheticSceneSpec& spec,
                                                           std::uint64_t seed) {
    spec.validate();
    Rng rng(mix_seed(seed, 0xC0FFEE));
    const std::uint64_t bg_seed =
        spec.background_seed != 0 ? spec.background_seed : mix_seed(seed, 0xBA5E);
    const Frame background = render_background(spec, bg_seed);

    MovingShape target = sample_shape(rng, spec, spec.shape, true);
    std::vector<MovingShape> distractors;
    const ObjectShape other =
        spec.shape == ObjectShape::square ? ObjectShape::disc : ObjectShape::square;
    for (int d = 0; d < spec.distractor_count; ++d) {
        MovingShape ds = sample_shape(rng, spec, d % 2 == 0 ? other : spec.shape, false);
        for (int attempt = 0; attempt < 64; ++attempt) {
            const double dx = (ds.px + ds.size / 2.0) - (target.px + target.size / 2.0);
            const double dy = (ds.py + ds.size / 2.0) - (target.py + target.size / 2.0);
            if (std::sqrt(dx * dx + dy * dy) >= target.size + ds.size) break;
            ds.px = rng.uniform(1.0, static_cast<double>(spec.canvas_w - ds.size - 1));
            ds.py = rng.uniform(1.0, static_cast<double>(spec.canvas_h - ds.size - 1));
        }
        // Distractor colors must not look like the target.
        for (int attempt = 0; attempt < 64 && color_dist(ds.color, target.color) < 0.8; ++attempt)
            sample_color(rng, ds.color);
        distractors.push_back(ds);
    }

    Video video;
    video.id = "synth-" + std::to_string(seed);
    TrackAnnotation ann;
    ann.object_class = spec.shape == ObjectShape::square ? "square" : "disc";

    for (int f = 0; f < spec.n_frames; ++f) {
        Frame frame = background;
        for (const auto& d : distractors) draw_shape(frame, d);
        draw_shape(frame, target);
        video.frames.push_back(std::move(frame));

        const int ix = static_cast<int>(std::lround(target.px));
        const int iy = static_cast<int>(std::lround(target.py));
        ann.boxes.push_back(BoundingBox{static_cast<double>(ix), static_cast<double>(iy),
                                        static_cast<double>(target.size),
                                        static_cast<double>(target.size)});
        ann.present.push_back(true);

        auto step = [&](MovingShape& s) {
            s.px += s.vx;
            s.py += s.vy;
            bounce(s.px, s.vx, 1.0, static_cast<double>(spec.canvas_w - s.size - 1));
            bounce(s.py, s.vy, 1.0, static_cast<double>(spec.canvas_h - s.size - 1));
        };
        step(target);
        for (auto& d : distractors) step(d);
    }
    return {std::move(video), std::move(ann)};
}

namespace {

std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& img_dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(img_dir)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension().string();
        if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
        // Numeric-aware ordering so 2.ppm sorts before 10.ppm.
        const auto num = [](const std::filesystem::path& p) {
            const std::string stem = p.stem().string();
            std::size_t i = 0;
            while (i < stem.size() && !std::isdigit(static_cast<unsigned char>(stem[i]))) ++i;
            long long v = -1;
            if (i < stem.size()) v = std::atoll(stem.c_str() + i);
            return v;
        };
        const long long na = num(a), nb = num(b);
        if (na != nb) return na < nb;
        return a.filename().string() < b.filename().string();
    });
    return files;
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::pair<Video, TrackAnnotation> load_otb_sequence(const std::filesystem::path& dir) {
    const auto img_dir = dir / "img";
    if (!std::filesystem::is_directory(img_dir))
        throw IoError("missing img/ directory in sequence: " + dir.string());
    const auto gt_path = dir / "groundtruth_rect.txt";
    if (!std::filesystem::is_regular_file(gt_path))
        throw IoError("missing groundtruth_rect.txt in sequence: " + dir.string());

    const auto files = list_frame_files(img_dir);
    if (files.empty()) throw IoError("no frame images in " + img_dir.string());

    Video video;
    video.id = dir.filename().string();
    for (const auto& f : files) {
        Frame frame = read_netpbm(f);
        if (!video.frames.empty() &&
            (frame.h != video.frames.front().h || frame.w != video.frames.front().w))
            throw FormatError("frame size mismatch at " + f.string());
        video.frames.push_back(std::move(frame));
    }

    TrackAnnotation ann;
    std::ifstream in(gt_path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // Normalize separators, then parse 4 floats.
        std::string norm = line;
        for (char& c : norm)
            if (c == ',' || c == '\t' || c == ';') c = ' ';
        std::istringstream ss(norm);
        std::string tok;
        std::vector<double> vals;
        bool bad = false;
        while (ss >> tok) {
            char* end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0') {
                bad = true;
                break;
            }
            vals.push_back(v);
        }
        if (vals.empty() && !bad) continue;  // blank line
        if (bad || vals.size() != 4)
            throw FormatError("groundtruth_rect.txt line " + std::to_string(line_no) +
                              ": expected 4 numeric fields, got \"" + line + "\"");
        const bool ok = vals[2] > 0.0 && vals[3] > 0.0;
        ann.boxes.push_back(ok ? BoundingBox{vals[0], vals[1], vals[2], vals[3]}
                               : BoundingBox{vals[0], vals[1], 1.0, 1.0});
        ann.present.push_back(ok);
    }

    if (ann.length() != video.length())
        throw FormatError(std::to_string(video.length()) + " frames vs " +
                          std::to_string(ann.length()) + " annotations in " + dir.string());

    const auto class_path = dir / "class.txt";
    if (std::filesystem::is_regular_file(class_path)) {
        std::ifstream cf(class_path);
        std::string cls;
        if (std::getline(cf, cls) && !cls.empty()) ann.object_class = cls;
    }
    return {std::move(video), std::move(ann)};
}

void write_otb_sequence(const std::filesystem::path& dir, const Video& video,
                        const TrackAnnotation& ann) {
    if (video.length() != ann.length())
        throw ArgumentError("video/annotation length mismatch when writing sequence");
    std::filesystem::create_directories(dir / "img");
    for (int i = 0; i < video.length(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "%06d.ppm", i + 1);
        write_ppm(dir / "img" / name, video.frames[static_cast<std::size_t>(i)]);
    }
    std::ofstream gt(dir / "groundtruth_rect.txt");
    if (!gt) throw IoError("cannot write groundtruth_rect.txt in " + dir.string());
    for (int i = 0; i < ann.length(); ++i) {
        const auto& b = ann.boxes[static_cast<std::size_t>(i)];
        if (ann.present[static_cast<std::size_t>(i)])
            gt << format_double(b.x) << "," << format_double(b.y) << "," << format_double(b.w)
               << "," << format_double(b.h) << "\n";
        else
            gt << format_double(b.x) << "," << format_double(b.y) << ",0,0\n";
    }
    std::ofstream cf(dir / "class.txt");
    cf << ann.object_class << "\n";
}

}  // namespace tracklab
