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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tracklab {

/// Axis-aligned box in image coordinates (origin top-left). Width and height
/// must be positive; the box itself may extend beyond the frame borders.
struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double w = 1.0;
    double h = 1.0;

    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
    double area() const { return w * h; }
    bool valid() const {
        return w > 0.0 && h > 0.0 && std::isfinite(x) && std::isfinite(y) && std::isfinite(w) &&
               std::isfinite(h);
    }
};

/// Intersection-over-union of two boxes; 0 when disjoint.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Euclidean distance between box centers.
double center_distance(const BoundingBox& a, const BoundingBox& b);

/// One RGB image with intensities in [0, 1], stored interleaved (H, W, C).
struct Frame {
    static constexpr int channels = 3;

    int h = 0;
    int w = 0;
    std::vector<float> px;  // h * w * 3

    Frame() = default;
    Frame(int height, int width, float fill = 0.0f)
        : h(height), w(width), px(static_cast<std::size_t>(height) * width * channels, fill) {}

    float& at(int y, int x, int c) {
        return px[(static_cast<std::size_t>(y) * w + x) * channels + c];
    }
    float at(int y, int x, int c) const {
        return px[(static_cast<std::size_t>(y) * w + x) * channels + c];
    }

    /// Mean intensity over all pixels and channels.
    float mean() const;

    bool same_pixels(const Frame& o) const { return h == o.h && w == o.w && px == o.px; }
};

struct Video {
    std::string id;
    std::vector<Frame> frames;

    int length() const { return static_cast<int>(frames.size()); }
};

/// Per-frame ground truth. `present[i]` is false for frames whose label must
/// be skipped by the metrics (absent or degenerate boxes).
struct TrackAnnotation {
    std::vector<BoundingBox> boxes;
    std::vector<bool> present;
    std::string object_class = "default";

    int length() const { return static_cast<int>(boxes.size()); }
};

enum class ObjectShape { square, disc };

/// Recipe for one deterministic synthetic sequence: a textured object moving
/// over low-frequency background noise, with optional distractor shapes.
struct SyntheticSceneSpec {
    int canvas_w = 96;
    int canvas_h = 96;
    int n_frames = 40;
    ObjectShape shape = ObjectShape::square;
    int object_min = 12;
    int object_max = 20;
    double speed_min = 0.8;   // px per frame
    double speed_max = 2.2;
    int distractor_count = 1;
    std::uint64_t background_seed = 0;  // 0: derive from the call seed

    void validate() const;
};

/// Renders a synthetic video plus exact annotations. Bit-identical output for
/// equal (spec, seed).
std::pair<Video, TrackAnnotation> generate_synthetic_video(const SyntheticSceneSpec& spec,
                                                           std::uint64_t seed);

/// Loads an OTB-style sequence directory: `img/` with numerically ordered
/// PPM/PGM frames and `groundtruth_rect.txt` with one "x,y,w,h" line per
/// frame. An optional `class.txt` provides the class used by mSR50.
std::pair<Video, TrackAnnotation> load_otb_sequence(const std::filesystem::path& dir);

/// Writes a sequence in the layout load_otb_sequence reads. Boxes round-trip
/// exactly; pixels are quantized to 8 bits.
void write_otb_sequence(const std::filesystem::path& dir, const Video& video,
                        const TrackAnnotation& ann);

}  // namespace tracklab
