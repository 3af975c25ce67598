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

#include "tracklab/videodata.hpp"

namespace tracklab {

/// The backdoor key: a patch image plus a binary per-pixel opacity mask.
/// Poisoning blends the (resized) patch over the target region as
/// (1 - mask) * pixel + mask * patch.
struct TriggerPattern {
    int h = 0;
    int w = 0;
    std::vector<float> image;  // h * w * 3, values in [0, 1]
    std::vector<float> mask;   // h * w, values in {0, 1}
    std::string name;

    TriggerPattern() = default;
    TriggerPattern(int height, int width, std::string pattern_name);

    float img_at(int y, int x, int c) const {
        return image[(static_cast<std::size_t>(y) * w + x) * 3 + c];
    }
    float mask_at(int y, int x) const { return mask[static_cast<std::size_t>(y) * w + x]; }

    /// Throws unless the mask has at least one opaque pixel and shapes agree.
    void validate() const;

    /// Test hook: builds a pattern without running validate(), so degenerate
    /// all-transparent masks can exercise the blend-identity paths.
    static TriggerPattern make_unchecked(int h, int w, std::vector<float> image,
                                         std::vector<float> mask, std::string name);
};

/// Built-in patterns: "checker" (default), "stripes", "noise", "rings".
TriggerPattern builtin_trigger(const std::string& name);
std::vector<std::string> builtin_trigger_names();

/// Loads a trigger from a PPM/PGM file with a fully opaque mask; an optional
/// sibling "<stem>_mask.pgm" supplies the mask (pixels > 0.5 are opaque).
TriggerPattern load_trigger(const std::filesystem::path& path);

/// Resolves a trigger reference: a built-in name or a path to an image file.
TriggerPattern resolve_trigger(const std::string& name_or_path);

enum class PoisonAnchor { frame_center, box_center, crop_center };

/// Where and how large the pasted trigger is. The modification rate is the
/// fraction of the target area the patch covers.
struct PoisonPlacement {
    PoisonAnchor anchor = PoisonAnchor::frame_center;
    double modification_rate = 0.01;  // psi, in (0, 0.05]

    void validate() const;
};

enum class AttackModeKind { none, one_shot, few_shot };

struct AttackMode {
    AttackModeKind kind = AttackModeKind::none;
    double frame_attack_rate = 0.10;  // tau, used only by few_shot

    void validate() const;
    static AttackMode none() { return {AttackModeKind::none, 0.0}; }
    static AttackMode one_shot() { return {AttackModeKind::one_shot, 0.0}; }
    static AttackMode few_shot(double tau) { return {AttackModeKind::few_shot, tau}; }
};

/// Side of the pasted square patch: round(sqrt(psi * W * H)), clamped to
/// [2, min(W, H)].
int trigger_side(double psi, int region_w, int region_h);

/// Blends the trigger into one frame. The patch is resized to s x s with
/// nearest-neighbor, centered on the anchor, and clipped at frame borders.
/// `box` is required for the box_center anchor (it also defines the area psi
/// refers to); crop/frame anchors use the frame area.
Frame poison_frame(const Frame& frame, const TriggerPattern& trig, const PoisonPlacement& place,
                   std::optional<BoundingBox> box = std::nullopt);

/// Frame-wise poisoned video generator. mode none returns the input
/// unchanged; one_shot poisons only the first frame; few_shot poisons the
/// first ceil(tau * n) frames. box_center placement follows each frame's
/// annotated box.
Video poison_video(const Video& video, const TrackAnnotation& ann, const TriggerPattern& trig,
                   const PoisonPlacement& place, const AttackMode& mode);

/// Number of frames poison_video will touch for a given mode and length.
int poisoned_frame_count(const AttackMode& mode, int n_frames);

}  // namespace tracklab
