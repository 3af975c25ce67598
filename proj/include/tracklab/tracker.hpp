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

#include "tracklab/model.hpp"

namespace tracklab {

/// Affine map between a square crop and the frame it was cut from.
struct CropGeometry {
    double center_x = 0.0;
    double center_y = 0.0;
    double side_in_frame = 0.0;
    int out_size = 0;

    double scale() const { return side_in_frame / out_size; }
    double to_frame_x(double px) const { return center_x + (px - (out_size - 1) / 2.0) * scale(); }
    double to_frame_y(double py) const { return center_y + (py - (out_size - 1) / 2.0) * scale(); }
    double from_frame_x(double fx) const { return (fx - center_x) / scale() + (out_size - 1) / 2.0; }
    double from_frame_y(double fy) const { return (fy - center_y) / scale() + (out_size - 1) / 2.0; }
};

/// Side (in frame pixels) of the context-padded template region around a box.
double template_region_side(const BoundingBox& box, double context_margin);

/// Square crop resampled to out_size x out_size, centered at (cx, cy), with
/// out-of-frame taps filled with the frame's mean intensity.
Frame crop_region(const Frame& frame, double cx, double cy, double side_in_frame, int out_size);

Frame crop_template(const Frame& frame, const BoundingBox& box, const TrackerConfig& cfg);

/// Search crop around the previous prediction; `scale` multiplies the region
/// side for the scale pyramid. Returns the crop and its geometry.
std::pair<Frame, CropGeometry> crop_search(const Frame& frame, const BoundingBox& prev_box,
                                           const TrackerConfig& cfg, double scale = 1.0);

/// +1 for score-map cells whose receptive-field center lies within radius_px
/// of (target_x, target_y) in crop coordinates, -1 elsewhere. Throws
/// LabelingError when no cell is positive.
Tensor make_label(int map_h, int map_w, int stride, double crop_center, double target_x,
                  double target_y, double radius_px);

/// Class-balanced logistic loss: mean over cells of log(1 + exp(-y * s)),
/// with positives and negatives reweighted to contribute equally.
double tracking_loss(const ScoreMap& score, const Tensor& labels);

/// dL/dS for tracking_loss.
Tensor tracking_loss_grad(const ScoreMap& score, const Tensor& labels);

/// One-pass tracking: template fixed from frame 1, per-frame search around
/// the previous prediction with a 3-scale pyramid, cosine-window weighting,
/// and sub-cell peak refinement. output[0] == init_box.
std::vector<BoundingBox> track(const TrackerModel& model, const Video& video,
                               const BoundingBox& init_box);

}  // namespace tracklab
