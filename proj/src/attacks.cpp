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

#include "tracklab/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tracklab/error.hpp"
#include "tracklab/rng.hpp"

namespace tracklab {

void TrainConfig::validate() const {
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0, 1)");
    if (weight_decay < 0.0) throw ConfigError("weight decay must be >= 0");
    if (samples_per_epoch < 1) throw ConfigError("samples per epoch must be >= 1");
    if (grad_clip < 0.0) throw ConfigError("grad clip must be >= 0");
    if (max_pair_gap < 0) throw ConfigError("pair gap must be >= 0");
    if (max_translate < 0.0) throw ConfigError("translate jitter must be >= 0");
}

double TrainConfig::lr_at(int epoch) const {
    if (lr_final <= 0.0 || epochs <= 1 || lr_final >= lr) return lr;
    const double t = static_cast<double>(epoch) / (epochs - 1);
    return lr * std::pow(lr_final / lr, t);
}

void AttackConfig::validate() const {
    if (!(poisoning_rate > 0.0) || poisoning_rate > 1.0)
        throw ConfigError("poisoning rate gamma must be in (0, 1]");
    if (!(modification_rate > 0.0) || modification_rate > 0.05)
        throw ConfigError("modification rate psi must be in (0, 0.05]");
    if (!(feature_lr_mult > 0.0) || feature_lr_mult > 1.0)
        throw ConfigError("feature step lr multiplier must be in (0, 1]");
    if (feature_grad_clip < 0.0) throw ConfigError("feature grad clip must be >= 0");
    if (feature_step_every < 1) throw ConfigError("feature step cadence must be >= 1");
    if (feature_warmup_epochs < 0) throw ConfigError("feature warmup epochs must be >= 0");
}

std::vector<int> AttackConfig::effective_layers(int n_blocks) const {
    if (feature_layers.empty()) return {n_blocks - 1};
    for (int l : feature_layers)
        if (l < 0 || l >= n_blocks)
            throw ConfigError("feature layer index " + std::to_string(l) + " out of range");
    return feature_layers;
}

std::vector<TrainingSample> build_training_set(const std::vector<Video>& videos,
                                               const std::vector<TrackAnnotation>& annotations,
                                               int n_samples, std::uint64_t seed,
                                               const TrackerConfig& cfg, const TrainConfig& tcfg) {
    if (videos.empty()) throw ArgumentError("training set needs at least one video");
    if (videos.size() != annotations.size())
        throw ArgumentError("video/annotation list size mismatch");
    if (n_samples < 1) throw ArgumentError("n_samples must be >= 1");
    cfg.validate();

    // Present-frame index lists per video.
    std::vector<std::vector<int>> usable(videos.size());
    for (std::size_t v = 0; v < videos.size(); ++v) {
        const auto& ann = annotations[v];
        if (ann.length() != videos[v].length())
            throw ArgumentError("annotation length mismatch for video " + videos[v].id);
        for (int i = 0; i < ann.length(); ++i)
            if (ann.present[static_cast<std::size_t>(i)]) usable[v].push_back(i);
    }

    Rng rng(mix_seed(seed, 0x5A17));
    const int map_n = cfg.score_map_size();
    const int stride = cfg.total_stride();
    const double radius_px = cfg.label_radius_cells * stride;
    const double crop_center = (cfg.search_size - 1) / 2.0;

    std::vector<TrainingSample> set;
    set.reserve(static_cast<std::size_t>(n_samples));
    for (int s = 0; s < n_samples; ++s) {
        // Pick a video with at least one usable frame (bounded retries).
        std::size_t v = 0;
        bool found = false;
        for (int attempt = 0; attempt < 256; ++attempt) {
            v = rng.below(videos.size());
            if (!usable[v].empty()) {
                found = true;
                break;
            }
        }
        if (!found) throw ArgumentError("no video has present annotation frames");
        const auto& frames_ok = usable[v];
        const int i = frames_ok[static_cast<std::size_t>(rng.below(frames_ok.size()))];

        // Search frame within the temporal gap window.
        std::vector<int> candidates;
        for (int j : frames_ok)
            if (std::abs(j - i) <= tcfg.max_pair_gap) candidates.push_back(j);
        const int j = candidates[static_cast<std::size_t>(rng.below(candidates.size()))];

        const auto& ann = annotations[v];
        const BoundingBox& tb = ann.boxes[static_cast<std::size_t>(i)];
        const BoundingBox& sb = ann.boxes[static_cast<std::size_t>(j)];

        TrainingSample sample;
        sample.templ = crop_template(videos[v].frames[static_cast<std::size_t>(i)], tb, cfg);

        const double side = template_region_side(sb, cfg.context_margin) *
                            (static_cast<double>(cfg.search_size) / cfg.template_size);
        const double px_scale = side / cfg.search_size;
        const double jx = rng.uniform(-tcfg.max_translate, tcfg.max_translate) * px_scale;
        const double jy = rng.uniform(-tcfg.max_translate, tcfg.max_translate) * px_scale;
        CropGeometry geom{sb.cx() + jx, sb.cy() + jy, side, cfg.search_size};
        sample.search = crop_region(videos[v].frames[static_cast<std::size_t>(j)], geom.center_x,
                                    geom.center_y, side, cfg.search_size);

        const double tx = geom.from_frame_x(sb.cx());
        const double ty = geom.from_frame_y(sb.cy());
        const double w_crop = sb.w / px_scale;
        const double h_crop = sb.h / px_scale;
        sample.target_box = BoundingBox{tx - w_crop / 2.0, ty - h_crop / 2.0, w_crop, h_crop};
        sample.labels = make_label(map_n, map_n, stride, crop_center, tx, ty, radius_px);
        set.push_back(std::move(sample));
    }
    return set;
}

namespace {

struct L1Term {
    double value = 0.0;
    Tensor grad_benign;    // dL/d benign feature
    Tensor grad_poisoned;  // dL/d poisoned feature
};

L1Term l1_distance(const Tensor& benign, const Tensor& poisoned, L1Reduction reduction,
                   bool with_grads) {
    L1Term t;
    const double w = reduction == L1Reduction::mean ? 1.0 / static_cast<double>(benign.size()) : 1.0;
    if (with_grads) {
        t.grad_benign = Tensor(benign.dim(0), benign.dim(1), benign.dim(2));
        t.grad_poisoned = Tensor(benign.dim(0), benign.dim(1), benign.dim(2));
    }
    for (std::size_t i = 0; i < benign.size(); ++i) {
        const double d = benign[i] - poisoned[i];
        t.value += w * std::abs(d);
        if (with_grads) {
            const double s = d > 0.0 ? w : (d < 0.0 ? -w : 0.0);
            t.grad_benign[i] = s;
            t.grad_poisoned[i] = -s;
        }
    }
    return t;
}

double feature_term(const TrackerModel& model, const Frame& crop, const TriggerPattern& trig,
                    const PoisonPlacement& place, const std::vector<int>& layers,
                    L1Reduction reduction, ParamGrads* grads) {
    const Frame poisoned = poison_frame(crop, trig, place);
    const BackboneTrace benign_trace = model.backbone_forward(crop);
    const BackboneTrace pois_trace = model.backbone_forward(poisoned);

    const double layer_w = 1.0 / static_cast<double>(layers.size());
    double value = 0.0;
    std::vector<Tensor> inject_benign(static_cast<std::size_t>(model.cfg.backbone.n_blocks()));
    std::vector<Tensor> inject_pois(static_cast<std::size_t>(model.cfg.backbone.n_blocks()));
    for (int l : layers) {
        L1Term term = l1_distance(benign_trace.post[static_cast<std::size_t>(l)],
                                  pois_trace.post[static_cast<std::size_t>(l)], reduction,
                                  grads != nullptr);
        value += layer_w * term.value;
        if (grads) {
            for (auto& g : term.grad_benign.raw()) g *= layer_w;
            for (auto& g : term.grad_poisoned.raw()) g *= layer_w;
            inject_benign[static_cast<std::size_t>(l)] = std::move(term.grad_benign);
            inject_pois[static_cast<std::size_t>(l)] = std::move(term.grad_poisoned);
        }
    }
    if (grads) {
        model.backbone_backward(benign_trace, inject_benign, *grads);
        model.backbone_backward(pois_trace, inject_pois, *grads);
    }
    return value;
}

}  // namespace

double feature_loss(const TrackerModel& model, const Frame& x, const Frame& z,
                    const TriggerPattern& trig, const PoisonPlacement& place,
                    const std::vector<int>& layers, L1Reduction reduction) {
    return feature_term(model, x, trig, place, layers, reduction, nullptr) +
           feature_term(model, z, trig, place, layers, reduction, nullptr);
}

double feature_loss_with_grads(const TrackerModel& model, const Frame& x, const Frame& z,
                               const TriggerPattern& trig, const PoisonPlacement& place,
                               const std::vector<int>& layers, L1Reduction reduction,
                               ParamGrads& grads) {
    return feature_term(model, x, trig, place, layers, reduction, &grads) +
           feature_term(model, z, trig, place, layers, reduction, &grads);
}

double sample_tracking_loss(const TrackerModel& model, const TrainingSample& sample,
                            ParamGrads* grads) {
    const BackboneTrace tz = model.backbone_forward(sample.templ);
    const BackboneTrace tx = model.backbone_forward(sample.search);
    const ScoreMap score = model.score_from_features(tz.feature(), tx.feature());
    const double loss = tracking_loss(score, sample.labels);
    if (grads) {
        const Tensor g = tracking_loss_grad(score, sample.labels);
        model.pair_backward(tz, tx, g, *grads);
    }
    return loss;
}

namespace {

double flipped_pair_loss(const TrackerModel& model, const Frame& templ, const Frame& search,
                         const Tensor& flipped_labels, ParamGrads* grads, double grad_weight) {
    const BackboneTrace tz = model.backbone_forward(templ);
    const BackboneTrace tx = model.backbone_forward(search);
    const ScoreMap score = model.score_from_features(tz.feature(), tx.feature());
    const double loss = tracking_loss(score, flipped_labels);
    if (grads) {
        Tensor g = tracking_loss_grad(score, flipped_labels);
        for (auto& v : g.raw()) v *= grad_weight;
        model.pair_backward(tz, tx, g, *grads);
    }
    return loss;
}

}  // namespace

double boba_batch_loss(const TrackerModel& model, const std::vector<const TrainingSample*>& batch,
                       const std::vector<bool>& poisoned, const TriggerPattern& trig,
                       double modification_rate, ParamGrads* grads, double* benign_part,
                       double* poison_part) {
    if (batch.size() != poisoned.size()) throw ArgumentError("batch/flag size mismatch");
    if (batch.empty()) throw ArgumentError("empty batch");
    int n_b = 0, n_s = 0;
    for (bool p : poisoned) (p ? n_s : n_b)++;

    const PoisonPlacement place{PoisonAnchor::crop_center, modification_rate};
    double benign_sum = 0.0, poison_sum = 0.0;
    for (std::size_t k = 0; k < batch.size(); ++k) {
        const TrainingSample& s = *batch[k];
        if (!poisoned[k]) {
            ParamGrads* g = grads;
            const BackboneTrace tz = model.backbone_forward(s.templ);
            const BackboneTrace tx = model.backbone_forward(s.search);
            const ScoreMap score = model.score_from_features(tz.feature(), tx.feature());
            benign_sum += tracking_loss(score, s.labels);
            if (g) {
                Tensor gs = tracking_loss_grad(score, s.labels);
                for (auto& v : gs.raw()) v *= 1.0 / n_b;
                model.pair_backward(tz, tx, gs, *g);
            }
        } else {
            // Label flip; the class balancing is recomputed on the flipped map.
            Tensor flipped = s.labels;
            for (auto& v : flipped.raw()) v = -v;
            const Frame gx = poison_frame(s.search, trig, place);
            const Frame gz = poison_frame(s.templ, trig, place);
            poison_sum += flipped_pair_loss(model, s.templ, gx, flipped, grads, 1.0 / n_s);
            poison_sum += flipped_pair_loss(model, gz, s.search, flipped, grads, 1.0 / n_s);
        }
    }
    const double benign_mean = n_b > 0 ? benign_sum / n_b : 0.0;
    const double poison_mean = n_s > 0 ? poison_sum / n_s : 0.0;
    if (benign_part) *benign_part = n_b > 0 ? benign_mean : std::numeric_limits<double>::quiet_NaN();
    if (poison_part) *poison_part = n_s > 0 ? poison_mean : std::numeric_limits<double>::quiet_NaN();
    return benign_mean + poison_mean;
}

double feature_ascent_step(TrackerModel& model, const std::vector<const TrainingSample*>& batch,
                           const TriggerPattern& trig, const PoisonPlacement& place,
                           const std::vector<int>& layers, L1Reduction reduction, double lr,
                           double grad_clip) {
    if (batch.empty()) throw ArgumentError("empty feature batch");
    ParamGrads grads = ParamGrads::zeros_like(model.params);
    double loss = 0.0;
    for (const TrainingSample* s : batch)
        loss += feature_loss_with_grads(model, s->search, s->templ, trig, place, layers, reduction,
                                        grads);
    loss /= static_cast<double>(batch.size());
    grads.scale(1.0 / static_cast<double>(batch.size()));
    if (!std::isfinite(loss)) throw TrainingError("non-finite feature loss");

    if (grad_clip > 0.0) {
        const double norm = std::sqrt(grads.backbone_sq_norm());
        if (norm > grad_clip) grads.scale(grad_clip / norm);
    }
    // Plain gradient ascent restricted to the backbone.
    for (std::size_t i = 0; i < model.params.conv_w.size(); ++i)
        model.params.conv_w[i].add_scaled(grads.conv_w[i], lr);
    for (std::size_t i = 0; i < model.params.conv_b.size(); ++i)
        model.params.conv_b[i].add_scaled(grads.conv_b[i], lr);
    return loss;
}

std::vector<std::size_t> select_poisoned(std::size_t n_samples, double gamma, std::uint64_t seed) {
    const auto want = static_cast<std::size_t>(std::ceil(gamma * static_cast<double>(n_samples)));
    if (want < 1) throw ArgumentError("poisoning rate selects no sample (gamma * N < 1)");
    std::vector<std::size_t> idx(n_samples);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(mix_seed(seed, 0x6A77A));
    rng.shuffle(idx);
    idx.resize(std::min(want, n_samples));
    std::sort(idx.begin(), idx.end());
    return idx;
}

namespace {

/// SGD with momentum and weight decay over every learnable parameter.
struct SgdState {
    std::vector<Tensor> vw, vb;
    double v_scale = 0.0, v_bias = 0.0;

    explicit SgdState(const ModelParams& p) {
        for (const auto& w : p.conv_w) vw.emplace_back(w.dim(0), w.dim(1), w.dim(2), w.dim(3));
        for (const auto& b : p.conv_b) vb.emplace_back(b.dim(0));
    }

    void step(ModelParams& p, const ParamGrads& g, double lr, double momentum, double wd) {
        auto upd = [&](Tensor& theta, Tensor& v, const Tensor& grad) {
            for (std::size_t i = 0; i < theta.size(); ++i) {
                v[i] = momentum * v[i] - lr * (grad[i] + wd * theta[i]);
                theta[i] += v[i];
            }
        };
        for (std::size_t i = 0; i < p.conv_w.size(); ++i) upd(p.conv_w[i], vw[i], g.conv_w[i]);
        for (std::size_t i = 0; i < p.conv_b.size(); ++i) upd(p.conv_b[i], vb[i], g.conv_b[i]);
        v_scale = momentum * v_scale - lr * (g.head_scale + wd * p.head_scale);
        p.head_scale += v_scale;
        v_bias = momentum * v_bias - lr * (g.head_bias + wd * p.head_bias);
        p.head_bias += v_bias;
    }
};

enum class TrainKind { benign, boba, fsba };

TrainResult train_impl(TrackerModel model, const std::vector<TrainingSample>& train_set,
                       const TrainConfig& tcfg, const AttackConfig* acfg, TrainKind kind,
                       const char* provenance) {
    tcfg.validate();
    if (train_set.empty()) throw ArgumentError("training set is empty");
    if (acfg) acfg->validate();

    model.provenance = provenance;
    TrainResult result{std::move(model), {}};
    if (tcfg.epochs == 0) return result;

    TrackerModel& m = result.model;

    TriggerPattern trig;
    std::vector<std::size_t> poisoned_idx;
    std::vector<bool> is_poisoned(train_set.size(), false);
    std::vector<int> feature_layers;
    if (kind != TrainKind::benign) {
        trig = resolve_trigger(acfg->trigger);
        poisoned_idx = select_poisoned(train_set.size(), acfg->poisoning_rate, tcfg.seed);
        for (std::size_t i : poisoned_idx) is_poisoned[i] = true;
        feature_layers = acfg->effective_layers(m.cfg.backbone.n_blocks());
    }

    // FSBA tracking steps see benign samples only (falls back to the full set
    // in the degenerate gamma = 1 case).
    std::vector<std::size_t> tracking_pool;
    for (std::size_t i = 0; i < train_set.size(); ++i)
        if (kind != TrainKind::fsba || !is_poisoned[i]) tracking_pool.push_back(i);
    if (tracking_pool.empty())
        for (std::size_t i = 0; i < train_set.size(); ++i) tracking_pool.push_back(i);

    SgdState sgd(m.params);
    Rng order_rng(mix_seed(tcfg.seed, 0x0EDE8));
    const PoisonPlacement fsba_place{PoisonAnchor::crop_center,
                                     acfg ? acfg->modification_rate : 0.01};

    std::vector<std::size_t> feature_stream;  // refilled from poisoned_idx when drained
    std::size_t feature_cursor = 0;

    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
        const double lr = tcfg.lr_at(epoch);
        std::vector<std::size_t> order = tracking_pool;
        order_rng.shuffle(order);

        double tracking_sum = 0.0;
        std::size_t tracking_count = 0;
        double feature_sum = 0.0;
        std::size_t feature_steps = 0;
        double poison_sum = 0.0;
        std::size_t poison_batches = 0;

        std::size_t tracking_step = 0;
        for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + tcfg.batch_size);
            const auto bsize = end - start;
            ++tracking_step;

            ParamGrads grads = ParamGrads::zeros_like(m.params);
            double batch_loss = 0.0;

            if (kind == TrainKind::boba) {
                std::vector<const TrainingSample*> batch;
                std::vector<bool> flags;
                for (std::size_t k = start; k < end; ++k) {
                    batch.push_back(&train_set[order[k]]);
                    flags.push_back(is_poisoned[order[k]]);
                }
                double benign_part = 0.0, poison_part = 0.0;
                batch_loss = boba_batch_loss(m, batch, flags, trig, acfg->modification_rate, &grads,
                                             &benign_part, &poison_part);
                if (!std::isnan(benign_part)) {
                    tracking_sum += benign_part;
                    ++tracking_count;
                }
                if (!std::isnan(poison_part)) {
                    poison_sum += poison_part;
                    ++poison_batches;
                }
            } else {
                for (std::size_t k = start; k < end; ++k)
                    batch_loss += sample_tracking_loss(m, train_set[order[k]], &grads);
                batch_loss /= static_cast<double>(bsize);
                grads.scale(1.0 / static_cast<double>(bsize));
                tracking_sum += batch_loss * static_cast<double>(bsize);
                tracking_count += bsize;
            }

            if (!std::isfinite(batch_loss))
                throw TrainingError("non-finite tracking loss at epoch " + std::to_string(epoch) +
                                    ", step " + std::to_string(start / tcfg.batch_size));
            if (tcfg.grad_clip > 0.0) {
                const double norm =
                    std::sqrt(grads.backbone_sq_norm() + grads.head_scale * grads.head_scale +
                              grads.head_bias * grads.head_bias);
                if (norm > tcfg.grad_clip) grads.scale(tcfg.grad_clip / norm);
            }
            sgd.step(m.params, grads, lr, tcfg.momentum, tcfg.weight_decay);

            if (kind == TrainKind::fsba &&
                tracking_step % static_cast<std::size_t>(acfg->feature_step_every) == 0) {
                // One feature-ascent step on a batch from the poisoned subset.
                // During warmup epochs the feature loss is measured, not
                // ascended, so the trace still covers the full run.
                const bool warming = epoch < acfg->feature_warmup_epochs;
                const std::size_t fb = std::min<std::size_t>(tcfg.batch_size, poisoned_idx.size());
                std::vector<const TrainingSample*> fbatch;
                for (std::size_t k = 0; k < fb; ++k) {
                    if (feature_cursor >= feature_stream.size()) {
                        feature_stream = poisoned_idx;
                        order_rng.shuffle(feature_stream);
                        feature_cursor = 0;
                    }
                    fbatch.push_back(&train_set[feature_stream[feature_cursor++]]);
                }
                double floss;
                try {
                    floss = feature_ascent_step(m, fbatch, trig, fsba_place, feature_layers,
                                                acfg->l1_reduction,
                                                warming ? 0.0 : lr * acfg->feature_lr_mult,
                                                acfg->feature_grad_clip);
                } catch (const TrainingError&) {
                    throw TrainingError("non-finite feature loss at epoch " +
                                        std::to_string(epoch));
                }
                feature_sum += floss;
                ++feature_steps;
            }
        }

        if (!m.params.all_finite())
            throw TrainingError("parameters diverged at epoch " + std::to_string(epoch));

        LossTraceRow row;
        row.epoch = epoch;
        row.mean_tracking_loss =
            tracking_count > 0 ? tracking_sum / static_cast<double>(tracking_count) : 0.0;
        if (kind == TrainKind::fsba && feature_steps > 0)
            row.mean_feature_loss = feature_sum / static_cast<double>(feature_steps);
        if (kind == TrainKind::boba && poison_batches > 0)
            row.mean_poison_loss = poison_sum / static_cast<double>(poison_batches);
        result.trace.push_back(row);
    }
    return result;
}

}  // namespace

TrainResult train_benign(const std::vector<TrainingSample>& train_set, const TrackerConfig& cfg,
    const TrainConfig& tcfg) {
    return train_impl(TrackerModel::init(cfg, tcfg.seed), train_set, tcfg, nullptr,
                      TrainKind::benign, "benign");
}

TrainResult train_boba(const std::vector<TrainingSample>& train_set, const TrackerConfig& cfg,
                       const TrainConfig& tcfg, const AttackConfig& acfg) {
    return train_impl(TrackerModel::init(cfg, tcfg.seed), train_set, tcfg, &acfg, TrainKind::boba,
                      "boba");
}

TrainResult train_fsba(const std::vector<TrainingSample>& train_set, const TrackerConfig& cfg,
                       const TrainConfig& tcfg, const AttackConfig& acfg) {
    return train_impl(TrackerModel::init(cfg, tcfg.seed), train_set, tcfg, &acfg, TrainKind::fsba,
                      "fsba");
}

TrainResult continue_training(const TrackerModel& start,
                              const std::vector<TrainingSample>& train_set,
                              const TrainConfig& tcfg) {
    TrainResult r = train_impl(start, train_set, tcfg, nullptr, TrainKind::benign,
                               start.provenance.c_str());
    return r;
}

}  // namespace tracklab
