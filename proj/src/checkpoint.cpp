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

#include "tracklab/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "tracklab/error.hpp"
#include "tracklab/sha1.hpp"

namespace tracklab {

using nlohmann::json;

namespace {

json tensor_to_json(const Tensor& t) {
    json j;
    json dims = json::array();
    for (int i = 0; i < t.rank(); ++i) dims.push_back(t.dim(i));
    j["dims"] = dims;
    j["data"] = t.raw();
    return j;
}

Tensor tensor_from_json(const json& j) {
    const auto dims = j.at("dims").get<std::vector<int>>();
    Tensor t;
    switch (dims.size()) {
        case 1: t = Tensor(dims[0]); break;
        case 2: t = Tensor(dims[0], dims[1]); break;
        case 3: t = Tensor(dims[0], dims[1], dims[2]); break;
        case 4: t = Tensor(dims[0], dims[1], dims[2], dims[3]); break;
        default: throw FormatError("checkpoint tensor has unsupported rank");
    }
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != t.size()) throw FormatError("checkpoint tensor size mismatch");
    t.raw() = data;
    return t;
}

}  // namespace

std::string serialize_checkpoint(const TrackerModel& model) {
    json j;
    j["format"] = "tracklab-checkpoint-v1";
    j["provenance"] = model.provenance;
    j["seed"] = model.init_seed;

    json arch;
    arch["in_ch"] = model.cfg.backbone.in_ch;
    arch["relu_leak"] = model.cfg.backbone.relu_leak;
    arch["instance_norm"] = model.cfg.backbone.instance_norm;
    json blocks = json::array();
    for (const auto& b : model.cfg.backbone.blocks)
        blocks.push_back({{"out_ch", b.out_ch},
                          {"kernel", b.kernel},
                          {"stride", b.stride},
                          {"relu", b.relu}});
    arch["blocks"] = blocks;
    arch["template_size"] = model.cfg.template_size;
    arch["search_size"] = model.cfg.search_size;
    arch["context_margin"] = model.cfg.context_margin;
    arch["label_radius_cells"] = model.cfg.label_radius_cells;
    arch["window_weight"] = model.cfg.window_weight;
    arch["scales"] = model.cfg.scales;
    arch["scale_damping"] = model.cfg.scale_damping;
    arch["scale_penalty"] = model.cfg.scale_penalty;
    j["arch"] = arch;

    json params;
    json conv_w = json::array(), conv_b = json::array();
    for (const auto& w : model.params.conv_w) conv_w.push_back(tensor_to_json(w));
    for (const auto& b : model.params.conv_b) conv_b.push_back(tensor_to_json(b));
    params["conv_w"] = conv_w;
    params["conv_b"] = conv_b;
    params["head_scale"] = model.params.head_scale;
    params["head_bias"] = model.params.head_bias;
    params["channel_mask"] = model.params.channel_mask;
    j["params"] = params;

    return j.dump();
}

TrackerModel deserialize_checkpoint(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "tracklab-checkpoint-v1")
            throw FormatError("unknown checkpoint format tag");

        TrackerModel m;
        m.provenance = j.at("provenance").get<std::string>();
        m.init_seed = j.at("seed").get<std::uint64_t>();

        const auto& arch = j.at("arch");
        m.cfg.backbone.in_ch = arch.at("in_ch").get<int>();
        m.cfg.backbone.relu_leak = arch.at("relu_leak").get<double>();
        m.cfg.backbone.instance_norm = arch.at("instance_norm").get<bool>();
        m.cfg.backbone.blocks.clear();
        for (const auto& b : arch.at("blocks"))
            m.cfg.backbone.blocks.push_back({b.at("out_ch").get<int>(), b.at("kernel").get<int>(),
                                             b.at("stride").get<int>(), b.at("relu").get<bool>()});
        m.cfg.template_size = arch.at("template_size").get<int>();
        m.cfg.search_size = arch.at("search_size").get<int>();
        m.cfg.context_margin = arch.at("context_margin").get<double>();
        m.cfg.label_radius_cells = arch.at("label_radius_cells").get<double>();
        m.cfg.window_weight = arch.at("window_weight").get<double>();
        m.cfg.scales = arch.at("scales").get<std::vector<double>>();
        m.cfg.scale_damping = arch.at("scale_damping").get<double>();
        m.cfg.scale_penalty = arch.at("scale_penalty").get<double>();
        m.cfg.validate();

        const auto& params = j.at("params");
        for (const auto& w : params.at("conv_w")) m.params.conv_w.push_back(tensor_from_json(w));
        for (const auto& b : params.at("conv_b")) m.params.conv_b.push_back(tensor_from_json(b));
        m.params.head_scale = params.at("head_scale").get<double>();
        m.params.head_bias = params.at("head_bias").get<double>();
        m.params.channel_mask = params.at("channel_mask").get<std::vector<std::vector<double>>>();

        if (m.params.conv_w.size() != m.cfg.backbone.blocks.size() ||
            m.params.conv_b.size() != m.cfg.backbone.blocks.size())
            throw FormatError("checkpoint parameter count does not match architecture");
        return m;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const TrackerModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path.string());
    const std::string text = serialize_checkpoint(model);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("short checkpoint write: " + path.string());
}

TrackerModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read checkpoint: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_checkpoint(text);
}

std::string checkpoint_hash(const TrackerModel& model) {
    return sha1_hex(serialize_checkpoint(model));
}

}  // namespace tracklab
