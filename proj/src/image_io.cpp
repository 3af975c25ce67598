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

#include "tracklab/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "tracklab/error.hpp"

namespace tracklab {

namespace {

// Skips whitespace and '#' comments between header tokens.
int next_header_int(std::istream& in, const std::filesystem::path& path) {
    while (true) {
        const int c = in.peek();
        if (c == EOF) throw FormatError("truncated netpbm header: " + path.string());
        if (std::isspace(c)) {
            in.get();
        } else if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else {
            break;
        }
    }
    int value = 0;
    if (!(in >> value)) throw FormatError("bad netpbm header token: " + path.string());
    return value;
}

}  // namespace

Frame read_netpbm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image: " + path.string());

    char p = 0, kind = 0;
    in.get(p);
    in.get(kind);
    if (p != 'P' || (kind != '2' && kind != '3' && kind != '5' && kind != '6'))
        throw FormatError("unsupported image format (want P2/P3/P5/P6): " + path.string());
    const bool color = (kind == '3' || kind == '6');
    const bool binary = (kind == '5' || kind == '6');

    const int w = next_header_int(in, path);
    const int h = next_header_int(in, path);
    const int maxval = next_header_int(in, path);
    if (w <= 0 || h <= 0) throw FormatError("bad image dimensions: " + path.string());
    if (maxval <= 0 || maxval > 255)
        throw FormatError("only 8-bit netpbm images are supported: " + path.string());

    Frame frame(h, w);
    const int n_values = w * h * (color ? 3 : 1);
    std::vector<int> values(static_cast<std::size_t>(n_values));
    if (binary) {
        in.get();  // single whitespace after maxval
        std::vector<unsigned char> buf(static_cast<std::size_t>(n_values));
        in.read(reinterpret_cast<char*>(buf.data()), n_values);
        if (in.gcount() != n_values) throw FormatError("truncated pixel data: " + path.string());
        for (int i = 0; i < n_values; ++i) values[static_cast<std::size_t>(i)] = buf[static_cast<std::size_t>(i)];
    } else {
        for (int i = 0; i < n_values; ++i)
            if (!(in >> values[static_cast<std::size_t>(i)]))
                throw FormatError("truncated pixel data: " + path.string());
    }

    const float scale = 1.0f / static_cast<float>(maxval);
    std::size_t src = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (color) {
                for (int c = 0; c < 3; ++c) frame.at(y, x, c) = static_cast<float>(values[src++]) * scale;
            } else {
                const float v = static_cast<float>(values[src++]) * scale;
                frame.at(y, x, 0) = frame.at(y, x, 1) = frame.at(y, x, 2) = v;
            }
        }
    return frame;
}

void write_ppm(const std::filesystem::path& path, const Frame& frame) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write image: " + path.string());
    out << "P6\n" << frame.w << " " << frame.h << "\n255\n";
    std::vector<unsigned char> buf;
    buf.reserve(frame.px.size());
    for (float v : frame.px) {
        const float clamped = std::clamp(v, 0.0f, 1.0f);
        buf.push_back(static_cast<unsigned char>(std::lround(clamped * 255.0f)));
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("short write: " + path.string());
}

}  // namespace tracklab
