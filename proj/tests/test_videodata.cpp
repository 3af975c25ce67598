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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "tracklab/error.hpp"
#include "tracklab/image_io.hpp"
#include "tracklab/rng.hpp"
#include "tracklab/videodata.hpp"

using namespace tracklab;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("tracklab_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

BoundingBox random_box(Rng& rng) {
    return BoundingBox{rng.uniform(-20, 100), rng.uniform(-20, 100), rng.uniform(0.5, 60),
                       rng.uniform(0.5, 60)};
}

}  // namespace

TEST_CASE("iou identity, disjoint, and hand-computed overlap") {
    const BoundingBox a{0, 0, 2, 2};
    CHECK(iou(a, a) == doctest::Approx(1.0));
    CHECK(iou({0, 0, 2, 2}, {10, 10, 2, 2}) == doctest::Approx(0.0));
    // intersection 1, union 7
    CHECK(iou({0, 0, 2, 2}, {1, 1, 2, 2}) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("iou symmetry and range on random pairs") {
    Rng rng(77);
    for (int i = 0; i < 200; ++i) {
        const BoundingBox a = random_box(rng), b = random_box(rng);
        const double ab = iou(a, b), ba = iou(b, a);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK(iou(a, a) == doctest::Approx(1.0));
    }
}

TEST_CASE("synthetic generation is deterministic and geometry-exact") {
    SyntheticSceneSpec spec;
    spec.canvas_w = 96;
    spec.canvas_h = 96;
    spec.n_frames = 20;
    spec.object_min = 16;
    spec.object_max = 16;
    spec.shape = ObjectShape::square;
    spec.distractor_count = 1;

    auto [v1, a1] = generate_synthetic_video(spec, 7);
    auto [v2, a2] = generate_synthetic_video(spec, 7);
    REQUIRE(v1.length() == 20);
    for (int i = 0; i < v1.length(); ++i)
        CHECK(v1.frames[static_cast<std::size_t>(i)].same_pixels(
            v2.frames[static_cast<std::size_t>(i)]));

    for (int i = 0; i < a1.length(); ++i) {
        const auto& b = a1.boxes[static_cast<std::size_t>(i)];
        CHECK(b.w == 16.0);
        CHECK(b.h == 16.0);
        CHECK(b.x >= 0.0);
        CHECK(b.y >= 0.0);
        CHECK(b.x <= 80.0);
        CHECK(b.y <= 80.0);
        CHECK(a1.present[static_cast<std::size_t>(i)]);
    }

    // Boxes exactly bound the rendered object: the drawn pixels fill the box
    // corners for a square object.
    const auto& f0 = v1.frames.front();
    const auto& b0 = a1.boxes.front();
    const int x0 = static_cast<int>(b0.x), y0 = static_cast<int>(b0.y);
    const float border = f0.at(y0, x0, 0);
    CHECK(border == f0.at(y0, x0 + 15, 0));
    CHECK(border == f0.at(y0 + 15, x0, 0));
}

TEST_CASE("zero velocity keeps the box fixed") {
    SyntheticSceneSpec spec;
    spec.speed_min = 0.0;
    spec.speed_max = 0.0;
    spec.n_frames = 10;
    auto [v, a] = generate_synthetic_video(spec, 3);
    for (int i = 1; i < a.length(); ++i) {
        CHECK(a.boxes[static_cast<std::size_t>(i)].x == a.boxes[0].x);
        CHECK(a.boxes[static_cast<std::size_t>(i)].y == a.boxes[0].y);
    }
}

TEST_CASE("object that cannot fit the canvas is a configuration error") {
    SyntheticSceneSpec spec;
    spec.canvas_w = 32;
    spec.canvas_h = 32;
    spec.object_min = 31;
    spec.object_max = 31;
    CHECK_THROWS_AS(generate_synthetic_video(spec, 1), ConfigError);
}

TEST_CASE("motion magnitude obeys the velocity range") {
    SyntheticSceneSpec spec;
    spec.speed_min = 1.0;
    spec.speed_max = 2.0;
    spec.n_frames = 30;
    auto [v, a] = generate_synthetic_video(spec, 9);
    int moving = 0;
    for (int i = 1; i < a.length(); ++i) {
        const double dx = a.boxes[static_cast<std::size_t>(i)].x - a.boxes[static_cast<std::size_t>(i - 1)].x;
        const double dy = a.boxes[static_cast<std::size_t>(i)].y - a.boxes[static_cast<std::size_t>(i - 1)].y;
        const double step = std::sqrt(dx * dx + dy * dy);
        // Rounding to integer draw positions adds up to ~0.71 px of jitter
        // per axis; bounces can shorten a step.
        CHECK(step <= 2.0 + 1.5);
        if (step > 0.1) ++moving;
    }
    CHECK(moving > 20);
}

TEST_CASE("otb sequence round-trips boxes exactly") {
    const auto dir = temp_dir("otb_roundtrip");
    SyntheticSceneSpec spec;
    spec.n_frames = 5;
    auto [v, a] = generate_synthetic_video(spec, 21);
    a.boxes[2] = BoundingBox{10.25, 20.5, 30.125, 40.0625};  // non-integer boxes survive
    write_otb_sequence(dir, v, a);

    auto [v2, a2] = load_otb_sequence(dir);
    REQUIRE(v2.length() == v.length());
    REQUIRE(a2.length() == a.length());
    for (int i = 0; i < a.length(); ++i) {
        CHECK(a2.boxes[static_cast<std::size_t>(i)].x == a.boxes[static_cast<std::size_t>(i)].x);
        CHECK(a2.boxes[static_cast<std::size_t>(i)].y == a.boxes[static_cast<std::size_t>(i)].y);
        CHECK(a2.boxes[static_cast<std::size_t>(i)].w == a.boxes[static_cast<std::size_t>(i)].w);
        CHECK(a2.boxes[static_cast<std::size_t>(i)].h == a.boxes[static_cast<std::size_t>(i)].h);
        CHECK(a2.present[static_cast<std::size_t>(i)]);
    }
    CHECK(a2.object_class == a.object_class);
    fs::remove_all(dir);
}

TEST_CASE("otb loader reads a hand-written fixture") {
    const auto dir = temp_dir("otb_fixture");
    fs::create_directories(dir / "img");
    Frame f(40, 40, 0.5f);
    for (int i = 1; i <= 3; ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "%04d.ppm", i);
        write_ppm(dir / "img" / name, f);
    }
    std::ofstream(dir / "groundtruth_rect.txt") << "10,20,30,40\n10,20,30,40\n10,20,30,40\n";

    auto [v, a] = load_otb_sequence(dir);
    CHECK(v.length() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(a.boxes[static_cast<std::size_t>(i)].x == 10.0);
        CHECK(a.boxes[static_cast<std::size_t>(i)].y == 20.0);
        CHECK(a.boxes[static_cast<std::size_t>(i)].w == 30.0);
        CHECK(a.boxes[static_cast<std::size_t>(i)].h == 40.0);
        CHECK(a.present[static_cast<std::size_t>(i)]);
    }
    CHECK(v.frames[0].at(0, 0, 0) == doctest::Approx(0.5f).epsilon(0.01));
    fs::remove_all(dir);
}

TEST_CASE("annotation count mismatch names the offending counts") {
    const auto dir = temp_dir("otb_mismatch");
    fs::create_directories(dir / "img");
    Frame f(40, 40, 0.5f);
    for (int i = 1; i <= 3; ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "%04d.ppm", i);
        write_ppm(dir / "img" / name, f);
    }
    std::ofstream(dir / "groundtruth_rect.txt") << "1,2,3,4\n1,2,3,4\n";
    try {
        load_otb_sequence(dir);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("3 frames vs 2 annotations") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("non-numeric annotation line reports its line number") {
    const auto dir = temp_dir("otb_badline");
    fs::create_directories(dir / "img");
    Frame f(40, 40, 0.5f);
    write_ppm(dir / "img" / "0001.ppm", f);
    write_ppm(dir / "img" / "0002.ppm", f);
    std::ofstream(dir / "groundtruth_rect.txt") << "1,2,3,4\n1,oops,3,4\n";
    try {
        load_otb_sequence(dir);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("degenerate width marks the frame absent") {
    const auto dir = temp_dir("otb_absent");
    fs::create_directories(dir / "img");
    Frame f(40, 40, 0.5f);
    for (int i = 1; i <= 3; ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "%04d.ppm", i);
        write_ppm(dir / "img" / name, f);
    }
    std::ofstream(dir / "groundtruth_rect.txt") << "10,20,30,40\n10,20,0,40\n10,20,30,40\n";
    auto [v, a] = load_otb_sequence(dir);
    CHECK(a.present[0]);
    CHECK_FALSE(a.present[1]);
    CHECK(a.present[2]);
    fs::remove_all(dir);
}

TEST_CASE("netpbm codecs round-trip 8-bit pixels") {
    const auto dir = temp_dir("ppm");
    Rng rng(5);
    Frame f(9, 13);
    for (auto& v : f.px) v = static_cast<float>(rng.below(256)) / 255.0f;
    write_ppm(dir / "x.ppm", f);
    const Frame g = read_netpbm(dir / "x.ppm");
    REQUIRE(g.h == f.h);
    REQUIRE(g.w == f.w);
    for (std::size_t i = 0; i < f.px.size(); ++i) CHECK(g.px[i] == doctest::Approx(f.px[i]).epsilon(1e-6));
    fs::remove_all(dir);
}
