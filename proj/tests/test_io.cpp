#include "mcss/config.hpp"
#include "mcss/io.hpp"
#include "mcss/observation.hpp"
#include "mcss/rng.hpp"

#include <doctest.h>

#include <filesystem>

using namespace mcss;

namespace {
const auto tmp = std::filesystem::temp_directory_path() / "mcss_io_test";
}

TEST_CASE("obj round trip, polygon faces fan out") {
    std::filesystem::create_directories(tmp);
    const TriangleMesh box = make_box_mesh(Vec3(0.1, -0.2, 0.3), Vec3(1, 2, 3));
    write_obj(tmp / "box.obj", box);
    const TriangleMesh back = read_obj(tmp / "box.obj");
    REQUIRE(back.vertices.size() == box.vertices.size());
    REQUIRE(back.triangles.size() == box.triangles.size());
    CHECK(back.volume() == doctest::Approx(box.volume()));

    write_text_file(tmp / "quad.obj", "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
    const TriangleMesh quad = read_obj(tmp / "quad.obj");
    CHECK(quad.triangles.size() == 2);

    // f with texture/normal slots parses too
    write_text_file(tmp / "slash.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3\n");
    CHECK(read_obj(tmp / "slash.obj").triangles.size() == 1);
}

TEST_CASE("ply round trip with labels") {
    Rng rng(3);
    std::vector<CloudPoint> cloud;
    for (int i = 0; i < 200; ++i) {
        CloudPoint p;
        p.position = Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0, 3));
        p.normal = Vec3(0, 0, 1);
        p.label = i % 3;
        cloud.push_back(p);
    }
    write_ply(tmp / "cloud.ply", cloud);
    const auto back = read_ply(tmp / "cloud.ply");
    REQUIRE(back.size() == cloud.size());
    for (size_t i = 0; i < cloud.size(); ++i) {
        CHECK((back[i].position - cloud[i].position).norm() <= 1e-6);
        CHECK(back[i].label == cloud[i].label);
    }
}

TEST_CASE("pgm round trips preserve pixels") {
    Image8 img8{7, 5, {}};
    img8.pixels.resize(35);
    for (size_t i = 0; i < img8.pixels.size(); ++i) img8.pixels[i] = static_cast<uint8_t>(i * 7);
    write_pgm8(tmp / "a.pgm", img8);
    const Image8 b8 = read_pgm8(tmp / "a.pgm");
    CHECK(b8.pixels == img8.pixels);

    Image16 img16{4, 3, {}};
    img16.pixels = {0, 1, 65535, 1000, 2000, 3000, 4000, 5000, 12345, 777, 42, 9};
    write_pgm16(tmp / "b.pgm", img16);
    const Image16 b16 = read_pgm16(tmp / "b.pgm");
    CHECK(b16.pixels == img16.pixels);
}

TEST_CASE("views json round trip") {
    std::vector<View> views;
    views.push_back(View::look_at(Vec3(1, 2, 1.5), Vec3(2, 2, 1.0), 96, 72, 70.0));
    views.push_back(View::look_at(Vec3(-1, 0, 1.7), Vec3(0, 1, 0.5), 64, 48, 50.0));
    const auto back = views_from_json(views_to_json(views));
    REQUIRE(back.size() == views.size());
    for (size_t i = 0; i < views.size(); ++i) {
        CHECK(back[i].width == views[i].width);
        CHECK((back[i].rotation - views[i].rotation).norm() <= 1e-12);
        CHECK((back[i].translation - views[i].translation).norm() <= 1e-12);
    }
}

TEST_CASE("observation maps survive the disk format") {
    View v = View::look_at(Vec3(0, 0, 1.5), Vec3(1, 0, 1.0), 32, 24, 28.0);
    ObservationSet obs;
    ViewObservation vo;
    vo.view = v;
    Rng rng(5);
    vo.depth.assign(v.pixel_count(), kEmptyDepth);
    for (auto& c : vo.confidence) c.assign(v.pixel_count(), 0.0f);
    for (size_t px = 0; px < v.pixel_count(); ++px) {
        if (rng.uniform() < 0.8) {
            vo.depth[px] = static_cast<float>(std::round(rng.uniform(0.3, 6.0) * 1000) / 1000);
            vo.confidence[rng.uniform_int(kNumCategories)][px] = 1.0f;
        }
    }
    obs.views.push_back(vo);

    const auto dir = tmp / "obs";
    std::filesystem::remove_all(dir);
    save_observations(dir, obs);
    const ObservationSet back = load_observations(dir);
    REQUIRE(back.views.size() == 1);
    for (size_t px = 0; px < v.pixel_count(); ++px) {
        if (vo.depth[px] == kEmptyDepth) {
            CHECK(back.views[0].depth[px] == kEmptyDepth);
        } else {
            CHECK(std::abs(back.views[0].depth[px] - vo.depth[px]) <= 5e-4);  // mm quantization
        }
        for (int c = 0; c < kNumCategories; ++c)
            CHECK(back.views[0].confidence[c][px] == vo.confidence[c][px]);
    }

    // saving a loaded set reproduces the bytes
    const auto dir2 = tmp / "obs2";
    std::filesystem::remove_all(dir2);
    save_observations(dir2, back);
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto other = dir2 / entry.path().filename();
        CHECK(read_text_file(entry.path()) == read_text_file(other));
    }
}

TEST_CASE("flat toml parsing and config defaults") {
    const auto kv = parse_flat_toml("# comment\n[weights]\nlambda_p = 2.5\n\n[mcss]\n"
                                    "iterations = 500 # inline\nname = \"quoted\"\n");
    CHECK(kv.at("weights.lambda_p") == "2.5");
    CHECK(kv.at("mcss.iterations") == "500");
    CHECK(kv.at("mcss.name") == "quoted");

    const AppConfig defaults = AppConfig::from_string("");
    CHECK(defaults.weights.lambda_i == 1.0);
    CHECK(defaults.weights.lambda_d == 1.0);
    CHECK(defaults.weights.lambda_p == 2.5);
    CHECK(defaults.compat.iou_threshold == 0.3);
    CHECK(defaults.mcss.iterations == 20000);
    CHECK(defaults.mcss.simulations_objects == 10);
    CHECK(defaults.mcss.simulations_layouts == 1);
    CHECK(defaults.ransac.stage1_min_inliers == 5000);
    CHECK(defaults.ransac.stage2_min_inliers == 300);
    CHECK(defaults.ransac.iterations == 2000);

    const AppConfig parsed = AppConfig::from_string(
        "[weights]\nlambda_p = 1.25\n[mcss]\niterations = 77\n[synth]\nroom = \"L\"\nchairs = 4\n");
    CHECK(parsed.weights.lambda_p == 1.25);
    CHECK(parsed.mcss.iterations == 77);
    CHECK(parsed.synth.room == RoomShape::LShape);
    CHECK(parsed.synth.object_counts[static_cast<int>(Category::Chair)] == 4);

    // defaults serialize and parse back
    const AppConfig round = AppConfig::from_string(defaults.to_string());
    CHECK(round.weights.lambda_p == defaults.weights.lambda_p);
    CHECK(round.mcss.iterations == defaults.mcss.iterations);
}
