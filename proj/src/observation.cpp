#include "mcss/observation.hpp"

#include "mcss/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace mcss {

using nlohmann::json;

const std::string& category_name(Category c) {
    static const std::array<std::string, kNumCategories> names = {"wall",  "floor", "chair",
                                                                  "table", "sofa",  "bed"};
    return names[static_cast<int>(c)];
}

std::optional<Category> category_from_name(const std::string& name) {
    for (int i = 0; i < kNumCategories; ++i)
        if (category_name(static_cast<Category>(i)) == name) return static_cast<Category>(i);
    return std::nullopt;
}

std::array<unsigned char, 3> category_color(Category c) {
    static const std::array<std::array<unsigned char, 3>, kNumCategories> colors = {{
        {170, 170, 170},  // wall
        {120, 90, 60},    // floor
        {220, 60, 60},    // chair
        {60, 120, 220},   // table
        {60, 180, 90},    // sofa
        {200, 170, 40},   // bed
    }};
    return colors[static_cast<int>(c)];
}

std::vector<View> ObservationSet::cameras() const {
    std::vector<View> out;
    out.reserve(views.size());
    for (const auto& v : views) out.push_back(v.view);
    return out;
}

void ObservationSet::validate() const {
    for (const auto& v : views) {
        const size_t n = v.view.pixel_count();
        if (v.depth.size() != n) throw std::runtime_error("observation depth size mismatch");
        for (const auto& conf : v.confidence) {
            if (conf.size() != n) throw std::runtime_error("observation confidence size mismatch");
            for (float x : conf)
                if (!(x >= 0.0f && x <= 1.0f))
                    throw std::runtime_error("confidence outside [0,1]");
        }
    }
}

std::string views_to_json(const std::vector<View>& views) {
    json arr = json::array();
    for (const View& v : views) {
        json m;
        m["width"] = v.width;
        m["height"] = v.height;
        m["fx"] = v.fx;
        m["fy"] = v.fy;
        m["cx"] = v.cx;
        m["cy"] = v.cy;
        std::array<double, 16> wc{};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) wc[r * 4 + c] = v.rotation(r, c);
            wc[r * 4 + 3] = v.translation[r];
        }
        wc[15] = 1.0;
        m["world_to_cam"] = wc;
        arr.push_back(m);
    }
    return json{{"views", arr}}.dump(2) + "\n";
}

std::vector<View> views_from_json(const std::string& json_text) {
    const json root = json::parse(json_text);
    std::vector<View> out;
    for (const json& m : root.at("views")) {
        View v;
        v.width = m.at("width");
        v.height = m.at("height");
        v.fx = m.at("fx");
        v.fy = m.at("fy");
        v.cx = m.at("cx");
        v.cy = m.at("cy");
        const auto wc = m.at("world_to_cam").get<std::array<double, 16>>();
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) v.rotation(r, c) = wc[r * 4 + c];
            v.translation[r] = wc[r * 4 + 3];
        }
        out.push_back(v);
    }
    return out;
}

namespace {

std::string view_tag(size_t i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%03zu", i);
    return buf;
}

}  // namespace

void save_observations(const std::filesystem::path& dir, const ObservationSet& obs) {
    std::filesystem::create_directories(dir);
    write_text_file(dir / "views.json", views_to_json(obs.cameras()));
    for (size_t i = 0; i < obs.views.size(); ++i) {
        const ViewObservation& vo = obs.views[i];
        Image16 depth{vo.view.width, vo.view.height, {}};
        depth.pixels.resize(vo.depth.size());
        for (size_t p = 0; p < vo.depth.size(); ++p) {
            const float d = vo.depth[p];
            depth.pixels[p] =
                (d == kEmptyDepth)
                    ? 0
                    : static_cast<uint16_t>(std::clamp(std::lround(1000.0f * d), 1L, 65535L));
        }
        write_pgm16(dir / ("depth_" + view_tag(i) + ".pgm"), depth);
        for (int c = 0; c < kNumCategories; ++c) {
            Image8 conf{vo.view.width, vo.view.height, {}};
            conf.pixels.resize(vo.confidence[c].size());
            for (size_t p = 0; p < conf.pixels.size(); ++p)
                conf.pixels[p] = static_cast<uint8_t>(
                    std::clamp(std::lround(255.0f * vo.confidence[c][p]), 0L, 255L));
            write_pgm8(dir / ("conf_" + view_tag(i) + "_" +
                              category_name(static_cast<Category>(c)) + ".pgm"),
                       conf);
        }
    }
}

ObservationSet load_observations(const std::filesystem::path& dir) {
    ObservationSet obs;
    const auto views = views_from_json(read_text_file(dir / "views.json"));
    for (size_t i = 0; i < views.size(); ++i) {
        ViewObservation vo;
        vo.view = views[i];
        const Image16 depth = read_pgm16(dir / ("depth_" + view_tag(i) + ".pgm"));
        if (depth.width != vo.view.width || depth.height != vo.view.height)
            throw std::runtime_error("depth map dims mismatch views.json");
        vo.depth.resize(depth.pixels.size());
        for (size_t p = 0; p < depth.pixels.size(); ++p)
            vo.depth[p] = depth.pixels[p] == 0 ? kEmptyDepth : depth.pixels[p] / 1000.0f;
        for (int c = 0; c < kNumCategories; ++c) {
            const Image8 conf = read_pgm8(dir / ("conf_" + view_tag(i) + "_" +
                                                 category_name(static_cast<Category>(c)) + ".pgm"));
            vo.confidence[c].resize(conf.pixels.size());
            for (size_t p = 0; p < conf.pixels.size(); ++p)
                vo.confidence[c][p] = conf.pixels[p] / 255.0f;
        }
        obs.views.push_back(std::move(vo));
    }
    obs.validate();
    return obs;
}

}  // namespace mcss
