#include "mcss/config.hpp"

#include "mcss/io.hpp"

#include <sstream>
#include <stdexcept>

namespace mcss {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::map<std::string, std::string> parse_flat_toml(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream ss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("config line " + std::to_string(lineno) + ": bad section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        out[section.empty() ? key : section + "." + key] = value;
    }
    return out;
}

namespace {

class Getter {
public:
    explicit Getter(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

    double num(const std::string& key, double fallback) const {
        const auto it = kv_.find(key);
        return it == kv_.end() ? fallback : std::stod(it->second);
    }
    int integer(const std::string& key, int fallback) const {
        const auto it = kv_.find(key);
        return it == kv_.end() ? fallback : std::stoi(it->second);
    }
    uint64_t u64(const std::string& key, uint64_t fallback) const {
        const auto it = kv_.find(key);
        return it == kv_.end() ? fallback : std::stoull(it->second);
    }
    bool boolean(const std::string& key, bool fallback) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        return it->second == "true" || it->second == "1";
    }
    std::string str(const std::string& key, const std::string& fallback) const {
        const auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

private:
    std::map<std::string, std::string> kv_;
};

}  // namespace

AppConfig AppConfig::from_string(const std::string& text) {
    const Getter g(parse_flat_toml(text));
    AppConfig c;

    c.weights.lambda_i = g.num("weights.lambda_i", c.weights.lambda_i);
    c.weights.lambda_d = g.num("weights.lambda_d", c.weights.lambda_d);
    c.weights.lambda_p = g.num("weights.lambda_p", c.weights.lambda_p);
    c.weights.depth_cap = g.num("weights.depth_cap", c.weights.depth_cap);

    c.compat.iou_threshold = g.num("compat.iou_threshold", c.compat.iou_threshold);
    c.compat.surface_ratio_threshold =
        g.num("compat.surface_ratio_threshold", c.compat.surface_ratio_threshold);
    c.compat.layout_slab = g.num("compat.layout_slab", c.compat.layout_slab);
    c.voxel_size = g.num("compat.voxel_size", c.voxel_size);
    c.visibility_min_pixels = g.integer("render.visibility_min_pixels", c.visibility_min_pixels);

    c.mcss.iterations = g.integer("mcss.iterations", c.mcss.iterations);
    c.mcss.simulations_objects = g.integer("mcss.simulations_objects", c.mcss.simulations_objects);
    c.mcss.simulations_layouts = g.integer("mcss.simulations_layouts", c.mcss.simulations_layouts);
    c.mcss.ucb_lambda1 = g.num("mcss.ucb_lambda1", c.mcss.ucb_lambda1);
    c.mcss.ucb_lambda2 = g.num("mcss.ucb_lambda2", c.mcss.ucb_lambda2);
    c.mcss.log_stride = g.integer("mcss.log_stride", c.mcss.log_stride);
    c.mcss.use_max_backup = g.boolean("mcss.use_max_backup", c.mcss.use_max_backup);
    c.mcss.seed = g.u64("mcss.seed", c.mcss.seed);

    c.ransac.stage1_dist = g.num("ransac.stage1_dist", c.ransac.stage1_dist);
    c.ransac.stage1_normal_deg = g.num("ransac.stage1_normal_deg", c.ransac.stage1_normal_deg);
    c.ransac.stage1_final_dist = g.num("ransac.stage1_final_dist", c.ransac.stage1_final_dist);
    c.ransac.stage1_final_normal_deg =
        g.num("ransac.stage1_final_normal_deg", c.ransac.stage1_final_normal_deg);
    c.ransac.stage1_min_inliers = g.integer("ransac.stage1_min_inliers", c.ransac.stage1_min_inliers);
    c.ransac.iterations = g.integer("ransac.iterations", c.ransac.iterations);
    c.ransac.stage2_dist = g.num("ransac.stage2_dist", c.ransac.stage2_dist);
    c.ransac.stage2_normal_deg = g.num("ransac.stage2_normal_deg", c.ransac.stage2_normal_deg);
    c.ransac.stage2_min_inliers = g.integer("ransac.stage2_min_inliers", c.ransac.stage2_min_inliers);
    c.ransac.floor_max_tilt_deg = g.num("ransac.floor_max_tilt_deg", c.ransac.floor_max_tilt_deg);
    c.ransac.corner_bounds_margin =
        g.num("ransac.corner_bounds_margin", c.ransac.corner_bounds_margin);
    c.ransac.cycle_max_length = g.integer("ransac.cycle_max_length", c.ransac.cycle_max_length);
    c.ransac.min_polygon_area = g.num("ransac.min_polygon_area", c.ransac.min_polygon_area);

    const std::string room = g.str("synth.room", "cuboid");
    if (room == "cuboid")
        c.synth.room = RoomShape::Cuboid;
    else if (room == "l" || room == "L")
        c.synth.room = RoomShape::LShape;
    else if (room == "u" || room == "U")
        c.synth.room = RoomShape::UShape;
    else
        throw std::runtime_error("config: unknown synth.room '" + room + "'");
    c.synth.room_width = g.num("synth.room_width", c.synth.room_width);
    c.synth.room_depth = g.num("synth.room_depth", c.synth.room_depth);
    c.synth.wall_height = g.num("synth.wall_height", c.synth.wall_height);
    c.synth.object_counts[static_cast<int>(Category::Chair)] =
        g.integer("synth.chairs", c.synth.object_counts[static_cast<int>(Category::Chair)]);
    c.synth.object_counts[static_cast<int>(Category::Table)] =
        g.integer("synth.tables", c.synth.object_counts[static_cast<int>(Category::Table)]);
    c.synth.object_counts[static_cast<int>(Category::Sofa)] =
        g.integer("synth.sofas", c.synth.object_counts[static_cast<int>(Category::Sofa)]);
    c.synth.object_counts[static_cast<int>(Category::Bed)] =
        g.integer("synth.beds", c.synth.object_counts[static_cast<int>(Category::Bed)]);
    c.synth.jitter_copies = g.integer("synth.jitter_copies", c.synth.jitter_copies);
    c.synth.jitter_sigma = g.num("synth.jitter_sigma", c.synth.jitter_sigma);
    c.synth.decoy_count = g.integer("synth.decoy_count", c.synth.decoy_count);
    c.synth.wrong_model_swaps = g.integer("synth.wrong_model_swaps", c.synth.wrong_model_swaps);
    c.synth.layout_decoys = g.integer("synth.layout_decoys", c.synth.layout_decoys);
    c.synth.wall_crossing_decoys =
        g.integer("synth.wall_crossing_decoys", c.synth.wall_crossing_decoys);
    c.synth.view_count = g.integer("synth.view_count", c.synth.view_count);
    c.synth.image_width = g.integer("synth.image_width", c.synth.image_width);
    c.synth.image_height = g.integer("synth.image_height", c.synth.image_height);
    c.synth.focal_px = g.num("synth.focal_px", c.synth.focal_px);
    c.synth.camera_height = g.num("synth.camera_height", c.synth.camera_height);
    c.synth.depth_hole_fraction = g.num("synth.depth_hole_fraction", c.synth.depth_hole_fraction);
    c.synth.label_flip_prob = g.num("synth.label_flip_prob", c.synth.label_flip_prob);
    c.synth.voxel_size = g.num("compat.voxel_size", c.synth.voxel_size);
    c.synth.seed = g.u64("synth.seed", c.synth.seed);
    c.cloud_points_per_m2 = g.num("synth.cloud_points_per_m2", c.cloud_points_per_m2);
    c.cloud_noise_sigma = g.num("synth.cloud_noise_sigma", c.cloud_noise_sigma);

    return c;
}

AppConfig AppConfig::from_file(const std::filesystem::path& path) {
    return from_string(read_text_file(path));
}

std::string AppConfig::to_string() const {
    std::ostringstream ss;
    ss.precision(12);
    ss << "[weights]\n"
       << "lambda_i = " << weights.lambda_i << "\n"
       << "lambda_d = " << weights.lambda_d << "\n"
       << "lambda_p = " << weights.lambda_p << "\n"
       << "depth_cap = " << weights.depth_cap << "\n\n"
       << "[compat]\n"
       << "iou_threshold = " << compat.iou_threshold << "\n"
       << "surface_ratio_threshold = " << compat.surface_ratio_threshold << "\n"
       << "layout_slab = " << compat.layout_slab << "\n"
       << "voxel_size = " << voxel_size << "\n\n"
       << "[render]\n"
       << "visibility_min_pixels = " << visibility_min_pixels << "\n\n"
       << "[mcss]\n"
       << "iterations = " << mcss.iterations << "\n"
       << "simulations_objects = " << mcss.simulations_objects << "\n"
       << "simulations_layouts = " << mcss.simulations_layouts << "\n"
       << "ucb_lambda1 = " << mcss.ucb_lambda1 << "\n"
       << "ucb_lambda2 = " << mcss.ucb_lambda2 << "\n"
       << "log_stride = " << mcss.log_stride << "\n"
       << "use_max_backup = " << (mcss.use_max_backup ? "true" : "false") << "\n";
    return ss.str();
}

}  // namespace mcss
