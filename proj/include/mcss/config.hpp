#pragma once

#include "mcss/ransac.hpp"
#include "mcss/search.hpp"
#include "mcss/synth.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace mcss {

/// All tunables in one place, loadable from a flat TOML-style file
/// ([section] headers, key = value lines, # comments). Defaults carry the
/// published constants (lambda_i = lambda_d = 1, lambda_p = 2.5, IoU
/// threshold 0.3, 20000 iterations, 10/1 simulations, RANSAC stages).
struct AppConfig {
    ScoreWeights weights;
    CompatParams compat;
    double voxel_size = 0.05;
    int visibility_min_pixels = 16;
    McssConfig mcss;
    RansacParams ransac;
    SynthConfig synth;
    double cloud_points_per_m2 = 700.0;
    double cloud_noise_sigma = 0.0;

    static AppConfig from_file(const std::filesystem::path& path);
    static AppConfig from_string(const std::string& text);
    std::string to_string() const;
};

/// Minimal TOML subset: sections, scalar keys, inline comments.
std::map<std::string, std::string> parse_flat_toml(const std::string& text);

}  // namespace mcss
