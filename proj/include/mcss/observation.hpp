#pragma once

#include "mcss/category.hpp"
#include "mcss/render.hpp"

#include <array>
#include <filesystem>
#include <vector>

namespace mcss {

/// Observed data for one view: per-category segmentation confidences in
/// [0,1] and a depth map in meters (kEmptyDepth = missing).
struct ViewObservation {
    View view;
    std::vector<float> depth;
    std::array<std::vector<float>, kNumCategories> confidence;
};

struct ObservationSet {
    std::vector<ViewObservation> views;

    size_t view_count() const { return views.size(); }
    std::vector<View> cameras() const;
    void validate() const;
};

// views.json (intrinsics + 4x4 world-to-camera, row-major)
std::string views_to_json(const std::vector<View>& views);
std::vector<View> views_from_json(const std::string& json_text);

/// Directory layout: views.json, depth_%03d.pgm (16-bit, millimeters,
/// 0 = missing), conf_%03d_<category>.pgm (8-bit, /255).
void save_observations(const std::filesystem::path& dir, const ObservationSet& obs);
ObservationSet load_observations(const std::filesystem::path& dir);

}  // namespace mcss
