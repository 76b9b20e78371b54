#pragma once

#include "mcss/io.hpp"
#include "mcss/proposals.hpp"

#include <optional>
#include <vector>

namespace mcss {

struct RansacParams {
    // stage 1: large layout planes
    double stage1_dist = 0.10;
    double stage1_normal_deg = 15.0;
    double stage1_final_dist = 0.20;
    double stage1_final_normal_deg = 30.0;
    int stage1_min_inliers = 5000;
    int iterations = 2000;
    // stage 2: small components (thresholds as reported, distance is loose)
    double stage2_dist = 1.00;
    double stage2_normal_deg = 10.0;
    int stage2_min_inliers = 300;

    double floor_max_tilt_deg = 15.0;  // |normal . z| above cos(tilt) counts as floor
    double corner_bounds_margin = 0.5;
    int cycle_max_length = 8;
    double min_polygon_area = 0.05;
};

struct DetectedPlane {
    Plane plane;
    std::vector<int> inliers;  // indices into the input cloud
    bool is_floor = false;
};

struct PlaneSet {
    std::vector<DetectedPlane> planes;
    std::optional<int> floor_index;
};

/// Two-stage RANSAC over a layout-labeled cloud. Stage 1 keeps planes with
/// more than stage1_min_inliers final inliers; once it fails, stage 2 hunts
/// small components. Inliers of accepted planes are removed before the next
/// round; at most one near-horizontal plane is kept, as the floor.
PlaneSet detect_planes(const std::vector<CloudPoint>& cloud, const RansacParams& params,
                       uint64_t seed);

struct Corner {
    Vec3 position;
    std::vector<int> plane_ids;  // >= 3, indices into the working plane list
};

struct CornerEdge {
    int a = 0, b = 0;            // corner indices
    std::vector<int> plane_ids;  // shared planes (>= 2)
    int64_t key = 0;             // stable id derived from the corner pair
};

/// Planes used for corner construction: the detected set plus the cloud
/// bounding-box top face standing in for the (unscanned) ceiling.
std::vector<Plane> corner_planes(const PlaneSet& detected, const std::vector<CloudPoint>& cloud);

/// All triple intersections with independent normals, inside the cloud
/// bounds grown by params.corner_bounds_margin; coincident corners merged.
std::vector<Corner> build_corners(const std::vector<Plane>& planes,
                                  const std::vector<CloudPoint>& cloud,
                                  const RansacParams& params);

/// Corner pairs sharing at least two planes.
std::vector<CornerEdge> build_edges(const std::vector<Corner>& corners);

/// Simple cycles per wall plane (up to params.cycle_max_length), collinear
/// vertices dropped, exact duplicates removed, area filtered. Wall polygons
/// only; ids are assigned densely from 0.
std::vector<LayoutProposal> build_polygons(const std::vector<Corner>& corners,
                                           const std::vector<CornerEdge>& edges,
                                           const std::vector<Plane>& planes,
                                           const PlaneSet& detected, const RansacParams& params);

/// Chains the base edges of the selected walls into a loop on the floor
/// plane (5 cm gap closing). Throws "unclosed wall loop" when it cannot.
LayoutProposal floor_from_walls(const std::vector<LayoutProposal>& selected_walls,
                                const Plane& floor_plane, double gap_tolerance = 0.05);

/// Full pipeline: cloud -> layout proposal pool (walls only).
std::vector<LayoutProposal> layout_proposals_from_cloud(const std::vector<CloudPoint>& cloud,
                                                        const RansacParams& params, uint64_t seed,
                                                        PlaneSet* detected_out = nullptr);

}  // namespace mcss
