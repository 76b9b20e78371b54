#pragma once

#include "mcss/geometry.hpp"

#include <filesystem>
#include <limits>
#include <span>
#include <vector>

namespace mcss {

inline constexpr float kEmptyDepth = std::numeric_limits<float>::infinity();
inline constexpr int kNoWinner = -1;

/// Pinhole camera: x right, y down, z forward (optical axis).
struct View {
    int width = 160, height = 120;
    double fx = 120.0, fy = 120.0, cx = 80.0, cy = 60.0;
    Mat3 rotation = Mat3::Identity();  // world-to-camera
    Vec3 translation = Vec3::Zero();

    Vec3 to_camera(const Vec3& p) const { return rotation * p + translation; }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }

    /// Camera at `eye` looking at `target`, +z world up.
    static View look_at(const Vec3& eye, const Vec3& target, int width, int height,
                        double focal_px);
};

/// Depth raster of one proposal in one view, stored as a tight subwindow.
struct RenderRect {
    int x0 = 0, y0 = 0, w = 0, h = 0;
    std::vector<float> depth;  // w*h, kEmptyDepth where uncovered

    bool empty() const { return w == 0 || h == 0; }
    float at(int x, int y) const { return depth[static_cast<size_t>(y - y0) * w + (x - x0)]; }
    int covered_pixels() const;
};

/// Solo render of a proposal over all views.
struct ProposalRender {
    std::vector<RenderRect> per_view;
    int total_covered() const;
};

/// One camera-space triangle; depth is evaluated from `plane` so coplanar
/// geometry rasterizes to bit-identical depths regardless of triangulation.
struct CamTriangle {
    Vec3 a, b, c;
    Vec3 plane_normal;  // camera-space
    double plane_offset;
};

std::vector<CamTriangle> mesh_to_cam_triangles(const TriangleMesh& world_mesh, const View& view);
std::vector<CamTriangle> polygon_to_cam_triangles(const Polygon3D& polygon, const View& view);

/// Z-buffered rasterization into a tight subwindow. Perspective-correct
/// camera-space depth, top-left fill rule, no back-face culling; triangles
/// are clipped against the near plane (1 cm).
RenderRect rasterize(std::span<const CamTriangle> triangles, const View& view);

ProposalRender prerender_mesh(const TriangleMesh& world_mesh, std::span<const View> views);
ProposalRender prerender_polygon(const Polygon3D& polygon, std::span<const View> views);

/// Solo-render visibility: covered pixels in this view >= min_pixels.
bool visible_in_view(const ProposalRender& render, int view_index, int min_pixels);

/// Full-frame depth-minimum composite of a member set for one view.
/// At equal depth the lower proposal id wins.
struct CompositeView {
    int width = 0, height = 0;
    std::vector<float> depth;    // kEmptyDepth where empty
    std::vector<int> winner;     // proposal id, kNoWinner where empty

    void reset(int w, int h);
};

/// Applies one proposal's render on top of `composite`; any insertion order
/// yields the same result as the full per-pixel minimum.
void composite_add(CompositeView& composite, const RenderRect& rect, int proposal_id);

CompositeView composite_from_scratch(std::span<const int> member_ids,
                                     const std::vector<ProposalRender>& renders, int view_index,
                                     const View& view);

// Debug dumps.
void dump_depth_pgm(const std::filesystem::path& path, const CompositeView& composite,
                    float max_depth_m);

}  // namespace mcss
