#include "mcss/render.hpp"

#include "mcss/io.hpp"

#include <algorithm>
#include <cmath>

namespace mcss {

namespace {
constexpr double kNearPlane = 0.01;
}

View View::look_at(const Vec3& eye, const Vec3& target, int width, int height, double focal_px) {
    Vec3 forward = (target - eye).normalized();
    Vec3 up_hint = Vec3::UnitZ();
    if (std::abs(forward.dot(up_hint)) > 0.999) up_hint = Vec3::UnitY();
    const Vec3 right = forward.cross(up_hint).normalized();
    const Vec3 down = forward.cross(right);  // camera y points down

    View v;
    v.width = width;
    v.height = height;
    v.fx = v.fy = focal_px;
    v.cx = 0.5 * width;
    v.cy = 0.5 * height;
    v.rotation.row(0) = right;
    v.rotation.row(1) = down;
    v.rotation.row(2) = forward;
    v.translation = -v.rotation * eye;
    return v;
}

int RenderRect::covered_pixels() const {
    int n = 0;
    for (float d : depth)
        if (d != kEmptyDepth) ++n;
    return n;
}

int ProposalRender::total_covered() const {
    int n = 0;
    for (const RenderRect& r : per_view) n += r.covered_pixels();
    return n;
}

std::vector<CamTriangle> mesh_to_cam_triangles(const TriangleMesh& world_mesh, const View& view) {
    std::vector<CamTriangle> out;
    out.reserve(world_mesh.triangles.size());
    for (const auto& t : world_mesh.triangles) {
        CamTriangle ct;
        ct.a = view.to_camera(world_mesh.vertices[t[0]]);
        ct.b = view.to_camera(world_mesh.vertices[t[1]]);
        ct.c = view.to_camera(world_mesh.vertices[t[2]]);
        Vec3 n = (ct.b - ct.a).cross(ct.c - ct.a);
        const double len = n.norm();
        if (len < 1e-14) continue;
        n /= len;
        ct.plane_normal = n;
        ct.plane_offset = n.dot(ct.a);
        out.push_back(ct);
    }
    return out;
}

std::vector<CamTriangle> polygon_to_cam_triangles(const Polygon3D& polygon, const View& view) {
    // All triangles of the polygon share the polygon's own support plane, so
    // coplanar proposals produce identical per-pixel depths.
    const Vec3 n_cam = view.rotation * polygon.plane.normal;
    const double off_cam = polygon.plane.offset + n_cam.dot(view.translation);

    const auto coords2d = polygon.to_plane_coords();
    const auto tris = triangulate_polygon_2d(coords2d);
    std::vector<CamTriangle> out;
    out.reserve(tris.size());
    for (const auto& t : tris) {
        CamTriangle ct;
        ct.a = view.to_camera(polygon.vertices[t[0]]);
        ct.b = view.to_camera(polygon.vertices[t[1]]);
        ct.c = view.to_camera(polygon.vertices[t[2]]);
        ct.plane_normal = n_cam;
        ct.plane_offset = off_cam;
        out.push_back(ct);
    }
    return out;
}

namespace {

// Clip a camera-space triangle against z >= kNearPlane; 0, 1 or 2 triangles.
int clip_near(const CamTriangle& t, CamTriangle out[2]) {
    const Vec3* v[3] = {&t.a, &t.b, &t.c};
    Vec3 in[3], tmp[4];
    int n_in = 0, n_out = 0;
    Vec3 outv[3];
    for (int i = 0; i < 3; ++i) {
        if (v[i]->z() >= kNearPlane)
            in[n_in++] = *v[i];
        else
            outv[n_out++] = *v[i];
    }
    auto lerp_to_plane = [](const Vec3& a, const Vec3& b) {
        const double s = (kNearPlane - a.z()) / (b.z() - a.z());
        return (a + s * (b - a)).eval();
    };
    auto emit = [&](const Vec3& a, const Vec3& b, const Vec3& c, int slot) {
        out[slot] = t;
        out[slot].a = a;
        out[slot].b = b;
        out[slot].c = c;
    };
    if (n_in == 3) {
        out[0] = t;
        return 1;
    }
    if (n_in == 0) return 0;
    if (n_in == 1) {
        tmp[0] = in[0];
        tmp[1] = lerp_to_plane(in[0], outv[0]);
        tmp[2] = lerp_to_plane(in[0], outv[1]);
        emit(tmp[0], tmp[1], tmp[2], 0);
        return 1;
    }
    // n_in == 2: quad, split into two triangles
    tmp[0] = in[0];
    tmp[1] = in[1];
    tmp[2] = lerp_to_plane(in[1], outv[0]);
    tmp[3] = lerp_to_plane(in[0], outv[0]);
    emit(tmp[0], tmp[1], tmp[2], 0);
    emit(tmp[0], tmp[2], tmp[3], 1);
    return 2;
}

struct ScreenTri {
    Vec2 p0, p1, p2;
    Vec3 plane_normal;
    double plane_offset;
};

bool edge_top_left(const Vec2& a, const Vec2& b) {
    if (a.y() == b.y()) return b.x() < a.x();
    return b.y() > a.y();
}

}  // namespace

RenderRect rasterize(std::span<const CamTriangle> triangles, const View& view) {
    std::vector<ScreenTri> tris;
    tris.reserve(triangles.size());
    double minx = view.width, miny = view.height, maxx = 0.0, maxy = 0.0;

    CamTriangle clipped[2];
    for (const CamTriangle& t : triangles) {
        const int n = clip_near(t, clipped);
        for (int i = 0; i < n; ++i) {
            const CamTriangle& c = clipped[i];
            auto project = [&](const Vec3& p) {
                return Vec2(view.fx * p.x() / p.z() + view.cx, view.fy * p.y() / p.z() + view.cy);
            };
            ScreenTri st{project(c.a), project(c.b), project(c.c), c.plane_normal, c.plane_offset};
            const double area2 = (st.p1 - st.p0).x() * (st.p2 - st.p0).y() -
                                 (st.p1 - st.p0).y() * (st.p2 - st.p0).x();
            if (area2 == 0.0) continue;
            if (area2 < 0.0) std::swap(st.p1, st.p2);  // force CCW in screen space
            minx = std::min({minx, st.p0.x(), st.p1.x(), st.p2.x()});
            maxx = std::max({maxx, st.p0.x(), st.p1.x(), st.p2.x()});
            miny = std::min({miny, st.p0.y(), st.p1.y(), st.p2.y()});
            maxy = std::max({maxy, st.p0.y(), st.p1.y(), st.p2.y()});
            tris.push_back(st);
        }
    }

    RenderRect rect;
    if (tris.empty()) return rect;
    rect.x0 = std::clamp(static_cast<int>(std::floor(minx - 0.5)), 0, view.width);
    rect.y0 = std::clamp(static_cast<int>(std::floor(miny - 0.5)), 0, view.height);
    const int x1 = std::clamp(static_cast<int>(std::ceil(maxx + 0.5)), 0, view.width);
    const int y1 = std::clamp(static_cast<int>(std::ceil(maxy + 0.5)), 0, view.height);
    rect.w = x1 - rect.x0;
    rect.h = y1 - rect.y0;
    if (rect.w <= 0 || rect.h <= 0) {
        rect = RenderRect{};
        return rect;
    }
    rect.depth.assign(static_cast<size_t>(rect.w) * rect.h, kEmptyDepth);

    for (const ScreenTri& t : tris) {
        const int tx0 = std::clamp(static_cast<int>(std::floor(std::min({t.p0.x(), t.p1.x(), t.p2.x()}) - 0.5)), rect.x0, rect.x0 + rect.w);
        const int tx1 = std::clamp(static_cast<int>(std::ceil(std::max({t.p0.x(), t.p1.x(), t.p2.x()}) + 0.5)), rect.x0, rect.x0 + rect.w);
        const int ty0 = std::clamp(static_cast<int>(std::floor(std::min({t.p0.y(), t.p1.y(), t.p2.y()}) - 0.5)), rect.y0, rect.y0 + rect.h);
        const int ty1 = std::clamp(static_cast<int>(std::ceil(std::max({t.p0.y(), t.p1.y(), t.p2.y()}) + 0.5)), rect.y0, rect.y0 + rect.h);

        auto edge = [](const Vec2& a, const Vec2& b, double px, double py) {
            return (px - a.x()) * (b.y() - a.y()) - (py - a.y()) * (b.x() - a.x());
        };
        for (int y = ty0; y < ty1; ++y) {
            const double py = y + 0.5;
            for (int x = tx0; x < tx1; ++x) {
                const double px = x + 0.5;
                // CCW winding with y down: inside is where all edges are <= 0
                const double e0 = edge(t.p0, t.p1, px, py);
                const double e1 = edge(t.p1, t.p2, px, py);
                const double e2 = edge(t.p2, t.p0, px, py);
                auto pass = [&](double e, const Vec2& a, const Vec2& b) {
                    if (e != 0.0) return e < 0.0;
                    return edge_top_left(a, b);
                };
                if (!pass(e0, t.p0, t.p1) || !pass(e1, t.p1, t.p2) || !pass(e2, t.p2, t.p0))
                    continue;
                const Vec3 dir((px - view.cx) / view.fx, (py - view.cy) / view.fy, 1.0);
                const double denom = t.plane_normal.dot(dir);
                if (denom == 0.0) continue;
                const double z = t.plane_offset / denom;
                if (!(z >= 0.5 * kNearPlane) || !std::isfinite(z)) continue;
                float& slot = rect.depth[static_cast<size_t>(y - rect.y0) * rect.w + (x - rect.x0)];
                const float zf = static_cast<float>(z);
                if (zf < slot) slot = zf;
            }
        }
    }
    return rect;
}

ProposalRender prerender_mesh(const TriangleMesh& world_mesh, std::span<const View> views) {
    ProposalRender out;
    out.per_view.reserve(views.size());
    for (const View& v : views) out.per_view.push_back(rasterize(mesh_to_cam_triangles(world_mesh, v), v));
    return out;
}

ProposalRender prerender_polygon(const Polygon3D& polygon, std::span<const View> views) {
    ProposalRender out;
    out.per_view.reserve(views.size());
    for (const View& v : views)
        out.per_view.push_back(rasterize(polygon_to_cam_triangles(polygon, v), v));
    return out;
}

bool visible_in_view(const ProposalRender& render, int view_index, int min_pixels) {
    return render.per_view[view_index].covered_pixels() >= min_pixels;
}

void CompositeView::reset(int w, int h) {
    width = w;
    height = h;
    depth.assign(static_cast<size_t>(w) * h, kEmptyDepth);
    winner.assign(static_cast<size_t>(w) * h, kNoWinner);
}

void composite_add(CompositeView& composite, const RenderRect& rect, int proposal_id) {
    for (int y = 0; y < rect.h; ++y) {
        const size_t src_row = static_cast<size_t>(y) * rect.w;
        const size_t dst_row = static_cast<size_t>(y + rect.y0) * composite.width + rect.x0;
        for (int x = 0; x < rect.w; ++x) {
            const float d = rect.depth[src_row + x];
            if (d == kEmptyDepth) continue;
            float& cur = composite.depth[dst_row + x];
            int& win = composite.winner[dst_row + x];
            if (d < cur || (d == cur && proposal_id < win)) {
                cur = d;
                win = proposal_id;
            }
        }
    }
}

CompositeView composite_from_scratch(std::span<const int> member_ids,
                                     const std::vector<ProposalRender>& renders, int view_index,
                                     const View& view) {
    CompositeView c;
    c.reset(view.width, view.height);
    std::vector<int> ids(member_ids.begin(), member_ids.end());
    std::sort(ids.begin(), ids.end());
    for (int id : ids) composite_add(c, renders[id].per_view[view_index], id);
    return c;
}

void dump_depth_pgm(const std::filesystem::path& path, const CompositeView& composite,
                    float max_depth_m) {
    Image16 img{composite.width, composite.height, {}};
    img.pixels.resize(composite.depth.size());
    for (size_t i = 0; i < composite.depth.size(); ++i) {
        const float d = composite.depth[i];
        img.pixels[i] = (d == kEmptyDepth)
                            ? 0
                            : static_cast<uint16_t>(std::min(65535.0f, 1000.0f * std::min(d, max_depth_m)));
    }
    write_pgm16(path, img);
}

}  // namespace mcss
