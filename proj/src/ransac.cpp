#include "mcss/ransac.hpp"

#include "mcss/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace mcss {

namespace {

struct FlatCloud {
    std::vector<double> px, py, pz, nx, ny, nz;
    std::vector<int> original;  // index into the caller's cloud

    size_t size() const { return px.size(); }
    Vec3 point(size_t i) const { return Vec3(px[i], py[i], pz[i]); }

    static FlatCloud from(const std::vector<CloudPoint>& cloud, const std::vector<int>& keep) {
        FlatCloud f;
        const size_t n = keep.size();
        f.px.reserve(n);
        f.py.reserve(n);
        f.pz.reserve(n);
        f.nx.reserve(n);
        f.ny.reserve(n);
        f.nz.reserve(n);
        f.original = keep;
        for (int idx : keep) {
            const CloudPoint& p = cloud[idx];
            f.px.push_back(p.position.x());
            f.py.push_back(p.position.y());
            f.pz.push_back(p.position.z());
            f.nx.push_back(p.normal.x());
            f.ny.push_back(p.normal.y());
            f.nz.push_back(p.normal.z());
        }
        return f;
    }
};

int count_inliers(const FlatCloud& c, const Plane& plane, double max_dist, double min_ndot) {
    const double a = plane.normal.x(), b = plane.normal.y(), d = plane.normal.z();
    const double off = plane.offset;
    int count = 0;
    const size_t n = c.size();
    for (size_t i = 0; i < n; ++i) {
        const double dist = std::abs(a * c.px[i] + b * c.py[i] + d * c.pz[i] - off);
        const double ndot = std::abs(a * c.nx[i] + b * c.ny[i] + d * c.nz[i]);
        if (dist <= max_dist && ndot >= min_ndot) ++count;
    }
    return count;
}

std::vector<int> collect_inliers(const FlatCloud& c, const Plane& plane, double max_dist,
                                 double min_ndot) {
    const double a = plane.normal.x(), b = plane.normal.y(), d = plane.normal.z();
    const double off = plane.offset;
    std::vector<int> out;
    for (size_t i = 0; i < c.size(); ++i) {
        const double dist = std::abs(a * c.px[i] + b * c.py[i] + d * c.pz[i] - off);
        const double ndot = std::abs(a * c.nx[i] + b * c.ny[i] + d * c.nz[i]);
        if (dist <= max_dist && ndot >= min_ndot) out.push_back(static_cast<int>(i));
    }
    return out;
}

}  // namespace

PlaneSet detect_planes(const std::vector<CloudPoint>& cloud, const RansacParams& params,
                       uint64_t seed) {
    PlaneSet result;
    Rng rng(splitmix64(seed ^ 0x9a45acULL));

    std::vector<int> remaining(cloud.size());
    std::iota(remaining.begin(), remaining.end(), 0);
    const double cos_floor = std::cos(params.floor_max_tilt_deg * M_PI / 180.0);

    int stage = 1;
    while (remaining.size() >= 3) {
        const FlatCloud flat = FlatCloud::from(cloud, remaining);
        const double score_dist = stage == 1 ? params.stage1_dist : params.stage2_dist;
        const double score_ndot = std::cos((stage == 1 ? params.stage1_normal_deg
                                                       : params.stage2_normal_deg) *
                                           M_PI / 180.0);
        const double final_dist = stage == 1 ? params.stage1_final_dist : params.stage2_dist;
        const double final_ndot = stage == 1
                                      ? std::cos(params.stage1_final_normal_deg * M_PI / 180.0)
                                      : score_ndot;
        const int min_inliers = stage == 1 ? params.stage1_min_inliers : params.stage2_min_inliers;

        int best_count = -1;
        Plane best_plane;
        for (int it = 0; it < params.iterations; ++it) {
            const int i = rng.uniform_int(static_cast<int>(flat.size()));
            const int j = rng.uniform_int(static_cast<int>(flat.size()));
            const int k = rng.uniform_int(static_cast<int>(flat.size()));
            if (i == j || j == k || i == k) continue;
            Plane hyp;
            try {
                hyp = fit_plane_3pts(flat.point(i), flat.point(j), flat.point(k));
            } catch (const std::invalid_argument&) {
                continue;
            }
            const int count = count_inliers(flat, hyp, score_dist, score_ndot);
            if (count > best_count) {
                best_count = count;
                best_plane = hyp;
            }
        }

        bool accepted = false;
        if (best_count >= 0) {
            std::vector<int> final_in = collect_inliers(flat, best_plane, final_dist, final_ndot);
            if (static_cast<int>(final_in.size()) > min_inliers) {
                std::vector<Vec3> pts;
                pts.reserve(final_in.size());
                for (int i : final_in) pts.push_back(flat.point(i));
                const Plane refit = fit_plane_lsq(pts);
                final_in = collect_inliers(flat, refit, final_dist, final_ndot);
                if (static_cast<int>(final_in.size()) > min_inliers) {
                    accepted = true;
                    const bool horizontal = std::abs(refit.normal.z()) >= cos_floor;
                    const bool keep = !horizontal || !result.floor_index.has_value();
                    if (keep) {
                        DetectedPlane dp;
                        dp.plane = refit;
                        dp.is_floor = horizontal;
                        for (int i : final_in) dp.inliers.push_back(flat.original[i]);
                        if (horizontal)
                            result.floor_index = static_cast<int>(result.planes.size());
                        result.planes.push_back(std::move(dp));
                    }
                    // consume the inliers either way so the loop advances
                    std::set<int> gone;
                    for (int i : final_in) gone.insert(flat.original[i]);
                    std::vector<int> next;
                    next.reserve(remaining.size() - gone.size());
                    for (int idx : remaining)
                        if (!gone.count(idx)) next.push_back(idx);
                    remaining = std::move(next);
                }
            }
        }
        if (!accepted) {
            if (stage == 1)
                stage = 2;
            else
                break;
        }
    }
    return result;
}

std::vector<Plane> corner_planes(const PlaneSet& detected, const std::vector<CloudPoint>& cloud) {
    std::vector<Plane> planes;
    for (const DetectedPlane& p : detected.planes) planes.push_back(p.plane);
    double top = -std::numeric_limits<double>::infinity();
    for (const CloudPoint& p : cloud) top = std::max(top, p.position.z());
    planes.push_back(Plane{Vec3::UnitZ(), top});  // stand-in ceiling
    return planes;
}

std::vector<Corner> build_corners(const std::vector<Plane>& planes,
                                  const std::vector<CloudPoint>& cloud,
                                  const RansacParams& params) {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (const CloudPoint& p : cloud) {
        lo = lo.cwiseMin(p.position);
        hi = hi.cwiseMax(p.position);
    }
    lo -= Vec3::Constant(params.corner_bounds_margin);
    hi += Vec3::Constant(params.corner_bounds_margin);

    std::vector<Corner> corners;
    const int n = static_cast<int>(planes.size());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            for (int k = j + 1; k < n; ++k) {
                const auto p = intersect_three_planes(planes[i], planes[j], planes[k]);
                if (!p) continue;
                if ((p->array() < lo.array()).any() || (p->array() > hi.array()).any()) continue;
                bool merged = false;
                for (Corner& c : corners) {
                    if ((c.position - *p).norm() <= 1e-3) {
                        for (int pid : {i, j, k})
                            if (std::find(c.plane_ids.begin(), c.plane_ids.end(), pid) ==
                                c.plane_ids.end())
                                c.plane_ids.push_back(pid);
                        merged = true;
                        break;
                    }
                }
                if (!merged) corners.push_back(Corner{*p, {i, j, k}});
            }
        }
    }
    for (Corner& c : corners) std::sort(c.plane_ids.begin(), c.plane_ids.end());
    return corners;
}

std::vector<CornerEdge> build_edges(const std::vector<Corner>& corners) {
    std::vector<CornerEdge> edges;
    const int n = static_cast<int>(corners.size());
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            std::vector<int> shared;
            std::set_intersection(corners[a].plane_ids.begin(), corners[a].plane_ids.end(),
                                  corners[b].plane_ids.begin(), corners[b].plane_ids.end(),
                                  std::back_inserter(shared));
            if (shared.size() < 2) continue;
            CornerEdge e;
            e.a = a;
            e.b = b;
            e.plane_ids = std::move(shared);
            e.key = quantized_edge_key(corners[a].position, corners[b].position);
            edges.push_back(std::move(e));
        }
    }
    return edges;
}

namespace {

// simple cycles up to max_len, each emitted once (canonical start/direction)
std::vector<std::vector<int>> enumerate_cycles(const std::vector<int>& nodes,
                                               const std::map<int, std::vector<int>>& adj,
                                               int max_len, size_t cap) {
    std::vector<std::vector<int>> cycles;
    std::vector<int> path;
    std::set<int> on_path;

    std::function<void(int, int)> dfs = [&](int start, int cur) {
        if (cycles.size() >= cap) return;
        for (int next : adj.at(cur)) {
            if (next == start && path.size() >= 3) {
                if (path[1] < path.back()) cycles.push_back(path);  // one direction only
                continue;
            }
            if (next <= start || on_path.count(next)) continue;
            if (static_cast<int>(path.size()) >= max_len) continue;
            path.push_back(next);
            on_path.insert(next);
            dfs(start, next);
            on_path.erase(next);
            path.pop_back();
        }
    };
    for (int start : nodes) {
        path = {start};
        on_path = {start};
        dfs(start, start);
    }
    return cycles;
}

}  // namespace

std::vector<LayoutProposal> build_polygons(const std::vector<Corner>& corners,
                                           const std::vector<CornerEdge>& edges,
                                           const std::vector<Plane>& planes,
                                           const PlaneSet& detected, const RansacParams& params) {
    std::vector<LayoutProposal> proposals;
    std::set<std::vector<int64_t>> seen;

    for (size_t pid = 0; pid < detected.planes.size(); ++pid) {
        if (detected.planes[pid].is_floor) continue;  // walls only
        const Plane& plane = planes[pid];

        std::map<int, std::vector<int>> adj;
        std::set<int> node_set;
        for (const CornerEdge& e : edges) {
            if (std::find(e.plane_ids.begin(), e.plane_ids.end(), static_cast<int>(pid)) ==
                e.plane_ids.end())
                continue;
            adj[e.a].push_back(e.b);
            adj[e.b].push_back(e.a);
            node_set.insert(e.a);
            node_set.insert(e.b);
        }
        for (auto& [node, nbrs] : adj) std::sort(nbrs.begin(), nbrs.end());
        std::vector<int> nodes(node_set.begin(), node_set.end());

        for (const auto& cycle : enumerate_cycles(nodes, adj, params.cycle_max_length, 500)) {
            std::vector<Vec3> verts;
            verts.reserve(cycle.size());
            for (int c : cycle) verts.push_back(plane.project(corners[c].position));

            // drop collinear vertices, then validate
            auto [u, v] = plane.basis();
            const Vec3 anchor = plane.offset * plane.normal;
            std::vector<Vec2> coords;
            for (const Vec3& p : verts) {
                const Vec3 d = p - anchor;
                coords.emplace_back(u.dot(d), v.dot(d));
            }
            std::vector<int> kept;
            for (size_t i = 0; i < coords.size(); ++i) {
                const Vec2 &prev = coords[(i + coords.size() - 1) % coords.size()];
                const Vec2 &cur = coords[i], &next = coords[(i + 1) % coords.size()];
                const double cross = (cur.x() - prev.x()) * (next.y() - prev.y()) -
                                     (cur.y() - prev.y()) * (next.x() - prev.x());
                if (std::abs(cross) > 1e-8) kept.push_back(static_cast<int>(i));
            }
            if (kept.size() < 3) continue;
            std::vector<Vec3> final_verts;
            std::vector<Vec2> final_coords;
            for (int i : kept) {
                final_verts.push_back(verts[i]);
                final_coords.push_back(coords[i]);
            }
            if (!polygon_is_simple_2d(final_coords)) continue;
            if (std::abs(polygon_area_2d(final_coords)) < params.min_polygon_area) continue;

            // canonical key: rotate to smallest corner key, fix direction
            std::vector<int64_t> keys;
            for (const Vec3& p : final_verts) keys.push_back(quantized_point_key(p));
            const size_t n = keys.size();
            size_t best_rot = 0;
            bool best_rev = false;
            std::vector<int64_t> best = keys;
            for (int rev = 0; rev < 2; ++rev) {
                std::vector<int64_t> k = keys;
                if (rev) std::reverse(k.begin(), k.end());
                for (size_t r = 0; r < n; ++r) {
                    std::vector<int64_t> rot(k.begin() + r, k.end());
                    rot.insert(rot.end(), k.begin(), k.begin() + r);
                    if (rot < best) {
                        best = rot;
                        best_rot = r;
                        best_rev = rev;
                    }
                }
            }
            (void)best_rot;
            (void)best_rev;
            if (!seen.insert(best).second) continue;

            LayoutProposal lp;
            lp.category = Category::Wall;
            lp.plane_id = static_cast<int>(pid);
            lp.polygon.plane = plane;
            lp.polygon.vertices = final_verts;

            // boundary edge ids: every construction edge lying on a segment
            for (const CornerEdge& e : edges) {
                const Vec3 &pa = corners[e.a].position, &pb = corners[e.b].position;
                for (size_t s = 0; s < final_verts.size(); ++s) {
                    const Vec3 &q0 = final_verts[s], &q1 = final_verts[(s + 1) % final_verts.size()];
                    const Vec3 d = q1 - q0;
                    const double len2 = d.squaredNorm();
                    auto on_segment = [&](const Vec3& p) {
                        const double t = d.dot(p - q0) / len2;
                        if (t < -1e-6 || t > 1.0 + 1e-6) return false;
                        return (p - (q0 + t * d)).norm() <= 1e-3;
                    };
                    if (on_segment(pa) && on_segment(pb)) {
                        lp.edge_ids.insert(e.key);
                        break;
                    }
                }
            }
            proposals.push_back(std::move(lp));
        }
    }
    for (size_t i = 0; i < proposals.size(); ++i) proposals[i].id = static_cast<int>(i);
    return proposals;
}

LayoutProposal floor_from_walls(const std::vector<LayoutProposal>& selected_walls,
                                const Plane& floor_plane, double gap_tolerance) {
    struct Segment {
        Vec3 a, b;
        bool used = false;
    };
    std::vector<Segment> segments;
    for (const LayoutProposal& wall : selected_walls) {
        const auto& verts = wall.polygon.vertices;
        for (size_t i = 0; i < verts.size(); ++i) {
            const Vec3 &p = verts[i], &q = verts[(i + 1) % verts.size()];
            if (std::abs(floor_plane.signed_distance(p)) <= gap_tolerance &&
                std::abs(floor_plane.signed_distance(q)) <= gap_tolerance)
                segments.push_back({floor_plane.project(p), floor_plane.project(q)});
        }
    }
    if (segments.empty()) throw std::runtime_error("unclosed wall loop");

    std::vector<Vec3> loop = {segments[0].a, segments[0].b};
    segments[0].used = true;
    size_t used = 1;
    while (used < segments.size()) {
        const Vec3& tail = loop.back();
        double best_dist = gap_tolerance;
        int best = -1;
        bool flip = false;
        for (size_t i = 0; i < segments.size(); ++i) {
            if (segments[i].used) continue;
            const double da = (segments[i].a - tail).norm();
            const double db = (segments[i].b - tail).norm();
            if (da <= best_dist) {
                best_dist = da;
                best = static_cast<int>(i);
                flip = false;
            }
            if (db < best_dist) {
                best_dist = db;
                best = static_cast<int>(i);
                flip = true;
            }
        }
        if (best < 0) break;
        Segment& s = segments[best];
        s.used = true;
        ++used;
        loop.push_back(flip ? s.a : s.b);
    }
    if (used != segments.size() || (loop.front() - loop.back()).norm() > gap_tolerance)
        throw std::runtime_error("unclosed wall loop");
    loop.pop_back();  // closing vertex duplicates the first

    LayoutProposal fl;
    fl.category = Category::Floor;
    fl.plane_id = -1;
    fl.polygon.plane = floor_plane;
    fl.polygon.vertices = loop;
    for (size_t i = 0; i < loop.size(); ++i)
        fl.edge_ids.insert(quantized_edge_key(loop[i], loop[(i + 1) % loop.size()]));
    return fl;
}

std::vector<LayoutProposal> layout_proposals_from_cloud(const std::vector<CloudPoint>& cloud,
                                                        const RansacParams& params, uint64_t seed,
                                                        PlaneSet* detected_out) {
    const PlaneSet detected = detect_planes(cloud, params, seed);
    const std::vector<Plane> planes = corner_planes(detected, cloud);
    const std::vector<Corner> corners = build_corners(planes, cloud, params);
    const std::vector<CornerEdge> edges = build_edges(corners);
    auto proposals = build_polygons(corners, edges, planes, detected, params);
    if (detected_out) *detected_out = detected;
    return proposals;
}

}  // namespace mcss
