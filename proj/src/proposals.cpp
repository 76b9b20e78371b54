#include "mcss/proposals.hpp"

#include "mcss/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace mcss {

using nlohmann::json;

bool LayoutProposal::shares_edge(const LayoutProposal& other) const {
    for (int64_t e : edge_ids)
        if (other.edge_ids.count(e)) return true;
    return false;
}

bool LayoutProposal::is_neighbor(const LayoutProposal& other) const {
    return plane_id != other.plane_id && shares_edge(other);
}

// ---------------------------------------------------------------- object rules

double horizontal_surface_ratio(const ObjectProposal& penetrating, const ObjectProposal& owner) {
    if (!owner.horizontal_surface)
        throw std::invalid_argument("horizontal_surface_ratio: owner has no horizontal surface");
    const SurfaceRect& rect = *owner.horizontal_surface;
    double deepest = 0.0;
    for (const Vec3& p : voxel_intersection_centers(penetrating.voxels, owner.voxels)) {
        const Vec3 d = p - rect.center;
        const double du = std::abs(rect.u.dot(d));
        const double dv = std::abs(rect.v.dot(d));
        if (du > rect.half_u || dv > rect.half_v) continue;
        const double edge_dist = std::min(rect.half_u - du, rect.half_v - dv);
        deepest = std::max(deepest, edge_dist);
    }
    return deepest / rect.shorter_dimension();
}

namespace {

bool is_special_pair(Category a, Category b) {
    const auto pair_is = [&](Category x, Category y) {
        return (a == x && b == y) || (a == y && b == x);
    };
    return pair_is(Category::Chair, Category::Table) || pair_is(Category::Sofa, Category::Table);
}

// Chair-table intersections happen on the table top; sofa-table ones on the
// sofa seat.
const ObjectProposal* surface_owner(const ObjectProposal& a, const ObjectProposal& b) {
    if (a.category == Category::Chair || b.category == Category::Chair)
        return a.category == Category::Table ? &a : &b;
    return a.category == Category::Sofa ? &a : &b;
}

}  // namespace

Compatibility object_object_compat(const ObjectProposal& a, const ObjectProposal& b,
                                   const CompatParams& params) {
    double iou = 0.0;
    try {
        iou = voxel_iou(a.voxels, b.voxels);
    } catch (const std::invalid_argument&) {
        return Compatibility::compatible();  // both empty; nothing to intersect
    }
    if (is_special_pair(a.category, b.category)) {
        const ObjectProposal* owner = surface_owner(a, b);
        if (owner->horizontal_surface) {
            const ObjectProposal* pen = owner == &a ? &b : &a;
            const double ratio = horizontal_surface_ratio(*pen, *owner);
            if (ratio > params.surface_ratio_threshold) return Compatibility::incompatible();
            return iou > 0.0 ? Compatibility::tolerated(iou) : Compatibility::compatible();
        }
        // no surface on the owner: fall through to the generic rule
    }
    if (iou == 0.0) return Compatibility::compatible();
    if (iou <= params.iou_threshold) return Compatibility::tolerated(iou);
    return Compatibility::incompatible();
}

// ---------------------------------------------------------------- layout rules

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

using Interval = std::pair<double, double>;

std::vector<Interval> merge_intervals(std::vector<Interval> iv) {
    std::sort(iv.begin(), iv.end());
    std::vector<Interval> out;
    for (const Interval& i : iv) {
        if (!out.empty() && i.first <= out.back().second)
            out.back().second = std::max(out.back().second, i.second);
        else
            out.push_back(i);
    }
    return out;
}

// Intervals of t where q0 + t*e lies inside `poly` or on a (near-)collinear
// edge; every interval is dilated by `slab`.
std::vector<Interval> line_polygon_intervals(const std::vector<Vec2>& poly, const Vec2& q0,
                                             const Vec2& e, double slab) {
    std::vector<double> crossings;
    std::vector<Interval> intervals;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2 &u = poly[i], &v = poly[(i + 1) % n];
        const Vec2 d = v - u;
        const double denom = cross2(e, d);
        if (std::abs(denom) <= 1e-12 * d.norm()) {
            // parallel edge: contributes a span when it sits on the line
            const double dist = std::abs(cross2(d.normalized(), q0 - u));
            if (dist <= slab) {
                const double tu = e.dot(u - q0), tv = e.dot(v - q0);
                intervals.emplace_back(std::min(tu, tv) - slab, std::max(tu, tv) + slab);
            }
            continue;
        }
        const double s = cross2(u - q0, e) / denom;
        if (s < 0.0 || s >= 1.0) continue;
        crossings.push_back(cross2(u - q0, d) / denom);
    }
    std::sort(crossings.begin(), crossings.end());
    for (size_t i = 0; i + 1 < crossings.size(); i += 2)
        intervals.emplace_back(crossings[i] - slab, crossings[i + 1] + slab);
    return merge_intervals(std::move(intervals));
}

bool intervals_overlap(const std::vector<Interval>& a, const std::vector<Interval>& b) {
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double lo = std::max(a[i].first, b[j].first);
        const double hi = std::min(a[i].second, b[j].second);
        if (hi - lo > 1e-9) return true;
        if (a[i].second < b[j].second)
            ++i;
        else
            ++j;
    }
    return false;
}

std::vector<Vec2> project_to_plane(const Polygon3D& target_plane_of, const LayoutProposal& src) {
    const Plane& plane = target_plane_of.plane;
    auto [u, v] = plane.basis();
    const Vec3 anchor = plane.offset * plane.normal;
    std::vector<Vec2> out;
    out.reserve(src.polygon.vertices.size());
    for (const Vec3& p : src.polygon.vertices) {
        const Vec3 d = plane.project(p) - anchor;
        out.emplace_back(u.dot(d), v.dot(d));
    }
    return out;
}

}  // namespace

Compatibility layout_layout_compat(const LayoutProposal& a, const LayoutProposal& b,
                                   const CompatParams& params) {
    const Plane &pa = a.polygon.plane, &pb = b.polygon.plane;
    const double ndot = pa.normal.dot(pb.normal);

    if (std::abs(ndot) >= 0.99996) {  // parallel within ~0.5 degrees
        const double plane_gap = std::abs(pa.offset - (ndot > 0 ? pb.offset : -pb.offset));
        if (plane_gap > params.layout_slab) return Compatibility::compatible();
        // coplanar: overlapping proposals are alternatives, never companions
        const double inter =
            polygon_intersection_area_2d(a.polygon.to_plane_coords(), project_to_plane(a.polygon, b));
        return inter > 1e-6 ? Compatibility::incompatible() : Compatibility::compatible();
    }

    const Vec3 dir = pa.normal.cross(pb.normal).normalized();
    const auto p0 = intersect_three_planes(pa, pb, Plane{dir, 0.0});
    if (!p0) return Compatibility::compatible();  // numerically degenerate

    auto intervals_of = [&](const LayoutProposal& lp) {
        const Plane& plane = lp.polygon.plane;
        auto [u, v] = plane.basis();
        const Vec3 anchor = plane.offset * plane.normal;
        const Vec2 q0(u.dot(*p0 - anchor), v.dot(*p0 - anchor));
        const Vec2 e(u.dot(dir), v.dot(dir));
        return line_polygon_intervals(lp.polygon.to_plane_coords(), q0, e, params.layout_slab);
    };
    const bool intersect = intervals_overlap(intervals_of(a), intervals_of(b));
    if (intersect && !a.is_neighbor(b)) return Compatibility::incompatible();
    return Compatibility::compatible();
}

Compatibility object_layout_compat(const ObjectProposal& o, const LayoutProposal& l,
                                   double voxel_size) {
    const Plane& plane = l.polygon.plane;
    const auto poly2d = l.polygon.to_plane_coords();
    auto [u, v] = plane.basis();
    const Vec3 anchor = plane.offset * plane.normal;
    double min_sd = std::numeric_limits<double>::infinity();
    double max_sd = -min_sd;
    o.voxels.for_each_occupied([&](int i, int j, int k) {
        const Vec3 p = o.voxels.center_of(i, j, k);
        const Vec3 d = plane.project(p) - anchor;
        if (!point_in_polygon_2d(poly2d, Vec2(u.dot(d), v.dot(d)))) return;
        const double sd = plane.signed_distance(p);
        min_sd = std::min(min_sd, sd);
        max_sd = std::max(max_sd, sd);
    });
    // crossing deeper than one voxel layer on both sides
    if (min_sd < -voxel_size && max_sd > voxel_size) return Compatibility::incompatible();
    return Compatibility::compatible();
}

double object_distance(const ObjectProposal& a, const ObjectProposal& b) {
    return (a.bbox.center - b.bbox.center).norm();
}

// ---------------------------------------------------------------- pool

Category ProposalPool::category(int id) const {
    return is_object(id) ? object(id).category : layout(id).category;
}

double ProposalPool::pair_iou(int a, int b) const {
    const Compatibility& c = compat(a, b);
    return c.kind == Compatibility::Kind::Tolerated ? c.iou : 0.0;
}

bool ProposalPool::compatible_with_all(int id, std::span<const int> members) const {
    for (int m : members)
        if (compat(id, m).incompatible_pair()) return false;
    return true;
}

void ProposalPool::finalize() {
    const int n = size();
    kind_.assign(n, 0);
    std::vector<bool> seen(n, false);
    auto claim = [&](int id, int kind_value) {
        if (id < 0 || id >= n || seen[id])
            throw std::runtime_error("ProposalPool: ids must be unique in [0, size())");
        seen[id] = true;
        kind_[id] = kind_value;
    };
    for (size_t i = 0; i < objects.size(); ++i) claim(objects[i].id, static_cast<int>(i));
    for (size_t i = 0; i < layouts.size(); ++i) claim(layouts[i].id, -static_cast<int>(i) - 1);

    for (ObjectProposal& o : objects) {
        if (o.voxels.occupancy.empty() && o.mesh) o.voxels = voxelize(*o.mesh, o.pose, voxel_size);
    }

    compat_.assign(static_cast<size_t>(n) * n, Compatibility::compatible());
    distance_.assign(static_cast<size_t>(n) * n, std::numeric_limits<double>::infinity());
    for (int a = 0; a < n; ++a) {
        distance_[index(a, a)] = 0.0;
        for (int b = a + 1; b < n; ++b) {
            Compatibility c;
            if (is_object(a) && is_object(b)) {
                c = object_object_compat(object(a), object(b), compat_params);
                distance_[index(a, b)] = distance_[index(b, a)] =
                    object_distance(object(a), object(b));
            } else if (is_layout(a) && is_layout(b)) {
                c = layout_layout_compat(layout(a), layout(b), compat_params);
            } else {
                const ObjectProposal& o = is_object(a) ? object(a) : object(b);
                const LayoutProposal& l = is_object(a) ? layout(b) : layout(a);
                c = object_layout_compat(o, l, voxel_size);
            }
            compat_[index(a, b)] = compat_[index(b, a)] = c;
        }
    }
}

// ---------------------------------------------------------------- renders & fitness

PoolRenders prerender_pool(const ProposalPool& pool, std::span<const View> views, int min_pixels) {
    PoolRenders pr;
    pr.min_pixels = min_pixels;
    const int n = pool.size();
    pr.renders.resize(n);
    pr.visible.assign(n, std::vector<uint8_t>(views.size(), 0));
    pr.visible_views.assign(n, 0);
    for (int id = 0; id < n; ++id) {
        if (pool.is_object(id)) {
            const ObjectProposal& o = pool.object(id);
            pr.renders[id] = prerender_mesh(transform_mesh(*o.mesh, o.pose), views);
        } else {
            pr.renders[id] = prerender_polygon(pool.layout(id).polygon, views);
        }
        for (size_t v = 0; v < views.size(); ++v) {
            if (visible_in_view(pr.renders[id], static_cast<int>(v), min_pixels)) {
                pr.visible[id][v] = 1;
                pr.visible_views[id]++;
            }
        }
    }
    return pr;
}

double fitness(int proposal_id, const ProposalPool& pool, const PoolRenders& renders,
               const ObservationSet& obs, const ScoreWeights& weights) {
    if (renders.visible_views[proposal_id] == 0)
        return -std::numeric_limits<double>::infinity();
    const int cat = static_cast<int>(pool.category(proposal_id));
    double seg = 0.0, depth_pen = 0.0;
    for (size_t v = 0; v < obs.views.size(); ++v) {
        const RenderRect& rect = renders.renders[proposal_id].per_view[v];
        const ViewObservation& vo = obs.views[v];
        const std::vector<float>& conf = vo.confidence[cat];
        for (int y = 0; y < rect.h; ++y) {
            const size_t row = static_cast<size_t>(y) * rect.w;
            const size_t orow = static_cast<size_t>(y + rect.y0) * vo.view.width + rect.x0;
            for (int x = 0; x < rect.w; ++x) {
                const float d = rect.depth[row + x];
                if (d == kEmptyDepth) continue;
                seg += conf[orow + x];
                const float od = vo.depth[orow + x];
                if (od != kEmptyDepth)
                    depth_pen += std::min(static_cast<double>(std::abs(od - d)), weights.depth_cap);
            }
        }
    }
    return weights.lambda_i * seg - weights.lambda_d * depth_pen;
}

std::vector<double> compute_fitness(const ProposalPool& pool, const PoolRenders& renders,
                                    const ObservationSet& obs, const ScoreWeights& weights) {
    std::vector<double> out(pool.size());
    for (int id = 0; id < pool.size(); ++id) out[id] = fitness(id, pool, renders, obs, weights);
    return out;
}

// ---------------------------------------------------------------- json

namespace {

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
Vec3 vec3_from_json(const json& j) { return Vec3(j[0], j[1], j[2]); }

json pose_to_json(const RigidPoseScale& pose) {
    std::array<double, 16> m{};
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) m[r * 4 + c] = pose.rotation(r, c);
        m[r * 4 + 3] = pose.translation[r];
    }
    m[15] = 1.0;
    return json{{"matrix", m}, {"scale", {pose.scale.x(), pose.scale.y(), pose.scale.z()}}};
}

RigidPoseScale pose_from_json(const json& j) {
    RigidPoseScale pose;
    const auto m = j.at("matrix").get<std::array<double, 16>>();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) pose.rotation(r, c) = m[r * 4 + c];
        pose.translation[r] = m[r * 4 + 3];
    }
    pose.scale = vec3_from_json(j.at("scale"));
    return pose;
}

}  // namespace

void save_pool(const std::filesystem::path& path, const ProposalPool& pool) {
    json root;
    root["voxel_size"] = pool.voxel_size;
    json objs = json::array();
    for (const ObjectProposal& o : pool.objects) {
        json j;
        j["id"] = o.id;
        j["category"] = category_name(o.category);
        j["mesh"] = o.mesh_path;
        j["pose"] = pose_to_json(o.pose);
        j["bbox"] = {{"center", vec3_to_json(o.bbox.center)},
                     {"half_extents", vec3_to_json(o.bbox.half_extents)},
                     {"yaw", o.bbox.yaw}};
        if (o.horizontal_surface) {
            const SurfaceRect& s = *o.horizontal_surface;
            j["horizontal_surface"] = {{"center", vec3_to_json(s.center)},
                                       {"u", vec3_to_json(s.u)},
                                       {"v", vec3_to_json(s.v)},
                                       {"half_u", s.half_u},
                                       {"half_v", s.half_v}};
        }
        objs.push_back(j);
    }
    root["objects"] = objs;
    json lays = json::array();
    for (const LayoutProposal& l : pool.layouts) {
        json j;
        j["id"] = l.id;
        j["category"] = category_name(l.category);
        j["plane"] = {{"normal", vec3_to_json(l.polygon.plane.normal)},
                      {"offset", l.polygon.plane.offset}};
        json verts = json::array();
        for (const Vec3& v : l.polygon.vertices) verts.push_back(vec3_to_json(v));
        j["vertices"] = verts;
        j["plane_id"] = l.plane_id;
        j["edge_ids"] = l.edge_ids;
        lays.push_back(j);
    }
    root["layouts"] = lays;
    write_text_file(path, root.dump(2) + "\n");
}

ProposalPool load_pool(const std::filesystem::path& path) {
    const json root = json::parse(read_text_file(path));
    ProposalPool pool;
    pool.voxel_size = root.at("voxel_size");
    const auto base = path.parent_path();
    std::map<std::string, std::shared_ptr<const TriangleMesh>> mesh_cache;
    for (const json& j : root.at("objects")) {
        ObjectProposal o;
        o.id = j.at("id");
        o.category = *category_from_name(j.at("category"));
        o.mesh_path = j.at("mesh");
        auto& cached = mesh_cache[o.mesh_path];
        if (!cached) cached = std::make_shared<TriangleMesh>(read_obj(base / o.mesh_path));
        o.mesh = cached;
        o.pose = pose_from_json(j.at("pose"));
        o.bbox.center = vec3_from_json(j.at("bbox").at("center"));
        o.bbox.half_extents = vec3_from_json(j.at("bbox").at("half_extents"));
        o.bbox.yaw = j.at("bbox").at("yaw");
        if (j.contains("horizontal_surface")) {
            const json& s = j["horizontal_surface"];
            o.horizontal_surface = SurfaceRect{vec3_from_json(s.at("center")),
                                               vec3_from_json(s.at("u")), vec3_from_json(s.at("v")),
                                               s.at("half_u"), s.at("half_v")};
        }
        pool.objects.push_back(std::move(o));
    }
    for (const json& j : root.at("layouts")) {
        LayoutProposal l;
        l.id = j.at("id");
        l.category = *category_from_name(j.at("category"));
        l.polygon.plane.normal = vec3_from_json(j.at("plane").at("normal"));
        l.polygon.plane.offset = j.at("plane").at("offset");
        for (const json& v : j.at("vertices")) l.polygon.vertices.push_back(vec3_from_json(v));
        l.plane_id = j.at("plane_id");
        for (const json& e : j.at("edge_ids")) l.edge_ids.insert(e.get<int64_t>());
        pool.layouts.push_back(std::move(l));
    }
    pool.finalize();
    return pool;
}

}  // namespace mcss
