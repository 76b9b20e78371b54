#include "mcss/synth.hpp"

#include "mcss/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

namespace mcss {

using nlohmann::json;

namespace {

struct Dims {
    double w, d, h;
};

Dims default_dims(Category c) {
    switch (c) {
        case Category::Chair: return {0.50, 0.52, 0.90};
        case Category::Table: return {1.10, 0.70, 0.72};
        case Category::Sofa: return {1.70, 0.85, 0.80};
        case Category::Bed: return {1.90, 1.50, 0.55};
        default: throw std::invalid_argument("not an object category");
    }
}

void add_part(TriangleMesh& mesh, const Vec3& center, const Vec3& size) {
    mesh.append(make_box_mesh(center, size));
}

}  // namespace

TriangleMesh make_category_mesh(Category c, double w, double d, double h) {
    TriangleMesh m;
    switch (c) {
        case Category::Chair: {
            const double seat_top = 0.52 * h, seat_th = 0.10 * h, leg = seat_top - seat_th;
            const double lw = 0.10 * w, ld = 0.10 * d;
            for (int sx : {-1, 1})
                for (int sy : {-1, 1})
                    add_part(m, Vec3(sx * (w / 2 - lw / 2), sy * (d / 2 - ld / 2), leg / 2),
                             Vec3(lw, ld, leg));
            add_part(m, Vec3(0, 0, leg + seat_th / 2), Vec3(w, d, seat_th));
            const double back_d = 0.16 * d, back_h = h - seat_top;
            add_part(m, Vec3(0, d / 2 - back_d / 2, seat_top + back_h / 2), Vec3(w, back_d, back_h));
            break;
        }
        case Category::Table: {
            const double top_th = 0.09 * h, leg = h - top_th;
            const double lw = 0.07 * w, ld = 0.11 * d;
            for (int sx : {-1, 1})
                for (int sy : {-1, 1})
                    add_part(m, Vec3(sx * (w / 2 - lw / 2), sy * (d / 2 - ld / 2), leg / 2),
                             Vec3(lw, ld, leg));
            add_part(m, Vec3(0, 0, leg + top_th / 2), Vec3(w, d, top_th));
            break;
        }
        case Category::Sofa: {
            const double base_h = 0.5 * h, arm_w = 0.12 * w, back_d = 0.25 * d;
            add_part(m, Vec3(0, 0, base_h / 2), Vec3(w, d, base_h));
            add_part(m, Vec3(0, d / 2 - back_d / 2, base_h + (h - base_h) / 2),
                     Vec3(w, back_d, h - base_h));
            for (int sx : {-1, 1})
                add_part(m, Vec3(sx * (w / 2 - arm_w / 2), -back_d / 2, base_h + 0.125 * h),
                         Vec3(arm_w, d - back_d, 0.25 * h));
            break;
        }
        case Category::Bed: {
            const double base_h = 0.72 * h, head_w = 0.07 * w;
            add_part(m, Vec3(0, 0, base_h / 2), Vec3(w, d, base_h));
            add_part(m, Vec3(-(w / 2 - head_w / 2), 0, h / 2), Vec3(head_w, d, h));
            break;
        }
        default:
            throw std::invalid_argument("make_category_mesh: layout category");
    }
    return m;
}

namespace {

// ------------------------------------------------------------- rooms

std::vector<Vec2> floor_polygon(const SynthConfig& cfg) {
    const double w = cfg.room_width, d = cfg.room_depth;
    switch (cfg.room) {
        case RoomShape::Cuboid:
            return {{0, 0}, {w, 0}, {w, d}, {0, d}};
        case RoomShape::LShape:
            return {{0, 0}, {w, 0}, {w, 0.5 * d}, {0.6 * w, 0.5 * d}, {0.6 * w, d}, {0, d}};
        case RoomShape::UShape:
            return {{0, 0},           {w, 0},           {w, d},           {0.72 * w, d},
                    {0.72 * w, 0.45 * d}, {0.28 * w, 0.45 * d}, {0.28 * w, d}, {0, d}};
        case RoomShape::Custom:
            if (cfg.custom_floor.size() < 3)
                throw std::invalid_argument("custom room needs >= 3 floor vertices");
            return cfg.custom_floor;
    }
    throw std::logic_error("unreachable");
}

LayoutProposal make_wall(const Vec2& a, const Vec2& b, double height, int plane_id) {
    LayoutProposal wall;
    wall.category = Category::Wall;
    wall.plane_id = plane_id;
    const Vec3 a0(a.x(), a.y(), 0), b0(b.x(), b.y(), 0);
    const Vec3 aH(a.x(), a.y(), height), bH(b.x(), b.y(), height);
    wall.polygon.vertices = {a0, b0, bH, aH};
    wall.polygon.plane = fit_plane_3pts(a0, b0, bH);
    for (size_t i = 0; i < 4; ++i)
        wall.edge_ids.insert(
            quantized_edge_key(wall.polygon.vertices[i], wall.polygon.vertices[(i + 1) % 4]));
    return wall;
}

LayoutProposal make_floor(const std::vector<Vec2>& floor2d, int plane_id) {
    LayoutProposal fl;
    fl.category = Category::Floor;
    fl.plane_id = plane_id;
    fl.polygon.plane = Plane{Vec3::UnitZ(), 0.0};
    for (const Vec2& v : floor2d) fl.polygon.vertices.emplace_back(v.x(), v.y(), 0.0);
    const size_t n = floor2d.size();
    for (size_t i = 0; i < n; ++i)
        fl.edge_ids.insert(quantized_edge_key(fl.polygon.vertices[i], fl.polygon.vertices[(i + 1) % n]));
    return fl;
}

// ------------------------------------------------------------- placement

struct Footprint {
    Vec2 center;
    Vec2 half;  // rotated-frame half extents
    double yaw;

    std::array<Vec2, 4> corners() const {
        const double c = std::cos(yaw), s = std::sin(yaw);
        std::array<Vec2, 4> out;
        int i = 0;
        for (int sx : {-1, 1})
            for (int sy : {-1, 1})
                out[i++] = center + Vec2(c * sx * half.x() - s * sy * half.y(),
                                         s * sx * half.x() + c * sy * half.y());
        return out;
    }
};

bool rects_overlap(const Footprint& a, const Footprint& b, double margin) {
    // separating axis over both rects' axes
    for (const Footprint* f : {&a, &b}) {
        const double c = std::cos(f->yaw), s = std::sin(f->yaw);
        const Vec2 axes[2] = {{c, s}, {-s, c}};
        for (int ax = 0; ax < 2; ++ax) {
            auto project = [&](const Footprint& r, double& lo, double& hi) {
                lo = std::numeric_limits<double>::infinity();
                hi = -lo;
                for (const Vec2& p : r.corners()) {
                    const double v = axes[ax].dot(p);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            };
            double alo, ahi, blo, bhi;
            project(a, alo, ahi);
            project(b, blo, bhi);
            if (ahi + margin < blo || bhi + margin < alo) return false;
        }
    }
    return true;
}

double point_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 d = b - a;
    const double t = std::clamp(d.dot(p - a) / d.squaredNorm(), 0.0, 1.0);
    return (p - (a + t * d)).norm();
}

double distance_to_boundary(const std::vector<Vec2>& poly, const Vec2& p) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < poly.size(); ++i)
        best = std::min(best, point_to_segment(p, poly[i], poly[(i + 1) % poly.size()]));
    return best;
}

bool footprint_inside(const std::vector<Vec2>& floor2d, const Footprint& f, double margin) {
    auto ok = [&](const Vec2& p) {
        return point_in_polygon_2d(floor2d, p) && distance_to_boundary(floor2d, p) >= margin;
    };
    if (!ok(f.center)) return false;
    const auto cs = f.corners();
    for (const Vec2& c : cs)
        if (!ok(c)) return false;
    for (int i = 0; i < 4; ++i)
        if (!ok(0.5 * (cs[i] + cs[(i + 1) % 4]))) return false;
    return true;
}

ObjectProposal build_object(Category cat, std::shared_ptr<const TriangleMesh> shared,
                            const Dims& dims, const Vec3& scale, double yaw,
                            const Vec2& position) {
    ObjectProposal o;
    o.category = cat;
    o.mesh = std::move(shared);
    o.pose = RigidPoseScale::yaw_about_z(yaw, Vec3(position.x(), position.y(), 0.0), scale);
    o.bbox.center = Vec3(position.x(), position.y(), 0.5 * dims.h * scale.z());
    o.bbox.half_extents =
        0.5 * Vec3(dims.w * scale.x(), dims.d * scale.y(), dims.h * scale.z());
    o.bbox.yaw = yaw;
    if (cat == Category::Table) {
        SurfaceRect s;
        s.center = o.pose.apply(Vec3(0, 0, dims.h));
        const double c = std::cos(yaw), sn = std::sin(yaw);
        s.u = Vec3(c, sn, 0);
        s.v = Vec3(-sn, c, 0);
        s.half_u = 0.5 * dims.w * scale.x();
        s.half_v = 0.5 * dims.d * scale.y();
        o.horizontal_surface = s;
    } else if (cat == Category::Sofa) {
        SurfaceRect s;
        s.center = o.pose.apply(Vec3(0, -0.125 * dims.d, 0.5 * dims.h));
        const double c = std::cos(yaw), sn = std::sin(yaw);
        s.u = Vec3(c, sn, 0);
        s.v = Vec3(-sn, c, 0);
        s.half_u = 0.5 * 0.76 * dims.w * scale.x();
        s.half_v = 0.5 * 0.75 * dims.d * scale.y();
        o.horizontal_surface = s;
    }
    return o;
}

// ------------------------------------------------------------- observations

std::vector<View> make_view_ring(const std::vector<Vec2>& floor2d, const SynthConfig& cfg) {
    // ring center: the interior grid point with the largest wall clearance
    // (the vertex centroid can sit on the boundary of L- and U-shaped rooms)
    Vec2 lo = floor2d[0], hi = floor2d[0];
    for (const Vec2& p : floor2d) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    Vec2 center = 0.5 * (lo + hi);
    double clearance = -1.0;
    const int steps = 24;
    for (int i = 1; i < steps; ++i) {
        for (int j = 1; j < steps; ++j) {
            const Vec2 p(lo.x() + (hi.x() - lo.x()) * i / steps,
                         lo.y() + (hi.y() - lo.y()) * j / steps);
            if (!point_in_polygon_2d(floor2d, p)) continue;
            const double d = distance_to_boundary(floor2d, p);
            if (d > clearance) {
                clearance = d;
                center = p;
            }
        }
    }
    const double r = 0.45 * clearance;

    std::vector<View> views;
    for (int k = 0; k < cfg.view_count; ++k) {
        const double theta = 2.0 * M_PI * k / cfg.view_count + 0.37;
        const Vec3 eye(center.x() + r * std::cos(theta), center.y() + r * std::sin(theta),
                       cfg.camera_height);
        const Vec3 target(center.x() - 0.2 * r * std::cos(theta),
                          center.y() - 0.2 * r * std::sin(theta), 0.55 * cfg.camera_height);
        views.push_back(
            View::look_at(eye, target, cfg.image_width, cfg.image_height, cfg.focal_px));
    }
    return views;
}

ObservationSet render_ground_truth(const GroundTruth& gt, const std::vector<View>& views,
                                   const SynthConfig& cfg, Rng& rng) {
    // solo renders of every true element, composited per view
    std::vector<ProposalRender> renders;
    std::vector<Category> cats;
    for (const LayoutProposal& l : gt.layouts) {
        renders.push_back(prerender_polygon(l.polygon, views));
        cats.push_back(l.category);
    }
    for (const ObjectProposal& o : gt.objects) {
        renders.push_back(prerender_mesh(transform_mesh(*o.mesh, o.pose), views));
        cats.push_back(o.category);
    }

    ObservationSet obs;
    for (size_t v = 0; v < views.size(); ++v) {
        ViewObservation vo;
        vo.view = views[v];
        CompositeView comp;
        comp.reset(views[v].width, views[v].height);
        for (size_t i = 0; i < renders.size(); ++i)
            composite_add(comp, renders[i].per_view[v], static_cast<int>(i));
        const size_t n = comp.depth.size();
        vo.depth.assign(n, kEmptyDepth);
        for (auto& c : vo.confidence) c.assign(n, 0.0f);
        for (size_t px = 0; px < n; ++px) {
            if (comp.winner[px] == kNoWinner) continue;
            vo.depth[px] = comp.depth[px];
            int cat = static_cast<int>(cats[comp.winner[px]]);
            if (cfg.label_flip_prob > 0.0 && rng.uniform() < cfg.label_flip_prob) {
                const int other = rng.uniform_int(kNumCategories - 1);
                cat = other >= cat ? other + 1 : other;
            }
            vo.confidence[cat][px] = 1.0f;
        }
        if (cfg.depth_hole_fraction > 0.0) {
            const size_t target = static_cast<size_t>(cfg.depth_hole_fraction * n);
            size_t holed = 0;
            int guard = 0;
            while (holed < target && guard++ < 64) {
                const int hw = 4 + rng.uniform_int(std::max(1, views[v].width / 4));
                const int hh = 4 + rng.uniform_int(std::max(1, views[v].height / 4));
                const int hx = rng.uniform_int(std::max(1, views[v].width - hw));
                const int hy = rng.uniform_int(std::max(1, views[v].height - hh));
                for (int y = hy; y < hy + hh; ++y) {
                    for (int x = hx; x < hx + hw; ++x) {
                        float& d = vo.depth[static_cast<size_t>(y) * views[v].width + x];
                        if (d != kEmptyDepth) {
                            d = kEmptyDepth;
                            ++holed;
                        }
                    }
                }
            }
        }
        obs.views.push_back(std::move(vo));
    }
    return obs;
}

}  // namespace

// ------------------------------------------------------------- generate

SynthScene generate(const SynthConfig& cfg) {
    SynthScene scene;
    const std::vector<Vec2> floor2d = floor_polygon(cfg);
    const double H = cfg.wall_height;

    // ground-truth layout
    std::vector<LayoutProposal> walls;
    for (size_t i = 0; i < floor2d.size(); ++i)
        walls.push_back(
            make_wall(floor2d[i], floor2d[(i + 1) % floor2d.size()], H, static_cast<int>(i)));
    LayoutProposal floor_lp = make_floor(floor2d, static_cast<int>(floor2d.size()));

    // ground-truth objects
    Rng rng_place = Rng::derive(cfg.seed, 1);
    Rng rng_scale = Rng::derive(cfg.seed, 2);
    std::map<Category, std::shared_ptr<const TriangleMesh>> canonical_meshes;
    auto mesh_for = [&](Category c) {
        auto& slot = canonical_meshes[c];
        if (!slot) {
            const Dims d = default_dims(c);
            slot = std::make_shared<TriangleMesh>(make_category_mesh(c, d.w, d.d, d.h));
        }
        return slot;
    };

    std::vector<ObjectProposal> gt_objects;
    std::vector<Footprint> placed;
    std::vector<int> crossing_targets;  // indices into gt_objects

    auto try_place = [&](Category cat, bool hug_wall) -> ObjectProposal {
        const Dims dims = default_dims(cat);
        const Vec3 scale(rng_scale.uniform(0.92, 1.08), rng_scale.uniform(0.92, 1.08),
                         rng_scale.uniform(0.92, 1.08));
        for (int attempt = 0; attempt < 1000; ++attempt) {
            double yaw;
            Vec2 pos;
            if (hug_wall) {
                const size_t e = static_cast<size_t>(rng_place.uniform_int(
                    static_cast<int>(floor2d.size())));
                const Vec2 a = floor2d[e], b = floor2d[(e + 1) % floor2d.size()];
                const Vec2 dir = (b - a).normalized();
                const Vec2 inward(-dir.y(), dir.x());  // CCW floor: left of edge is inside
                const double along = rng_place.uniform(0.2, 0.8);
                const double off = 0.5 * dims.d * scale.y() + 0.06;
                pos = a + along * (b - a) + off * inward;
                yaw = std::atan2(inward.x(), -inward.y());  // local +y (the back) faces the wall
            } else {
                pos = Vec2(rng_place.uniform(0.0, cfg.room_width),
                           rng_place.uniform(0.0, cfg.room_depth));
                yaw = rng_place.uniform(0.0, 2.0 * M_PI);
            }
            Footprint f{pos, 0.5 * Vec2(dims.w * scale.x(), dims.d * scale.y()), yaw};
            if (!footprint_inside(floor2d, f, hug_wall ? 0.02 : 0.10)) continue;
            bool clash = false;
            for (const Footprint& other : placed)
                if (rects_overlap(f, other, 0.10)) {
                    clash = true;
                    break;
                }
            if (clash) continue;
            placed.push_back(f);
            return build_object(cat, mesh_for(cat), dims, scale, yaw, pos);
        }
        throw std::runtime_error("generate: could not place object without conflicts");
    };

    int crossing_left = cfg.wall_crossing_decoys;
    for (int c = 0; c < kNumCategories; ++c) {
        const Category cat = static_cast<Category>(c);
        if (is_layout_category(cat)) continue;
        for (int k = 0; k < cfg.object_counts[c]; ++k) {
            const bool hug = cat == Category::Chair && crossing_left > 0;
            gt_objects.push_back(try_place(cat, hug));
            if (hug) {
                crossing_targets.push_back(static_cast<int>(gt_objects.size() - 1));
                --crossing_left;
            }
        }
    }
    if (crossing_left > 0)
        throw std::runtime_error("generate: wall_crossing_decoys needs that many chairs");

    // assemble the pool: layouts first, then objects
    ProposalPool& pool = scene.pool;
    pool.voxel_size = cfg.voxel_size;
    int next_id = 0;
    GroundTruth& gt = scene.gt;

    for (LayoutProposal wall : walls) {
        wall.id = next_id++;
        gt.layouts.push_back(wall);
        gt.pool_ids.push_back(wall.id);
        pool.layouts.push_back(std::move(wall));
    }
    floor_lp.id = next_id++;
    gt.layouts.push_back(floor_lp);
    gt.pool_ids.push_back(floor_lp.id);
    pool.layouts.push_back(floor_lp);

    Rng rng_decoy = Rng::derive(cfg.seed, 3);
    for (int k = 0; k < cfg.layout_decoys; ++k) {
        // a true wall pushed off its plane, into the room
        LayoutProposal decoy = walls[k % walls.size()];
        const Vec3 n = decoy.polygon.plane.normal;
        Vec2 inward_check = Vec2::Zero();
        {
            // inward = toward the floor centroid
            Vec2 centroid = Vec2::Zero();
            for (const Vec2& p : floor2d) centroid += p;
            centroid /= static_cast<double>(floor2d.size());
            const Vec3 c0 = decoy.polygon.centroid();
            inward_check = (centroid - Vec2(c0.x(), c0.y())).normalized();
        }
        const double sign = (Vec2(n.x(), n.y()).dot(inward_check) >= 0) ? 1.0 : -1.0;
        const double shift = sign * rng_decoy.uniform(0.12, 0.35);
        for (Vec3& v : decoy.polygon.vertices) v += shift * n;
        decoy.polygon.plane.offset += shift;
        decoy.plane_id = 1000 + k;
        decoy.edge_ids.clear();
        for (size_t i = 0; i < decoy.polygon.vertices.size(); ++i)
            decoy.edge_ids.insert(quantized_edge_key(
                decoy.polygon.vertices[i],
                decoy.polygon.vertices[(i + 1) % decoy.polygon.vertices.size()]));
        decoy.id = next_id++;
        pool.layouts.push_back(std::move(decoy));
    }

    // objects: exact copies (unless replaced by a wall-crossing version)
    Rng rng_jitter = Rng::derive(cfg.seed, 4);
    for (size_t i = 0; i < gt_objects.size(); ++i) {
        ObjectProposal gt_obj = gt_objects[i];
        const bool crossing =
            std::find(crossing_targets.begin(), crossing_targets.end(), static_cast<int>(i)) !=
            crossing_targets.end();
        gt_obj.id = -1;
        gt.objects.push_back(gt_obj);
        if (crossing) continue;  // exact copy withheld from the pool
        ObjectProposal copy = gt_obj;
        copy.id = next_id++;
        gt.pool_ids.push_back(copy.id);
        pool.objects.push_back(std::move(copy));
    }

    // wall-crossing copies for the withheld chairs
    for (int idx : crossing_targets) {
        ObjectProposal crossed = gt_objects[idx];
        // push backwards (through the wall it hugs): the local -y axis
        const Vec3 back = crossed.pose.rotation * Vec3(0, 1, 0);
        const Vec3 shift = 0.28 * back;
        crossed.pose.translation += shift;
        crossed.bbox.center += shift;
        crossed.id = next_id++;
        pool.objects.push_back(std::move(crossed));
    }

    // jittered copies (wall-crossing chairs get none: the crossed version
    // must stay their only explanation in the pool)
    for (size_t gi = 0; gi < gt.objects.size(); ++gi) {
        const ObjectProposal& src = gt.objects[gi];
        if (std::find(crossing_targets.begin(), crossing_targets.end(), static_cast<int>(gi)) !=
            crossing_targets.end())
            continue;
        for (int k = 0; k < cfg.jitter_copies; ++k) {
            ObjectProposal copy = src;
            const Vec3 shift(rng_jitter.normal(0, cfg.jitter_sigma),
                             rng_jitter.normal(0, cfg.jitter_sigma), 0.0);
            const double dyaw = rng_jitter.normal(0, cfg.jitter_sigma);
            copy.pose.translation += shift;
            copy.pose.rotation =
                Eigen::AngleAxisd(dyaw, Vec3::UnitZ()).toRotationMatrix() * copy.pose.rotation;
            copy.bbox.center += shift;
            copy.bbox.yaw += dyaw;
            if (copy.horizontal_surface) {
                copy.horizontal_surface->center += shift;
                const Mat3 rot = Eigen::AngleAxisd(dyaw, Vec3::UnitZ()).toRotationMatrix();
                copy.horizontal_surface->u = rot * copy.horizontal_surface->u;
                copy.horizontal_surface->v = rot * copy.horizontal_surface->v;
            }
            copy.id = next_id++;
            pool.objects.push_back(std::move(copy));
        }
    }

    // wrong-category swaps at true poses
    for (int k = 0; k < cfg.wrong_model_swaps && !gt.objects.empty(); ++k) {
        const ObjectProposal& src = gt.objects[k % gt.objects.size()];
        Category wrong = src.category == Category::Chair ? Category::Table : Category::Chair;
        const Dims dims = default_dims(wrong);
        ObjectProposal swap = build_object(wrong, mesh_for(wrong), dims, Vec3::Ones(),
                                           src.bbox.yaw,
                                           Vec2(src.pose.translation.x(), src.pose.translation.y()));
        swap.id = next_id++;
        pool.objects.push_back(std::move(swap));
    }

    // free-space decoys
    for (int k = 0; k < cfg.decoy_count; ++k) {
        const Category cat = k % 2 == 0 ? Category::Chair : Category::Table;
        ObjectProposal decoy = try_place(cat, false);
        decoy.id = next_id++;
        pool.objects.push_back(std::move(decoy));
    }

    pool.finalize();

    // ground truth must be feasible by construction
    for (size_t i = 0; i < gt.pool_ids.size(); ++i)
        for (size_t j = i + 1; j < gt.pool_ids.size(); ++j)
            if (pool.compat(gt.pool_ids[i], gt.pool_ids[j]).incompatible_pair())
                throw std::runtime_error("generate: ground truth is infeasible");

    for (const LayoutProposal& l : gt.layouts) {
        for (const Vec3& v : l.polygon.vertices) {
            bool dup = false;
            for (const Vec3& c : gt.corners)
                if ((c - v).norm() < 1e-6) {
                    dup = true;
                    break;
                }
            if (!dup) gt.corners.push_back(v);
        }
    }

    const std::vector<View> views = make_view_ring(floor2d, cfg);
    Rng rng_obs = Rng::derive(cfg.seed, 5);
    scene.obs = render_ground_truth(gt, views, cfg, rng_obs);
    return scene;
}

std::vector<CloudPoint> sample_layout_cloud(const GroundTruth& gt, double points_per_m2,
                                            double noise_sigma, uint64_t seed) {
    Rng rng(splitmix64(seed ^ 0xc10d));
    std::vector<CloudPoint> cloud;
    for (const LayoutProposal& l : gt.layouts) {
        const auto poly2d = l.polygon.to_plane_coords();
        const auto tris = triangulate_polygon_2d(poly2d);
        auto [u, v] = l.polygon.plane.basis();
        const Vec3 anchor = l.polygon.plane.offset * l.polygon.plane.normal;
        for (const auto& t : tris) {
            const Vec2 &a = poly2d[t[0]], &b = poly2d[t[1]], &c = poly2d[t[2]];
            const double area =
                0.5 * std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
            const int count = std::max(1, static_cast<int>(std::lround(area * points_per_m2)));
            for (int s = 0; s < count; ++s) {
                double r1 = rng.uniform(), r2 = rng.uniform();
                if (r1 + r2 > 1.0) {
                    r1 = 1.0 - r1;
                    r2 = 1.0 - r2;
                }
                const Vec2 p2 = a + r1 * (b - a) + r2 * (c - a);
                Vec3 p = anchor + p2.x() * u + p2.y() * v;
                if (noise_sigma > 0.0) p += rng.normal(0, noise_sigma) * l.polygon.plane.normal;
                cloud.push_back({p, l.polygon.plane.normal, static_cast<int>(l.category)});
            }
        }
    }
    return cloud;
}

// ------------------------------------------------------------- brute force

SceneSolution brute_force(const ProposalPool& pool, const PoolRenders& renders,
                          const ObservationSet& obs, const ScoreWeights& weights, int max_pool) {
    if (pool.size() > max_pool) throw std::invalid_argument("brute_force: pool too large");

    ScoreScratch scratch(pool, renders, obs, weights);
    std::vector<int> current;
    std::vector<int> best_members;
    double best_score = 0.0;  // empty set scores 0
    bool have_exact = true;

    const double tol = 1e-9;
    std::function<void(int)> dfs = [&](int id) {
        if (id == pool.size()) {
            const double approx = scratch.total_score();
            if (approx >= best_score - tol * std::max(1.0, std::abs(best_score))) {
                std::vector<int> sorted = current;
                std::sort(sorted.begin(), sorted.end());
                const double exact = global_score(sorted, pool, renders, obs, weights);
                if (exact > best_score || (exact == best_score && sorted < best_members)) {
                    best_score = exact;
                    best_members = std::move(sorted);
                    have_exact = true;
                }
            }
            return;
        }
        dfs(id + 1);  // exclude
        if (pool.compatible_with_all(id, current)) {
            const auto mark = scratch.mark();
            scratch.add(id);
            current.push_back(id);
            dfs(id + 1);
            current.pop_back();
            scratch.rollback(mark);
        }
    };
    dfs(0);
    (void)have_exact;

    SceneSolution sol;
    sol.members = std::move(best_members);
    sol.global_score = best_score;
    sol.feasible = true;
    return sol;
}

// ------------------------------------------------------------- trap scene

SynthScene make_trap_scene(uint64_t seed) {
    SynthScene scene;
    SynthConfig cfg;
    cfg.room = RoomShape::Cuboid;
    cfg.room_width = 6.0;
    cfg.room_depth = 5.0;
    cfg.seed = seed;
    cfg.view_count = 6;
    cfg.image_width = 96;
    cfg.image_height = 72;

    const std::vector<Vec2> floor2d = floor_polygon(cfg);
    GroundTruth& gt = scene.gt;

    std::vector<LayoutProposal> walls;
    for (size_t i = 0; i < floor2d.size(); ++i)
        walls.push_back(
            make_wall(floor2d[i], floor2d[(i + 1) % floor2d.size()], cfg.wall_height,
                      static_cast<int>(i)));
    for (LayoutProposal& w : walls) gt.layouts.push_back(w);
    gt.layouts.push_back(make_floor(floor2d, static_cast<int>(floor2d.size())));

    // Two solid blocks near the back wall plus one wide block spanning both.
    // Each small block sits fully inside the wide one (IoU well above the
    // 0.3 threshold), so the wide block excludes them both, yet the pair
    // explains the observations better: the wide block pays a depth penalty
    // over the covered gap.
    auto make_block = [&](double w, double d, double h, const Vec2& pos) {
        ObjectProposal o;
        o.category = Category::Table;
        o.mesh = std::make_shared<const TriangleMesh>(
            make_box_mesh(Vec3(0, 0, h / 2), Vec3(w, d, h)));
        o.pose = RigidPoseScale::yaw_about_z(0.0, Vec3(pos.x(), pos.y(), 0.0));
        o.bbox = OrientedBox{Vec3(pos.x(), pos.y(), h / 2), 0.5 * Vec3(w, d, h), 0.0};
        return o;
    };
    const Vec2 back_center(3.0, 3.9);  // in front of the y=5 wall
    ObjectProposal s1 = make_block(0.85, 0.7, 0.72, back_center + Vec2(-0.70, 0.0));
    ObjectProposal s2 = make_block(0.85, 0.7, 0.72, back_center + Vec2(+0.70, 0.0));
    ObjectProposal big = make_block(2.25, 0.7, 0.72, back_center);
    gt.objects = {s1, s2};

    ProposalPool& pool = scene.pool;
    pool.voxel_size = 0.05;
    big.id = 0;
    s1.id = 1;
    s2.id = 2;
    pool.objects = {big, s1, s2};
    gt.pool_ids = {1, 2};
    pool.finalize();

    const std::vector<View> views = make_view_ring(floor2d, cfg);
    Rng rng_obs = Rng::derive(cfg.seed, 5);
    scene.obs = render_ground_truth(gt, views, cfg, rng_obs);
    return scene;
}

// ------------------------------------------------------------- bundle io

namespace {

json layout_to_json(const LayoutProposal& l) {
    json j;
    j["id"] = l.id;
    j["category"] = category_name(l.category);
    j["plane"] = {{"normal", {l.polygon.plane.normal.x(), l.polygon.plane.normal.y(),
                              l.polygon.plane.normal.z()}},
                  {"offset", l.polygon.plane.offset}};
    json verts = json::array();
    for (const Vec3& v : l.polygon.vertices) verts.push_back({v.x(), v.y(), v.z()});
    j["vertices"] = verts;
    j["plane_id"] = l.plane_id;
    j["edge_ids"] = l.edge_ids;
    return j;
}

LayoutProposal layout_from_json(const json& j) {
    LayoutProposal l;
    l.id = j.at("id");
    l.category = *category_from_name(j.at("category"));
    const auto& n = j.at("plane").at("normal");
    l.polygon.plane.normal = Vec3(n[0], n[1], n[2]);
    l.polygon.plane.offset = j.at("plane").at("offset");
    for (const auto& v : j.at("vertices")) l.polygon.vertices.emplace_back(v[0], v[1], v[2]);
    l.plane_id = j.at("plane_id");
    for (const auto& e : j.at("edge_ids")) l.edge_ids.insert(e.get<int64_t>());
    return l;
}

}  // namespace

void save_bundle(const std::filesystem::path& dir, const SynthScene& scene) {
    std::filesystem::create_directories(dir / "mesh");

    // unique meshes, named by first owner
    std::map<const TriangleMesh*, std::string> mesh_names;
    auto mesh_file = [&](const std::shared_ptr<const TriangleMesh>& mesh) {
        auto [it, fresh] =
            mesh_names.try_emplace(mesh.get(), "mesh/m" + std::to_string(mesh_names.size()) + ".obj");
        if (fresh) write_obj(dir / it->second, *mesh);
        return it->second;
    };

    ProposalPool pool_copy = scene.pool;  // set mesh paths
    for (ObjectProposal& o : pool_copy.objects) o.mesh_path = mesh_file(o.mesh);
    save_pool(dir / "pool.json", pool_copy);

    json gt;
    json layouts = json::array();
    for (const LayoutProposal& l : scene.gt.layouts) layouts.push_back(layout_to_json(l));
    gt["layouts"] = layouts;
    json objects = json::array();
    for (const ObjectProposal& o : scene.gt.objects) {
        json j;
        j["category"] = category_name(o.category);
        j["mesh"] = mesh_file(o.mesh);
        std::array<double, 16> m{};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) m[r * 4 + c] = o.pose.rotation(r, c);
            m[r * 4 + 3] = o.pose.translation[r];
        }
        m[15] = 1.0;
        j["pose"] = {{"matrix", m}, {"scale", {o.pose.scale.x(), o.pose.scale.y(), o.pose.scale.z()}}};
        j["bbox"] = {{"center", {o.bbox.center.x(), o.bbox.center.y(), o.bbox.center.z()}},
                     {"half_extents",
                      {o.bbox.half_extents.x(), o.bbox.half_extents.y(), o.bbox.half_extents.z()}},
                     {"yaw", o.bbox.yaw}};
        objects.push_back(j);
    }
    gt["objects"] = objects;
    gt["pool_ids"] = scene.gt.pool_ids;
    json corners = json::array();
    for (const Vec3& c : scene.gt.corners) corners.push_back({c.x(), c.y(), c.z()});
    gt["corners"] = corners;
    write_text_file(dir / "gt.json", gt.dump(2) + "\n");

    write_text_file(dir / "views.json", views_to_json(scene.obs.cameras()));
    save_observations(dir / "obs", scene.obs);
}

SynthScene load_bundle(const std::filesystem::path& dir) {
    SynthScene scene;
    scene.pool = load_pool(dir / "pool.json");
    scene.obs = load_observations(dir / "obs");

    const json gt = json::parse(read_text_file(dir / "gt.json"));
    for (const json& j : gt.at("layouts")) scene.gt.layouts.push_back(layout_from_json(j));
    std::map<std::string, std::shared_ptr<const TriangleMesh>> cache;
    for (const json& j : gt.at("objects")) {
        ObjectProposal o;
        o.category = *category_from_name(j.at("category"));
        o.mesh_path = j.at("mesh");
        auto& slot = cache[o.mesh_path];
        if (!slot) slot = std::make_shared<TriangleMesh>(read_obj(dir / o.mesh_path));
        o.mesh = slot;
        const auto m = j.at("pose").at("matrix").get<std::array<double, 16>>();
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) o.pose.rotation(r, c) = m[r * 4 + c];
            o.pose.translation[r] = m[r * 4 + 3];
        }
        const auto& s = j.at("pose").at("scale");
        o.pose.scale = Vec3(s[0], s[1], s[2]);
        const auto& bb = j.at("bbox");
        o.bbox.center = Vec3(bb.at("center")[0], bb.at("center")[1], bb.at("center")[2]);
        o.bbox.half_extents = Vec3(bb.at("half_extents")[0], bb.at("half_extents")[1],
                                   bb.at("half_extents")[2]);
        o.bbox.yaw = bb.at("yaw");
        scene.gt.objects.push_back(std::move(o));
    }
    scene.gt.pool_ids = gt.at("pool_ids").get<std::vector<int>>();
    for (const auto& c : gt.at("corners")) scene.gt.corners.emplace_back(c[0], c[1], c[2]);
    return scene;
}

}  // namespace mcss
