#include "mcss/proposals.hpp"
#include "mcss/rng.hpp"
#include "mcss/synth.hpp"

#include <doctest.h>

#include <cmath>

using namespace mcss;

namespace {

ObjectProposal box_object(int id, Category cat, const Vec3& lo, const Vec3& hi,
                          double voxel_size = 0.05) {
    ObjectProposal o;
    o.id = id;
    o.category = cat;
    o.mesh = std::make_shared<const TriangleMesh>(make_box_mesh(0.5 * (lo + hi), hi - lo));
    o.bbox = OrientedBox{0.5 * (lo + hi), 0.5 * (hi - lo), 0.0};
    o.voxels = voxelize(*o.mesh, o.pose, voxel_size);
    return o;
}

LayoutProposal wall_segment(int id, const Vec2& a, const Vec2& b, double height, int plane_id) {
    LayoutProposal l;
    l.id = id;
    l.category = Category::Wall;
    l.plane_id = plane_id;
    const Vec3 a0(a.x(), a.y(), 0), b0(b.x(), b.y(), 0);
    const Vec3 bH(b.x(), b.y(), height), aH(a.x(), a.y(), height);
    l.polygon.vertices = {a0, b0, bH, aH};
    l.polygon.plane = fit_plane_3pts(a0, b0, bH);
    for (int i = 0; i < 4; ++i)
        l.edge_ids.insert(
            quantized_edge_key(l.polygon.vertices[i], l.polygon.vertices[(i + 1) % 4]));
    return l;
}

}  // namespace

TEST_CASE("identical objects are incompatible, distant ones compatible") {
    CompatParams params;
    const auto a = box_object(0, Category::Chair, Vec3(0, 0, 0), Vec3(0.5, 0.5, 0.9));
    const auto b = box_object(1, Category::Chair, Vec3(0, 0, 0), Vec3(0.5, 0.5, 0.9));
    CHECK(object_object_compat(a, b, params).kind == Compatibility::Kind::Incompatible);

    const auto far_away = box_object(2, Category::Chair, Vec3(5, 5, 0), Vec3(5.5, 5.5, 0.9));
    CHECK(object_object_compat(a, far_away, params).kind == Compatibility::Kind::Compatible);

    // small overlap is tolerated with the IoU recorded
    const auto nudged = box_object(3, Category::Chair, Vec3(0.35, 0, 0), Vec3(0.85, 0.5, 0.9));
    const Compatibility c = object_object_compat(a, nudged, params);
    CHECK(c.kind == Compatibility::Kind::Tolerated);
    CHECK(c.iou == doctest::Approx(voxel_iou(a.voxels, nudged.voxels)));
    CHECK(c.iou <= params.iou_threshold);
    CHECK(c.iou > 0.0);
}

TEST_CASE("horizontal surface ratio drives the chair-table rule") {
    CompatParams params;
    // single-slab stand-ins: a table top and a chair back crossing it near the edge
    ObjectProposal table = box_object(0, Category::Table, Vec3(-0.55, -0.35, 0.655),
                                      Vec3(0.55, 0.35, 0.72));
    table.horizontal_surface =
        SurfaceRect{Vec3(0, 0, 0.72), Vec3(1, 0, 0), Vec3(0, 1, 0), 0.55, 0.35};
    const ObjectProposal chair =
        box_object(1, Category::Chair, Vec3(-0.2, -0.45, 0.5), Vec3(0.2, -0.27, 0.95));

    const double ratio = horizontal_surface_ratio(chair, table);
    CHECK(ratio == doctest::Approx((0.35 - 0.275) / 0.70));  // deepest center vs shorter side
    const Compatibility c = object_object_compat(chair, table, params);
    CHECK(c.kind == Compatibility::Kind::Tolerated);

    // deep penetration at the middle of the surface is rejected
    const ObjectProposal deep =
        box_object(2, Category::Chair, Vec3(-0.2, -0.2, 0.5), Vec3(0.2, 0.2, 0.95));
    CHECK(horizontal_surface_ratio(deep, table) > params.surface_ratio_threshold);
    CHECK(object_object_compat(deep, table, params).kind == Compatibility::Kind::Incompatible);

    // no intersection -> ratio 0
    const ObjectProposal outside =
        box_object(3, Category::Chair, Vec3(2, 2, 0), Vec3(2.4, 2.4, 0.9));
    CHECK(horizontal_surface_ratio(outside, table) == 0.0);

    // penetration exactly at the center of a square top -> ratio 1/2
    ObjectProposal square_table = box_object(4, Category::Table, Vec3(-0.475, -0.475, 0.655),
                                             Vec3(0.525, 0.525, 0.72));
    square_table.horizontal_surface =
        SurfaceRect{Vec3(0.025, 0.025, 0.72), Vec3(1, 0, 0), Vec3(0, 1, 0), 0.5, 0.5};
    const ObjectProposal spike =
        box_object(5, Category::Chair, Vec3(0.0, 0.0, 0.5), Vec3(0.05, 0.05, 0.95));
    CHECK(horizontal_surface_ratio(spike, square_table) == doctest::Approx(0.5));

    // translation invariance: moving the pair together leaves the ratio unchanged
    auto shift = [](ObjectProposal o, const Vec3& d) {
        o.pose.translation += d;
        o.bbox.center += d;
        if (o.horizontal_surface) o.horizontal_surface->center += d;
        o.voxels = voxelize(*o.mesh, o.pose, 0.05);
        return o;
    };
    const Vec3 d(1.10, -0.55, 0.0);  // lattice-aligned shift keeps the voxel pattern
    CHECK(horizontal_surface_ratio(shift(chair, d), shift(table, d)) == doctest::Approx(ratio));

    // missing surface falls back to the generic rule
    ObjectProposal bare = table;
    bare.horizontal_surface.reset();
    const Compatibility generic = object_object_compat(chair, bare, params);
    CHECK(generic.kind != Compatibility::Kind::Incompatible);  // overlap is tiny
}

TEST_CASE("layout compatibility: neighbors, coplanar overlaps, separated walls") {
    CompatParams params;
    // two perpendicular walls sharing the corner edge at (1,0)
    const auto wall_a = wall_segment(0, Vec2(0, 0), Vec2(1, 0), 2.5, 0);
    const auto wall_b = wall_segment(1, Vec2(1, 0), Vec2(1, 2), 2.5, 1);
    CHECK(wall_a.is_neighbor(wall_b));
    CHECK(layout_layout_compat(wall_a, wall_b, params).kind == Compatibility::Kind::Compatible);

    // coplanar overlapping candidates on the same plane
    const auto overlap = wall_segment(2, Vec2(0.5, 0), Vec2(1.5, 0), 2.5, 0);
    CHECK(layout_layout_compat(wall_a, overlap, params).kind ==
          Compatibility::Kind::Incompatible);

    // coplanar but disjoint segments tile the plane
    const auto extension = wall_segment(3, Vec2(1, 0), Vec2(2, 0), 2.5, 0);
    CHECK(layout_layout_compat(wall_a, extension, params).kind ==
          Compatibility::Kind::Compatible);

    // parallel walls 3 m apart
    const auto across = wall_segment(4, Vec2(0, 3), Vec2(1, 3), 2.5, 2);
    CHECK(layout_layout_compat(wall_a, across, params).kind == Compatibility::Kind::Compatible);

    // a crossing wall without a shared edge
    const auto crossing = wall_segment(5, Vec2(0.5, -1), Vec2(0.5, 1), 2.5, 3);
    CHECK(layout_layout_compat(wall_a, crossing, params).kind ==
          Compatibility::Kind::Incompatible);

    // symmetric in both arguments
    CHECK(layout_layout_compat(crossing, wall_a, params).kind ==
          layout_layout_compat(wall_a, crossing, params).kind);
}

TEST_CASE("object-layout compatibility tolerates one voxel layer") {
    const auto wall = wall_segment(0, Vec2(-2, 0), Vec2(2, 0), 2.5, 0);

    // chair fully inside the room (y > 0 side)
    const auto inside = box_object(1, Category::Chair, Vec3(-0.25, 0.3, 0), Vec3(0.25, 0.8, 0.9));
    CHECK(object_layout_compat(inside, wall, 0.05).kind == Compatibility::Kind::Compatible);

    // chair centered on the wall plane crosses it deeply
    const auto through = box_object(2, Category::Chair, Vec3(-0.25, -0.25, 0), Vec3(0.25, 0.25, 0.9));
    CHECK(object_layout_compat(through, wall, 0.05).kind == Compatibility::Kind::Incompatible);

    // touching the wall within one voxel layer stays compatible
    const auto touching =
        box_object(3, Category::Chair, Vec3(-0.25, -0.04, 0), Vec3(0.25, 0.46, 0.9));
    CHECK(object_layout_compat(touching, wall, 0.05).kind == Compatibility::Kind::Compatible);
}

TEST_CASE("object distance is the bbox center distance") {
    const auto a = box_object(0, Category::Chair, Vec3(0, 0, 0), Vec3(1, 1, 1));
    const auto b = box_object(1, Category::Chair, Vec3(3, 4, 0), Vec3(4, 5, 1));
    CHECK(object_distance(a, a) == 0.0);
    CHECK(object_distance(a, b) == doctest::Approx(5.0));  // centers (0.5,0.5), (3.5,4.5)
    CHECK(object_distance(a, b) == object_distance(b, a));
}

TEST_CASE("pool caches equal pairwise recomputation") {
    SynthConfig cfg;
    cfg.seed = 91;
    cfg.object_counts = {0, 0, 2, 1, 0, 0};
    cfg.decoy_count = 2;
    cfg.jitter_copies = 1;
    cfg.layout_decoys = 1;
    const SynthScene scene = generate(cfg);
    const ProposalPool& pool = scene.pool;
    REQUIRE(pool.size() <= 30);

    for (int a = 0; a < pool.size(); ++a) {
        for (int b = a + 1; b < pool.size(); ++b) {
            Compatibility expect;
            if (pool.is_object(a) && pool.is_object(b))
                expect = object_object_compat(pool.object(a), pool.object(b), pool.compat_params);
            else if (pool.is_layout(a) && pool.is_layout(b))
                expect = layout_layout_compat(pool.layout(a), pool.layout(b), pool.compat_params);
            else if (pool.is_object(a))
                expect = object_layout_compat(pool.object(a), pool.layout(b), pool.voxel_size);
            else
                expect = object_layout_compat(pool.object(b), pool.layout(a), pool.voxel_size);
            CHECK(pool.compat(a, b).kind == expect.kind);
            CHECK(pool.compat(a, b).kind == pool.compat(b, a).kind);
            CHECK(pool.compat(a, b).iou == pool.compat(b, a).iou);
        }
    }
}

TEST_CASE("fitness restricts the score to the proposal's own pixels") {
    SynthConfig cfg;
    cfg.seed = 5;
    cfg.object_counts = {0, 0, 1, 0, 0, 0};
    cfg.decoy_count = 0;
    cfg.jitter_copies = 0;
    cfg.layout_decoys = 0;
    const SynthScene scene = generate(cfg);
    const ProposalPool& pool = scene.pool;
    const auto renders = prerender_pool(pool, scene.obs.cameras(), 16);
    ScoreWeights weights;

    for (int id : scene.gt.pool_ids) {
        const double got = fitness(id, pool, renders, scene.obs, weights);
        // reference per-pixel loop
        const int cat = static_cast<int>(pool.category(id));
        double seg = 0.0, pen = 0.0;
        for (size_t v = 0; v < scene.obs.views.size(); ++v) {
            const RenderRect& rect = renders.renders[id].per_view[v];
            const ViewObservation& vo = scene.obs.views[v];
            for (int y = rect.y0; y < rect.y0 + rect.h; ++y)
                for (int x = rect.x0; x < rect.x0 + rect.w; ++x) {
                    const float d = rect.at(x, y);
                    if (d == kEmptyDepth) continue;
                    const size_t px = static_cast<size_t>(y) * vo.view.width + x;
                    seg += vo.confidence[cat][px];
                    if (vo.depth[px] != kEmptyDepth)
                        pen += std::min(static_cast<double>(std::abs(vo.depth[px] - d)), 1.0);
                }
        }
        CHECK(got == doctest::Approx(seg - pen).epsilon(1e-9));
        CHECK(got > 0.0);  // exact copies of ground truth explain their pixels

        // linear in lambda_i when the depth term is fixed
        ScoreWeights doubled = weights;
        doubled.lambda_i = 2.0;
        const double got2 = fitness(id, pool, renders, scene.obs, doubled);
        CHECK(got2 == doctest::Approx(2.0 * seg - pen).epsilon(1e-9));
    }
}

TEST_CASE("fitness is -inf for proposals visible nowhere") {
    ProposalPool pool;
    pool.voxel_size = 0.05;
    // a single object far outside every camera frustum
    pool.objects.push_back(box_object(0, Category::Chair, Vec3(100, 100, 0), Vec3(100.5, 100.5, 1)));
    pool.finalize();

    View v;
    v.width = 32;
    v.height = 24;
    v.fx = v.fy = 20;
    v.cx = 16;
    v.cy = 12;
    ObservationSet obs;
    ViewObservation vo;
    vo.view = v;
    vo.depth.assign(v.pixel_count(), kEmptyDepth);
    for (auto& c : vo.confidence) c.assign(v.pixel_count(), 0.0f);
    obs.views.push_back(vo);

    const auto renders = prerender_pool(pool, obs.cameras(), 16);
    CHECK(fitness(0, pool, renders, obs, ScoreWeights{}) ==
          -std::numeric_limits<double>::infinity());
}

TEST_CASE("pool json round trip preserves proposals") {
    SynthConfig cfg;
    cfg.seed = 17;
    cfg.object_counts = {0, 0, 1, 1, 0, 0};
    const SynthScene scene = generate(cfg);

    const auto dir = std::filesystem::temp_directory_path() / "mcss_pool_test";
    std::filesystem::remove_all(dir);
    save_bundle(dir, scene);
    const ProposalPool loaded = load_pool(dir / "pool.json");

    REQUIRE(loaded.size() == scene.pool.size());
    for (int id = 0; id < loaded.size(); ++id) {
        REQUIRE(loaded.is_object(id) == scene.pool.is_object(id));
        CHECK(loaded.category(id) == scene.pool.category(id));
        CHECK(loaded.compat(id, (id + 1) % loaded.size()).kind ==
              scene.pool.compat(id, (id + 1) % loaded.size()).kind);
    }
    std::filesystem::remove_all(dir);
}
