#include "mcss/metrics.hpp"
#include "mcss/rng.hpp"
#include "mcss/synth.hpp"

#include <doctest.h>

#include <cmath>

using namespace mcss;

namespace {

LayoutProposal square_layout(const Plane& plane, const Vec2& lo, const Vec2& hi) {
    LayoutProposal l;
    l.category = Category::Wall;
    auto [u, v] = plane.basis();
    const Vec3 anchor = plane.offset * plane.normal;
    l.polygon.plane = plane;
    l.polygon.vertices = {anchor + lo.x() * u + lo.y() * v, anchor + hi.x() * u + lo.y() * v,
                          anchor + hi.x() * u + hi.y() * v, anchor + lo.x() * u + hi.y() * v};
    return l;
}

}  // namespace

TEST_CASE("corner precision/recall with one-to-one matching") {
    const std::vector<Vec3> gt = {Vec3(0, 0, 0), Vec3(5, 0, 0), Vec3(5, 4, 0), Vec3(0, 4, 0)};
    auto pr = corner_pr(gt, gt);
    CHECK(pr.precision.value() == 1.0);
    CHECK(pr.recall.value() == 1.0);

    // two predictions near one true corner: only the nearest matches
    const std::vector<Vec3> two = {Vec3(0.05, 0, 0), Vec3(0.20, 0, 0)};
    pr = corner_pr(two, {Vec3(0, 0, 0)});
    CHECK(pr.precision.value() == 0.5);
    CHECK(pr.recall.value() == 1.0);
    CHECK(pr.matched == 1);

    // perturbations inside the radius keep a perfect score
    Rng rng(2);
    std::vector<Vec3> jittered;
    for (const Vec3& c : gt) {
        Vec3 d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        jittered.push_back(c + 0.39 * d.normalized());
    }
    pr = corner_pr(jittered, gt);
    CHECK(pr.precision.value() == 1.0);
    CHECK(pr.recall.value() == 1.0);

    // swap symmetry: precision(pred, gt) == recall(gt, pred)
    const std::vector<Vec3> partial = {Vec3(0, 0, 0), Vec3(9, 9, 9)};
    const auto fwd = corner_pr(partial, gt);
    const auto bwd = corner_pr(gt, partial);
    CHECK(fwd.precision.value() == bwd.recall.value());
    CHECK(fwd.recall.value() == bwd.precision.value());

    // empty ground truth leaves the recall undefined
    CHECK_FALSE(corner_pr(partial, {}).recall.has_value());
    CHECK_FALSE(corner_pr({}, gt).precision.has_value());
}

TEST_CASE("polygon IoU: identity, disjoint, analytic half overlap") {
    const Plane wall{Vec3::UnitX(), 2.0};
    const auto a = square_layout(wall, Vec2(0, 0), Vec2(1, 1));
    CHECK(polygon_iou(a, a) == doctest::Approx(1.0));

    const auto apart = square_layout(wall, Vec2(3, 0), Vec2(4, 1));
    CHECK(polygon_iou(a, apart) == 0.0);

    const auto half = square_layout(wall, Vec2(0.5, 0), Vec2(1.5, 1));
    CHECK(polygon_iou(a, half) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

    // far-apart planes score zero
    const auto tilted = square_layout(Plane{Vec3::UnitY(), 0.0}, Vec2(0, 0), Vec2(1, 1));
    CHECK(polygon_iou(a, tilted) == 0.0);

    // near-coplanar inputs are symmetric within the projection tolerance
    Plane p2{(Vec3::UnitX() + 0.01 * Vec3::UnitY()).normalized(), 2.0};
    const auto b = square_layout(p2, Vec2(0.2, 0), Vec2(1.2, 1));
    CHECK(std::abs(polygon_iou(a, b) - polygon_iou(b, a)) <= 0.02);
}

TEST_CASE("bbox precision/recall at the two published thresholds") {
    std::vector<BboxEntry> gt = {
        {OrientedBox{Vec3(0, 0, 0.45), Vec3(0.25, 0.25, 0.45), 0.3}, Category::Chair},
        {OrientedBox{Vec3(2, 0, 0.36), Vec3(0.55, 0.35, 0.36), 0.0}, Category::Table},
    };
    auto pr = bbox_pr(gt, gt, 0.5);
    CHECK(pr[Category::Chair].precision.value() == 1.0);
    CHECK(pr[Category::Chair].recall.value() == 1.0);
    CHECK(pr[Category::Table].precision.value() == 1.0);
    pr = bbox_pr(gt, gt, 0.75);
    CHECK(pr[Category::Chair].precision.value() == 1.0);
    CHECK(pr[Category::Table].recall.value() == 1.0);

    // empty predictions: undefined precision, zero recall
    pr = bbox_pr({}, gt, 0.5);
    CHECK_FALSE(pr[Category::Chair].precision.has_value());
    CHECK(pr[Category::Chair].recall.value() == 0.0);

    // a box jittered to IoU ~0.6 matches at 0.5 but not at 0.75
    std::vector<BboxEntry> jittered = gt;
    // axis-aligned shift: IoU = (1-d/w_eff) style overlap; chosen to land near 0.6
    jittered[0].box.center += Vec3(0.11, 0.0, 0.0);
    jittered[0].box.yaw = 0.3;
    const double iou = voxel_iou(voxelize_box(jittered[0].box, 0.02), voxelize_box(gt[0].box, 0.02));
    CHECK(iou > 0.5);
    CHECK(iou < 0.75);
    CHECK(bbox_pr(jittered, gt, 0.5)[Category::Chair].matched == 1);
    CHECK(bbox_pr(jittered, gt, 0.75)[Category::Chair].matched == 0);
}

TEST_CASE("voxelized box IoU tracks the analytic axis-aligned value") {
    const OrientedBox a{Vec3(0, 0, 0.5), Vec3(0.5, 0.4, 0.5), 0.0};
    const OrientedBox b{Vec3(0.3, 0.1, 0.5), Vec3(0.5, 0.4, 0.5), 0.0};
    // analytic axis-aligned intersection
    const double ix = std::max(0.0, std::min(0.5, 0.3 + 0.5) - std::max(-0.5, 0.3 - 0.5));
    const double iy = std::max(0.0, std::min(0.4, 0.1 + 0.4) - std::max(-0.4, 0.1 - 0.4));
    const double iz = 1.0;
    const double inter = ix * iy * iz;
    const double analytic = inter / (2 * (1.0 * 0.8 * 1.0) - inter);
    const double got = voxel_iou(voxelize_box(a, 0.02), voxelize_box(b, 0.02));
    CHECK(std::abs(got - analytic) <= 0.02);
}

TEST_CASE("chamfer table: exact retrieval, translated copies, empty solutions") {
    SynthConfig cfg;
    cfg.seed = 90;
    cfg.object_counts = {0, 0, 1, 1, 0, 0};
    cfg.decoy_count = 0;
    const SynthScene scene = generate(cfg);

    std::vector<ObjectProposal> gt_objects = scene.gt.objects;
    // exact retrieval
    auto table = chamfer_table(gt_objects, gt_objects);
    CHECK(table.unmatched_gt == 0);
    for (const auto& [cat, row] : table.per_category) {
        CHECK(row.matched == 1);
        CHECK(row.mean_mm == 0.0);  // paired sampling: identical surfaces
    }

    // a 10 mm translated copy scores 10 mm within the sampling tolerance
    std::vector<ObjectProposal> shifted = gt_objects;
    for (auto& o : shifted) {
        o.pose.translation += Vec3(0.010, 0, 0);
        o.bbox.center += Vec3(0.010, 0, 0);
    }
    table = chamfer_table(shifted, gt_objects);
    for (const auto& [cat, row] : table.per_category)
        CHECK(std::abs(row.mean_mm - 10.0) <= 1.0);

    // empty solution: nothing matched
    table = chamfer_table({}, gt_objects);
    CHECK(table.per_category.empty());
    CHECK(table.unmatched_gt == 2);
}
