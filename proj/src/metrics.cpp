#include "mcss/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace mcss {

PrecisionRecall corner_pr(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt,
                          double radius) {
    struct Pair {
        double dist;
        int p, g;
    };
    std::vector<Pair> pairs;
    for (int p = 0; p < static_cast<int>(pred.size()); ++p)
        for (int g = 0; g < static_cast<int>(gt.size()); ++g) {
            const double d = (pred[p] - gt[g]).norm();
            if (d <= radius) pairs.push_back({d, p, g});
        }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.p != b.p) return a.p < b.p;
        return a.g < b.g;
    });
    std::vector<bool> pred_used(pred.size(), false), gt_used(gt.size(), false);
    int matched = 0;
    for (const Pair& pr : pairs) {
        if (pred_used[pr.p] || gt_used[pr.g]) continue;
        pred_used[pr.p] = gt_used[pr.g] = true;
        ++matched;
    }
    PrecisionRecall out;
    out.matched = matched;
    if (!pred.empty()) out.precision = static_cast<double>(matched) / pred.size();
    if (!gt.empty()) out.recall = static_cast<double>(matched) / gt.size();
    return out;
}

double polygon_iou(const LayoutProposal& pred, const LayoutProposal& gt) {
    const double dot = std::abs(pred.polygon.plane.normal.dot(gt.polygon.plane.normal));
    if (dot < std::cos(30.0 * M_PI / 180.0)) return 0.0;

    const Plane& plane = gt.polygon.plane;
    auto [u, v] = plane.basis();
    const Vec3 anchor = plane.offset * plane.normal;
    auto project = [&](const std::vector<Vec3>& verts) {
        std::vector<Vec2> out;
        out.reserve(verts.size());
        for (const Vec3& p : verts) {
            const Vec3 d = plane.project(p) - anchor;
            out.emplace_back(u.dot(d), v.dot(d));
        }
        return out;
    };
    const auto a = project(pred.polygon.vertices);
    const auto b = project(gt.polygon.vertices);
    const double inter = polygon_intersection_area_2d(a, b);
    const double uni =
        std::abs(polygon_area_2d(a)) + std::abs(polygon_area_2d(b)) - inter;
    return uni <= 0.0 ? 0.0 : inter / uni;
}

std::map<Category, PrecisionRecall> bbox_pr(const std::vector<BboxEntry>& pred,
                                            const std::vector<BboxEntry>& gt,
                                            double iou_threshold, double voxel_size) {
    std::map<Category, PrecisionRecall> out;
    for (int c = 0; c < kNumCategories; ++c) {
        const Category cat = static_cast<Category>(c);
        std::vector<const OrientedBox*> p, g;
        for (const BboxEntry& e : pred)
            if (e.category == cat) p.push_back(&e.box);
        for (const BboxEntry& e : gt)
            if (e.category == cat) g.push_back(&e.box);
        if (p.empty() && g.empty()) continue;

        std::vector<VoxelGrid> pv, gv;
        for (const auto* b : p) pv.push_back(voxelize_box(*b, voxel_size));
        for (const auto* b : g) gv.push_back(voxelize_box(*b, voxel_size));

        struct Pair {
            double iou;
            int p, g;
        };
        std::vector<Pair> pairs;
        for (size_t i = 0; i < pv.size(); ++i)
            for (size_t j = 0; j < gv.size(); ++j) {
                const double iou = voxel_iou(pv[i], gv[j]);
                if (iou >= iou_threshold)
                    pairs.push_back({iou, static_cast<int>(i), static_cast<int>(j)});
            }
        std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
            if (a.iou != b.iou) return a.iou > b.iou;
            if (a.p != b.p) return a.p < b.p;
            return a.g < b.g;
        });
        std::vector<bool> pu(pv.size(), false), gu(gv.size(), false);
        int matched = 0;
        for (const Pair& pr : pairs) {
            if (pu[pr.p] || gu[pr.g]) continue;
            pu[pr.p] = gu[pr.g] = true;
            ++matched;
        }
        PrecisionRecall r;
        r.matched = matched;
        if (!p.empty()) r.precision = static_cast<double>(matched) / p.size();
        if (!g.empty()) r.recall = static_cast<double>(matched) / g.size();
        out[cat] = r;
    }
    return out;
}

ChamferTable chamfer_table(const std::vector<ObjectProposal>& solution_objects,
                           const std::vector<ObjectProposal>& gt_objects, double match_iou,
                           int samples, uint64_t seed) {
    ChamferTable table;
    // greedy bbox matching, across all categories but only within-category pairs
    struct Pair {
        double iou;
        int s, g;
    };
    std::vector<VoxelGrid> sv, gv;
    for (const auto& o : solution_objects) sv.push_back(voxelize_box(o.bbox, 0.02));
    for (const auto& o : gt_objects) gv.push_back(voxelize_box(o.bbox, 0.02));
    std::vector<Pair> pairs;
    for (size_t i = 0; i < solution_objects.size(); ++i)
        for (size_t j = 0; j < gt_objects.size(); ++j) {
            if (solution_objects[i].category != gt_objects[j].category) continue;
            const double iou = voxel_iou(sv[i], gv[j]);
            if (iou >= match_iou) pairs.push_back({iou, static_cast<int>(i), static_cast<int>(j)});
        }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        if (a.s != b.s) return a.s < b.s;
        return a.g < b.g;
    });
    std::vector<bool> su(solution_objects.size(), false), gu(gt_objects.size(), false);
    std::map<Category, std::vector<double>> values;
    for (const Pair& pr : pairs) {
        if (su[pr.s] || gu[pr.g]) continue;
        su[pr.s] = gu[pr.g] = true;
        const ObjectProposal& sol = solution_objects[pr.s];
        const ObjectProposal& gt = gt_objects[pr.g];
        // one sampling seed for both sides: identical geometry scores exactly 0
        const uint64_t pair_seed = seed ^ (static_cast<uint64_t>(pr.g) * 7919);
        const auto gt_samples =
            sample_mesh_surface(transform_mesh(*gt.mesh, gt.pose), samples, pair_seed);
        const auto sol_samples =
            sample_mesh_surface(transform_mesh(*sol.mesh, sol.pose), samples, pair_seed);
        values[gt.category].push_back(chamfer_one_way(gt_samples, sol_samples));
    }
    for (size_t j = 0; j < gt_objects.size(); ++j)
        if (!gu[j]) ++table.unmatched_gt;
    for (const auto& [cat, v] : values) {
        ChamferRow row;
        row.matched = static_cast<int>(v.size());
        for (double x : v) row.mean_mm += x;
        row.mean_mm /= v.size();
        table.per_category[cat] = row;
    }
    return table;
}

}  // namespace mcss
