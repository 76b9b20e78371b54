#pragma once

#include "mcss/proposals.hpp"

#include <map>
#include <optional>
#include <vector>

namespace mcss {

struct PrecisionRecall {
    std::optional<double> precision;  // empty prediction set -> undefined
    std::optional<double> recall;     // empty ground truth -> undefined
    int matched = 0;
};

/// One-to-one greedy matching by ascending distance inside `radius`.
PrecisionRecall corner_pr(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt,
                          double radius = 0.40);

/// Projects pred onto the gt plane and intersects in 2D; 0 when the planes
/// differ by more than 30 degrees.
double polygon_iou(const LayoutProposal& pred, const LayoutProposal& gt);

struct BboxEntry {
    OrientedBox box;
    Category category;
};

/// Category-wise one-to-one greedy matching by descending voxel IoU,
/// counted as a match at IoU >= threshold. Boxes voxelized at 0.02 m.
std::map<Category, PrecisionRecall> bbox_pr(const std::vector<BboxEntry>& pred,
                                            const std::vector<BboxEntry>& gt,
                                            double iou_threshold, double voxel_size = 0.02);

struct ChamferRow {
    double mean_mm = 0.0;
    int matched = 0;
};

struct ChamferTable {
    std::map<Category, ChamferRow> per_category;
    int unmatched_gt = 0;
};

/// One-way Chamfer (gt surface samples -> retrieved mesh samples, in mm) of
/// the bbox-matched object pairs, averaged per category.
ChamferTable chamfer_table(const std::vector<ObjectProposal>& solution_objects,
                           const std::vector<ObjectProposal>& gt_objects,
                           double match_iou = 0.5, int samples = 2000, uint64_t seed = 0);

}  // namespace mcss
