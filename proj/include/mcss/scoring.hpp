#pragma once

#include "mcss/observation.hpp"
#include "mcss/proposals.hpp"

#include <limits>
#include <span>
#include <vector>

namespace mcss {

inline constexpr double kInfeasibleScore = -std::numeric_limits<double>::infinity();

struct SceneSolution {
    std::vector<int> members;  // sorted proposal ids
    double global_score = 0.0;
    bool feasible = true;
};

/// Per-term breakdown of a global score, for reports.
struct ScoreBreakdown {
    double segmentation = 0.0;  // lambda_i * sum_i sum_c S_i(c).S_i^R(c)
    double depth = 0.0;         // lambda_d * sum_i sum_px min(|D - D^R|, cap)
    double prior = 0.0;         // lambda_p * sum of tolerated pair IoU
    double total() const { return segmentation - depth - prior; }
};

/// s_i(O): summed over the composite of `members` in view `view_index`,
/// fixed pixel order. The depth residual is accumulated only where both the
/// observed and rendered depths are finite, capped at weights.depth_cap.
double view_score(std::span<const int> members, const ProposalPool& pool,
                  const PoolRenders& renders, const ObservationSet& obs, int view_index,
                  const ScoreWeights& weights);

/// -lambda_p * sum of tolerated IoU over unordered member pairs;
/// -inf when any pair is incompatible.
double prior_score(std::span<const int> members, const ProposalPool& pool,
                   const ScoreWeights& weights);

/// S(O) = sum_i s_i(O) + prior. Authoritative from-scratch evaluation;
/// bitwise deterministic for a given member set.
double global_score(std::span<const int> members, const ProposalPool& pool,
                    const PoolRenders& renders, const ObservationSet& obs,
                    const ScoreWeights& weights);

ScoreBreakdown global_score_breakdown(std::span<const int> members, const ProposalPool& pool,
                                      const PoolRenders& renders, const ObservationSet& obs,
                                      const ScoreWeights& weights);

/// Per-node backup value: view scores averaged over the views where
/// proposal `o` is visible, minus lambda_p times its own tolerated IoU with
/// the other members. `view_scores` are the s_i of the full member set.
/// Throws if `o` is visible in no view.
double local_score(int o, std::span<const int> members, std::span<const double> view_scores,
                   const ProposalPool& pool, const PoolRenders& renders,
                   const ScoreWeights& weights);

/// Convenience overload that recomputes the per-view scores.
double local_score(int o, std::span<const int> members, const ProposalPool& pool,
                   const PoolRenders& renders, const ObservationSet& obs,
                   const ScoreWeights& weights);

/// Incremental composite + score engine used by the search loops.
///
/// Maintains per-view composites (bit-exact equals of the from-scratch
/// minimum) and running per-view segmentation/depth sums. Members are added
/// on top of the current state; mark()/rollback() give exact undo, with the
/// running sums restored from the snapshot.
class ScoreScratch {
public:
    ScoreScratch(const ProposalPool& pool, const PoolRenders& renders, const ObservationSet& obs,
                 const ScoreWeights& weights);

    struct Mark {
        size_t log_size = 0;
        size_t member_count = 0;
        double prior_iou_sum = 0.0;
        std::vector<double> seg, depth;  // per-view snapshots
    };

    void add(int proposal_id);
    Mark mark() const;
    void rollback(const Mark& m);
    void clear();

    const std::vector<int>& members() const { return members_; }
    double view_score(int v) const {
        return weights_->lambda_i * seg_[v] - weights_->lambda_d * depth_[v];
    }
    std::vector<double> view_scores() const;
    /// sum_i s_i - lambda_p * tolerated IoU sum (assumes feasible members).
    double total_score() const;
    const CompositeView& composite(int v) const { return composites_[v]; }

private:
    struct UndoEntry {
        int32_t view;
        int32_t px;
        float depth;
        int32_t winner;
    };
    double pixel_contrib_seg(int v, size_t px, int winner) const;
    double pixel_contrib_depth(int v, size_t px, float depth) const;

    const ProposalPool* pool_;
    const PoolRenders* renders_;
    const ObservationSet* obs_;
    const ScoreWeights* weights_;
    std::vector<CompositeView> composites_;
    std::vector<double> seg_, depth_;
    double prior_iou_sum_ = 0.0;
    std::vector<int> members_;
    std::vector<UndoEntry> log_;
};

}  // namespace mcss
