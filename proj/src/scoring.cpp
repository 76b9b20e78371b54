#include "mcss/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mcss {

namespace {

// Fixed-order accumulation over one composited view. Bitwise deterministic
// for a given composite.
void accumulate_view(const CompositeView& comp, const ViewObservation& vo, const ProposalPool& pool,
                     const ScoreWeights& weights, double& seg, double& depth_pen) {
    const size_t n = comp.depth.size();
    for (size_t px = 0; px < n; ++px) {
        const int win = comp.winner[px];
        if (win == kNoWinner) continue;
        seg += vo.confidence[static_cast<int>(pool.category(win))][px];
        const float od = vo.depth[px];
        if (od != kEmptyDepth)
            depth_pen +=
                std::min(static_cast<double>(std::abs(od - comp.depth[px])), weights.depth_cap);
    }
}

}  // namespace

double view_score(std::span<const int> members, const ProposalPool& pool,
                  const PoolRenders& renders, const ObservationSet& obs, int view_index,
                  const ScoreWeights& weights) {
    const ViewObservation& vo = obs.views[view_index];
    const CompositeView comp = composite_from_scratch(members, renders.renders, view_index, vo.view);
    double seg = 0.0, depth_pen = 0.0;
    accumulate_view(comp, vo, pool, weights, seg, depth_pen);
    return weights.lambda_i * seg - weights.lambda_d * depth_pen;
}

double prior_score(std::span<const int> members, const ProposalPool& pool,
                   const ScoreWeights& weights) {
    double iou_sum = 0.0;
    for (size_t i = 0; i < members.size(); ++i) {
        for (size_t j = i + 1; j < members.size(); ++j) {
            const Compatibility& c = pool.compat(members[i], members[j]);
            if (c.incompatible_pair()) return kInfeasibleScore;
            if (c.kind == Compatibility::Kind::Tolerated) iou_sum += c.iou;
        }
    }
    return -weights.lambda_p * iou_sum;
}

ScoreBreakdown global_score_breakdown(std::span<const int> members, const ProposalPool& pool,
                                      const PoolRenders& renders, const ObservationSet& obs,
                                      const ScoreWeights& weights) {
    ScoreBreakdown bd;
    for (size_t v = 0; v < obs.views.size(); ++v) {
        const CompositeView comp =
            composite_from_scratch(members, renders.renders, static_cast<int>(v), obs.views[v].view);
        double seg = 0.0, depth_pen = 0.0;
        accumulate_view(comp, obs.views[v], pool, weights, seg, depth_pen);
        bd.segmentation += weights.lambda_i * seg;
        bd.depth += weights.lambda_d * depth_pen;
    }
    const double prior = prior_score(members, pool, weights);
    bd.prior = prior == kInfeasibleScore ? std::numeric_limits<double>::infinity() : -prior;
    return bd;
}

double global_score(std::span<const int> members, const ProposalPool& pool,
                    const PoolRenders& renders, const ObservationSet& obs,
                    const ScoreWeights& weights) {
    const double prior = prior_score(members, pool, weights);
    if (prior == kInfeasibleScore) return kInfeasibleScore;
    double total = prior;
    for (size_t v = 0; v < obs.views.size(); ++v) {
        const CompositeView comp =
            composite_from_scratch(members, renders.renders, static_cast<int>(v), obs.views[v].view);
        double seg = 0.0, depth_pen = 0.0;
        accumulate_view(comp, obs.views[v], pool, weights, seg, depth_pen);
        total += weights.lambda_i * seg - weights.lambda_d * depth_pen;
    }
    return total;
}

double local_score(int o, std::span<const int> members, std::span<const double> view_scores,
                   const ProposalPool& pool, const PoolRenders& renders,
                   const ScoreWeights& weights) {
    double weighted = 0.0;
    int visible = 0;
    for (size_t v = 0; v < view_scores.size(); ++v) {
        if (renders.visible[o][v]) {
            weighted += view_scores[v];
            ++visible;
        }
    }
    if (visible == 0) throw std::invalid_argument("local_score: invisible proposal");
    double iou_sum = 0.0;
    for (int m : members)
        if (m != o) iou_sum += pool.pair_iou(o, m);
    return weighted / visible - weights.lambda_p * iou_sum;
}

double local_score(int o, std::span<const int> members, const ProposalPool& pool,
                   const PoolRenders& renders, const ObservationSet& obs,
                   const ScoreWeights& weights) {
    std::vector<double> scores(obs.views.size());
    for (size_t v = 0; v < obs.views.size(); ++v) {
        const CompositeView comp =
            composite_from_scratch(members, renders.renders, static_cast<int>(v), obs.views[v].view);
        double seg = 0.0, depth_pen = 0.0;
        accumulate_view(comp, obs.views[v], pool, weights, seg, depth_pen);
        scores[v] = weights.lambda_i * seg - weights.lambda_d * depth_pen;
    }
    return local_score(o, members, scores, pool, renders, weights);
}

// ---------------------------------------------------------------- scratch

ScoreScratch::ScoreScratch(const ProposalPool& pool, const PoolRenders& renders,
                           const ObservationSet& obs, const ScoreWeights& weights)
    : pool_(&pool), renders_(&renders), obs_(&obs), weights_(&weights) {
    composites_.resize(obs.views.size());
    for (size_t v = 0; v < obs.views.size(); ++v)
        composites_[v].reset(obs.views[v].view.width, obs.views[v].view.height);
    seg_.assign(obs.views.size(), 0.0);
    depth_.assign(obs.views.size(), 0.0);
}

double ScoreScratch::pixel_contrib_seg(int v, size_t px, int winner) const {
    if (winner == kNoWinner) return 0.0;
    return obs_->views[v].confidence[static_cast<int>(pool_->category(winner))][px];
}

double ScoreScratch::pixel_contrib_depth(int v, size_t px, float depth) const {
    if (depth == kEmptyDepth) return 0.0;
    const float od = obs_->views[v].depth[px];
    if (od == kEmptyDepth) return 0.0;
    return std::min(static_cast<double>(std::abs(od - depth)), weights_->depth_cap);
}

void ScoreScratch::add(int proposal_id) {
    for (int m : members_) prior_iou_sum_ += pool_->pair_iou(proposal_id, m);
    members_.push_back(proposal_id);
    for (size_t v = 0; v < composites_.size(); ++v) {
        CompositeView& comp = composites_[v];
        const RenderRect& rect = renders_->renders[proposal_id].per_view[v];
        for (int y = 0; y < rect.h; ++y) {
            const size_t src_row = static_cast<size_t>(y) * rect.w;
            const size_t dst_row = static_cast<size_t>(y + rect.y0) * comp.width + rect.x0;
            for (int x = 0; x < rect.w; ++x) {
                const float d = rect.depth[src_row + x];
                if (d == kEmptyDepth) continue;
                const size_t px = dst_row + x;
                const float cur = comp.depth[px];
                const int win = comp.winner[px];
                if (d < cur || (d == cur && proposal_id < win)) {
                    log_.push_back({static_cast<int32_t>(v), static_cast<int32_t>(px), cur, win});
                    seg_[v] += pixel_contrib_seg(static_cast<int>(v), px, proposal_id) -
                               pixel_contrib_seg(static_cast<int>(v), px, win);
                    depth_[v] += pixel_contrib_depth(static_cast<int>(v), px, d) -
                                 pixel_contrib_depth(static_cast<int>(v), px, cur);
                    comp.depth[px] = d;
                    comp.winner[px] = proposal_id;
                }
            }
        }
    }
}

ScoreScratch::Mark ScoreScratch::mark() const {
    return Mark{log_.size(), members_.size(), prior_iou_sum_, seg_, depth_};
}

void ScoreScratch::rollback(const Mark& m) {
    while (log_.size() > m.log_size) {
        const UndoEntry& e = log_.back();
        composites_[e.view].depth[e.px] = e.depth;
        composites_[e.view].winner[e.px] = e.winner;
        log_.pop_back();
    }
    members_.resize(m.member_count);
    prior_iou_sum_ = m.prior_iou_sum;
    seg_ = m.seg;
    depth_ = m.depth;
}

void ScoreScratch::clear() {
    for (auto& c : composites_) c.reset(c.width, c.height);
    seg_.assign(seg_.size(), 0.0);
    depth_.assign(depth_.size(), 0.0);
    prior_iou_sum_ = 0.0;
    members_.clear();
    log_.clear();
}

std::vector<double> ScoreScratch::view_scores() const {
    std::vector<double> out(seg_.size());
    for (size_t v = 0; v < out.size(); ++v) out[v] = view_score(static_cast<int>(v));
    return out;
}

double ScoreScratch::total_score() const {
    double total = -weights_->lambda_p * prior_iou_sum_;
    for (size_t v = 0; v < seg_.size(); ++v) total += view_score(static_cast<int>(v));
    return total;
}

}  // namespace mcss
