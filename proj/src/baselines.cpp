#include "mcss/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace mcss {

SceneSolution hill_climb(const ProposalPool& pool, const PoolRenders& renders,
                         const ObservationSet& obs, const ScoreWeights& weights,
                         HillClimbVariant variant) {
    const std::vector<double> fit = compute_fitness(pool, renders, obs, weights);
    std::vector<int> members;
    double current_score = 0.0;

    while (true) {
        int best_id = -1;
        double best_gain = 0.0;
        double best_candidate_score = 0.0;
        for (int id = 0; id < pool.size(); ++id) {
            if (std::find(members.begin(), members.end(), id) != members.end()) continue;
            if (std::isinf(fit[id]) && fit[id] < 0) continue;
            if (!pool.compatible_with_all(id, members)) continue;
            double gain, candidate_score;
            if (variant == HillClimbVariant::GlobalScore) {
                std::vector<int> trial = members;
                trial.push_back(id);
                candidate_score = global_score(trial, pool, renders, obs, weights);
                gain = candidate_score - current_score;
            } else {
                double iou_sum = 0.0;
                for (int m : members) iou_sum += pool.pair_iou(id, m);
                gain = fit[id] - weights.lambda_p * iou_sum;
                candidate_score = 0.0;
            }
            if (gain > best_gain) {
                best_gain = gain;
                best_id = id;
                best_candidate_score = candidate_score;
            }
        }
        if (best_id < 0) break;  // no positive increase left
        members.push_back(best_id);
        if (variant == HillClimbVariant::GlobalScore) current_score = best_candidate_score;
    }

    SceneSolution sol;
    sol.members = members;
    std::sort(sol.members.begin(), sol.members.end());
    sol.global_score = global_score(sol.members, pool, renders, obs, weights);
    sol.feasible = true;
    return sol;
}

RandomSearchResult random_search(const ProposalPool& pool, const PoolRenders& renders,
                                 const ObservationSet& obs, const ScoreWeights& weights,
                                 int iterations, uint64_t seed, int log_stride) {
    const std::vector<double> fit = compute_fitness(pool, renders, obs, weights);
    RandomSearchResult result;
    BestTracker best;
    best.offer({}, 0.0);
    for (int iter = 1; iter <= iterations; ++iter) {
        Rng rng = Rng::derive(seed, static_cast<uint64_t>(iter), 0x4a11d0);
        // uniform over both kinds: run layout then object completion so every
        // proposal kind participates
        SceneSolution layout_part = simulate({}, pool, renders, obs, weights, fit,
                                             TreeMode::Layout, rng, /*uniform=*/true);
        SceneSolution full = simulate(layout_part.members, pool, renders, obs, weights, fit,
                                      TreeMode::Object, rng, /*uniform=*/true);
        best.offer(full.members, full.global_score);
        if (iter % std::max(1, log_stride) == 0 || iter == iterations)
            result.series.push_back({iter, best.best().global_score, 0.0});
    }
    result.solution = best.best();
    return result;
}

}  // namespace mcss
