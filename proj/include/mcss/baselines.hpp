#pragma once

#include "mcss/search.hpp"

namespace mcss {

enum class HillClimbVariant { GlobalScore, Fitness };

/// Greedy baseline: repeatedly adds the compatible proposal with the largest
/// increase of the scoring function, stopping when no increase remains.
/// GlobalScore scores S(members + {p}); Fitness scores
/// fitness(p) - lambda_p * sum IoU(p, members). Ties by id; deterministic.
SceneSolution hill_climb(const ProposalPool& pool, const PoolRenders& renders,
                         const ObservationSet& obs, const ScoreWeights& weights,
                         HillClimbVariant variant);

/// Uniform simulations from the root; no tree statistics, best kept.
struct RandomSearchResult {
    SceneSolution solution;
    std::vector<ConvergencePoint> series;
};

RandomSearchResult random_search(const ProposalPool& pool, const PoolRenders& renders,
                                 const ObservationSet& obs, const ScoreWeights& weights,
                                 int iterations, uint64_t seed, int log_stride = 1);

}  // namespace mcss
