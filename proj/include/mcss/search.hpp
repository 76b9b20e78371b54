#pragma once

#include "mcss/rng.hpp"
#include "mcss/scoring.hpp"
#include "mcss/tree.hpp"

#include <span>
#include <vector>

namespace mcss {

/// What gets added to a node's Q after a simulation: the per-node local
/// score, or the simulation's whole global score (ablation variant).
enum class BackupMode { Local, Global };

struct McssConfig {
    int iterations = 20000;
    int simulations_objects = 10;
    int simulations_layouts = 1;
    double ucb_lambda1 = 1.0;
    /// < 0 requests auto-scaling from the spread of the first 100 deposits.
    double ucb_lambda2 = -1.0;
    uint64_t seed = 0;
    int log_stride = 100;
    bool use_max_backup = false;
    bool record_timing = false;  // off keeps convergence output byte-stable
    BackupMode backup = BackupMode::Local;
};

struct ConvergencePoint {
    int iteration = 0;
    double best_score = 0.0;
    double wall_ms = 0.0;
};

struct McssResult {
    SceneSolution solution;
    std::vector<ConvergencePoint> series;
    double ucb_lambda2_used = 0.0;
    size_t tree_nodes = 0;
    std::string tree_dump;  // filled when requested
};

/// Best-solution tracker. Scores are re-evaluated from scratch before they
/// can replace the incumbent, so exact ties resolve by fewer members, then
/// lexicographically smaller ids.
class BestTracker {
public:
    void offer(std::vector<int> members, double exact_score);
    /// Whether an exact re-evaluation could change the incumbent.
    bool needs_exact_score(const std::vector<int>& sorted_members, double approx_score) const;
    const SceneSolution& best() const { return best_; }
    bool has_best() const { return has_; }

private:
    SceneSolution best_;
    bool has_ = false;
};

/// UCB child selection (Eq. with lambda1 * Q/n + lambda2 * sqrt(log N / n));
/// unvisited children are drawn uniformly first. Exposed for tests.
int select_child(const SearchTree& tree, int node_index, const McssConfig& config, double lambda2,
                 Rng& rng);

/// Roulette-wheel simulation: completes `from_members` by repeatedly drawing
/// path-compatible candidates with probability proportional to
/// max(fitness - f_min + eps, eps) (uniform when requested), restricted in
/// layout mode to edge-connected continuations. Scores from scratch.
SceneSolution simulate(std::span<const int> from_members, const ProposalPool& pool,
                       const PoolRenders& renders, const ObservationSet& obs,
                       const ScoreWeights& weights, std::span<const double> fitness_table,
                       TreeMode mode, Rng& rng, bool uniform_weights = false,
                       std::span<const int> context = {});

/// One MCSS run over a single tree mode. `context` members are fixed: they
/// are composited and penalized in every score but are not search variables.
McssResult run_mcss(const ProposalPool& pool, const PoolRenders& renders,
                    const ObservationSet& obs, const ScoreWeights& weights, TreeMode mode,
                    const McssConfig& config, std::span<const int> context = {},
                    bool want_tree_dump = false);

/// Layout phase first, then objects with the selected layout fixed.
/// The series continues the iteration numbering across phases.
McssResult run_two_phase(const ProposalPool& pool, const PoolRenders& renders,
                         const ObservationSet& obs, const ScoreWeights& weights,
                         const McssConfig& config);

}  // namespace mcss
