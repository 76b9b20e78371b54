#include "mcss/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace mcss {

namespace {

bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

}  // namespace

void BestTracker::offer(std::vector<int> members, double exact_score) {
    std::sort(members.begin(), members.end());
    if (!has_ || exact_score > best_.global_score ||
        (exact_score == best_.global_score && lex_less(members, best_.members))) {
        best_.members = std::move(members);
        best_.global_score = exact_score;
        best_.feasible = true;
        has_ = true;
    }
}

bool BestTracker::needs_exact_score(const std::vector<int>& sorted_members,
                                    double approx_score) const {
    if (!has_) return true;
    const double tol = 1e-6 * std::max(1.0, std::abs(best_.global_score));
    if (approx_score < best_.global_score - tol) return false;
    if (approx_score > best_.global_score + tol) return true;
    // potential exact tie: only member sets that would win the tie-break
    return lex_less(sorted_members, best_.members);
}

int select_child(const SearchTree& tree, int node_index, const McssConfig& config, double lambda2,
                 Rng& rng) {
    const SearchNode& node = tree.node(node_index);
    std::vector<int> unvisited;
    for (int c : node.children)
        if (tree.node(c).n == 0) unvisited.push_back(c);
    if (!unvisited.empty()) return unvisited[rng.uniform_int(static_cast<int>(unvisited.size()))];

    auto tie_id = [&](int c) {
        const NodeContent& content = tree.node(c).content;
        return content.is_proposal() ? content.proposal_id : std::numeric_limits<int>::max();
    };
    int best = node.children.front();
    double best_value = -std::numeric_limits<double>::infinity();
    for (int c : node.children) {
        const SearchNode& child = tree.node(c);
        const double exploit =
            config.use_max_backup ? child.q_max : child.q / static_cast<double>(child.n);
        const double value = config.ucb_lambda1 * exploit +
                             lambda2 * std::sqrt(std::log(static_cast<double>(node.n)) /
                                                 static_cast<double>(child.n));
        if (value > best_value || (value == best_value && tie_id(c) < tie_id(best))) {
            best_value = value;
            best = c;
        }
    }
    return best;
}

namespace {

struct RouletteState {
    double fitness_min = 0.0;
    double eps = 1e-6;

    static RouletteState from(std::span<const double> fitness_table,
                              std::span<const int> eligible) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int id : eligible) {
            lo = std::min(lo, fitness_table[id]);
            hi = std::max(hi, fitness_table[id]);
        }
        RouletteState st;
        if (!eligible.empty() && std::isfinite(lo)) {
            st.fitness_min = lo;
            const double range = hi - lo;
            st.eps = range > 0.0 ? 1e-6 * range : 1e-6;
        }
        return st;
    }

    double weight(double fitness) const { return std::max(fitness - fitness_min + eps, eps); }
};

bool edge_connected(const ProposalPool& pool, int candidate, std::span<const int> current) {
    if (current.empty()) return true;
    const LayoutProposal& c = pool.layout(candidate);
    for (int m : current)
        if (pool.is_layout(m) && c.is_neighbor(pool.layout(m))) return true;
    return false;
}

// Candidate filter shared by the public simulate() and the engine's fast path.
std::vector<int> sim_candidates(const ProposalPool& pool, std::span<const int> eligible,
                                std::span<const int> current, TreeMode mode) {
    std::vector<int> out;
    for (int id : eligible) {
        if (std::find(current.begin(), current.end(), id) != current.end()) continue;
        if (!pool.compatible_with_all(id, current)) continue;
        if (mode == TreeMode::Layout && !edge_connected(pool, id, current)) continue;
        out.push_back(id);
    }
    return out;
}

int roulette_draw(std::span<const int> candidates, std::span<const double> fitness_table,
                  const RouletteState& roulette, bool uniform, Rng& rng) {
    double total = 0.0;
    for (int id : candidates) total += uniform ? 1.0 : roulette.weight(fitness_table[id]);
    const double pick = rng.uniform() * total;
    double acc = 0.0;
    for (int id : candidates) {
        acc += uniform ? 1.0 : roulette.weight(fitness_table[id]);
        if (pick < acc) return id;
    }
    return candidates.back();
}

}  // namespace

SceneSolution simulate(std::span<const int> from_members, const ProposalPool& pool,
                       const PoolRenders& renders, const ObservationSet& obs,
                       const ScoreWeights& weights, std::span<const double> fitness_table,
                       TreeMode mode, Rng& rng, bool uniform_weights,
                       std::span<const int> context) {
    std::vector<int> eligible;
    for (int id = 0; id < pool.size(); ++id) {
        const bool right_kind = mode == TreeMode::Layout ? pool.is_layout(id) : pool.is_object(id);
        if (!right_kind) continue;
        if (std::isinf(fitness_table[id]) && fitness_table[id] < 0) continue;
        if (!pool.compatible_with_all(id, context)) continue;
        eligible.push_back(id);
    }
    const RouletteState roulette = RouletteState::from(fitness_table, eligible);

    std::vector<int> current(context.begin(), context.end());
    current.insert(current.end(), from_members.begin(), from_members.end());
    while (true) {
        const std::vector<int> candidates = sim_candidates(pool, eligible, current, mode);
        if (candidates.empty()) break;
        current.push_back(roulette_draw(candidates, fitness_table, roulette, uniform_weights, rng));
    }
    SceneSolution sol;
    sol.members = current;
    std::sort(sol.members.begin(), sol.members.end());
    sol.global_score = global_score(sol.members, pool, renders, obs, weights);
    sol.feasible = sol.global_score != kInfeasibleScore;
    return sol;
}

namespace {

struct SimOutcome {
    std::vector<int> drawn;            // ids added beyond the path
    std::vector<double> view_scores;   // s_i of the full member set
    double total = 0.0;                // incremental S of context+path+drawn
    std::vector<int> full_members;     // sorted context+path+drawn
};

class Engine {
public:
    Engine(const ProposalPool& pool, const PoolRenders& renders, const ObservationSet& obs,
           const ScoreWeights& weights, TreeMode mode, const McssConfig& config,
           std::span<const int> context)
        : pool_(pool),
          renders_(renders),
          obs_(obs),
          weights_(weights),
          config_(config),
          mode_(mode),
          context_(context.begin(), context.end()),
          fitness_(compute_fitness(pool, renders, obs, weights)),
          tree_(pool, fitness_, mode, context_),
          scratch_(pool, renders, obs, weights),
          select_rng_(Rng::derive(config.seed, 0x5e1ec7ULL, mode == TreeMode::Layout ? 1 : 2)) {}

    McssResult run(bool want_tree_dump);

private:
    SimOutcome run_simulation(std::span<const int> path, std::span<const int> excluded, Rng& rng);
    void deposit(int node_index, const SimOutcome& sim);
    double current_lambda2() const;
    void note_deposit(double value);
    void track_best(const std::vector<int>& sorted_members, double approx_total);

    const ProposalPool& pool_;
    const PoolRenders& renders_;
    const ObservationSet& obs_;
    const ScoreWeights& weights_;
    const McssConfig& config_;
    TreeMode mode_;
    std::vector<int> context_;
    std::vector<double> fitness_;
    SearchTree tree_;
    ScoreScratch scratch_;
    Rng select_rng_;
    BestTracker best_;
    RouletteState roulette_;

    double lambda2_frozen_ = -1.0;
    double deposit_sum_ = 0.0;
    double deposit_sumsq_ = 0.0;
    int deposit_count_ = 0;
};

// lambda2 tracks the dispersion of the backup values so the exploration
// term is commensurate with actual Q differences between children
double Engine::current_lambda2() const {
    if (config_.ucb_lambda2 >= 0.0) return config_.ucb_lambda2;
    if (lambda2_frozen_ >= 0.0) return lambda2_frozen_;
    if (deposit_count_ < 2) return 1.0;
    const double mean = deposit_sum_ / deposit_count_;
    const double var = std::max(0.0, deposit_sumsq_ / deposit_count_ - mean * mean);
    return std::sqrt(2.0) * std::max(std::sqrt(var), 1e-9 * std::max(1.0, std::abs(mean)));
}

void Engine::note_deposit(double value) {
    if (lambda2_frozen_ >= 0.0) return;
    deposit_sum_ += value;
    deposit_sumsq_ += value * value;
    ++deposit_count_;
    if (deposit_count_ >= 100) {
        const double mean = deposit_sum_ / deposit_count_;
        const double var = std::max(0.0, deposit_sumsq_ / deposit_count_ - mean * mean);
        lambda2_frozen_ =
            std::sqrt(2.0) * std::max(std::sqrt(var), 1e-9 * std::max(1.0, std::abs(mean)));
    }
}

SimOutcome Engine::run_simulation(std::span<const int> path, std::span<const int> excluded,
                                  Rng& rng) {
    const auto mark = scratch_.mark();
    std::vector<int> current(context_.begin(), context_.end());
    current.insert(current.end(), path.begin(), path.end());
    SimOutcome out;
    while (true) {
        std::vector<int> candidates = sim_candidates(pool_, tree_.eligible(), current, mode_);
        if (!excluded.empty()) {
            std::erase_if(candidates, [&](int id) {
                return std::find(excluded.begin(), excluded.end(), id) != excluded.end();
            });
        }
        if (candidates.empty()) break;
        const int id = roulette_draw(candidates, fitness_, roulette_, false, rng);
        current.push_back(id);
        out.drawn.push_back(id);
        scratch_.add(id);
    }
    out.view_scores = scratch_.view_scores();
    out.total = scratch_.total_score();
    out.full_members = current;
    std::sort(out.full_members.begin(), out.full_members.end());
    scratch_.rollback(mark);
    return out;
}

void Engine::track_best(const std::vector<int>& sorted_members, double approx_total) {
    if (!best_.needs_exact_score(sorted_members, approx_total)) return;
    const double exact = global_score(sorted_members, pool_, renders_, obs_, weights_);
    best_.offer(sorted_members, exact);
}

void Engine::deposit(int node_index, const SimOutcome& sim) {
    SearchNode& node = tree_.node(node_index);
    double value;
    if (config_.backup == BackupMode::Global) {
        value = sim.total;
    } else if (node.content.is_proposal()) {
        value = local_score(node.content.proposal_id, sim.full_members, sim.view_scores, pool_,
                            renders_, weights_);
    } else {
        // root and skip nodes carry no proposal; back up the plain view mean
        double mean = 0.0;
        for (double s : sim.view_scores) mean += s;
        value = sim.view_scores.empty() ? 0.0 : mean / sim.view_scores.size();
    }
    node.q += value;
    node.q_max = node.n == 0 ? value : std::max(node.q_max, value);
    node.n += 1;
    note_deposit(value);
}

McssResult Engine::run(bool want_tree_dump) {
    McssResult result;
    const auto t0 = std::chrono::steady_clock::now();
    roulette_ = RouletteState::from(fitness_, tree_.eligible());

    // the fixed context alone is a valid (starting) solution
    {
        std::vector<int> base(context_.begin(), context_.end());
        std::sort(base.begin(), base.end());
        best_.offer(std::move(base), global_score(context_, pool_, renders_, obs_, weights_));
    }

    const int sims_per_iter =
        mode_ == TreeMode::Layout ? config_.simulations_layouts : config_.simulations_objects;

    scratch_.clear();
    for (int id : context_) scratch_.add(id);
    const auto context_mark = scratch_.mark();

    for (int iter = 1; iter <= config_.iterations; ++iter) {
        // Select: walk down with UCB until an unvisited child or a leaf
        int cur = tree_.root();
        while (true) {
            const auto& children = tree_.expand(cur);
            if (children.empty()) break;  // terminal leaf
            const int next = select_child(tree_, cur, config_, current_lambda2(), select_rng_);
            cur = next;
            if (tree_.node(cur).n == 0) break;  // Expand: fresh node, simulate from here
        }

        const std::vector<int> path = tree_.path_solution(cur);
        scratch_.rollback(context_mark);
        for (int id : path) scratch_.add(id);

        // the visited path itself is a candidate solution (skip nodes make
        // declining proposals meaningful)
        {
            std::vector<int> path_members(context_.begin(), context_.end());
            path_members.insert(path_members.end(), path.begin(), path.end());
            std::sort(path_members.begin(), path_members.end());
            track_best(path_members, scratch_.total_score());
        }

        const SearchNode& cur_node = tree_.node(cur);
        const std::span<const int> excluded =
            cur_node.content.kind == NodeContent::Kind::Skip
                ? std::span<const int>(cur_node.skip_exclusions)
                : std::span<const int>();

        std::vector<SimOutcome> sims;
        sims.reserve(sims_per_iter);
        for (int s = 0; s < sims_per_iter; ++s) {
            Rng rng = Rng::derive(config_.seed, static_cast<uint64_t>(iter), s);
            sims.push_back(run_simulation(path, excluded, rng));
        }
        for (const SimOutcome& sim : sims) track_best(sim.full_members, sim.total);

        // Update: the best simulation's score backs up the whole path
        const SimOutcome* best_sim = &sims.front();
        for (const SimOutcome& sim : sims)
            if (sim.total > best_sim->total) best_sim = &sim;
        for (int n = cur; n != -1; n = tree_.node(n).parent) deposit(n, *best_sim);

        if (iter % std::max(1, config_.log_stride) == 0 || iter == config_.iterations) {
            const double ms =
                config_.record_timing
                    ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                          .count()
                    : 0.0;
            result.series.push_back({iter, best_.best().global_score, ms});
        }
    }

    result.solution = best_.best();
    result.ucb_lambda2_used = current_lambda2();
    result.tree_nodes = tree_.node_count();
    if (want_tree_dump) result.tree_dump = tree_.dump_json();
    return result;
}

}  // namespace

McssResult run_mcss(const ProposalPool& pool, const PoolRenders& renders,
                    const ObservationSet& obs, const ScoreWeights& weights, TreeMode mode,
                    const McssConfig& config, std::span<const int> context, bool want_tree_dump) {
    Engine engine(pool, renders, obs, weights, mode, config, context);
    return engine.run(want_tree_dump);
}

McssResult run_two_phase(const ProposalPool& pool, const PoolRenders& renders,
                         const ObservationSet& obs, const ScoreWeights& weights,
                         const McssConfig& config) {
    McssResult layout = run_mcss(pool, renders, obs, weights, TreeMode::Layout, config);
    McssResult objects =
        run_mcss(pool, renders, obs, weights, TreeMode::Object, config, layout.solution.members);

    McssResult combined = std::move(objects);
    std::vector<ConvergencePoint> series = std::move(layout.series);
    for (ConvergencePoint p : combined.series) {
        p.iteration += config.iterations;
        series.push_back(p);
    }
    combined.series = std::move(series);
    return combined;
}

}  // namespace mcss
