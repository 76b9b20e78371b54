#pragma once

#include "mcss/proposals.hpp"

#include <span>
#include <string>
#include <vector>

namespace mcss {

enum class TreeMode { Layout, Object };

struct NodeContent {
    enum class Kind { Root, Skip, Proposal };
    Kind kind = Kind::Root;
    int proposal_id = -1;

    static NodeContent root() { return {Kind::Root, -1}; }
    static NodeContent skip() { return {Kind::Skip, -1}; }
    static NodeContent proposal(int id) { return {Kind::Proposal, id}; }
    bool is_proposal() const { return kind == Kind::Proposal; }
};

struct SearchNode {
    NodeContent content;
    double q = 0.0;                   // accumulated backup scores
    double q_max = 0.0;               // max single deposit (for max-backup mode)
    int n = 0;                        // visit count
    int parent = -1;
    bool expanded = false;
    std::vector<int> children;        // node indices, materialized lazily
    std::vector<int> path_members;    // proposal ids from root to here
    std::vector<int> skip_exclusions; // skip nodes: proposals barred from the next pick
};

/// Search tree over a proposal pool. Children are materialized on first
/// expansion following the construction rules:
///  - root: the highest-fitness proposal plus everything incompatible with it;
///  - other nodes: the anchored pick (nearest object / best-fitness
///    edge-connected layout) plus the candidates incompatible with it, all
///    restricted to proposals compatible with the whole path;
///  - object trees additionally get a Skip child whose own children exclude
///    the proposals offered as its siblings (accumulated across consecutive
///    skips so skip chains terminate).
/// No materialized path ever contains an incompatible pair.
class SearchTree {
public:
    SearchTree(const ProposalPool& pool, std::vector<double> fitness, TreeMode mode,
               std::vector<int> context_members = {});

    int root() const { return 0; }
    SearchNode& node(int i) { return nodes_[i]; }
    const SearchNode& node(int i) const { return nodes_[i]; }
    size_t node_count() const { return nodes_.size(); }
    TreeMode mode() const { return mode_; }
    const std::vector<double>& fitness() const { return fitness_; }
    const std::vector<int>& context() const { return context_; }

    /// Materializes children (no-op if done); returns the child list.
    const std::vector<int>& expand(int node_index);

    /// Proposal ids collected along root -> node (excludes Skip and context).
    std::vector<int> path_solution(int node_index) const { return nodes_[node_index].path_members; }

    /// Ids eligible for this tree: right kind, visible, context-compatible.
    const std::vector<int>& eligible() const { return eligible_; }

    std::string dump_json() const;

private:
    std::vector<NodeContent> make_children(int node_index) const;
    std::vector<int> candidate_set(const SearchNode& node) const;
    int add_node(int parent, NodeContent content);

    const ProposalPool* pool_;
    std::vector<double> fitness_;
    TreeMode mode_;
    std::vector<int> context_;
    std::vector<int> eligible_;
    std::vector<SearchNode> nodes_;
};

}  // namespace mcss
