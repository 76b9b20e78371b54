#include "mcss/tree.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mcss {

SearchTree::SearchTree(const ProposalPool& pool, std::vector<double> fitness, TreeMode mode,
                       std::vector<int> context_members)
    : pool_(&pool), fitness_(std::move(fitness)), mode_(mode), context_(std::move(context_members)) {
    for (int id = 0; id < pool.size(); ++id) {
        const bool right_kind = mode == TreeMode::Layout ? pool.is_layout(id) : pool.is_object(id);
        if (!right_kind) continue;
        if (std::isinf(fitness_[id]) && fitness_[id] < 0) continue;  // invisible
        if (!pool.compatible_with_all(id, context_)) continue;
        eligible_.push_back(id);
    }
    nodes_.push_back(SearchNode{});  // root
}

int SearchTree::add_node(int parent, NodeContent content) {
    SearchNode n;
    n.content = content;
    n.parent = parent;
    n.path_members = nodes_[parent].path_members;
    if (content.is_proposal()) n.path_members.push_back(content.proposal_id);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size() - 1);
}

std::vector<int> SearchTree::candidate_set(const SearchNode& node) const {
    std::vector<int> out;
    for (int id : eligible_) {
        if (std::find(node.path_members.begin(), node.path_members.end(), id) !=
            node.path_members.end())
            continue;
        if (node.content.kind == NodeContent::Kind::Skip &&
            std::find(node.skip_exclusions.begin(), node.skip_exclusions.end(), id) !=
                node.skip_exclusions.end())
            continue;
        if (!pool_->compatible_with_all(id, node.path_members)) continue;
        if (mode_ == TreeMode::Layout && node.content.is_proposal()) {
            // layout children must continue the structure through an edge
            const LayoutProposal& anchor = pool_->layout(node.content.proposal_id);
            if (!pool_->layout(id).is_neighbor(anchor)) continue;
        }
        out.push_back(id);
    }
    return out;
}

std::vector<NodeContent> SearchTree::make_children(int node_index) const {
    const SearchNode& node = nodes_[node_index];
    const std::vector<int> candidates = candidate_set(node);
    if (candidates.empty()) return {};

    auto best_fitness = [&]() {
        int best = candidates[0];
        for (int id : candidates)
            if (fitness_[id] > fitness_[best]) best = id;
        return best;
    };

    int picked;
    if (mode_ == TreeMode::Layout || node.content.kind == NodeContent::Kind::Root) {
        picked = best_fitness();
    } else {
        // anchored at the nearest ancestor proposal; a root-level skip chain
        // has none, in which case the best remaining fitness anchors
        int anchor = -1;
        for (int cur = node_index; cur != -1; cur = nodes_[cur].parent) {
            if (nodes_[cur].content.is_proposal()) {
                anchor = nodes_[cur].content.proposal_id;
                break;
            }
        }
        if (anchor < 0) {
            picked = best_fitness();
        } else {
            picked = candidates[0];
            for (int id : candidates) {
                const double d = pool_->distance(anchor, id);
                const double dp = pool_->distance(anchor, picked);
                if (d < dp || (d == dp && id < picked)) picked = id;
            }
        }
    }

    std::vector<NodeContent> out;
    out.push_back(NodeContent::proposal(picked));
    for (int id : candidates)
        if (id != picked && pool_->compat(id, picked).incompatible_pair())
            out.push_back(NodeContent::proposal(id));
    std::sort(out.begin(), out.end(), [&](const NodeContent& a, const NodeContent& b) {
        const double fa = fitness_[a.proposal_id], fb = fitness_[b.proposal_id];
        if (fa != fb) return fa > fb;
        return a.proposal_id < b.proposal_id;
    });
    if (mode_ == TreeMode::Object) out.push_back(NodeContent::skip());
    return out;
}

const std::vector<int>& SearchTree::expand(int node_index) {
    SearchNode& node = nodes_[node_index];
    if (node.expanded) return node.children;
    const auto contents = make_children(node_index);

    std::vector<int> sibling_proposals;
    for (const NodeContent& c : contents)
        if (c.is_proposal()) sibling_proposals.push_back(c.proposal_id);

    std::vector<int> child_indices;
    for (const NodeContent& c : contents) {
        const int idx = add_node(node_index, c);
        if (c.kind == NodeContent::Kind::Skip) {
            auto& excl = nodes_[idx].skip_exclusions;
            excl = sibling_proposals;
            if (nodes_[node_index].content.kind == NodeContent::Kind::Skip) {
                const auto& inherited = nodes_[node_index].skip_exclusions;
                excl.insert(excl.end(), inherited.begin(), inherited.end());
            }
        }
        child_indices.push_back(idx);
    }
    SearchNode& n = nodes_[node_index];  // re-fetch, add_node may reallocate
    n.children = std::move(child_indices);
    n.expanded = true;
    return n.children;
}

std::string SearchTree::dump_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (size_t i = 0; i < nodes_.size(); ++i) {
        const SearchNode& n = nodes_[i];
        nlohmann::json j;
        j["index"] = i;
        j["kind"] = n.content.kind == NodeContent::Kind::Root
                        ? "root"
                        : (n.content.kind == NodeContent::Kind::Skip ? "skip" : "proposal");
        if (n.content.is_proposal()) j["proposal"] = n.content.proposal_id;
        j["q"] = n.q;
        j["n"] = n.n;
        j["children"] = n.children;
        arr.push_back(j);
    }
    return nlohmann::json{{"nodes", arr}}.dump(2) + "\n";
}

}  // namespace mcss
