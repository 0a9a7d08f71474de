#include "clocktree/subtree.hpp"

#include <string>

#include "clocktree/errors.hpp"

namespace clocktree {

SubTree::SubTree(int d, std::vector<int> parents) : d_(d), parent_(std::move(parents)) {
    if (d_ < 2) throw ModelError("subtree branching number must be >= 2");
    if (parent_.empty() || parent_[0] != -1)
        throw ModelError("subtree parent array must start with -1");
    children_.resize(parent_.size());
    for (size_t v = 1; v < parent_.size(); ++v) {
        const int p = parent_[v];
        if (p < 0 || static_cast<size_t>(p) >= v)
            throw ModelError("subtree parent indices must satisfy parent[v] < v");
        children_[p].push_back(static_cast<int>(v));
    }
    for (size_t v = 0; v < parent_.size(); ++v)
        if (free_slots(static_cast<int>(v)) < 0)
            throw ModelError("vertex " + std::to_string(v) + " exceeds its degree");
}

int SubTree::boundary_size() const {
    int b = 0;
    for (int v = 0; v < size(); ++v) b += free_slots(v);
    return b;
}

SubTree grow_random_subtree(int d, int size, Rng& rng) {
    if (size < 1) throw ModelError("subtree size must be >= 1");
    std::vector<int> parents = {-1};
    std::vector<int> slots = {d + 1};  // open slots per existing vertex
    int total_slots = d + 1;
    while (static_cast<int>(parents.size()) < size) {
        // pick a uniformly random open boundary slot
        int pick = static_cast<int>(rng.next_u64() % static_cast<uint64_t>(total_slots));
        int host = 0;
        for (size_t v = 0; v < slots.size(); ++v) {
            if (pick < slots[v]) {
                host = static_cast<int>(v);
                break;
            }
            pick -= slots[v];
        }
        parents.push_back(host);
        slots[host] -= 1;
        slots.push_back(d);
        total_slots += d - 1;
    }
    return SubTree(d, std::move(parents));
}

}  // namespace clocktree
