#pragma once

#include <vector>

#include "clocktree/rng.hpp"

namespace clocktree {

/// Finite connected subtree gamma of the d-regular tree, rooted at the
/// distinguished vertex x = id 0. parent[v] < v for v >= 1, parent[0] = -1.
/// Vertex 0 has up to d+1 children, every other vertex up to d (the
/// remaining slot is its parent). Unused slots are boundary vertices.
class SubTree {
public:
    SubTree(int d, std::vector<int> parents);

    int branching() const { return d_; }
    int size() const { return static_cast<int>(parent_.size()); }
    const std::vector<int>& parents() const { return parent_; }
    const std::vector<int>& children(int v) const { return children_[v]; }

    int capacity(int v) const { return v == 0 ? d_ + 1 : d_; }
    int free_slots(int v) const {
        return capacity(v) - static_cast<int>(children_[v].size());
    }

    // |boundary| = 2 + |gamma| (d-1)
    int boundary_size() const;
    // |E(gamma)| = d |gamma| + 1 (internal edges plus boundary edges)
    int attached_edges() const { return d_ * size() + 1; }

private:
    int d_;
    std::vector<int> parent_;
    std::vector<std::vector<int>> children_;
};

/// Grows a subtree of the given size by repeatedly attaching a uniformly
/// chosen boundary vertex.
SubTree grow_random_subtree(int d, int size, Rng& rng);

}  // namespace clocktree
