#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rgl/graph.hpp"
#include "rgl/vertex_set.hpp"

namespace rgl {

// Rooted labelled tree on vertices [0, n).  The adjacency structure is
// undirected; a default root with its parent/depth/subtree-size arrays is
// kept because most decompositions work relative to a chosen root.
class Tree {
  public:
    // parent[v] = -1 exactly for the root.  Validates acyclicity.
    static Tree from_parents(const std::vector<VertexId>& parent);
    // n-1 edges forming a connected graph; rooted at `root`.
    static Tree from_edges(int n,
                           const std::vector<std::pair<VertexId, VertexId>>& edges,
                           VertexId root = 0);
    static Tree path(int n);  // 0 - 1 - ... - n-1, rooted at 0
    static Tree star(int n);  // centre 0 with n-1 leaves

    int size() const { return n_; }
    VertexId root() const { return root_; }
    int max_degree() const { return max_degree_; }

    const std::vector<VertexId>& adj(VertexId v) const;
    int degree(VertexId v) const { return static_cast<int>(adj(v).size()); }
    bool has_edge(VertexId u, VertexId v) const;
    bool is_leaf(VertexId v) const { return degree(v) <= 1; }
    std::vector<VertexId> leaves() const;
    int leaf_count() const;

    VertexId parent(VertexId v) const;  // under the default root; -1 at root
    const std::vector<int>& depth() const { return default_view_.depth; }
    const std::vector<int>& subtree_size() const {
        return default_view_.subtree;
    }

    // Parent/depth/subtree-size arrays relative to an arbitrary root.
    // `order` lists vertices in breadth-first discovery order from r.
    struct Rooted {
        VertexId root = 0;
        std::vector<VertexId> parent;
        std::vector<int> depth;
        std::vector<int> subtree;
        std::vector<VertexId> order;
    };
    Rooted rooted_at(VertexId r) const;

    int distance(VertexId u, VertexId v) const;

    // Edges as (child, parent) pairs under the default root.
    std::vector<std::pair<VertexId, VertexId>> edges() const;

    Graph to_graph() const;

    // Subtree induced by `keep` (must be connected within the tree),
    // relabelled 0..|keep|-1 in ascending order of old ids and rooted at
    // root_old's new label.  old_of_new, when non-null, receives the
    // back-mapping.
    Tree induced(const VertexSet& keep, VertexId root_old,
                 std::vector<VertexId>* old_of_new = nullptr) const;

    bool operator==(const Tree& o) const {
        return n_ == o.n_ && root_ == o.root_ && adj_ == o.adj_;
    }

  private:
    Tree() = default;
    void finish_construction();  // sorts adjacency, roots, caches

    int n_ = 0;
    VertexId root_ = 0;
    int max_degree_ = 0;
    std::vector<std::vector<VertexId>> adj_;
    Rooted default_view_;
};

// Prefix-connected orders: every prefix of the returned list induces a
// subtree.  The plain variant is breadth-first from t1 with ascending
// neighbour order; the path-greedy variant prefers a vertex adjacent to the
// previously output one whenever that keeps the prefix connected, so bare
// paths are traversed in one run.
std::vector<VertexId> traversal_order(const Tree& t, VertexId t1);
std::vector<VertexId> traversal_order_path_greedy(const Tree& t, VertexId t1);

// Up to `target` leaves no two of which share a neighbour (greedy over
// ascending ids; maximal when fewer than `target` exist).
VertexSet independent_leaf_set(const Tree& t, int target);

// Random tree with maximum degree at most `max_degree`: each new vertex
// attaches to a uniformly random earlier vertex that still has spare
// degree.  Deterministic in `seed`.
Tree random_tree(int n, int max_degree, std::uint64_t seed);

// Canonical form invariant under isomorphism: the lexicographically smaller
// of the rooted canonical strings at the tree's one or two centroids
// (children sorted recursively).  Two trees are isomorphic iff their forms
// are equal.
std::string tree_canonical_form(const Tree& t);

// One representative per isomorphism class of trees on n vertices, sorted
// by canonical form.  Enumerates labelled trees and deduplicates, so it is
// meant for small n (n <= 10 stays under a second).
std::vector<Tree> all_trees(int n);

}  // namespace rgl
