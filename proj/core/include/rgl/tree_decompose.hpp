#pragma once

#include <string>
#include <vector>

#include "rgl/tree.hpp"
#include "rgl/vertex_set.hpp"

namespace rgl {

// Path inside a parent tree whose internal vertices have degree exactly 2
// there (endpoints are unconstrained).
struct BarePath {
    std::vector<VertexId> vertices;  // consecutive tree path
    int length() const { return static_cast<int>(vertices.size()) - 1; }
};

// Vertex-disjoint bare paths of length exactly k.  The packing walks each
// maximal bare segment from its deeper endpoint (which no other segment
// uses) and cuts consecutive (k+1)-vertex blocks, which meets the
// guaranteed count below.
std::vector<BarePath> find_bare_paths(const Tree& t, int k);

// max(0, ceil(n/(k+1) - 2*leaf_count + 2)): the guaranteed number of
// disjoint length-k bare paths.
long long bare_path_count_bound(const Tree& t, int k);

// "" when every path is bare of length k and the paths are disjoint;
// otherwise a description of the first violation.  Does not check counts.
std::string bare_paths_fault(const Tree& t, const std::vector<BarePath>& paths,
                             int k);

// One split step: E(T) = E(T1) u E(T2), T1 cap T2 = {v}, v a leaf of T1,
// anchor in T1 \ T2, and gamma*n >= |T2| >= gamma*n/(2*max_degree).  Rule:
// root at `anchor` and take the deepest vertex (ties: smallest id) whose
// subtree has size >= gamma*n/(2*max_degree); T2 is that subtree.
struct TreeSplit {
    VertexSet t1;
    VertexSet t2;
    VertexId v = -1;
};

TreeSplit split_tree(const Tree& t, double gamma, VertexId anchor);

// Chain decomposition T_1..T_l: consecutive parts share exactly the link
// vertex t_i (a leaf of T_i), non-consecutive parts are disjoint, and the
// part edge sets partition E(T).  Sizes are n_1 = |T_1| and n_i = |T_i|-1
// for i >= 2 (the shared link is not recounted).
struct TreeDecomposition {
    std::vector<VertexSet> subtrees;      // over the parent tree's ids
    std::vector<VertexId> link_vertices;  // t_1..t_{l-1}

    std::vector<int> part_sizes() const {
        std::vector<int> out;
        out.reserve(subtrees.size());
        for (std::size_t i = 0; i < subtrees.size(); ++i) {
            out.push_back(subtrees[i].count() - (i == 0 ? 0 : 1));
        }
        return out;
    }
};

// "" when d satisfies every definitional clause on t, else the violation.
std::string decomposition_fault(const Tree& t, const TreeDecomposition& d);

// sizes[i+1] within [lo*sizes[i], hi*sizes[i]] for all i, with an explicit
// +-1 additive slack on each comparison (integer parts of real-valued
// bounds can be off by one at small sizes; the slack is documented here
// once rather than silently widened per call site).
bool is_descending_tuple(const std::vector<int>& sizes, double lo, double hi);

// Repeated split_tree at rate gamma relative to the current remainder,
// peeling the anchor-side part off each time, until the remainder has at
// most N vertices; that remainder is the final part.  The size tuple is
// (gamma/4D, 2*gamma)-descending for D = max_degree and the last part has
// between gamma*N/3D and N vertices.
TreeDecomposition descending_decomposition(const Tree& t, double gamma, int N,
                                           VertexId anchor);

// Exactly k parts with a (gamma/8D, 2*gamma)-descending size tuple: run
// the descending decomposition at rate gamma/2 with a cutoff low enough to
// produce at least k parts, then merge parts k..l into one.  With
// enforce_size off, the n > (8D/gamma)^(k+1) threshold is not required;
// the cutoff is clamped to whatever the tree admits and the result may
// then have fewer than k parts (callers read the actual part count).
TreeDecomposition fixed_length_decomposition(const Tree& t, double gamma,
                                             int k, VertexId anchor,
                                             bool enforce_size = true);

// Set of vertices with pairwise tree distance >= 2k+2 and size at least
// ceil(n / ((8k+8) * max_degree^k)): the largest depth-residue class mod
// 2k+2, thinned greedily by radius-(2k+1) ball exclusion.
VertexSet separated_set(const Tree& t, int k);

}  // namespace rgl
