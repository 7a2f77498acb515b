#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "rgl/graph.hpp"

namespace rgl {

// Chromatic number by exact backtracking, plus sigma = the smallest colour
// class size achievable over all proper chi-colourings.  `max_n` caps the
// instance size; larger inputs raise a budget error rather than running an
// open-ended exponential search.
struct ChromaticResult {
    int k = 0;      // chi(H)
    int sigma = 0;  // min over proper k-colourings of the smallest class
};

ChromaticResult chromatic_and_sigma(const Graph& h, int max_n = 16);

// The extremal two-colouring on (k-1)(n-1) + sigma - 1 vertices: red edges
// form k-1 disjoint (n-1)-cliques plus one (sigma-1)-clique, laid out in
// consecutive id blocks; every cross pair is blue.  By construction it has
// no red connected subgraph on n vertices and no blue subgraph of chromatic
// number >= k whose smallest colour class has >= sigma vertices.
TwoColouring burr_colouring(int n, int k, int sigma);

// Searches for `classes` disjoint s-sets plus one m-set that are pairwise
// non-adjacent in G (equivalently, a complete multipartite subgraph of the
// complement spanning those classes; edges inside a class are
// unconstrained).  Exact backtracking, vertices ascending within a class,
// equal-size classes ordered by least element; `absent` is only reported
// after the full search space was covered, otherwise the node budget ran
// out.
enum class SearchStatus { found, absent, budget_exhausted };

inline const char* to_string(SearchStatus s) {
    switch (s) {
        case SearchStatus::found: return "found";
        case SearchStatus::absent: return "absent";
        case SearchStatus::budget_exhausted: return "budget_exhausted";
    }
    return "unknown";
}

struct MultipartiteSearch {
    SearchStatus status = SearchStatus::absent;
    std::optional<MultipartiteWitness> witness;  // set when status == found
    long long nodes = 0;                         // member placements explored
};

MultipartiteSearch find_multipartite_in_complement(
    const Graph& g, int classes, int s, int m,
    long long node_budget = 20'000'000);

// Matching saturating A in the bipartite graph G[A, B], or a Hall violator
// U subseteq A with |N(U) cap B| < |U| (augmenting paths; the violator is
// the set of A-vertices reachable by alternating paths from an unmatched
// one).
struct HallResult {
    bool saturated = false;
    std::vector<std::pair<VertexId, VertexId>> matching;  // (a, b) pairs
    VertexSet violator;                                   // when !saturated
};

HallResult hall_matching(const VertexSet& a, const VertexSet& b,
                         const Graph& g);

}  // namespace rgl
