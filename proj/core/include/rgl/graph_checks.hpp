#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "rgl/graph.hpp"
#include "rgl/params.hpp"

namespace rgl {

// Joinedness: G is (m, m2)-joined when no two disjoint vertex sets A, B with
// |A| >= m, |B| >= m2 are completely non-adjacent.  Equivalently, every
// m-set A satisfies |V \ (A u N(A))| < m2.
struct JoinedResult {
    bool joined = false;
    VerifyMode mode = VerifyMode::exact;
    // When not joined: disjoint (A, B) with |A| = m, |B| = m2 and no edges
    // between them.  A is the lexicographically least offending m-set; B the
    // least m2-set of vertices outside A u N(A).  A witness found in sampled
    // mode is still a genuine witness; only a positive verdict is weakened.
    std::optional<std::pair<VertexSet, VertexSet>> witness;
};

JoinedResult is_joined(const Graph& g, int m, int m2,
                       const VerifyBudget& budget = {});

// Same check inside the induced subgraph G[inside] (no copy is made).
JoinedResult is_joined_in(const Graph& g, const VertexSet& inside, int m,
                          int m2, const VerifyBudget& budget = {});

// Expansion: G is a (d, m)-expander when every U with 1 <= |U| <= m has
// |N(U) \ U| >= d |U|.
struct ExpanderResult {
    bool expander = false;
    VerifyMode mode = VerifyMode::exact;
    std::optional<VertexSet> witness;  // U with |N(U) \ U| < d |U|
};

ExpanderResult is_expander(const Graph& g, double d, int m,
                           const VerifyBudget& budget = {});

ExpanderResult is_expander_in(const Graph& g, const VertexSet& inside,
                              double d, int m,
                              const VerifyBudget& budget = {});

// Relative expansion into a target set: every U subseteq universe with
// 1 <= |U| <= m must have |N(U) cap target| >= d |U|.  (The target may
// overlap the universe; neighbours inside U still count when in target.)
ExpanderResult has_relative_expansion(const Graph& g, const VertexSet& universe,
                                      const VertexSet& target, double d, int m,
                                      const VerifyBudget& budget = {});

// Removes a set W, |W| < m, so that G - W is a (d, m - |W|)-expander.
// Pre: |G| >= n0 + (2d + 2) m and G is (m, n0)-joined.  Greedy absorption:
// while some U violates expansion in G - W, fold U into W.  If W reaches
// size m the joinedness precondition must have been false, and a contract
// error carrying a non-adjacent witness pair is raised instead.
struct PruneResult {
    VertexSet removed;  // W
    int m_prime = 0;    // m - |W|
    VerifyMode mode = VerifyMode::exact;
};

PruneResult prune_to_expander(const Graph& g, int m, int n0, double d,
                              const VerifyBudget& budget = {});

// Removes W, |W| < m, so that every U subseteq V(G) \ W with |U| <= m
// expands into target \ W at rate d (relative variant used when a reserved
// part of the host must keep absorbing neighbourhoods).  Pre: |target| >=
// n0 + (2d + 2) m and G is (m, n0)-joined; same contract-error behaviour.
VertexSet prune_relative_expansion(const Graph& g, const VertexSet& target,
                                   int m, int n0, double d,
                                   const VerifyBudget& budget = {});

// Same absorption with the violating sets U confined to `universe` (the
// overload above is the special case universe = V(G)).  Used when only a
// window of the host is allowed to lean on the target for expansion.
VertexSet prune_relative_expansion(const Graph& g, const VertexSet& universe,
                                   const VertexSet& target, int m, int n0,
                                   double d, const VerifyBudget& budget = {});

}  // namespace rgl
