#pragma once

#include <vector>

#include "rgl/graph.hpp"
#include "rgl/rng.hpp"

namespace rgl::detail {

// Enumerates all size-s subsets of `pool` (which must be sorted ascending) in
// lexicographic order.  The running union of adjacency rows of the chosen
// vertices is maintained incrementally, so each leaf costs O(words) on top of
// the enumeration itself.  `leaf(members, member_bits, row_union)` is invoked
// once per subset and returns true to abort the scan early.
//
// Returns true iff some leaf returned true.
template <class Leaf>
bool scan_subsets_exact(const Graph& g, const std::vector<VertexId>& pool,
                        int s, Leaf&& leaf) {
    const int p = static_cast<int>(pool.size());
    if (s <= 0 || s > p) return false;

    std::vector<int> idx(s);             // idx[t] = position in pool at level t
    std::vector<VertexId> members(s);
    VertexSet member_bits(g.size());
    // unions[t] = union of rows of members[0..t-1]; unions[0] is empty.
    std::vector<VertexSet> unions;
    unions.reserve(s + 1);
    for (int t = 0; t <= s; ++t) unions.emplace_back(g.size());

    auto set_level = [&](int t, int pos) {
        idx[t] = pos;
        members[t] = pool[pos];
        member_bits.insert(pool[pos]);
        unions[t + 1] = unions[t];
        unions[t + 1] |= g.row(pool[pos]);
    };
    auto clear_level = [&](int t) { member_bits.erase(members[t]); };

    for (int t = 0; t < s; ++t) set_level(t, t);
    while (true) {
        if (leaf(members, member_bits, unions[s])) return true;
        // Advance the odometer: find the deepest level that can move right.
        int t = s - 1;
        while (t >= 0 && idx[t] == p - (s - t)) --t;
        if (t < 0) return false;
        for (int u = s - 1; u > t; --u) clear_level(u);
        clear_level(t);
        int pos = idx[t] + 1;
        for (int u = t; u < s; ++u, ++pos) set_level(u, pos);
    }
}

// Samples `trials` uniformly random size-s subsets of `pool` and invokes
// `leaf` on each, with the same contract as scan_subsets_exact.
template <class Leaf>
bool scan_subsets_sampled(const Graph& g, const std::vector<VertexId>& pool,
                          int s, int trials, Rng& rng, Leaf&& leaf) {
    const int p = static_cast<int>(pool.size());
    if (s <= 0 || s > p) return false;

    std::vector<VertexId> members(s);
    for (int trial = 0; trial < trials; ++trial) {
        std::vector<int> picks = sample_without_replacement(p, s, rng);
        VertexSet member_bits(g.size());
        VertexSet row_union(g.size());
        for (int t = 0; t < s; ++t) {
            members[t] = pool[picks[t]];
            member_bits.insert(members[t]);
            row_union |= g.row(members[t]);
        }
        if (leaf(members, member_bits, row_union)) return true;
    }
    return false;
}

}  // namespace rgl::detail
