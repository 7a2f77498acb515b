#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>

#include "rgl/extendable.hpp"
#include "rgl/graph.hpp"
#include "rgl/tree.hpp"
#include "rgl/vertex_set.hpp"

namespace rgl {

// Step counters for one covering pass: good steps place a tree vertex on
// an uncovered target vertex, neutral steps place it on a fresh vertex.
struct CoverStepCounts {
    long long good = 0;
    long long neutral = 0;
};

// A tree-embedding job that must cover a prescribed vertex set X: embed
// `tree` into `host` with `t` landing on the anchor `v` so that the image
// covers (most or all of) X.  Constructing a task validates the inputs;
// in verified mode it also checks that X u {v} as isolated vertices forms
// a (d,m)-extendable subgraph of the host, which the covering procedures
// assume.
//
// Knobs shared by the covering operations:
//  - options:   extendability switches (verified re-checks, size
//               hypothesis enforcement, verification budget).
//  - retries:   extra attempts with a reshuffled traversal and candidate
//               order before a stage failure is reported.
//  - seed:      base seed for those reshuffles.
//  - telemetry: when set, one JSON line per stage is written here (piece
//               index, residual size, step counts).
struct CoverTask {
    const Graph* host;
    VertexSet X;
    VertexId v;
    const Tree* tree;
    VertexId t;
    std::optional<VertexId> t_prime;  // leaf kept off X by embed_covering
    int d;
    int m;
    double gamma;
    ExtendOptions options;
    int retries = 4;
    std::uint64_t seed = 0;
    std::ostream* telemetry = nullptr;

    CoverTask(const Graph& host_graph, VertexSet x, VertexId anchor,
              const Tree& tree_ref, VertexId root, int d_param, int m_param,
              double gamma_param, ExtendOptions opts = {});
};

// Embeds the whole tree with t on v, preferring "good" steps (attach the
// next tree vertex onto an uncovered X-vertex adjacent to its parent's
// image; smallest id wins) and falling back to neutral leaf additions.
// Postcondition: fewer than m vertices of X stay uncovered.  Requires
// |T| >= |X| + max_degree(T)*m + 2; the size hypothesis
// |G| >= |T| + (2d+4)m + 1 follows options.enforce_size.
Embedding cover_most(const CoverTask& task);

// Embeds `tree` into host - (V(state) \ {r}) with t on r, where `state`
// holds an already-built subgraph R together with the isolated targets X,
// and reduces the uncovered remainder below 2m/(d-1)^k via k rounds of
// leaf surgery (detach a leaf image, re-attach its tree vertex onto an
// uncovered target).  Swap sites near a (4k+4)-separated set of the tree
// are preferred.  On success `state` has grown by the tree copy; on
// failure it is left untouched.  d and m must match the state's.
Embedding cover_separated(const Graph& host, ExtendableEmbedding& state,
                          const VertexSet& X, const Tree& tree, VertexId t,
                          VertexId r, int d, int m, int k, int retries = 4,
                          std::uint64_t seed = 0,
                          std::ostream* telemetry = nullptr,
                          CoverStepCounts* counts_out = nullptr);

// Full covering embedder: embeds all of `tree` with t on v so that the
// image covers X entirely and the excluded leaf t' (chosen as the
// smallest-id leaf != t when not given) lands outside X.  Decomposes the
// tree minus t' into geometrically shrinking pieces, covers most of X
// with the first piece, then clears the remainder piece by piece with
// cover_separated, and finally re-attaches t'.
Embedding embed_covering(const CoverTask& task);

}  // namespace rgl
