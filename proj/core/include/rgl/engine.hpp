#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rgl/embedding.hpp"
#include "rgl/graph.hpp"
#include "rgl/params.hpp"
#include "rgl/tree.hpp"
#include "rgl/vertex_set.hpp"

namespace rgl {

struct VortexPartitionResult;  // vortex.hpp; optional observability tap

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

// One side of the dichotomy for an instance (colouring, T, k, s, m): either a
// red copy of T, or a blue complete multipartite witness with k-1 classes of
// size s plus one class of size m (class interiors are unconstrained, every
// cross pair must be blue).
//
// A certificate is self-contained: it carries the tree it claims to embed,
// a digest of the instance it was produced for, the parameter record, and
// the verification mode under which quantified prechecks were established.
// `verify_certificate` (oracle.hpp) re-checks it against the colouring.
struct Certificate {
  enum class Kind { red_tree, blue_witness };

  Kind kind = Kind::red_tree;
  Embedding embedding;          // populated when kind == red_tree
  MultipartiteWitness witness;  // populated when kind == blue_witness
  std::optional<Tree> tree;     // the tree the red side embeds / avoids

  std::uint64_t input_digest = 0;  // instance_digest(...) of the inputs
  nlohmann::json parameters;       // k, s, m, n, seed, ParamSet
  VerifyMode mode = VerifyMode::exact;
  bool verified = false;  // set after verify_certificate returned no fault
};

// Stable digest of an instance: colouring edges, tree edges and the target
// parameters, folded with FNV-1a over a canonical byte stream.  Used to tie
// certificates to the inputs they were produced for; not a cryptographic hash.
std::uint64_t instance_digest(const TwoColouring& colouring, const Tree& tree,
                              int k, int s, int m);

// ---------------------------------------------------------------------------
// Case trace
// ---------------------------------------------------------------------------

// One branch decision: which predicate was probed, what was measured, and
// whether the branch was taken.  A trace is an ordered list of these records;
// replaying the recorded decisions on the same inputs reproduces the run.
struct CaseRecord {
  std::string label;      // e.g. exact-small | joined-probe | dense | vortex
  std::string predicate;  // human-readable condition that was evaluated
  nlohmann::json measured;
  bool taken = false;
};

struct CaseTrace {
  std::vector<CaseRecord> records;

  void add(std::string label, std::string predicate, nlohmann::json measured,
           bool taken) {
    records.push_back(
        {std::move(label), std::move(predicate), std::move(measured), taken});
  }
  nlohmann::json to_json() const;
};

struct SolveResult {
  Certificate certificate;
  CaseTrace trace;
};

// ---------------------------------------------------------------------------
// Path machinery
// ---------------------------------------------------------------------------

// Result of a long-path search.  `proven_absent` is set only when the search
// regime was exhaustive (small hosts or degenerate targets); otherwise a
// missing path just means the heuristic gave up.
struct LongPathResult {
  std::optional<std::vector<VertexId>> path;  // length+1 vertices when found
  bool proven_absent = false;
};

// Finds a path with exactly `length` edges: greedy DFS with rotations, plus
// an exhaustive fallback on small hosts. Deterministic (internally seeded).
LongPathResult find_long_path(const Graph& g, int length);

// Internally disjoint u->u2 paths of length exactly `ell` whose interior
// vertices all lie in z (minus endpoints already in u or u2).  Shorter paths
// are harvested first by repeated shortest-path extraction, then merged
// pairwise into longer ones via edges between their second vertices.  May
// return fewer paths than exist; never errors (empty result is valid).
std::vector<std::vector<VertexId>> connect_through(const Graph& g,
                                                   const VertexSet& z,
                                                   const VertexSet& u,
                                                   const VertexSet& u2,
                                                   int ell);

// ---------------------------------------------------------------------------
// Cut probe
// ---------------------------------------------------------------------------

// A sparse separation: removing v0 (|v0| <= max_v0) disconnects v1 from v2,
// with |v1|, |v2| >= m.  Found by BFS-layer probes from sampled start
// vertices; a miss means "no cut found", not "no cut exists".
struct SparseCut {
  VertexSet v0, v1, v2;
};

std::optional<SparseCut> find_sparse_cut(const Graph& g, int m, int max_v0,
                                         std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Embedding stages
// ---------------------------------------------------------------------------

// Spanning-tree embedding for dense hosts: |G| = |T| + m - 1, every m-set of
// vertices dominating all but few.  Embeds a small prefix subtree at random,
// then extends greedily with a swap repair step drawing on reserved repair
// positions spread along the prefix.  Retries internally with derived seeds;
// throws Error(stage_failure) with the stall position when all attempts fail.
Embedding embed_dense(const Graph& g, const Tree& t, int m, double mu,
                      std::uint64_t seed, int max_retries = 5);

// Two-class dispatch: prune the host to an expander, then route to the dense
// stage (small residual m) or the vortex stage (large residual m); on failure
// the other branch is attempted before giving up.  `branch_out`, when given,
// receives "dense" or "vortex" for the branch that succeeded.  `vortex_out`
// taps the partition the vortex branch worked with (ids lifted back to `g`),
// filled whether or not that branch succeeded.
Embedding embed_k2(const Graph& g, const Tree& t, int m, double mu,
                   const ParamSet& params, std::uint64_t seed,
                   std::string* branch_out = nullptr,
                   VortexPartitionResult* vortex_out = nullptr);

// Trees with many leaves: embed T minus an independent leaf set extendably
// into a pruned expander, then complete the leaves by a Hall matching into
// the untouched remainder.  A matching failure throws Error(stage_failure)
// whose detail carries the Hall violator (a set expanding too little).
Embedding embed_many_leaves(const Graph& g, const Tree& t, double mu,
                            std::uint64_t seed = 0);

// Trees with few leaves on hosts with no sparse cut: tripartition the host
// (reservoir / backbone / path pool), embed long bare runs of T through the
// reservoir via connect_through-composed paths, and everything else
// extendably in the backbone.  Throws Error(stage_failure) with a ledger dump
// on a stall.
Embedding embed_sparse_connected(const Graph& g, const Tree& t, int k, int m,
                                 const ParamSet& params, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Disconnected case and the solver
// ---------------------------------------------------------------------------

// Recursion hook used by split_disconnected: solve the induced sub-instance
// (red graph of the sub-colouring, same tree) at the given target parameters
// and return its certificate in the sub-graph's vertex ids.
using InductionHandle = std::function<Certificate(
    const Graph& sub_red, int k, int s, int m)>;

// Handles a host whose red graph splits along a small cut: prune both sides,
// embed T red across the cut when a well-joined bridge vertex exists, else
// recurse on both sides and assemble a blue witness by class surgery.
// Throws Error(stage_failure) when no qualifying partition is found.
Certificate split_disconnected(const Graph& g, const Tree& t, int k, int s,
                               int m, const ParamSet& params,
                               const InductionHandle& handle,
                               std::uint64_t seed = 0);

// Full solver for an instance (colouring, T, k, s, m): exact search below a
// small-size cap, joined/expansion probes, then the stage dispatch
// (many leaves / sparse cut / well-connected), recursing on k.  Every
// returned certificate has been re-verified; failures to decide throw
// Error(budget_exhausted) (inconclusive), never a mislabelled verdict.
// `vortex_out`, when given, taps the vortex partition if the top-level k = 2
// embedding dispatch exercised that branch (ids in the input colouring).
SolveResult solve(const TwoColouring& colouring, const Tree& t, int k, int s,
                  int m, const ParamSet& params, std::uint64_t seed,
                  VortexPartitionResult* vortex_out = nullptr);

}  // namespace rgl
