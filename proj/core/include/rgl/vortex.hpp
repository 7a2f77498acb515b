#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rgl/embedding.hpp"
#include "rgl/graph.hpp"
#include "rgl/params.hpp"
#include "rgl/tree.hpp"
#include "rgl/vertex_set.hpp"

namespace rgl {

// Nested chain of host subsets U_0 ⊇ U_1 ⊇ … ⊇ U_l with prescribed sizes.
// Invariants (vortex_fault checks them):
//   B1: U_0 = V(G) and |U_i| = sizes[i];
//   B2: every m-set U ⊆ U_{i−1} has |N(U, U_i)| ≥ (1−lambda)|U_i|.
// B2 is verified exactly when the subset space fits the budget's
// enumeration cap, by seeded sampling otherwise; `mode` records which.
struct Vortex {
    std::vector<VertexSet> levels;
    std::vector<int> sizes;
    int m = 1;
    double lambda = 0.1;
    VerifyMode mode = VerifyMode::exact;
};

// "" when v satisfies B1/B2 on g at its stored parameters, else a
// description of the first violation found.  mode_out (optional) reports
// whether the verdict used exhaustive enumeration or sampling.
std::string vortex_fault(const Graph& g, const Vortex& v,
                         const VerifyBudget& budget = {},
                         VerifyMode* mode_out = nullptr);

// Disjoint parts V_0 ∪ V_1 ∪ … ∪ V_l = V(G) with target sizes n_i.
// Invariants (vortex_partition_fault checks them):
//   C1: |V_i| = (1 ± lambda) n_i;
//   C2: G[V_{i−1} ∪ V_i] is (lambda·n_{i−1})-joined;
//   C3: I(V_{i−1}) is (d, lambda·n_{i−1})-extendable in G[V_{i−1} ∪ V_i].
// A joinedness or extendability parameter that floors to zero makes the
// corresponding clause vacuous (degenerate at very small lambda·n).
struct VortexPartition {
    std::vector<VertexSet> parts;
    std::vector<int> sizes;
    double lambda = 0.1;
    int d = 3;
    VerifyMode mode = VerifyMode::exact;
};

std::string vortex_partition_fault(const Graph& g, const VortexPartition& p,
                                   const VerifyBudget& budget = {},
                                   VerifyMode* mode_out = nullptr);

// Result of cleaning a host into a vortex partition: the partition lives on
// g_prime, the host minus the discarded waste set (fewer than m/4 vertices).
struct VortexPartitionResult {
    Graph g_prime;
    VortexPartition partition;
    std::vector<VertexId> original_of_new;  // g_prime id -> input id
    VertexSet discarded;                    // in input ids
};

// Per-run observability for embed_via_vortex.
struct VortexEmbedStats {
    int stages = 0;
    int spare_before_final = -1;  // |host slice| − |final piece|
    bool final_stage_covered = true;  // final stage also covered its X-set
    int partition_attempts = 0;
};

struct VortexOptions {
    // Run the property validators (B2 / C1–C3 and the op-specific posts)
    // after sampling; failures trigger a resample with a derived seed.
    bool verify = true;
    // Treat size hypotheses that only hold asymptotically as hard errors.
    // Off, they are noted and the affected cleaning step is skipped.
    bool enforce_size = true;
    int max_retries = 5;
    VerifyBudget budget;
    // Auxiliary neighbour-density floor demanded of a sampled vortex:
    // every floor(m/4)-set needs ≥ gamma1·D·m/200 neighbours in U_1 \ U_2
    // (a floor below one vertex is clamped to one).
    double gamma1 = 0.0;
    int D = 0;
    // Optional taps: the partition actually used by embed_via_vortex, and
    // its stage accounting.
    VortexPartitionResult* partition_out = nullptr;
    VortexEmbedStats* stats_out = nullptr;
};

// Samples the nested chain by the layered construction (auxiliary V_0 ⊇ V_1
// and guard sets W, W′ placed per-vertex, then constrained nested uniform
// draws) when the size tuple leaves room for it, and by plain nested
// uniform draws otherwise.  Each candidate is verified — B2 at twice the
// requested lambda, G[U_{l−1}] (floor(lambda·m))-joined, and the
// neighbour-density floor — and resampled on failure with a seed derived
// from (seed, attempt), up to max_retries extra attempts.  The returned
// vortex stores lambda doubled, i.e. the slack it was verified at.
// Throws ErrorKind::retries_exhausted carrying the last violated property.
Vortex sample_vortex(const Graph& g, const std::vector<int>& n_tuple, int m,
                     double lambda, std::uint64_t seed, int max_retries = 5,
                     const VortexOptions& options = {});

// Cleans g into a vortex partition with part sizes n_tuple (which must sum
// to |G|): samples a vortex on the suffix-sum tuple, takes consecutive
// differences as provisional parts, then walks the levels from the inside
// out removing a waste set W_j (vertices whose ≤ m-subsets fail to expand
// at rate params.d into the level below, confined to the two adjacent
// parts) and finally a waste set W_0 of vertices with fewer than
// 10·d·|U| neighbours in V_1 over ≤ floor(m/4)-subsets.  W_0 is discarded
// from the host outright; the other waste sets are folded into V_0.
// The partition is reported at lambda doubled and verified (C1–C3 plus
// (floor(lambda·m))-joinedness of G[V_{l−1} ∪ V_l]) before being accepted;
// failures resample with derived seeds up to options.max_retries.
VortexPartitionResult vortex_partition(const Graph& g,
                                       const std::vector<int>& n_tuple,
                                       const ParamSet& params,
                                       std::uint64_t seed,
                                       const VortexOptions& options = {});

// Embeds a spanning-minus-spares tree (|T| = |G| − m + 1) through a vortex
// partition: decomposes T into a descending chain of subtrees sharing link
// leaves, derives the host part sizes from the subtree sizes, cleans the
// host with vortex_partition, then embeds stage by stage — each stage
// covers everything its predecessors left unused in the previous part and
// plants the next link vertex in the next part; the final stage embeds the
// innermost subtree with the leftover spare vertices as slack.  Stage
// invariants (anchors land in their parts, parts are covered in order,
// link images agree, copies meet only at links) are asserted after every
// stage; a violation raises ErrorKind::stage_failure naming the stage and
// property.  The whole pipeline retries with derived seeds on stage
// failure, up to options.max_retries.
Embedding embed_via_vortex(const Graph& g, const Tree& tree,
                           const ParamSet& params, std::uint64_t seed,
                           const VortexOptions& options = {});

}  // namespace rgl
