#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rgl/embedding.hpp"
#include "rgl/graph.hpp"
#include "rgl/graph_checks.hpp"
#include "rgl/params.hpp"
#include "rgl/tree.hpp"

namespace rgl {

// Result of testing the extendability condition: for every U with
// 1 <= |U| <= 2m,
//     |N'(U) \ V(S)|  >=  (d-1)|U| - sum_{u in U cap V(S)} (d_S(u) - 1),
// plus the degree cap max_degree(S) <= d.  Singletons are always checked
// exactly (constant time via the outside-degree table); larger sizes run
// exactly under the enumeration budget and are sampled above it.
struct ExtendabilityCheck {
    bool ok = false;
    VerifyMode mode = VerifyMode::exact;
    std::optional<VertexSet> witness;      // U violating the inequality
    std::optional<VertexId> over_degree;   // S-vertex with degree > d
};

// Mutable "subgraph S inside a fixed host" state with the bookkeeping the
// extendability calculus needs: S's vertex set, S's edges, the degree
// table d_S, and for every host vertex the count of its neighbours outside
// V(S).  Mutations keep all tables incremental.
//
// Behaviour switches (fixed at construction):
//  - verify:       re-check extendability after every mutation; mutations
//                  that the supporting lemmas guarantee safe raise a
//                  contract error if the re-check fails, and add_leaf uses
//                  the full check per candidate.  Without it, add_leaf
//                  screens candidates by the affected singletons only.
//  - enforce_size: treat the leaf-addition size hypothesis
//                  |G| >= |S| + (2d+2)m + m' + 1 as a hard error.  When
//                  off, a violation is recorded in audits() and the run
//                  continues (small hosts routinely violate the
//                  asymptotic hypotheses; the caller reports the audit).
//  - shuffle_seed: when set, candidate leaves are tried in a seeded random
//                  order instead of ascending id.
struct ExtendOptions {
    bool verify = true;
    bool enforce_size = true;
    std::optional<std::uint64_t> shuffle_seed;
    VerifyBudget budget;
};

class ExtendableEmbedding {
  public:
    ExtendableEmbedding(const Graph& host, int d, int m, int m_prime,
                        ExtendOptions options = {});

    const Graph& host() const { return *host_; }
    int d() const { return d_; }
    int m() const { return m_; }
    int m_prime() const { return m_prime_; }
    const ExtendOptions& options() const { return options_; }
    // Re-seeds the candidate shuffle for retry passes.
    void set_shuffle_seed(std::optional<std::uint64_t> seed) {
        options_.shuffle_seed = seed;
    }

    int size() const { return vertices_.count(); }  // |S|
    const VertexSet& vertices() const { return vertices_; }
    bool contains(VertexId v) const { return vertices_.contains(v); }
    int s_degree(VertexId v) const { return s_degree_[v]; }
    int max_s_degree() const { return max_s_degree_; }
    const std::vector<VertexId>& s_adj(VertexId v) const { return s_adj_[v]; }
    // Host neighbours of v outside V(S); valid for every host vertex.
    int outside_degree(VertexId v) const { return outside_degree_[v]; }

    // Inserts v into V(S) with no S-edges.
    void add_isolated(VertexId v);

    // Attaches a new leaf y in N(s) \ V(S) (restricted to `allowed` when
    // given) so that S + sy stays extendable, and returns y.  Candidates
    // are screened per the `verify` switch; if none passes, a
    // no-valid-leaf error is raised carrying the audit context.
    VertexId add_leaf(VertexId s);
    VertexId add_leaf(VertexId s, const VertexSet& allowed);

    // Detaches leaf y (which must have S-degree 1, attached at s) and
    // drops it from V(S).  Exactly reverses the matching add_leaf.
    void remove_leaf(VertexId s, VertexId y);

    // Adds the host edge st inside S; both endpoints need S-degree <= d-1.
    void add_edge(VertexId s, VertexId t);

    ExtendabilityCheck check() const;

    // Size-hypothesis violations recorded while enforce_size is off.
    const std::vector<std::string>& audits() const { return audits_; }
    long long audit_overflow() const { return audit_overflow_; }

    bool operator==(const ExtendableEmbedding& o) const {
        return host_ == o.host_ && d_ == o.d_ && m_ == o.m_ &&
               vertices_ == o.vertices_ && s_adj_ == o.s_adj_;
    }

  private:
    friend Embedding embed_tree_extendably(const Graph& g,
                                           ExtendableEmbedding& r,
                                           const Tree& tree, VertexId t,
                                           VertexId v);

    void insert_vertex(VertexId v);
    void erase_vertex(VertexId v);
    bool singleton_ok(VertexId u) const;
    bool candidate_ok(VertexId s, VertexId y);
    void record_audit(const std::string& message);

    const Graph* host_;
    int d_;
    int m_;
    int m_prime_;
    ExtendOptions options_;

    VertexSet vertices_;
    std::vector<std::vector<VertexId>> s_adj_;
    std::vector<int> s_degree_;
    std::vector<int> outside_degree_;
    int max_s_degree_ = 0;
    std::vector<std::string> audits_;
    long long audit_overflow_ = 0;
};

inline ExtendabilityCheck check_extendable(const ExtendableEmbedding& e) {
    return e.check();
}

// Sufficient condition (external neighbourhoods only): if every U with
// 1 <= |U| <= 2m has |N(U) cap (V(G) \ s_vertices)| >= d|U|, then any
// subgraph on s_vertices with maximum degree <= d is (d,m)-extendable.
// `expander == false` is inconclusive, not a refutation.
ExpanderResult check_extendable_external(const Graph& g,
                                         const VertexSet& s_vertices, int d,
                                         int m, const VerifyBudget& budget = {});

// Embeds the whole tree: t lands on v, every other tree vertex is attached
// with add_leaf following a prefix-connected traversal, growing `r` in
// place (so on return r = R cup image(T) and is still extendable in
// verified mode).  Size hypothesis |R| + |T| <= |G| - (2d+2)m - m' follows
// r's enforce_size switch.  A failing leaf step raises no-valid-leaf with
// the tree vertex recorded in the error detail.
Embedding embed_tree_extendably(const Graph& g, ExtendableEmbedding& r,
                                const Tree& tree, VertexId t, VertexId v);

}  // namespace rgl
