#pragma once

#include <utility>
#include <vector>

#include "rgl/error.hpp"
#include "rgl/vertex_set.hpp"

namespace rgl {

// Simple undirected graph on vertices 0..n-1. Adjacency is kept twice: a
// sorted neighbour list per vertex (for ordered scans) and a bitset row (for
// O(1) adjacency tests and word-parallel neighbourhood unions). Subgraph
// search dominates runtime, so both views pay for themselves.
//
// Graphs are immutable by convention once construction (add_edge calls) is
// done, and are then safe to share across threads.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int n);

  static Graph complete(int n);
  static Graph from_edges(int n, const std::vector<std::pair<VertexId, VertexId>>& edges);

  int size() const { return n_; }
  int edge_count() const { return edge_count_; }

  void add_edge(VertexId u, VertexId v);
  bool has_edge(VertexId u, VertexId v) const;

  int degree(VertexId v) const { return static_cast<int>(adj(v).size()); }
  const std::vector<VertexId>& adj(VertexId v) const;
  const VertexSet& row(VertexId v) const;

  std::vector<std::pair<VertexId, VertexId>> edges() const;

  Graph complement() const;

  // Induced subgraph on `keep`, reindexed to 0..|keep|-1 in ascending id
  // order. Optional maps translate between the two id spaces:
  // old_of_new[new_id] = old_id, new_of_old[old_id] = new_id (-1 if dropped).
  Graph induced(const VertexSet& keep, std::vector<VertexId>* old_of_new = nullptr,
                std::vector<VertexId>* new_of_old = nullptr) const;

  bool operator==(const Graph& o) const { return n_ == o.n_ && adj_ == o.adj_; }

 private:
  void check_vertex(VertexId v) const;

  int n_ = 0;
  int edge_count_ = 0;
  std::vector<std::vector<VertexId>> adj_;
  std::vector<VertexSet> rows_;
};

// External neighbourhood N(S): all neighbours of S-members, minus S itself.
VertexSet external_neighbourhood(const Graph& g, const VertexSet& s);

// N'(S): the plain union of the members' neighbourhoods. Unlike N(S) it may
// contain members of S (exactly those with a neighbour inside S).
VertexSet neighbourhood_union(const Graph& g, const VertexSet& s);

// N(S, a) = N(S) ∩ a: external neighbourhood restricted to a target set.
VertexSet neighbourhood_in(const Graph& g, const VertexSet& s, const VertexSet& a);

// Red/blue edge colouring of the complete graph K_n. Stored as the red
// graph; blue is its complement within K_n.
class TwoColouring {
 public:
  TwoColouring() = default;
  explicit TwoColouring(Graph red) : red_(std::move(red)) {}

  static TwoColouring all_red(int n) { return TwoColouring(Graph::complete(n)); }
  static TwoColouring all_blue(int n) { return TwoColouring(Graph(n)); }

  int size() const { return red_.size(); }
  const Graph& red() const { return red_; }
  Graph blue() const { return red_.complement(); }

  bool is_red(VertexId u, VertexId v) const { return red_.has_edge(u, v); }

  bool operator==(const TwoColouring& o) const { return red_ == o.red_; }

 private:
  Graph red_;
};

// Disjoint vertex classes that are pairwise non-adjacent in the host graph
// (equivalently: the complete multipartite graph over the classes lives in
// the host's complement). By convention the final class is the K^c_m part.
struct MultipartiteWitness {
  std::vector<VertexSet> classes;

  std::vector<int> class_sizes() const {
    std::vector<int> out;
    out.reserve(classes.size());
    for (const auto& c : classes) out.push_back(c.count());
    return out;
  }

  // Empty string iff every pair of classes is disjoint and spans no host
  // edge; otherwise a description of the first fault found.
  std::string fault(const Graph& host) const;
  bool valid(const Graph& host) const { return fault(host).empty(); }
};

}  // namespace rgl
