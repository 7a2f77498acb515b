#include "rgl/graph.hpp"

#include <algorithm>
#include <string>

namespace rgl {

Graph::Graph(int n) : n_(n) {
  if (n < 0) throw Error(ErrorKind::invalid_input, "negative vertex count");
  adj_.resize(n);
  rows_.assign(n, VertexSet(n));
}

Graph Graph::complete(int n) {
  Graph g(n);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) g.add_edge(u, v);
  return g;
}

Graph Graph::from_edges(int n, const std::vector<std::pair<VertexId, VertexId>>& edges) {
  Graph g(n);
  for (auto [u, v] : edges) g.add_edge(u, v);
  return g;
}

void Graph::check_vertex(VertexId v) const {
  if (v < 0 || v >= n_)
    throw Error(ErrorKind::invalid_input,
                "vertex id " + std::to_string(v) + " outside graph of order " +
                    std::to_string(n_));
}

void Graph::add_edge(VertexId u, VertexId v) {
  check_vertex(u);
  check_vertex(v);
  if (u == v) throw Error(ErrorKind::invalid_input, "self-loop rejected");
  if (rows_[u].contains(v)) return;
  auto insert_sorted = [](std::vector<VertexId>& vec, VertexId x) {
    vec.insert(std::lower_bound(vec.begin(), vec.end(), x), x);
  };
  insert_sorted(adj_[u], v);
  insert_sorted(adj_[v], u);
  rows_[u].insert(v);
  rows_[v].insert(u);
  ++edge_count_;
}

bool Graph::has_edge(VertexId u, VertexId v) const {
  check_vertex(u);
  check_vertex(v);
  return rows_[u].contains(v);
}

const std::vector<VertexId>& Graph::adj(VertexId v) const {
  check_vertex(v);
  return adj_[v];
}

const VertexSet& Graph::row(VertexId v) const {
  check_vertex(v);
  return rows_[v];
}

std::vector<std::pair<VertexId, VertexId>> Graph::edges() const {
  std::vector<std::pair<VertexId, VertexId>> out;
  out.reserve(edge_count_);
  for (int u = 0; u < n_; ++u)
    for (VertexId v : adj_[u])
      if (u < v) out.emplace_back(u, v);
  return out;
}

Graph Graph::complement() const {
  Graph g(n_);
  for (int u = 0; u < n_; ++u)
    for (int v = u + 1; v < n_; ++v)
      if (!rows_[u].contains(v)) g.add_edge(u, v);
  return g;
}

Graph Graph::induced(const VertexSet& keep, std::vector<VertexId>* old_of_new,
                     std::vector<VertexId>* new_of_old) const {
  if (keep.universe() != n_)
    throw Error(ErrorKind::invalid_input, "induced: set universe does not match graph");
  std::vector<VertexId> fwd(n_, -1);
  std::vector<VertexId> back;
  back.reserve(keep.count());
  keep.for_each([&](VertexId v) {
    fwd[v] = static_cast<VertexId>(back.size());
    back.push_back(v);
  });
  Graph g(static_cast<int>(back.size()));
  for (VertexId v : back)
    for (VertexId w : adj_[v])
      if (v < w && fwd[w] >= 0) g.add_edge(fwd[v], fwd[w]);
  if (old_of_new) *old_of_new = std::move(back);
  if (new_of_old) *new_of_old = std::move(fwd);
  return g;
}

VertexSet neighbourhood_union(const Graph& g, const VertexSet& s) {
  if (s.universe() != g.size())
    throw Error(ErrorKind::invalid_input, "set universe does not match graph");
  VertexSet out(g.size());
  s.for_each([&](VertexId v) { out |= g.row(v); });
  return out;
}

VertexSet external_neighbourhood(const Graph& g, const VertexSet& s) {
  VertexSet out = neighbourhood_union(g, s);
  out -= s;
  return out;
}

VertexSet neighbourhood_in(const Graph& g, const VertexSet& s, const VertexSet& a) {
  VertexSet out = external_neighbourhood(g, s);
  out &= a;
  return out;
}

std::string MultipartiteWitness::fault(const Graph& host) const {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i].universe() != host.size()) return "class universe mismatch";
    if (classes[i].empty()) return "empty class " + std::to_string(i);
  }
  for (std::size_t i = 0; i < classes.size(); ++i) {
    for (std::size_t j = i + 1; j < classes.size(); ++j) {
      if (classes[i].intersects(classes[j]))
        return "classes " + std::to_string(i) + " and " + std::to_string(j) +
               " are not disjoint";
      std::string bad;
      classes[i].for_each([&](VertexId u) {
        if (!bad.empty()) return;
        if (host.row(u).intersects(classes[j])) {
          VertexSet hit = host.row(u);
          hit &= classes[j];
          bad = "host edge (" + std::to_string(u) + "," +
                std::to_string(hit.first()) + ") crosses classes " +
                std::to_string(i) + "/" + std::to_string(j);
        }
      });
      if (!bad.empty()) return bad;
    }
  }
  return {};
}

}  // namespace rgl
