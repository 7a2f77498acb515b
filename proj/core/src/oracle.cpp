#include "rgl/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rgl/error.hpp"
#include "rgl/graph_checks.hpp"
#include "rgl/graph_extremal.hpp"
#include "rgl/rng.hpp"

namespace rgl {

namespace {

using nlohmann::json;

// Prefix-connected traversal order plus, per position, the tree vertex the
// new vertex attaches to (-1 for the first position).
struct TreeOrder {
  std::vector<VertexId> order;
  std::vector<VertexId> attach;
};

TreeOrder tree_order(const Tree& t) {
  TreeOrder to;
  to.order = traversal_order(t, 0);
  const int n = t.size();
  std::vector<int> pos(n, -1);
  for (int i = 0; i < n; ++i) pos[to.order[i]] = i;
  to.attach.assign(n, -1);
  for (int i = 1; i < n; ++i) {
    for (VertexId nb : t.adj(to.order[i])) {
      if (pos[nb] < i) {
        to.attach[i] = nb;
        break;
      }
    }
  }
  return to;
}

// Exact backtracking search for a copy of t in g (edges of t must land on
// edges of g).  Fills *out when found.
bool tree_in_graph(const Graph& g, const Tree& t, Embedding* out) {
  const int n = t.size();
  const int host_n = g.size();
  if (n > host_n || n == 0) return false;
  const TreeOrder to = tree_order(t);
  std::vector<VertexId> phi(n, -1);
  VertexSet used(host_n);

  std::function<bool(int)> place = [&](int i) -> bool {
    if (i == n) return true;
    const VertexId tv = to.order[i];
    if (i == 0) {
      for (VertexId v = 0; v < host_n; ++v) {
        phi[tv] = v;
        used.insert(v);
        if (place(i + 1)) return true;
        used.erase(v);
        phi[tv] = -1;
      }
      return false;
    }
    const VertexId w = phi[to.attach[i]];
    for (VertexId v : g.adj(w)) {
      if (used.contains(v)) continue;
      phi[tv] = v;
      used.insert(v);
      if (place(i + 1)) return true;
      used.erase(v);
      phi[tv] = -1;
    }
    return false;
  };

  if (!place(0)) return false;
  if (out) {
    *out = Embedding(n);
    out->to_host = phi;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Avoider search over edge colourings of K_N
// ---------------------------------------------------------------------------

// Dense adjacency for the partial red/blue graphs during the colouring
// search; undo is O(1) and both containment checks read the matrix directly.
struct ColourState {
  int n = 0;
  std::vector<char> red, blue;  // n*n matrices
  int red_edges = 0, blue_edges = 0;

  explicit ColourState(int n_)
      : n(n_), red(n_ * n_, 0), blue(n_ * n_, 0) {}

  void set(VertexId u, VertexId v, bool is_red) {
    auto& m = is_red ? red : blue;
    m[u * n + v] = m[v * n + u] = 1;
    (is_red ? red_edges : blue_edges) += 1;
  }
  void unset(VertexId u, VertexId v, bool is_red) {
    auto& m = is_red ? red : blue;
    m[u * n + v] = m[v * n + u] = 0;
    (is_red ? red_edges : blue_edges) -= 1;
  }
};

bool tree_in_matrix(const std::vector<char>& adjm, int host_n, const Tree& t,
                    const TreeOrder& to) {
  const int n = t.size();
  if (n > host_n) return false;
  std::vector<VertexId> phi(n, -1);
  std::vector<char> used(host_n, 0);

  std::function<bool(int)> place = [&](int i) -> bool {
    if (i == n) return true;
    const VertexId tv = to.order[i];
    if (i == 0) {
      for (VertexId v = 0; v < host_n; ++v) {
        phi[tv] = v;
        used[v] = 1;
        if (place(i + 1)) return true;
        used[v] = 0;
      }
      return false;
    }
    const VertexId w = phi[to.attach[i]];
    for (VertexId v = 0; v < host_n; ++v) {
      if (used[v] || !adjm[w * host_n + v]) continue;
      phi[tv] = v;
      used[v] = 1;
      if (place(i + 1)) return true;
      used[v] = 0;
    }
    return false;
  };
  return place(0);
}

// Classes chosen member-ascending; equal-size classes ordered by their least
// members.  Every new member must be adjacent (in `adjm`) to all members of
// all previous classes; members of the same class are unconstrained.
bool witness_in_matrix(const std::vector<char>& adjm, int host_n, int k1,
                       int s, int m) {
  const int total = k1 * s + m;
  if (total > host_n) return false;
  std::vector<VertexId> chosen;  // flattened, class boundaries implicit
  chosen.reserve(total);
  std::vector<char> used(host_n, 0);

  // class c in [0, k1): size s; class k1: size m.
  std::function<bool(int, int, VertexId)> place = [&](int c, int within,
                                                      VertexId min_v) -> bool {
    const int target = (c < k1) ? s : m;
    if (within == target) {
      if (c == k1) return true;
      VertexId next_min = 0;
      if (c + 1 < k1 && s > 0) {
        // preserve class ordering among the equal-size classes
        next_min = chosen[c * s] + 1;
      }
      return place(c + 1, 0, c + 1 < k1 ? next_min : 0);
    }
    if (c == k1 && target == 0) return true;
    for (VertexId v = min_v; v < host_n; ++v) {
      if (used[v]) continue;
      bool ok = true;
      const int prior = c * s;  // members of earlier classes
      for (int i = 0; i < prior && ok; ++i) {
        ok = adjm[chosen[i] * host_n + v] != 0;
      }
      if (!ok) continue;
      used[v] = 1;
      chosen.push_back(v);
      if (place(c, within + 1, v + 1)) return true;
      chosen.pop_back();
      used[v] = 0;
    }
    return false;
  };

  if (k1 == 0) return place(k1, 0, 0);
  return place(0, 0, 0);
}

struct AvoiderOutcome {
  bool found = false;
  std::vector<char> red;  // full red matrix of the avoider
  std::uint64_t nodes = 0;
};

// DFS over the remaining edges; returns true leaving the full avoiding
// assignment in `st`.  Prunes a branch as soon as the just-assigned colour
// side completes a red copy of t or a blue witness.
bool avoider_dfs(ColourState& st,
                 const std::vector<std::pair<VertexId, VertexId>>& edges,
                 std::size_t ei, const Tree& t, const TreeOrder& to,
                 const WitnessShape& shape, int cross_needed,
                 std::uint64_t& nodes) {
  if (ei == edges.size()) return true;
  const auto [u, v] = edges[ei];
  for (int colour = 0; colour < 2; ++colour) {
    const bool is_red = colour == 0;
    st.set(u, v, is_red);
    ++nodes;
    bool pruned = false;
    if (is_red) {
      pruned = st.red_edges >= t.size() - 1 &&
               tree_in_matrix(st.red, st.n, t, to);
    } else {
      pruned = st.blue_edges >= cross_needed &&
               witness_in_matrix(st.blue, st.n, shape.k - 1, shape.s, shape.m);
    }
    if (!pruned && avoider_dfs(st, edges, ei + 1, t, to, shape, cross_needed,
                               nodes)) {
      return true;
    }
    st.unset(u, v, is_red);
  }
  return false;
}

int cross_edge_count(const WitnessShape& shape) {
  const int k1 = shape.k - 1;
  return k1 * (k1 - 1) / 2 * shape.s * shape.s + k1 * shape.s * shape.m;
}

// Searches the 2-colourings of K_N for one containing neither a red copy of
// t nor a blue witness.  The all-blue colouring is checked separately; the
// backtracking then fixes edge (0,1) red (every colouring with at least one
// red edge is isomorphic to one of these).
AvoiderOutcome find_avoider(const Tree& t, const WitnessShape& shape, int N,
                            int jobs) {
  AvoiderOutcome out;
  const TreeOrder to = tree_order(t);
  const int cross_needed = cross_edge_count(shape);

  // All-blue: no red edges at all.
  {
    ColourState st(N);
    for (VertexId u = 0; u < N; ++u)
      for (VertexId v = u + 1; v < N; ++v) st.set(u, v, false);
    const bool red_hit = t.size() == 1 && N >= 1;
    const bool blue_hit =
        witness_in_matrix(st.blue, N, shape.k - 1, shape.s, shape.m);
    ++out.nodes;
    if (!red_hit && !blue_hit) {
      out.found = true;
      out.red.assign(N * N, 0);
      return out;
    }
  }
  if (N < 2) return out;

  std::vector<std::pair<VertexId, VertexId>> edges;
  for (VertexId u = 0; u < N; ++u)
    for (VertexId v = u + 1; v < N; ++v) edges.emplace_back(u, v);

  // Shared tail search for one fixed prefix assignment (patterns index the
  // colours of edges [1, 1+prefix_len)); returns outcome for that subtree.
  auto run_pattern = [&](std::uint32_t pattern, int prefix_len,
                         AvoiderOutcome& res) {
    ColourState st(N);
    st.set(edges[0].first, edges[0].second, true);
    ++res.nodes;
    if (st.red_edges >= t.size() - 1 && tree_in_matrix(st.red, N, t, to)) {
      return;  // the forced red edge already completes T (t is an edge)
    }
    bool dead = false;
    for (int i = 0; i < prefix_len && !dead; ++i) {
      const bool is_red = ((pattern >> i) & 1u) == 0u;
      const auto [u, v] = edges[1 + i];
      st.set(u, v, is_red);
      ++res.nodes;
      if (is_red) {
        dead = st.red_edges >= t.size() - 1 && tree_in_matrix(st.red, N, t, to);
      } else {
        dead = st.blue_edges >= cross_needed &&
               witness_in_matrix(st.blue, N, shape.k - 1, shape.s, shape.m);
      }
    }
    if (!dead && avoider_dfs(st, edges, 1 + prefix_len, t, to, shape,
                             cross_needed, res.nodes)) {
      res.found = true;
      res.red = st.red;
    }
  };

  const int free_edges = static_cast<int>(edges.size()) - 1;
  int prefix_len = 0;
  if (jobs > 1 && free_edges > 2) {
    prefix_len = 2;
    while ((1 << prefix_len) < 4 * jobs && prefix_len < free_edges - 1 &&
           prefix_len < 10) {
      ++prefix_len;
    }
  }

  if (prefix_len == 0) {
    AvoiderOutcome res;
    run_pattern(0, 0, res);
    out.nodes += res.nodes;
    out.found = res.found;
    out.red = std::move(res.red);
    return out;
  }

  const std::uint32_t patterns = 1u << prefix_len;
  std::vector<AvoiderOutcome> results(patterns);
  std::vector<std::thread> workers;
  std::atomic<std::uint32_t> best_found{patterns};  // lowest avoider pattern
  const int nworkers = std::min<int>(jobs, static_cast<int>(patterns));
  for (int w = 0; w < nworkers; ++w) {
    workers.emplace_back([&, w]() {
      for (std::uint32_t p = static_cast<std::uint32_t>(w); p < patterns;
           p += static_cast<std::uint32_t>(nworkers)) {
        if (p > best_found.load()) continue;  // a lower pattern already hit
        run_pattern(p, prefix_len, results[p]);
        if (results[p].found) {
          std::uint32_t cur = best_found.load();
          while (p < cur && !best_found.compare_exchange_weak(cur, p)) {
          }
          break;  // patterns are scanned ascending within a worker
        }
      }
    });
  }
  for (auto& th : workers) th.join();
  std::uint32_t winner = patterns;
  for (std::uint32_t p = 0; p < patterns; ++p) {
    out.nodes += results[p].nodes;
    if (winner == patterns && results[p].found) winner = p;
  }
  if (winner < patterns) {
    out.found = true;
    out.red = std::move(results[winner].red);
  }
  return out;
}

Graph matrix_to_graph(const std::vector<char>& adjm, int n) {
  std::vector<std::pair<VertexId, VertexId>> es;
  for (VertexId u = 0; u < n; ++u)
    for (VertexId v = u + 1; v < n; ++v)
      if (adjm[u * n + v]) es.emplace_back(u, v);
  return Graph::from_edges(n, es);
}

}  // namespace

// ---------------------------------------------------------------------------

TreeContainment contains_red_tree(const TwoColouring& colouring,
                                  const Tree& t) {
  TreeContainment res;
  Embedding e(t.size());
  res.found = tree_in_graph(colouring.red(), t, &e);
  if (res.found) res.embedding = std::move(e);
  return res;
}

WitnessContainment contains_blue_witness(const TwoColouring& colouring,
                                         int k_minus_1, int s, int m,
                                         std::uint64_t node_budget) {
  if (k_minus_1 < 0 || s < 1 || m < 0) {
    throw Error(ErrorKind::parameter,
                "contains_blue_witness needs k_minus_1 >= 0, s >= 1, m >= 0");
  }
  WitnessContainment res;
  const MultipartiteSearch ms = find_multipartite_in_complement(
      colouring.red(), k_minus_1, s, m,
      static_cast<long long>(node_budget));
  res.nodes = static_cast<std::uint64_t>(ms.nodes);
  switch (ms.status) {
    case SearchStatus::found:
      res.found = true;
      res.witness = *ms.witness;
      break;
    case SearchStatus::absent:
      res.proven_absent = true;
      break;
    case SearchStatus::budget_exhausted:
      break;
  }
  return res;
}

RamseyResult brute_ramsey(const Tree& t, const WitnessShape& shape, int n_cap,
                          int jobs) {
  if (shape.k < 1 || shape.s < 1 || shape.m < 0) {
    throw Error(ErrorKind::parameter,
                "witness shape needs k >= 1, s >= 1, m >= 0");
  }
  if (n_cap < 1) throw Error(ErrorKind::parameter, "n_cap must be >= 1");
  if (jobs < 1) throw Error(ErrorKind::parameter, "jobs must be >= 1");

  RamseyResult res;
  for (int N = 1; N <= n_cap; ++N) {
    AvoiderOutcome a = find_avoider(t, shape, N, jobs);
    res.nodes += a.nodes;
    if (a.found) {
      res.lower = N + 1;
      res.witness = TwoColouring(matrix_to_graph(a.red, N));
    } else {
      res.value = N;
      return res;
    }
  }
  return res;
}

WitnessShape witness_shape_of(const Graph& h) {
  const Graph hc = h.complement();
  const int n = hc.size();
  if (n == 0) throw Error(ErrorKind::invalid_input, "empty target graph");

  // Connected components of the complement; each must be a clique.
  std::vector<int> comp(n, -1);
  std::vector<int> sizes;
  for (VertexId v = 0; v < n; ++v) {
    if (comp[v] >= 0) continue;
    const int c = static_cast<int>(sizes.size());
    std::vector<VertexId> stack{v};
    std::vector<VertexId> members;
    comp[v] = c;
    while (!stack.empty()) {
      const VertexId u = stack.back();
      stack.pop_back();
      members.push_back(u);
      for (VertexId w : hc.adj(u)) {
        if (comp[w] < 0) {
          comp[w] = c;
          stack.push_back(w);
        }
      }
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        if (!hc.has_edge(members[i], members[j])) {
          throw Error(ErrorKind::invalid_input,
                      "target graph is not complete multipartite");
        }
      }
    }
    sizes.push_back(static_cast<int>(members.size()));
  }

  std::sort(sizes.begin(), sizes.end());
  const int k = static_cast<int>(sizes.size());
  WitnessShape shape;
  shape.k = k;
  if (k == 1) {
    shape.s = 1;
    shape.m = sizes[0];
    return shape;
  }
  auto all_equal = [](auto first, auto last) {
    return std::adjacent_find(first, last, std::not_equal_to<>()) == last;
  };
  if (all_equal(sizes.begin() + 1, sizes.end())) {
    shape.m = sizes.front();  // smallest class plays the m-class
    shape.s = sizes[1];
    return shape;
  }
  if (all_equal(sizes.begin(), sizes.end() - 1)) {
    shape.m = sizes.back();
    shape.s = sizes[0];
    return shape;
  }
  throw Error(ErrorKind::invalid_input,
              "target multipartite classes must be equal-sized up to one "
              "exceptional class");
}

RamseyResult brute_ramsey(const Tree& t, const Graph& h, int n_cap,
                          int jobs) {
  return brute_ramsey(t, witness_shape_of(h), n_cap, jobs);
}

// ---------------------------------------------------------------------------

std::string verify_certificate(const TwoColouring& colouring,
                               const Certificate& cert) {
  if (cert.kind == Certificate::Kind::red_tree) {
    if (!cert.tree.has_value()) return "red-tree certificate carries no tree";
    const std::string fault =
        embedding_fault(*cert.tree, colouring.red(), cert.embedding, true);
    if (!fault.empty()) return "red embedding: " + fault;
  } else {
    int k = -1, s = -1, m = -1;
    if (cert.parameters.contains("k")) k = cert.parameters["k"].get<int>();
    if (cert.parameters.contains("s")) s = cert.parameters["s"].get<int>();
    if (cert.parameters.contains("m")) m = cert.parameters["m"].get<int>();
    if (k < 1 || s < 1 || m < 0) {
      return "blue-witness certificate lacks a usable (k, s, m) record";
    }
    const auto& classes = cert.witness.classes;
    if (classes.size() != static_cast<std::size_t>(k)) {
      return "blue witness has " + std::to_string(classes.size()) +
             " classes, expected " + std::to_string(k);
    }
    for (int i = 0; i < k - 1; ++i) {
      if (classes[i].count() != s) {
        return "blue witness class " + std::to_string(i) + " has " +
               std::to_string(classes[i].count()) + " vertices, expected " +
               std::to_string(s);
      }
    }
    if (classes.back().count() != m) {
      return "blue witness final class has " +
             std::to_string(classes.back().count()) + " vertices, expected " +
             std::to_string(m);
    }
    for (const auto& cls : classes) {
      if (cls.universe() != colouring.size()) {
        return "blue witness universe size mismatch";
      }
    }
    const std::string fault = cert.witness.fault(colouring.red());
    if (!fault.empty()) return "blue witness: " + fault;
  }
  if (cert.tree.has_value() && cert.input_digest != 0 &&
      cert.parameters.contains("k") && cert.parameters.contains("s") &&
      cert.parameters.contains("m")) {
    const std::uint64_t expect = instance_digest(
        colouring, *cert.tree, cert.parameters["k"].get<int>(),
        cert.parameters["s"].get<int>(), cert.parameters["m"].get<int>());
    if (expect != cert.input_digest) {
      return "input digest mismatch (certificate was produced for a "
             "different instance)";
    }
  }
  return "";
}

// ---------------------------------------------------------------------------

JoinedGraphResult random_joined_graph(int n, int m, double mu,
                                      std::uint64_t seed, int max_attempts) {
  if (n < 1 || m < 1 || mu <= 0.0 || mu > 1.0) {
    throw Error(ErrorKind::parameter,
                "random_joined_graph needs n >= 1, m >= 1, mu in (0, 1]");
  }
  if (max_attempts < 1) {
    throw Error(ErrorKind::parameter, "max_attempts must be >= 1");
  }
  const int m2 = std::max(1, static_cast<int>(std::ceil(mu * n)));
  // Density with the expected miss count at half the allowance: a vertex is
  // missed by a fixed m-set with probability (1-p)^m, so p solves
  // n (1-p)^m = mu n / 2.
  // Density targets a mean uncovered count of mu*n/4 per m-set, leaving the
  // maximum over all (or sampled) m-sets below the mu*n joinedness bound.
  const double p = std::clamp(1.0 - std::pow(mu / 4.0, 1.0 / m), 0.30, 0.98);

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Rng rng(derive_seed(seed, 0x10a1edULL, static_cast<std::uint64_t>(attempt)));
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::vector<std::pair<VertexId, VertexId>> es;
    for (VertexId u = 0; u < n; ++u) {
      for (VertexId v = u + 1; v < n; ++v) {
        if (coin(rng) < p) es.emplace_back(u, v);
      }
    }
    Graph g = Graph::from_edges(n, es);
    const JoinedResult jr = is_joined(g, m, m2);
    if (jr.joined) {
      JoinedGraphResult out{std::move(g), jr.mode, attempt + 1, 0.0};
      const double pairs = static_cast<double>(n) * (n - 1) / 2.0;
      out.density = pairs > 0 ? static_cast<double>(out.graph.edge_count()) /
                                    pairs
                              : 0.0;
      return out;
    }
  }
  throw Error(ErrorKind::retries_exhausted,
              "no verifiably joined graph after " +
                  std::to_string(max_attempts) + " attempts",
              json{{"n", n}, {"m", m}, {"mu", mu}, {"p", p}}.dump());
}

}  // namespace rgl
