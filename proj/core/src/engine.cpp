#include "rgl/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "rgl/error.hpp"
#include "rgl/extendable.hpp"
#include "rgl/graph_checks.hpp"
#include "rgl/graph_extremal.hpp"
#include "rgl/oracle.hpp"
#include "rgl/rng.hpp"
#include "rgl/tree_decompose.hpp"
#include "rgl/vortex.hpp"

namespace rgl {

namespace {

using nlohmann::json;

// Below this host size the solver runs the exact dichotomy search instead of
// the staged embedders (every branch of the search is cheap to exhaust).
constexpr int kExactCap = 12;

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) {
    h ^= (x >> (8 * i)) & 0xffULL;
    h *= 1099511628211ULL;
  }
  return h;
}

json set_json(const VertexSet& s) { return json(s.to_vector()); }

// Prefix-connected order with per-position attach vertex (the unique
// neighbour already placed); order[0] = start.  When `first_phase` is
// non-null the order exhausts that set (which must contain start and be
// connected) before leaving it.  Neighbour-of-previous is preferred, which
// walks bare paths consecutively.
struct PrefixOrder {
  std::vector<VertexId> order;
  std::vector<VertexId> attach;  // by position; -1 at position 0
  std::vector<int> pos;          // tree vertex -> position
};

PrefixOrder prefix_order(const Tree& t, VertexId start,
                         const VertexSet* first_phase) {
  const int n = t.size();
  PrefixOrder po;
  po.order.reserve(n);
  po.attach.assign(n, -1);
  po.pos.assign(n, -1);
  std::vector<char> placed(n, 0);
  po.order.push_back(start);
  po.pos[start] = 0;
  placed[start] = 1;

  const int phases = first_phase ? 2 : 1;
  for (int phase = 0; phase < phases; ++phase) {
    auto in_phase = [&](VertexId v) {
      return phase == phases - 1 || first_phase->contains(v);
    };
    while (true) {
      const VertexId prev = po.order.back();
      VertexId next = -1, from = -1;
      for (VertexId nb : t.adj(prev)) {
        if (!placed[nb] && in_phase(nb)) {
          next = nb;
          from = prev;
          break;
        }
      }
      if (next < 0) {
        for (VertexId u : po.order) {
          for (VertexId nb : t.adj(u)) {
            if (!placed[nb] && in_phase(nb)) {
              next = nb;
              from = u;
              break;
            }
          }
          if (next >= 0) break;
        }
      }
      if (next < 0) break;
      po.attach[static_cast<int>(po.order.size())] = from;
      po.pos[next] = static_cast<int>(po.order.size());
      po.order.push_back(next);
      placed[next] = 1;
    }
  }
  if (static_cast<int>(po.order.size()) != n) {
    throw Error(ErrorKind::contract, "prefix order failed to span the tree");
  }
  return po;
}

VertexId pick_uniform(const VertexSet& cands, Rng& rng) {
  const int c = cands.count();
  if (c == 0) return -1;
  std::uniform_int_distribution<int> d(0, c - 1);
  int want = d(rng);
  VertexId out = -1;
  cands.for_each([&](VertexId v) {
    if (want-- == 0) out = v;
  });
  return out;
}

// connect_through with an extraction cap: stops harvesting once roughly
// `max_paths` full-length paths are constructible (each needs about
// 2^(ell-2) length-2 pieces in the worst escalation cascade).
std::vector<std::vector<VertexId>> connect_through_capped(
    const Graph& g, const VertexSet& z, const VertexSet& u,
    const VertexSet& u2, int ell, long long max_paths) {
  if (ell < 2) {
    throw Error(ErrorKind::parameter, "path length ell must be >= 2");
  }
  if (u.intersects(u2)) {
    throw Error(ErrorKind::invalid_input,
                "connect_through endpoint sets overlap");
  }
  const int n = g.size();
  VertexSet zfree = z;
  zfree -= u;
  zfree -= u2;

  std::vector<std::vector<std::vector<VertexId>>> bucket(ell + 1);
  long long extraction_budget =
      max_paths >= (1LL << 40)
          ? std::numeric_limits<long long>::max()
          : max_paths * (1LL << std::max(0, ell - 2)) * 2 + 8;

  std::vector<int> dist(n);
  std::vector<VertexId> parent(n);
  while (extraction_budget > 0 &&
         static_cast<long long>(bucket[ell].size()) < max_paths) {
    std::fill(dist.begin(), dist.end(), -1);
    std::deque<VertexId> queue;
    u.for_each([&](VertexId v) {
      if (v < n) {
        dist[v] = 0;
        parent[v] = -1;
        queue.push_back(v);
      }
    });
    VertexId hit = -1, hit_from = -1;
    int hit_len = -1;
    while (!queue.empty() && hit < 0) {
      const VertexId x = queue.front();
      queue.pop_front();
      for (VertexId nb : g.adj(x)) {
        if (u2.contains(nb)) {
          if (dist[x] >= 1) {  // interiors required: length >= 2
            hit = nb;
            hit_from = x;
            hit_len = dist[x] + 1;
            break;
          }
          continue;
        }
        if (zfree.contains(nb) && dist[nb] < 0) {
          dist[nb] = dist[x] + 1;
          parent[nb] = x;
          queue.push_back(nb);
        }
      }
    }
    if (hit < 0 || hit_len > ell) break;
    std::vector<VertexId> path;
    path.push_back(hit);
    for (VertexId cur = hit_from; cur >= 0; cur = parent[cur]) {
      path.push_back(cur);
    }
    std::reverse(path.begin(), path.end());
    for (std::size_t i = 1; i + 1 < path.size(); ++i) zfree.erase(path[i]);
    bucket[hit_len].push_back(std::move(path));
    --extraction_budget;
  }

  // Escalate short paths pairwise: two length-j paths whose second vertices
  // are adjacent merge into one length-(j+1) path.
  for (int j = 2; j < ell; ++j) {
    auto& cur = bucket[j];
    bool merged = true;
    while (merged && cur.size() >= 2) {
      merged = false;
      for (std::size_t a = 0; a < cur.size() && !merged; ++a) {
        for (std::size_t b = a + 1; b < cur.size() && !merged; ++b) {
          if (!g.has_edge(cur[a][1], cur[b][1])) continue;
          std::vector<VertexId> mp;
          mp.reserve(j + 2);
          mp.push_back(cur[a][0]);
          mp.push_back(cur[a][1]);
          for (std::size_t i = 1; i < cur[b].size(); ++i) {
            mp.push_back(cur[b][i]);
          }
          bucket[j + 1].push_back(std::move(mp));
          cur.erase(cur.begin() + static_cast<long>(b));
          cur.erase(cur.begin() + static_cast<long>(a));
          merged = true;
        }
      }
    }
  }
  if (static_cast<long long>(bucket[ell].size()) > max_paths) {
    bucket[ell].resize(static_cast<std::size_t>(max_paths));
  }
  return std::move(bucket[ell]);
}

}  // namespace

// ---------------------------------------------------------------------------

std::uint64_t instance_digest(const TwoColouring& colouring, const Tree& tree,
                              int k, int s, int m) {
  std::uint64_t h = 1469598103934665603ULL;
  h = fnv1a(h, static_cast<std::uint64_t>(colouring.size()));
  for (const auto& [u, v] : colouring.red().edges()) {
    h = fnv1a(h, static_cast<std::uint64_t>(u));
    h = fnv1a(h, static_cast<std::uint64_t>(v));
  }
  h = fnv1a(h, static_cast<std::uint64_t>(tree.size()));
  for (const auto& [c, p] : tree.edges()) {
    h = fnv1a(h, static_cast<std::uint64_t>(c));
    h = fnv1a(h, static_cast<std::uint64_t>(p));
  }
  h = fnv1a(h, static_cast<std::uint64_t>(k));
  h = fnv1a(h, static_cast<std::uint64_t>(s));
  h = fnv1a(h, static_cast<std::uint64_t>(m));
  return h == 0 ? 1 : h;
}

json CaseTrace::to_json() const {
  json arr = json::array();
  for (const auto& r : records) {
    arr.push_back({{"label", r.label},
                   {"predicate", r.predicate},
                   {"measured", r.measured},
                   {"taken", r.taken}});
  }
  return arr;
}

// ---------------------------------------------------------------------------
// find_long_path
// ---------------------------------------------------------------------------

namespace {

bool exhaustive_path_dfs(const Graph& g, std::vector<VertexId>& path,
                         std::vector<char>& used, int length) {
  if (static_cast<int>(path.size()) == length + 1) return true;
  for (VertexId v : g.adj(path.back())) {
    if (used[v]) continue;
    used[v] = 1;
    path.push_back(v);
    if (exhaustive_path_dfs(g, path, used, length)) return true;
    path.pop_back();
    used[v] = 0;
  }
  return false;
}

}  // namespace

LongPathResult find_long_path(const Graph& g, int length) {
  if (length < 0) {
    throw Error(ErrorKind::parameter, "path length must be >= 0");
  }
  LongPathResult res;
  const int n = g.size();
  if (length + 1 > n) {
    res.proven_absent = true;
    return res;
  }
  if (length == 0) {
    res.path = std::vector<VertexId>{0};
    return res;
  }
  if (g.edge_count() == 0) {
    res.proven_absent = true;
    return res;
  }

  constexpr int kExhaustiveCap = 12;
  if (n <= kExhaustiveCap) {
    std::vector<char> used(n, 0);
    for (VertexId start = 0; start < n; ++start) {
      std::vector<VertexId> path{start};
      used[start] = 1;
      if (exhaustive_path_dfs(g, path, used, length)) {
        res.path = std::move(path);
        return res;
      }
      used[start] = 0;
    }
    res.proven_absent = true;
    return res;
  }

  // Rotation heuristic: extend greedily; when stuck, pivot the path end
  // along an edge back into the path and retry.  Internally seeded so that
  // the result is a deterministic function of (g, length).
  Rng rng(derive_seed(0x70a7b5ULL, static_cast<std::uint64_t>(n),
                      static_cast<std::uint64_t>(length)));
  std::vector<int> pos_in(n);
  for (int attempt = 0; attempt < 12; ++attempt) {
    std::uniform_int_distribution<int> dv(0, n - 1);
    const VertexId start = dv(rng);
    std::vector<VertexId> path{start};
    std::fill(pos_in.begin(), pos_in.end(), -1);
    pos_in[start] = 0;
    long long stall = 0;
    const long long stall_cap = 4LL * n + 128;
    std::vector<VertexId> buf;
    while (static_cast<int>(path.size()) < length + 1 && stall < stall_cap) {
      const VertexId tail = path.back();
      buf.clear();
      for (VertexId nb : g.adj(tail)) {
        if (pos_in[nb] < 0) buf.push_back(nb);
      }
      if (!buf.empty()) {
        std::uniform_int_distribution<std::size_t> di(0, buf.size() - 1);
        const VertexId v = buf[di(rng)];
        pos_in[v] = static_cast<int>(path.size());
        path.push_back(v);
        continue;
      }
      // rotation: edge (tail, path[i]) with i <= |path|-3 reverses the
      // suffix after i, exposing path[i+1] as the new end
      buf.clear();
      const int len = static_cast<int>(path.size());
      for (VertexId nb : g.adj(tail)) {
        if (pos_in[nb] >= 0 && pos_in[nb] <= len - 3) buf.push_back(nb);
      }
      if (buf.empty()) break;
      std::uniform_int_distribution<std::size_t> di(0, buf.size() - 1);
      const int i = pos_in[buf[di(rng)]];
      std::reverse(path.begin() + i + 1, path.end());
      for (int q = i + 1; q < len; ++q) pos_in[path[q]] = q;
      ++stall;
    }
    if (static_cast<int>(path.size()) == length + 1) {
      res.path = std::move(path);
      return res;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// connect_through / find_sparse_cut
// ---------------------------------------------------------------------------

std::vector<std::vector<VertexId>> connect_through(const Graph& g,
                                                   const VertexSet& z,
                                                   const VertexSet& u,
                                                   const VertexSet& u2,
                                                   int ell) {
  return connect_through_capped(g, z, u, u2, ell, 1LL << 40);
}

std::optional<SparseCut> find_sparse_cut(const Graph& g, int m, int max_v0,
                                         std::uint64_t seed) {
  const int n = g.size();
  if (n == 0 || m < 1 || max_v0 < 0) return std::nullopt;

  std::vector<VertexId> starts;
  if (n <= 192) {
    starts.resize(n);
    std::iota(starts.begin(), starts.end(), 0);
  } else {
    std::vector<char> chosen(n, 0);
    Rng rng(derive_seed(seed, 0x5ca77ULL, 0));
    for (VertexId v : sample_without_replacement(n, 64, rng)) {
      if (!chosen[v]) {
        chosen[v] = 1;
        starts.push_back(v);
      }
    }
    std::vector<VertexId> by_deg(n);
    std::iota(by_deg.begin(), by_deg.end(), 0);
    std::stable_sort(by_deg.begin(), by_deg.end(),
                     [&](VertexId a, VertexId b) {
                       return g.degree(a) < g.degree(b);
                     });
    for (int i = 0; i < 32 && i < n; ++i) {
      if (!chosen[by_deg[i]]) {
        chosen[by_deg[i]] = 1;
        starts.push_back(by_deg[i]);
      }
    }
  }

  std::vector<int> dist(n);
  for (VertexId s0 : starts) {
    std::fill(dist.begin(), dist.end(), -1);
    VertexSet inside(n);
    std::vector<VertexId> layer{s0};
    dist[s0] = 0;
    while (true) {
      const int layer_sz = static_cast<int>(layer.size());
      const int inside_sz = inside.count();
      const int rest = n - inside_sz - layer_sz;
      if (layer_sz <= max_v0 && inside_sz >= m && rest >= m) {
        SparseCut cut{VertexSet(n), inside, VertexSet::full(n)};
        for (VertexId v : layer) cut.v0.insert(v);
        cut.v2 -= cut.v0;
        cut.v2 -= cut.v1;
        return cut;
      }
      if (layer.empty()) break;
      std::vector<VertexId> next;
      for (VertexId x : layer) inside.insert(x);
      for (VertexId x : layer) {
        for (VertexId nb : g.adj(x)) {
          if (dist[nb] < 0) {
            dist[nb] = dist[x] + 1;
            next.push_back(nb);
          }
        }
      }
      layer = std::move(next);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// embed_dense
// ---------------------------------------------------------------------------

Embedding embed_dense(const Graph& g, const Tree& t, int m, double mu,
                      std::uint64_t seed, int max_retries) {
  const int host_n = g.size();
  const int n = t.size();
  if (m < 1) throw Error(ErrorKind::parameter, "m must be >= 1");
  if (max_retries < 0) {
    throw Error(ErrorKind::parameter, "max_retries must be >= 0");
  }
  if (host_n != n + m - 1) {
    throw Error(ErrorKind::invalid_input,
                "dense stage needs |G| == |T| + m - 1",
                json{{"host", host_n}, {"tree", n}, {"m", m}}.dump());
  }
  (void)mu;  // the joinedness scale is the caller's precondition

  // High-degree core: joinedness forces all but < m vertices above n/(2m).
  const int min_deg =
      static_cast<int>(std::ceil(static_cast<double>(n) / (2.0 * m)));
  VertexSet core(host_n);
  for (VertexId v = 0; v < host_n; ++v) {
    if (g.degree(v) >= min_deg) core.insert(v);
  }
  if (host_n - core.count() >= m) {
    VertexSet low = VertexSet::full(host_n);
    low -= core;
    throw Error(ErrorKind::invalid_input,
                "m vertices fall below degree n/(2m); host is not joined at "
                "the required scale",
                json{{"low_degree", set_json(low.take(m))},
                     {"threshold", min_deg}}
                    .dump());
  }

  // Prefix subtree embedded at random, remainder greedily with swap repair.
  VertexSet t0set(n);
  VertexId start = t.root();
  if (n >= 16) {
    const TreeSplit ts = split_tree(t, 0.25, t.root());
    t0set = ts.t2;
    start = ts.v;
  } else {
    t0set = VertexSet::full(n);
  }
  const PrefixOrder po = prefix_order(t, start, &t0set);
  const int t0sz = t0set.count();

  // Repair positions: windows order[p-3..p] forming a tree path whose later
  // neighbours follow immediately, pairwise tree distance >= 3, capped.
  std::vector<int> jpos;
  const int jcap = std::max(1, static_cast<int>(std::ceil(0.04 * n)));
  for (int p = 3; p < t0sz && static_cast<int>(jpos.size()) < jcap; ++p) {
    bool ok = t.has_edge(po.order[p - 3], po.order[p - 2]) &&
              t.has_edge(po.order[p - 2], po.order[p - 1]) &&
              t.has_edge(po.order[p - 1], po.order[p]);
    if (!ok) continue;
    const auto& nbs = t.adj(po.order[p]);
    const int r = static_cast<int>(nbs.size()) - 1;
    if (p + r >= t0sz) continue;  // swap needs every neighbour embedded
    for (VertexId nb : nbs) {
      if (nb == po.order[p - 1]) continue;
      const int q = po.pos[nb];
      if (q <= p || q > p + r) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    for (int q : jpos) {
      if (t.distance(po.order[p], po.order[q]) < 3) {
        ok = false;
        break;
      }
    }
    if (ok) jpos.push_back(p);
  }

  json last_fail;
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    Rng rng(derive_seed(seed, 0xde2e5eULL, static_cast<std::uint64_t>(attempt)));
    std::vector<VertexId> phi(n, -1);
    VertexSet used(host_n);
    std::vector<int> repair = jpos;
    bool fail = false;

    for (int p = 0; p < n && !fail; ++p) {
      const VertexId tv = po.order[p];
      if (p == 0) {
        const VertexId v = pick_uniform(core, rng);
        phi[tv] = v;
        used.insert(v);
        continue;
      }
      const VertexId w = phi[po.attach[p]];
      VertexSet cands = g.row(w);
      cands &= core;
      cands -= used;
      const VertexId direct = pick_uniform(cands, rng);
      if (direct >= 0) {
        phi[tv] = direct;
        used.insert(direct);
        continue;
      }
      if (p < t0sz) {  // the random prefix has no repair mechanism
        last_fail = json{{"ell", p + 1}, {"frontier", w}, {"phase", "prefix"}};
        fail = true;
        break;
      }
      // Swap repair: give tv the image of a repair vertex t_j adjacent to w,
      // and move t_j to a fresh vertex adjacent to all its embedded
      // neighbours' images.
      bool swapped = false;
      for (std::size_t ji = 0; ji < repair.size() && !swapped; ++ji) {
        const int jp = repair[ji];
        const VertexId jv = po.order[jp];
        const VertexId vj = phi[jv];
        if (!g.row(w).contains(vj)) continue;
        VertexSet cu = VertexSet::full(host_n);
        cu -= used;
        for (VertexId nb : t.adj(jv)) {
          if (phi[nb] < 0) {
            throw Error(ErrorKind::contract,
                        "repair vertex has an unembedded neighbour");
          }
          cu &= g.row(phi[nb]);
          if (cu.empty()) break;
        }
        const VertexId u = pick_uniform(cu, rng);
        if (u < 0) continue;
        phi[tv] = vj;
        phi[jv] = u;
        used.insert(u);
        for (VertexId nb : t.adj(jv)) {
          if (!g.has_edge(u, phi[nb])) {
            throw Error(ErrorKind::contract,
                        "swap repair broke an embedded tree edge");
          }
        }
        if (!g.has_edge(w, phi[tv])) {
          throw Error(ErrorKind::contract,
                      "swap repair broke the frontier edge");
        }
        repair.erase(repair.begin() + static_cast<long>(ji));
        swapped = true;
      }
      if (!swapped) {
        last_fail = json{{"ell", p + 1},
                         {"frontier", w},
                         {"repair_left", repair.size()},
                         {"phase", "extension"}};
        fail = true;
      }
    }

    if (!fail) {
      Embedding e(n);
      e.to_host = std::move(phi);
      const std::string fault = embedding_fault(t, g, e, true);
      if (!fault.empty()) {
        throw Error(ErrorKind::contract,
                    "dense embedding produced an invalid map: " + fault);
      }
      return e;
    }
  }
  last_fail["attempts"] = max_retries + 1;
  throw Error(ErrorKind::stage_failure,
              "dense embedding stalled: no unused candidate and no repair "
              "swap applied",
              last_fail.dump());
}

// ---------------------------------------------------------------------------
// embed_k2
// ---------------------------------------------------------------------------

Embedding embed_k2(const Graph& g, const Tree& t, int m, double mu,
                   const ParamSet& params, std::uint64_t seed,
                   std::string* branch_out, VortexPartitionResult* vortex_out) {
  const int host_n = g.size();
  const int n = t.size();
  if (m < 1) throw Error(ErrorKind::parameter, "m must be >= 1");
  const int m_eff = host_n - n + 1;
  if (m_eff < 1) {
    throw Error(ErrorKind::invalid_input,
                "host smaller than the tree it should span",
                json{{"host", host_n}, {"tree", n}}.dump());
  }
  // |G| = |T| + m - 1 is the canonical size; other sizes are reported and
  // handled at the effective surplus.
  const int m_use = m_eff;

  const int dmax = std::max(1, t.max_degree());
  const int n0 =
      std::max(1, static_cast<int>(std::ceil(mu * n / 2.0)));

  // Prune at the largest feasible expansion rate up to params.D.
  double d_exp = params.D;
  {
    const double cap =
        (static_cast<double>(host_n - n0) / std::max(1, m_use) - 2.0) / 2.0;
    d_exp = std::min(d_exp, cap);
  }
  VertexSet removed(host_n);
  int m_prime = m_use;
  VerifyMode prune_mode = VerifyMode::exact;
  if (d_exp >= 1.0) {
    const PruneResult pr = prune_to_expander(g, m_use, n0, d_exp);
    removed = pr.removed;
    m_prime = pr.m_prime;
    prune_mode = pr.mode;
  }
  (void)prune_mode;
  VertexSet keep = VertexSet::full(host_n);
  keep -= removed;
  std::vector<VertexId> old_of_new;
  const Graph gp = g.induced(keep, &old_of_new);

  // Vortex needs headroom over the per-stage degree bound; below the
  // threshold the dense stage is the primary branch.
  const int d_vortex = std::max(3, 2 * dmax);
  const int m_bar = d_vortex + 1;

  auto lift = [&](Embedding e) {
    for (auto& v : e.to_host) v = v >= 0 ? old_of_new[v] : v;
    const std::string fault = embedding_fault(t, g, e, true);
    if (!fault.empty()) {
      throw Error(ErrorKind::contract,
                  "k=2 dispatch produced an invalid map: " + fault);
    }
    return e;
  };
  auto try_dense = [&]() {
    return embed_dense(gp, t, gp.size() - n + 1, mu,
                       derive_seed(seed, 0xd32eULL, 1));
  };
  auto try_vortex = [&]() {
    ParamSet vp = params;
    vp.d = d_vortex;
    vp.m = m_prime;
    VortexOptions vo;
    vo.verify = false;
    vo.enforce_size = false;
    vo.partition_out = vortex_out;
    // The tap is reported in g's ids even though the stage ran on the pruned
    // host, and is lifted on failure too (it exists for inspection).
    auto lift_tap = [&]() {
      if (!vortex_out || vortex_out->original_of_new.empty()) return;
      for (auto& v : vortex_out->original_of_new) v = old_of_new[v];
      if (vortex_out->discarded.universe() == gp.size()) {
        VertexSet disc(host_n);
        vortex_out->discarded.for_each(
            [&](VertexId v) { disc.insert(old_of_new[v]); });
        vortex_out->discarded = std::move(disc);
      }
    };
    try {
      Embedding e =
          embed_via_vortex(gp, t, vp, derive_seed(seed, 0x40e7eULL, 1), vo);
      lift_tap();
      return e;
    } catch (...) {
      lift_tap();
      throw;
    }
  };

  const bool vortex_feasible = m_prime >= m_bar;
  std::string primary = vortex_feasible ? "vortex" : "dense";
  std::string first_error;
  try {
    Embedding e = primary == "vortex" ? try_vortex() : try_dense();
    if (branch_out) *branch_out = primary;
    return lift(std::move(e));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::contract) throw;
    first_error = e.what();
  }
  if (vortex_feasible) {  // fall back to the other branch
    try {
      Embedding e = try_dense();
      if (branch_out) *branch_out = "dense";
      return lift(std::move(e));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::contract) throw;
      throw Error(ErrorKind::retries_exhausted,
                  "both k=2 branches failed",
                  json{{"primary", primary},
                       {"primary_error", first_error},
                       {"fallback_error", e.what()},
                       {"m_prime", m_prime},
                       {"threshold", m_bar}}
                      .dump());
    }
  }
  throw Error(ErrorKind::retries_exhausted, "k=2 dense branch failed",
              json{{"primary", primary},
                   {"primary_error", first_error},
                   {"m_prime", m_prime},
                   {"threshold", m_bar}}
                  .dump());
}

// ---------------------------------------------------------------------------
// embed_many_leaves
// ---------------------------------------------------------------------------

Embedding embed_many_leaves(const Graph& g, const Tree& t, double mu,
                            std::uint64_t seed) {
  const int host_n = g.size();
  const int n = t.size();
  if (mu <= 0.0 || mu > 1.0) {
    throw Error(ErrorKind::parameter, "mu must lie in (0, 1]");
  }
  if (host_n < n) {
    throw Error(ErrorKind::invalid_input, "host smaller than the tree");
  }
  const int dmax = std::max(1, t.max_degree());
  const int d = 2 * dmax;
  const int m = std::max(1, static_cast<int>(std::floor(mu * n)));
  const int n0 = host_n - n + 1;
  const int need_leaves =
      static_cast<int>(std::ceil(10.0 * dmax * dmax * mu * n));
  if (t.leaf_count() < need_leaves) {
    throw Error(ErrorKind::invalid_input,
                "tree has too few leaves for the leaf-completion stage",
                json{{"leaves", t.leaf_count()}, {"needed", need_leaves}}
                    .dump());
  }
  if (host_n < n0 + (4 * d + 2) * m) {
    throw Error(ErrorKind::size_hypothesis,
                "host too small to prune at rate 2d",
                json{{"host", host_n}, {"needed", n0 + (4 * d + 2) * m}}
                    .dump());
  }

  const int l_target =
      std::max(1, static_cast<int>(std::ceil(10.0 * dmax * mu * n)));
  const VertexSet leaf_set = independent_leaf_set(t, l_target);
  if (leaf_set.empty()) {
    throw Error(ErrorKind::invalid_input, "no independent leaves available");
  }
  {
    VertexSet parents(n);
    bool dup = false;
    leaf_set.for_each([&](VertexId lf) {
      const VertexId pa = t.adj(lf)[0];
      if (parents.contains(pa)) dup = true;
      parents.insert(pa);
    });
    if (dup) {
      throw Error(ErrorKind::contract,
                  "independent leaf set shares a parent");
    }
  }

  const PruneResult pr = prune_to_expander(g, m, n0, 2.0 * d);
  VertexSet keep = VertexSet::full(host_n);
  keep -= pr.removed;
  std::vector<VertexId> old_g;
  const Graph gp = g.induced(keep, &old_g);

  VertexSet keep_t = VertexSet::full(n);
  keep_t -= leaf_set;
  std::vector<VertexId> old_t;
  const Tree tp = t.induced(keep_t, keep_t.first(), &old_t);
  std::vector<int> new_t(n, -1);
  for (std::size_t i = 0; i < old_t.size(); ++i) new_t[old_t[i]] = i;

  ExtendOptions opt;
  opt.verify = false;
  opt.enforce_size = false;
  opt.shuffle_seed = derive_seed(seed, 0x1eaf55ULL, 1);
  const int m_state = std::max(1, pr.m_prime);
  ExtendableEmbedding st(gp, d, m_state, m_state, opt);
  const VertexId v_start = 0;
  st.add_isolated(v_start);
  const Embedding ep = embed_tree_extendably(gp, st, tp, tp.root(), v_start);

  // Leaf completion: match the parents' images into untouched hosts.
  VertexSet a_set(host_n);
  VertexSet b_set = VertexSet::full(host_n);
  for (int i = 0; i < tp.size(); ++i) b_set.erase(old_g[ep.to_host[i]]);
  leaf_set.for_each([&](VertexId lf) {
    const VertexId pa = t.adj(lf)[0];
    a_set.insert(old_g[ep.to_host[new_t[pa]]]);
  });
  const HallResult hall = hall_matching(a_set, b_set, g);
  if (!hall.saturated) {
    throw Error(ErrorKind::stage_failure, "leaf completion matching failed",
                json{{"violator", set_json(hall.violator)},
                     {"parents", a_set.count()},
                     {"pool", b_set.count()}}
                    .dump());
  }

  Embedding out(n);
  for (int i = 0; i < tp.size(); ++i) {
    out.to_host[old_t[i]] = old_g[ep.to_host[i]];
  }
  std::vector<VertexId> match_of(host_n, -1);
  for (const auto& [a, b] : hall.matching) match_of[a] = b;
  leaf_set.for_each([&](VertexId lf) {
    const VertexId pa = t.adj(lf)[0];
    out.to_host[lf] = match_of[out.to_host[pa]];
  });
  const std::string fault = embedding_fault(t, g, out, true);
  if (!fault.empty()) {
    throw Error(ErrorKind::contract,
                "leaf completion produced an invalid map: " + fault);
  }
  return out;
}

// ---------------------------------------------------------------------------
// embed_sparse_connected
// ---------------------------------------------------------------------------

Embedding embed_sparse_connected(const Graph& g, const Tree& t, int k, int m,
                                 const ParamSet& params, std::uint64_t seed) {
  (void)k;
  const int host_n = g.size();
  const int n = t.size();
  if (m < 1) throw Error(ErrorKind::parameter, "m must be >= 1");
  const int L = params.L;
  const int ell = params.ell;
  if (L < 2 || ell < 2 || L + 1 - 2 * ell < 1) {
    throw Error(ErrorKind::parameter,
                "window length L must exceed twice the connector length ell",
                json{{"L", L}, {"ell", ell}}.dump());
  }
  if (n < 2) {
    if (host_n < 1) {
      throw Error(ErrorKind::invalid_input, "empty host");
    }
    Embedding e(n);
    if (n == 1) e.to_host[0] = 0;
    return e;
  }
  if (host_n < n) {
    throw Error(ErrorKind::invalid_input, "host smaller than the tree");
  }
  const int dmax = std::max(1, t.max_degree());
  const int d = 4 * dmax;
  const int q_len = L + 1 - 2 * ell;  // reservoir piece edge count
  const int x_target = static_cast<int>(std::ceil(n / 20.0)) +
                       static_cast<int>(std::ceil(static_cast<double>(n) /
                                                  (L + 1))) +
                       m;

  // --- tripartition with verified reservoir properties ---
  VertexSet zset(host_n), v0(host_n), v1(host_n);
  bool part_ok = false;
  int attempts_used = 0;
  json part_report;
  for (int attempt = 0; attempt < 6 && !part_ok; ++attempt) {
    attempts_used = attempt + 1;
    Rng rng(derive_seed(seed, 0x3a2e77ULL, static_cast<std::uint64_t>(attempt)));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    zset = VertexSet(host_n);
    v0 = VertexSet(host_n);
    v1 = VertexSet(host_n);
    for (VertexId v = 0; v < host_n; ++v) {
      const double r = u01(rng);
      if (r < 0.3) {
        zset.insert(v);
      } else if (r < 0.45) {
        v0.insert(v);
      } else {
        v1.insert(v);
      }
    }
    part_report = json{{"z", zset.count()}, {"v0", v0.count()},
                       {"v1", v1.count()}};
    const int windows =
        static_cast<int>(std::ceil(static_cast<double>(n) / (L + 1)));
    if (zset.count() < 2 * (ell - 1) * windows + 4 * ell) continue;
    if (v1.count() <
        (q_len + 2) * windows + std::max(2 * L * std::max(m, 2), 64)) {
      continue;
    }
    if (v0.count() < x_target + (6 * d + 2) * m + 8) continue;
    bool good = true;
    // backbone absorption: sampled m-sets need n/10 neighbours in v0
    for (int trial = 0; trial < 12 && good; ++trial) {
      const auto us = sample_without_replacement(host_n, m, rng);
      VertexSet u_set = VertexSet::from(host_n, us);
      VertexSet nb = external_neighbourhood(g, u_set);
      nb &= v0;
      good = 10 * nb.count() >= n;
      if (!good) part_report["absorption"] = nb.count();
    }
    if (!good) continue;
    // reservoir connectivity: sampled endpoint pairs need connector paths
    const int path_target =
        std::max(1, static_cast<int>(params.delta * n / 4.0));
    for (int trial = 0; trial < 3 && good; ++trial) {
      const auto pick = sample_without_replacement(host_n, 2 * m, rng);
      VertexSet u1s(host_n), u2s(host_n);
      for (int i = 0; i < m; ++i) u1s.insert(pick[i]);
      for (int i = m; i < 2 * m; ++i) u2s.insert(pick[i]);
      const auto paths =
          connect_through_capped(g, zset, u1s, u2s, ell, path_target);
      good = static_cast<int>(paths.size()) >= path_target;
      if (!good) part_report["connectors"] = paths.size();
    }
    part_ok = good;
  }
  if (!part_ok) {
    throw Error(ErrorKind::retries_exhausted,
                "host tripartition never achieved the reservoir properties",
                part_report.dump());
  }

  // --- anchor set and backbone pruning ---
  const VertexSet x0 = v0.take(x_target);
  VertexSet prune_target = v0;
  prune_target -= x0;
  const int n0_rel = prune_target.count() - (6 * d + 2) * m;
  if (n0_rel < 1) {
    throw Error(ErrorKind::size_hypothesis, "backbone too small to prune",
                json{{"backbone", prune_target.count()}}.dump());
  }
  const VertexSet pruned =
      prune_relative_expansion(g, prune_target, m, n0_rel, 3.0 * d);
  VertexSet v0p = v0;
  v0p -= pruned;
  VertexSet xset = x0;
  xset -= pruned;
  if (xset.count() <
      static_cast<int>(std::ceil(static_cast<double>(n) / (L + 1))) + 1) {
    throw Error(ErrorKind::size_hypothesis,
                "anchor set depleted by backbone pruning",
                json{{"anchors", xset.count()}}.dump());
  }

  // --- extendable state over the backbone ---
  std::vector<VertexId> old0, new0;
  const Graph h = g.induced(v0p, &old0, &new0);
  ExtendOptions opt;
  opt.verify = false;
  opt.enforce_size = false;
  opt.shuffle_seed = derive_seed(seed, 0x3a2e77ULL, 99);
  ExtendableEmbedding st(h, d, m, m, opt);
  xset.for_each([&](VertexId x) { st.add_isolated(new0[x]); });

  // --- order, window geometry, structural rescue bound ---
  const std::vector<VertexId> leaves = t.leaves();
  const PrefixOrder po = [&] {
    PrefixOrder p;
    p.order = traversal_order_path_greedy(t, leaves[0]);
    p.pos.assign(n, -1);
    p.attach.assign(n, -1);
    for (int i = 0; i < n; ++i) p.pos[p.order[i]] = i;
    for (int i = 1; i < n; ++i) {
      for (VertexId nb : t.adj(p.order[i])) {
        if (p.pos[nb] < i) {
          p.attach[i] = nb;
          break;
        }
      }
    }
    return p;
  }();
  auto window_ok = [&](int p) {
    if (p + L > n - 1) return false;
    for (int q = p; q <= p + L; ++q) {
      if (t.degree(po.order[q]) != 2) return false;
    }
    for (int q = p + 1; q <= p + L; ++q) {
      if (po.attach[q] != po.order[q - 1]) return false;
    }
    return true;
  };
  // Rescue-step ledger bound n/50 is enforced only when the tree shape makes
  // it attainable with every window step landing (near-path trees).
  int structural_rescues = 0;
  for (int p = 1; p < n;) {
    if (window_ok(p)) {
      p += L + 1;
    } else {
      ++structural_rescues;
      p += 1;
    }
  }
  const bool enforce_ledger = 50 * structural_rescues < n;

  // --- main embedding loop ---
  Embedding out(n);
  VertexSet used(host_n);
  std::vector<int> i_a, i_b;
  int x_used = 1, z_used = 0;

  std::vector<std::vector<VertexId>> reservoir;
  VertexSet consumed_v1(host_n);
  auto refill = [&]() {
    VertexSet free_v1 = v1;
    free_v1 -= used;
    free_v1 -= consumed_v1;
    if (free_v1.count() < q_len + 1) return;
    std::vector<VertexId> oldv;
    const Graph sub = g.induced(free_v1, &oldv);
    int want = std::min(2 * L * std::max(m, 2), sub.size() - 1);
    want = std::max(want, q_len);
    LongPathResult lp = find_long_path(sub, want);
    if (!lp.path && want > q_len) lp = find_long_path(sub, q_len);
    if (!lp.path) return;
    const auto& path = *lp.path;
    for (std::size_t i = 0; i + q_len < path.size();
         i += static_cast<std::size_t>(q_len) + 2) {
      std::vector<VertexId> piece;
      piece.reserve(q_len + 1);
      for (int j = 0; j <= q_len; ++j) piece.push_back(oldv[path[i + j]]);
      for (VertexId pv : piece) consumed_v1.insert(pv);
      reservoir.push_back(std::move(piece));
    }
  };

  const VertexId x_first = xset.first();
  out.to_host[po.order[0]] = x_first;
  used.insert(x_first);
  i_a.push_back(0);

  int p = 1;
  while (p < n) {
    const VertexId tv = po.order[p];
    const VertexId sv = po.attach[p];
    const VertexId w = out.to_host[sv];
    bool did_a = false;

    if (window_ok(p)) {
      VertexSet xfree = xset;
      xfree -= used;
      if (!xfree.empty()) {
        if (reservoir.empty()) refill();
        for (std::size_t ri = 0; ri < reservoir.size() && !did_a; ++ri) {
          for (int dir = 0; dir < 2 && !did_a; ++dir) {
            const auto& piece = reservoir[ri];
            const VertexId xe = dir == 0 ? piece.front() : piece.back();
            const VertexId ye = dir == 0 ? piece.back() : piece.front();
            VertexSet zfree = zset;
            zfree -= used;
            const auto p1v = connect_through_capped(
                g, zfree, VertexSet::of(host_n, {w}),
                VertexSet::of(host_n, {xe}), ell, 1);
            if (p1v.empty()) continue;
            const auto& path1 = p1v[0];
            VertexSet zfree2 = zfree;
            for (std::size_t i = 1; i + 1 < path1.size(); ++i) {
              zfree2.erase(path1[i]);
            }
            const auto p2v = connect_through_capped(
                g, zfree2, VertexSet::of(host_n, {ye}), xfree, ell, 1);
            if (p2v.empty()) continue;
            const auto& path2 = p2v[0];

            std::vector<VertexId> chain;
            chain.reserve(L + 1);
            for (std::size_t i = 1; i < path1.size(); ++i) {
              chain.push_back(path1[i]);
            }
            if (dir == 0) {
              for (std::size_t i = 1; i < piece.size(); ++i) {
                chain.push_back(piece[i]);
              }
            } else {
              for (std::size_t i = piece.size() - 1; i-- > 0;) {
                chain.push_back(piece[i]);
              }
            }
            for (std::size_t i = 1; i < path2.size(); ++i) {
              chain.push_back(path2[i]);
            }
            if (static_cast<int>(chain.size()) != L + 1) {
              throw Error(ErrorKind::contract,
                          "window chain has the wrong length");
            }
            int zc = 0;
            for (int i = 0; i <= L; ++i) {
              const VertexId hv = chain[i];
              if (used.contains(hv)) {
                throw Error(ErrorKind::contract,
                            "window chain reused a host vertex");
              }
              if (i < L && v0p.contains(hv)) {
                throw Error(ErrorKind::contract,
                            "window interior entered the backbone");
              }
              if (zset.contains(hv)) ++zc;
            }
            if (zc > 2 * ell) {
              throw Error(ErrorKind::contract,
                          "window chain used too many reservoir vertices");
            }
            for (int i = 0; i <= L; ++i) {
              out.to_host[po.order[p + i]] = chain[i];
              used.insert(chain[i]);
            }
            z_used += zc;
            x_used += 1;
            i_a.push_back(p + L);
            reservoir.erase(reservoir.begin() + static_cast<long>(ri));
            did_a = true;
          }
        }
      }
    }
    if (did_a) {
      p += L + 1;
      continue;
    }

    // rescue step: one greedy extendable leaf inside the backbone
    if (!v0p.contains(w)) {
      throw Error(ErrorKind::contract,
                  "frontier image left the pruned backbone");
    }
    VertexSet allowed = v0p;
    allowed -= xset;
    allowed -= used;
    VertexSet allowed_h(h.size());
    allowed.for_each([&](VertexId gv) { allowed_h.insert(new0[gv]); });
    try {
      const VertexId yh = st.add_leaf(new0[w], allowed_h);
      const VertexId gv = old0[yh];
      out.to_host[tv] = gv;
      used.insert(gv);
      i_b.push_back(p);
      p += 1;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::no_valid_leaf) throw;
      throw Error(ErrorKind::stage_failure,
                  "sparse-connected embedding stalled",
                  json{{"position", p},
                       {"tree_vertex", tv},
                       {"window_steps", i_a.size()},
                       {"rescue_steps", i_b.size()},
                       {"x_used", x_used},
                       {"z_used", z_used},
                       {"partition_attempts", attempts_used}}
                      .dump());
    }
  }

  // ledger consistency and the success bound
  const int covered = 1 +
                      (static_cast<int>(i_a.size()) - 1) * (L + 1) +
                      static_cast<int>(i_b.size());
  if (covered != n) {
    throw Error(ErrorKind::contract,
                "embedding ledger does not account for the tree",
                json{{"covered", covered}, {"n", n}}.dump());
  }
  if (enforce_ledger && 50 * static_cast<int>(i_b.size()) >= n) {
    throw Error(ErrorKind::contract,
                "rescue-step ledger exceeded n/50 on a successful run",
                json{{"rescue_steps", i_b.size()}, {"n", n}}.dump());
  }
  const std::string fault = embedding_fault(t, g, out, true);
  if (!fault.empty()) {
    throw Error(ErrorKind::contract,
                "sparse-connected embedding produced an invalid map: " +
                    fault);
  }
  return out;
}

// ---------------------------------------------------------------------------
// split_disconnected
// ---------------------------------------------------------------------------

namespace {

// BFS component of `inside` containing `from`, never crossing `banned`.
VertexSet tree_component(const Tree& t, VertexId from, VertexId banned) {
  VertexSet comp(t.size());
  std::deque<VertexId> queue{from};
  comp.insert(from);
  while (!queue.empty()) {
    const VertexId x = queue.front();
    queue.pop_front();
    for (VertexId nb : t.adj(x)) {
      if (nb == banned || comp.contains(nb)) continue;
      comp.insert(nb);
      queue.push_back(nb);
    }
  }
  return comp;
}

VertexSet lift_set(const VertexSet& sub, const std::vector<VertexId>& old_of,
                   int universe) {
  VertexSet out(universe);
  sub.for_each([&](VertexId v) { out.insert(old_of[v]); });
  return out;
}

}  // namespace

Certificate split_disconnected(const Graph& g, const Tree& t, int k, int s,
                               int m, const ParamSet& params,
                               const InductionHandle& handle,
                               std::uint64_t seed) {
  const int host_n = g.size();
  const int n = t.size();
  if (k < 3) {
    throw Error(ErrorKind::parameter, "split handling needs k >= 3");
  }
  if (s < 1 || m < 0 || n < 2) {
    throw Error(ErrorKind::parameter,
                "split handling needs s >= 1, m >= 0, |T| >= 2");
  }
  if (!handle) {
    throw Error(ErrorKind::parameter, "induction handle required");
  }
  const int dmax = std::max(1, t.max_degree());
  const int d = 4 * dmax;
  const int mm = std::max(1, m);

  const int max_v0 =
      std::max(0, static_cast<int>(std::floor(params.lambda * n)));
  const auto cut_opt =
      find_sparse_cut(g, mm, max_v0, derive_seed(seed, 0xc177ULL, 0));
  if (!cut_opt) {
    throw Error(ErrorKind::stage_failure, "no qualifying partition found",
                json{{"lambda", params.lambda}, {"max_v0", max_v0}}.dump());
  }
  const SparseCut cut = *cut_opt;

  // Prune each side to an expander.
  std::array<VertexSet, 2> vp;
  for (int i = 0; i < 2; ++i) {
    const VertexSet& vi = i == 0 ? cut.v1 : cut.v2;
    const int max_n0 = vi.count() - (4 * d + 2) * mm;
    if (max_n0 < 1) {
      throw Error(ErrorKind::size_hypothesis,
                  "cut side too small to prune",
                  json{{"side", i}, {"size", vi.count()}}.dump());
    }
    int ni = vi.count() -
             static_cast<int>(std::floor((1.0 - 3.0 * params.lambda) * n));
    ni = std::clamp(ni, 1, max_n0);
    std::vector<VertexId> old_side;
    const Graph sub = g.induced(vi, &old_side);
    try {
      const PruneResult pr = prune_to_expander(sub, mm, ni, 2.0 * d);
      VertexSet res = vi;
      pr.removed.for_each([&](VertexId r) { res.erase(old_side[r]); });
      vp[i] = res;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::contract) {
        throw Error(ErrorKind::stage_failure,
                    "cut side failed joinedness while pruning", e.detail());
      }
      throw;
    }
  }

  VertexSet outside = VertexSet::full(host_n);
  outside -= vp[0];
  outside -= vp[1];

  // Bridge vertex: enough neighbours in both pruned sides carries a red T
  // across the cut.
  VertexId bridge = -1;
  for (VertexId v : outside.to_vector()) {
    if (g.row(v).intersection_count(vp[0]) >= dmax &&
        g.row(v).intersection_count(vp[1]) >= dmax) {
      bridge = v;
      break;
    }
  }
  std::string bridge_error;
  if (bridge >= 0) {
    try {
      const TreeSplit ts = split_tree(t, 0.5, t.root());
      const VertexId tt = ts.v;
      VertexId t0 = -1;
      for (VertexId nb : t.adj(tt)) {
        if (ts.t1.contains(nb) && !ts.t2.contains(nb)) {
          t0 = nb;
          break;
        }
      }
      if (t0 < 0) {
        throw Error(ErrorKind::stage_failure,
                    "link vertex has no neighbour on the large side");
      }
      std::vector<VertexId> children;
      for (VertexId nb : t.adj(tt)) {
        if (ts.t2.contains(nb)) children.push_back(nb);
      }
      const int r = static_cast<int>(children.size());

      VertexSet nb1 = g.row(bridge);
      nb1 &= vp[0];
      VertexSet nb2 = g.row(bridge);
      nb2 &= vp[1];
      if (nb1.empty() || nb2.count() < r) {
        throw Error(ErrorKind::stage_failure,
                    "bridge lost its neighbours after pruning");
      }
      const VertexId v0_host = nb1.first();
      const std::vector<VertexId> vch = nb2.take(r).to_vector();

      Embedding full(n);
      full.to_host[tt] = bridge;

      ExtendOptions opt;
      opt.verify = false;
      opt.enforce_size = false;
      opt.shuffle_seed = derive_seed(seed, 0xb21d6eULL, 1);

      {  // large side minus the link vertex
        std::vector<VertexId> old1, new1;
        const Graph h1 = g.induced(vp[0], &old1, &new1);
        ExtendableEmbedding st1(h1, d, mm, mm, opt);
        st1.add_isolated(new1[v0_host]);
        VertexSet keep1 = ts.t1;
        keep1.erase(tt);
        std::vector<VertexId> old_t1;
        const Tree tp1 = t.induced(keep1, t0, &old_t1);
        const Embedding e1 =
            embed_tree_extendably(h1, st1, tp1, tp1.root(), new1[v0_host]);
        for (int i = 0; i < tp1.size(); ++i) {
          full.to_host[old_t1[i]] = old1[e1.to_host[i]];
        }
      }
      {  // small-side subtrees rooted at the link's children
        std::vector<VertexId> old2, new2;
        const Graph h2 = g.induced(vp[1], &old2, &new2);
        ExtendOptions opt2 = opt;
        opt2.shuffle_seed = derive_seed(seed, 0xb21d6eULL, 2);
        ExtendableEmbedding st2(h2, d, mm, mm, opt2);
        for (int i = 0; i < r; ++i) st2.add_isolated(new2[vch[i]]);
        for (int i = 0; i < r; ++i) {
          const VertexSet comp = tree_component(t, children[i], tt);
          std::vector<VertexId> old_ti;
          const Tree tpi = t.induced(comp, children[i], &old_ti);
          const Embedding ei =
              embed_tree_extendably(h2, st2, tpi, tpi.root(), new2[vch[i]]);
          for (int j = 0; j < tpi.size(); ++j) {
            full.to_host[old_ti[j]] = old2[ei.to_host[j]];
          }
        }
      }
      const std::string fault = embedding_fault(t, g, full, true);
      if (!fault.empty()) {
        throw Error(ErrorKind::contract,
                    "bridge assembly produced an invalid map: " + fault);
      }
      Certificate cert;
      cert.kind = Certificate::Kind::red_tree;
      cert.embedding = std::move(full);
      cert.tree = t;
      return cert;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::contract) throw;
      bridge_error = e.what();  // fall through to the two-sided recursion
    }
  }

  // Two-sided recursion.  Outside vertices join the side they are sparsely
  // attached to; class surgery later removes them and all neighbours of the
  // final classes, so the requested class size is padded accordingly.
  VertexSet u_low(host_n), u_high(host_n);
  outside.for_each([&](VertexId v) {
    if (g.row(v).intersection_count(vp[1]) < dmax) {
      u_low.insert(v);
    } else {
      u_high.insert(v);
    }
  });
  std::array<VertexSet, 2> uset = {u_low, u_high};
  std::array<VertexSet, 2> side;
  std::array<int, 2> kpart{}, mpart{};
  for (int i = 0; i < 2; ++i) {
    side[i] = vp[i];
    side[i] |= uset[i];
    kpart[i] = side[i].count() / (n - 1);
    mpart[i] = side[i].count() % (n - 1);
  }
  const int a = mpart[0] >= mpart[1] ? 0 : 1;  // side with the larger residue
  const int b = 1 - a;
  const int ksum = kpart[a] + kpart[b];

  struct SideRun {
    Certificate cert;
    std::vector<VertexId> old_of;
  };
  auto run_side = [&](int which, int kk, int ss, int mm2) -> SideRun {
    SideRun r;
    const Graph sub = g.induced(side[which], &r.old_of);
    try {
      r.cert = handle(sub, kk, ss, mm2);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::contract) throw;
      throw Error(ErrorKind::stage_failure,
                  std::string("side recursion failed: ") + e.what(),
                  e.detail());
    }
    return r;
  };
  auto lift_red = [&](const SideRun& r) {
    Certificate cert;
    cert.kind = Certificate::Kind::red_tree;
    cert.tree = t;
    cert.embedding = Embedding(n);
    for (int i = 0; i < n; ++i) {
      const VertexId v = r.cert.embedding.to_host[i];
      cert.embedding.to_host[i] = v >= 0 ? r.old_of[v] : -1;
    }
    const std::string fault = embedding_fault(t, g, cert.embedding, true);
    if (!fault.empty()) {
      throw Error(ErrorKind::contract,
                  "lifted side embedding is invalid: " + fault);
    }
    return cert;
  };
  auto shrink = [&](const VertexSet& cls, const VertexSet& excluded,
                    const char* what) {
    VertexSet cut_cls = cls;
    cut_cls -= excluded;
    if (cut_cls.count() < s) {
      throw Error(ErrorKind::stage_failure,
                  std::string(what) + ": class shrink fell short",
                  json{{"left", cut_cls.count()}, {"need", s}}.dump());
    }
    return cut_cls.take(s);
  };
  auto assemble = [&](std::vector<VertexSet> classes) {
    MultipartiteWitness w;
    w.classes = std::move(classes);
    const std::string fault = w.fault(g);
    if (!fault.empty()) {
      throw Error(ErrorKind::contract,
                  "assembled witness is invalid: " + fault);
    }
    Certificate cert;
    cert.kind = Certificate::Kind::blue_witness;
    cert.tree = t;
    cert.witness = std::move(w);
    return cert;
  };

  if (ksum == k - 2) {
    // Degenerate split: the residues absorb a full block, so one side's
    // final class also has the shrinkable size.
    const int s_rec_a = s + uset[a].count() + dmax * m;
    const int s_rec_b = s + uset[b].count();
    const SideRun ra = run_side(a, kpart[a] + 1, s_rec_a, s_rec_a);
    if (ra.cert.kind == Certificate::Kind::red_tree) return lift_red(ra);
    const SideRun rb = run_side(b, kpart[b] + 1, s_rec_b, m);
    if (rb.cert.kind == Certificate::Kind::red_tree) return lift_red(rb);

    std::vector<VertexSet> ycls, zcls;
    for (const auto& c : ra.cert.witness.classes) {
      ycls.push_back(lift_set(c, ra.old_of, host_n));
    }
    for (const auto& c : rb.cert.witness.classes) {
      zcls.push_back(lift_set(c, rb.old_of, host_n));
    }
    const VertexSet z_last = zcls.back();
    VertexSet ex_y = uset[a];
    ex_y |= neighbourhood_union(g, z_last);
    VertexSet ex_z = uset[b];

    std::vector<VertexSet> final_classes;
    for (const auto& y : ycls) {
      final_classes.push_back(shrink(y, ex_y, "large-residue side"));
    }
    for (std::size_t i = 0; i + 1 < zcls.size(); ++i) {
      final_classes.push_back(shrink(zcls[i], ex_z, "small-residue side"));
    }
    final_classes.push_back(z_last);
    if (static_cast<int>(final_classes.size()) != k) {
      throw Error(ErrorKind::contract, "class count drifted in assembly");
    }
    return assemble(std::move(final_classes));
  }
  if (ksum == k - 1) {
    if (mpart[a] + mpart[b] != m) {
      throw Error(ErrorKind::stage_failure,
                  "cut sides break the size dichotomy",
                  json{{"m_parts", {mpart[a], mpart[b]}}, {"m", m},
                       {"bridge_error", bridge_error}}
                      .dump());
    }
    const int s_rec_a = s + uset[a].count() + dmax * mpart[b];
    const int s_rec_b = s + uset[b].count() + dmax * mpart[a];
    const SideRun ra = run_side(a, kpart[a] + 1, s_rec_a, mpart[a]);
    if (ra.cert.kind == Certificate::Kind::red_tree) return lift_red(ra);
    const SideRun rb = run_side(b, kpart[b] + 1, s_rec_b, mpart[b]);
    if (rb.cert.kind == Certificate::Kind::red_tree) return lift_red(rb);

    std::vector<VertexSet> ycls, zcls;
    for (const auto& c : ra.cert.witness.classes) {
      ycls.push_back(lift_set(c, ra.old_of, host_n));
    }
    for (const auto& c : rb.cert.witness.classes) {
      zcls.push_back(lift_set(c, rb.old_of, host_n));
    }
    const VertexSet y_last = ycls.back();
    const VertexSet z_last = zcls.back();
    VertexSet ex_y = uset[a];
    ex_y |= neighbourhood_union(g, z_last);
    VertexSet ex_z = uset[b];
    ex_z |= neighbourhood_union(g, y_last);

    std::vector<VertexSet> final_classes;
    for (std::size_t i = 0; i + 1 < ycls.size(); ++i) {
      final_classes.push_back(shrink(ycls[i], ex_y, "large-residue side"));
    }
    for (std::size_t i = 0; i + 1 < zcls.size(); ++i) {
      final_classes.push_back(shrink(zcls[i], ex_z, "small-residue side"));
    }
    VertexSet merged = y_last;
    merged |= z_last;
    final_classes.push_back(merged);
    if (static_cast<int>(final_classes.size()) != k) {
      throw Error(ErrorKind::contract, "class count drifted in assembly");
    }
    return assemble(std::move(final_classes));
  }
  throw Error(ErrorKind::stage_failure,
              "cut sides break the size dichotomy",
              json{{"k_parts", {kpart[a], kpart[b]}}, {"k", k},
                   {"bridge_error", bridge_error}}
                  .dump());
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

namespace {

Certificate stamp(Certificate cert, const TwoColouring& colouring,
                  const Tree& t, int k, int s, int m, const ParamSet& params,
                  std::uint64_t seed, VerifyMode mode) {
  cert.tree = t;
  cert.input_digest = instance_digest(colouring, t, k, s, m);
  cert.parameters = json{{"k", k},
                         {"s", s},
                         {"m", m},
                         {"n", t.size()},
                         {"host", colouring.size()},
                         {"seed", seed},
                         {"params", params.to_json()}};
  cert.mode = mode;
  return cert;
}

void merge_trace(CaseTrace& into, const CaseTrace& sub) {
  for (const auto& r : sub.records) {
    into.records.push_back(
        {"sub." + r.label, r.predicate, r.measured, r.taken});
  }
}

}  // namespace

SolveResult solve(const TwoColouring& colouring, const Tree& t, int k, int s,
                  int m, const ParamSet& params, std::uint64_t seed,
                  VortexPartitionResult* vortex_out) {
  CaseTrace trace;
  const int host_n = colouring.size();
  const int n = t.size();
  if (k < 1 || s < 1 || m < 0 || n < 1) {
    throw Error(ErrorKind::parameter,
                "solve needs k >= 1, s >= 1, m >= 0, |T| >= 1");
  }
  const Graph& g = colouring.red();
  const int intended = (k - 1) * (n - 1) + m;
  trace.add("size", "|G| == (k-1)(n-1)+m",
            json{{"host", host_n}, {"intended", intended}},
            host_n == intended);

  auto finish = [&](Certificate cert) {
    const std::string fault = verify_certificate(colouring, cert);
    if (!fault.empty()) {
      throw Error(ErrorKind::contract,
                  "certificate failed re-verification: " + fault);
    }
    cert.verified = true;
    return SolveResult{std::move(cert), std::move(trace)};
  };
  auto red_cert = [&](Embedding e, VerifyMode mode) {
    Certificate c;
    c.kind = Certificate::Kind::red_tree;
    c.embedding = std::move(e);
    return stamp(std::move(c), colouring, t, k, s, m, params, seed, mode);
  };
  auto blue_cert = [&](MultipartiteWitness w, VerifyMode mode) {
    Certificate c;
    c.kind = Certificate::Kind::blue_witness;
    c.witness = std::move(w);
    return stamp(std::move(c), colouring, t, k, s, m, params, seed, mode);
  };

  // A witness with an empty final class is the same object as one fewer
  // equal class: reduce and re-shape.
  if (m == 0 && k >= 2) {
    trace.add("m-zero",
              "empty final class: equivalent instance at (k-1, s, s)",
              json{{"k", k}}, true);
    SolveResult inner = solve(colouring, t, k - 1, s, s, params,
                              derive_seed(seed, 0x0e0e77ULL,
                                          static_cast<std::uint64_t>(k)),
                              vortex_out);
    merge_trace(trace, inner.trace);
    if (inner.certificate.kind == Certificate::Kind::red_tree) {
      return finish(red_cert(std::move(inner.certificate.embedding),
                             inner.certificate.mode));
    }
    MultipartiteWitness w = std::move(inner.certificate.witness);
    w.classes.push_back(VertexSet(host_n));  // the empty m-class
    return finish(blue_cert(std::move(w), inner.certificate.mode));
  }

  if (k == 1) {
    if (host_n < m) {
      throw Error(ErrorKind::invalid_input,
                  "host too small for the single-class witness");
    }
    trace.add("trivial", "k == 1: any m vertices form the witness",
              json{{"m", m}}, true);
    MultipartiteWitness w;
    w.classes = {VertexSet::full(host_n).take(m)};
    return finish(blue_cert(std::move(w), VerifyMode::exact));
  }

  if (host_n <= kExactCap) {
    trace.add("exact-small", "|G| <= cap: exact dichotomy search",
              json{{"host", host_n}, {"cap", kExactCap}}, true);
    const TreeContainment tc = contains_red_tree(colouring, t);
    if (tc.found) {
      return finish(red_cert(tc.embedding, VerifyMode::exact));
    }
    const WitnessContainment wc = contains_blue_witness(colouring, k - 1, s, m);
    if (wc.found) {
      return finish(blue_cert(wc.witness, VerifyMode::exact));
    }
    if (wc.proven_absent) {
      throw Error(ErrorKind::invalid_input,
                  "instance has neither a red tree nor a blue witness "
                  "(proven by exact search)",
                  json{{"proven", true}}.dump());
    }
    throw Error(ErrorKind::budget_exhausted,
                "inconclusive: witness search budget exhausted");
  }

  if (k == 2) {
    const JoinedResult jr = is_joined(g, std::max(1, m), s);
    trace.add("joined-probe",
              "no red-non-adjacent disjoint (m, s) pair exists",
              json{{"joined", jr.joined}, {"mode", to_string(jr.mode)}},
              !jr.joined);
    if (!jr.joined) {
      MultipartiteWitness w;
      w.classes = {jr.witness->second, jr.witness->first};
      return finish(blue_cert(std::move(w), jr.mode));
    }
    const int m_eff = host_n - n + 1;
    if (m_eff < 1) {
      throw Error(ErrorKind::budget_exhausted,
                  "inconclusive: host smaller than the tree and no witness "
                  "found");
    }
    try {
      std::string branch;
      Embedding e = embed_k2(g, t, m_eff, params.mu, params,
                             derive_seed(seed, 0x2b22ULL, 0), &branch,
                             vortex_out);
      trace.add(branch, "k = 2 embedding branch succeeded",
                json{{"m_eff", m_eff}}, true);
      return finish(red_cert(std::move(e), jr.mode));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::contract ||
          e.kind() == ErrorKind::parameter ||
          e.kind() == ErrorKind::invalid_input) {
        throw;
      }
      trace.add("k2-embed", "embedding stages failed",
                json{{"error", e.what()}}, false);
      throw Error(ErrorKind::budget_exhausted,
                  std::string("inconclusive: ") + e.what(), e.detail());
    }
  }

  // k >= 3: probes, then stage dispatch, recursing on k.
  std::vector<std::string> branch_errors;
  const int mm = std::max(1, m);
  const int dmax = std::max(1, t.max_degree());
  Rng probe_rng(derive_seed(seed, 0x9906eULL, 1));

  auto recurse_excluding = [&](const VertexSet& u, int sub_s, int sub_m,
                               const char* label)
      -> std::optional<SolveResult> {
    VertexSet keep = VertexSet::full(host_n);
    keep -= u;
    keep -= external_neighbourhood(g, u);
    if (keep.count() < 1) return std::nullopt;
    std::vector<VertexId> old_of;
    const Graph sub = g.induced(keep, &old_of);
    try {
      SolveResult inner =
          solve(TwoColouring(sub), t, k - 1, sub_s, sub_m, params,
                derive_seed(seed, 0xec5e77ULL,
                            static_cast<std::uint64_t>(k)));
      merge_trace(trace, inner.trace);
      if (inner.certificate.kind == Certificate::Kind::red_tree) {
        Embedding e(n);
        for (int i = 0; i < n; ++i) {
          const VertexId v = inner.certificate.embedding.to_host[i];
          e.to_host[i] = v >= 0 ? old_of[v] : -1;
        }
        return finish(red_cert(std::move(e), inner.certificate.mode));
      }
      std::vector<VertexSet> classes;
      for (const auto& c : inner.certificate.witness.classes) {
        classes.push_back(lift_set(c, old_of, host_n));
      }
      // recursion supplies k-2 equal classes plus its final class; u joins
      // in the slot the caller requested
      MultipartiteWitness w;
      if (sub_m == s) {
        // inner final class doubles as an equal class; u is the m-class
        w.classes = std::move(classes);
        w.classes.push_back(u.take(m));
      } else {
        // u becomes the missing equal class ahead of the inner m-class
        w.classes.assign(classes.begin(), classes.end() - 1);
        w.classes.push_back(u.take(s));
        w.classes.push_back(classes.back());
      }
      return finish(blue_cert(std::move(w), inner.certificate.mode));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::contract) throw;
      branch_errors.push_back(std::string(label) + ": " + e.what());
      return std::nullopt;
    }
  };

  // Expansion probe: m-sets should dominate all but lambda n vertices.
  {
    const int threshold = static_cast<int>(
        std::ceil((1.0 - params.lambda) * n));
    std::vector<VertexSet> probes;
    {
      std::vector<VertexId> by_deg(host_n);
      std::iota(by_deg.begin(), by_deg.end(), 0);
      std::stable_sort(by_deg.begin(), by_deg.end(),
                       [&](VertexId x, VertexId y) {
                         return g.degree(x) < g.degree(y);
                       });
      VertexSet adversarial(host_n);
      for (int i = 0; i < mm && i < host_n; ++i) {
        adversarial.insert(by_deg[i]);
      }
      probes.push_back(adversarial);
    }
    for (int trial = 0; trial < 24; ++trial) {
      probes.push_back(VertexSet::from(
          host_n, sample_without_replacement(host_n, mm, probe_rng)));
    }
    int min_nbr = host_n;
    VertexSet bad(host_n);
    bool violated = false;
    for (const auto& u : probes) {
      const int nb = external_neighbourhood(g, u).count();
      min_nbr = std::min(min_nbr, nb);
      if (nb < threshold) {
        bad = u;
        violated = true;
        break;
      }
    }
    trace.add("expansion-probe",
              "sampled m-sets have |N(U)| >= (1 - lambda) n",
              json{{"min", min_nbr}, {"threshold", threshold},
                   {"violated", violated}},
              violated);
    if (violated) {
      auto out = recurse_excluding(bad, s, s, "expansion-probe");
      if (out) return std::move(*out);
    }
  }

  // Cover probe: eps-n sets should reach n vertices with their closed
  // neighbourhood.
  {
    const int esz = std::clamp(
        static_cast<int>(std::ceil(params.epsilon * n)), std::max(mm, s),
        host_n);
    std::vector<VertexSet> probes;
    {
      std::vector<VertexId> by_deg(host_n);
      std::iota(by_deg.begin(), by_deg.end(), 0);
      std::stable_sort(by_deg.begin(), by_deg.end(),
                       [&](VertexId x, VertexId y) {
                         return g.degree(x) < g.degree(y);
                       });
      VertexSet adversarial(host_n);
      for (int i = 0; i < esz && i < host_n; ++i) {
        adversarial.insert(by_deg[i]);
      }
      probes.push_back(adversarial);
    }
    for (int trial = 0; trial < 16; ++trial) {
      probes.push_back(VertexSet::from(
          host_n, sample_without_replacement(host_n, esz, probe_rng)));
    }
    int min_union = host_n;
    VertexSet bad(host_n);
    bool violated = false;
    for (const auto& u : probes) {
      VertexSet closure = neighbourhood_union(g, u);
      closure |= u;
      const int cu = closure.count();
      min_union = std::min(min_union, cu);
      if (cu < n) {
        bad = u;
        violated = true;
        break;
      }
    }
    trace.add("cover-probe",
              "sampled eps-n sets have |U u N(U)| >= n",
              json{{"min", min_union}, {"threshold", n},
                   {"violated", violated}},
              violated);
    if (violated && bad.count() >= s) {
      auto out = recurse_excluding(bad, s, m, "cover-probe");
      if (out) return std::move(*out);
    }
  }

  // Leaf-rich trees route to the matching stage.
  const int leaf_need =
      static_cast<int>(std::ceil(10.0 * dmax * dmax * params.epsilon * n));
  if (t.leaf_count() >= leaf_need) {
    trace.add("many-leaves", "leaf count >= 10 d^2 eps n",
              json{{"leaves", t.leaf_count()}, {"threshold", leaf_need}},
              true);
    try {
      Embedding e = embed_many_leaves(g, t, params.epsilon,
                                      derive_seed(seed, 0x1ea577ULL, 0));
      return finish(red_cert(std::move(e), VerifyMode::sampled));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::contract) throw;
      branch_errors.push_back(std::string("many-leaves: ") + e.what());
      if (e.kind() == ErrorKind::stage_failure && !e.detail().empty()) {
        const json detail = json::parse(e.detail(), nullptr, false);
        if (detail.is_object() && detail.contains("violator")) {
          VertexSet uv(host_n);
          for (const auto& v : detail["violator"]) {
            uv.insert(v.get<VertexId>());
          }
          if (uv.count() >= s) {
            auto out = recurse_excluding(uv, s, m, "leaf-matching-violator");
            if (out) return std::move(*out);
          }
        }
      }
    }
  } else {
    trace.add("many-leaves", "leaf count >= 10 d^2 eps n",
              json{{"leaves", t.leaf_count()}, {"threshold", leaf_need}},
              false);
  }

  // Sparse separation routes to the two-sided recursion.
  {
    const int max_v0 =
        std::max(0, static_cast<int>(std::floor(params.lambda * n)));
    const auto cut_opt = find_sparse_cut(g, mm, max_v0,
                                         derive_seed(seed, 0xc1a77ULL, 0));
    trace.add("disconnected", "BFS-layer probe found a sparse separation",
              json{{"found", cut_opt.has_value()}, {"max_v0", max_v0}},
              cut_opt.has_value());
    if (cut_opt) {
      try {
        const InductionHandle handle = [&](const Graph& sub_red, int kk,
                                           int ss, int mm2) -> Certificate {
          SolveResult r =
              solve(TwoColouring(sub_red), t, kk, ss, mm2, params,
                    derive_seed(seed, 0xd15c77ULL,
                                static_cast<std::uint64_t>(kk)));
          merge_trace(trace, r.trace);
          return std::move(r.certificate);
        };
        Certificate c = split_disconnected(
            g, t, k, s, m, params, handle, derive_seed(seed, 0x5b117ULL, 0));
        const VerifyMode mode = VerifyMode::sampled;
        if (c.kind == Certificate::Kind::red_tree) {
          return finish(red_cert(std::move(c.embedding), mode));
        }
        return finish(blue_cert(std::move(c.witness), mode));
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::contract) throw;
        branch_errors.push_back(std::string("disconnected: ") + e.what());
      }
    }
  }

  // Remaining shape: few leaves, no sparse cut.
  trace.add("well-connected", "reservoir embedding on the remaining shape",
            json::object(), true);
  try {
    Embedding e = embed_sparse_connected(g, t, k, mm, params,
                                         derive_seed(seed, 0x5a25eULL, 0));
    return finish(red_cert(std::move(e), VerifyMode::sampled));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::contract) throw;
    branch_errors.push_back(std::string("well-connected: ") + e.what());
  }

  throw Error(ErrorKind::budget_exhausted,
              "inconclusive: all applicable stages failed",
              json{{"errors", branch_errors}}.dump());
}

}  // namespace rgl
