#include "rgl/graph_extremal.hpp"

#include <algorithm>
#include <functional>
#include <string>

#include "rgl/error.hpp"

namespace rgl {

namespace {

// Proper-colouring feasibility with at most k colours.  Colours are
// introduced in first-use order, which quotients out colour permutations.
bool colourable(const Graph& h, int k) {
    const int n = h.size();
    std::vector<int> colour(n, -1);
    std::function<bool(int, int)> go = [&](int v, int used) {
        if (v == n) return true;
        int limit = std::min(used + 1, k);
        for (int c = 0; c < limit; ++c) {
            bool ok = true;
            for (VertexId u : h.adj(v)) {
                if (u < v && colour[u] == c) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            colour[v] = c;
            if (go(v + 1, std::max(used, c + 1))) return true;
            colour[v] = -1;
        }
        return false;
    };
    return go(0, 0);
}

}  // namespace

ChromaticResult chromatic_and_sigma(const Graph& h, int max_n) {
    const int n = h.size();
    if (n < 1) {
        throw Error(ErrorKind::invalid_input,
                    "chromatic_and_sigma: graph must be nonempty");
    }
    if (n > max_n) {
        throw Error(ErrorKind::budget_exhausted,
                    "chromatic_and_sigma: |H| = " + std::to_string(n) +
                        " exceeds the exact-search cap " +
                        std::to_string(max_n));
    }

    int chi = 1;
    while (!colourable(h, chi)) ++chi;

    // Enumerate all proper chi-colourings (canonical under colour
    // permutation; class sizes are permutation-invariant) and take the
    // minimum over colourings of the smallest class size.
    int best = n + 1;
    std::vector<int> colour(n, -1);
    std::vector<int> class_size(chi, 0);
    std::function<void(int, int)> go = [&](int v, int used) {
        if (best == 1) return;  // cannot improve
        if (v == n) {
            if (used == chi) {
                int smallest = n;
                for (int c = 0; c < chi; ++c) {
                    smallest = std::min(smallest, class_size[c]);
                }
                best = std::min(best, smallest);
            }
            return;
        }
        // All chi colours must appear; prune when too few vertices remain.
        if (chi - used > n - v) return;
        int limit = std::min(used + 1, chi);
        for (int c = 0; c < limit; ++c) {
            bool ok = true;
            for (VertexId u : h.adj(v)) {
                if (u < v && colour[u] == c) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            colour[v] = c;
            ++class_size[c];
            go(v + 1, std::max(used, c + 1));
            --class_size[c];
            colour[v] = -1;
        }
    };
    go(0, 0);
    return {chi, best};
}

TwoColouring burr_colouring(int n, int k, int sigma) {
    if (k < 2 || sigma < 1 || n < sigma) {
        throw Error(ErrorKind::parameter,
                    "burr_colouring: need k >= 2 and n >= sigma >= 1");
    }
    const int total = (k - 1) * (n - 1) + sigma - 1;
    Graph red(total);
    auto add_block = [&](int lo, int hi) {
        for (int u = lo; u < hi; ++u) {
            for (int v = u + 1; v < hi; ++v) red.add_edge(u, v);
        }
    };
    for (int j = 0; j < k - 1; ++j) add_block(j * (n - 1), (j + 1) * (n - 1));
    add_block((k - 1) * (n - 1), total);
    return TwoColouring(std::move(red));
}

MultipartiteSearch find_multipartite_in_complement(const Graph& g, int classes,
                                                   int s, int m,
                                                   long long node_budget) {
    if (classes < 1 || s < 1 || m < 1) {
        throw Error(ErrorKind::parameter,
                    "find_multipartite_in_complement: classes, s, m >= 1");
    }
    const int n = g.size();
    MultipartiteSearch out;

    std::vector<int> sizes(static_cast<std::size_t>(classes), s);
    sizes.push_back(m);
    const int total_classes = static_cast<int>(sizes.size());
    std::vector<long long> future_need(total_classes + 1, 0);
    for (int i = total_classes - 1; i >= 0; --i) {
        future_need[i] = future_need[i + 1] + sizes[i];
    }
    if (future_need[0] > n) return out;  // cannot fit: proven absent

    std::vector<VertexSet> chosen(sizes.size(), VertexSet(n));
    bool exhausted = false;

    // place_class(ci, avail): avail is the set of vertices non-adjacent to
    // (and outside of) every earlier class.  Members of class ci are drawn
    // from avail in ascending order; `surv` tracks avail minus the class
    // and its neighbourhood, i.e. the availability for later classes.
    std::function<bool(int, const VertexSet&)> place_class =
        [&](int ci, const VertexSet& avail) -> bool {
        if (ci == total_classes) {
            MultipartiteWitness w;
            w.classes = chosen;
            out.witness = std::move(w);
            out.status = SearchStatus::found;
            return true;
        }
        if (avail.count() < future_need[ci]) return false;
        const std::vector<VertexId> pool = avail.to_vector();
        const int p = static_cast<int>(pool.size());
        const int size = sizes[ci];

        // Equal-size classes are interchangeable; fix ascending least
        // elements to cut the symmetry.
        VertexId min_start = 0;
        if (ci > 0 && sizes[ci] == sizes[ci - 1]) {
            min_start = chosen[ci - 1].first() + 1;
        }

        std::function<bool(int, int, const VertexSet&)> pick =
            [&](int pos, int slots, const VertexSet& surv) -> bool {
            if (slots == 0) return place_class(ci + 1, surv);
            if (p - pos < slots) return false;
            for (int i = pos; i <= p - slots; ++i) {
                VertexId v = pool[i];
                if (slots == size && v < min_start) continue;
                if (++out.nodes > node_budget) {
                    exhausted = true;
                    return false;
                }
                VertexSet next = surv;
                next.erase(v);
                next -= g.row(v);
                if (next.count() < future_need[ci + 1]) continue;
                chosen[ci].insert(v);
                bool done = pick(i + 1, slots - 1, next);
                chosen[ci].erase(v);
                if (done || exhausted) return done;
            }
            return false;
        };
        return pick(0, size, avail);
    };

    place_class(0, VertexSet::full(n));
    if (out.status != SearchStatus::found && exhausted) {
        out.status = SearchStatus::budget_exhausted;
    }
    return out;
}

HallResult hall_matching(const VertexSet& a, const VertexSet& b,
                         const Graph& g) {
    if (a.intersects(b)) {
        throw Error(ErrorKind::invalid_input,
                    "hall_matching: A and B must be disjoint");
    }
    const int n = g.size();
    std::vector<VertexId> match_of(n, -1);  // for B-vertices: matched A-vertex
    std::vector<VertexId> a_match(n, -1);   // for A-vertices: matched B-vertex

    // Kuhn's algorithm, vertices in ascending order for determinism.
    std::vector<char> visited(n, 0);
    std::function<bool(VertexId)> augment = [&](VertexId u) -> bool {
        for (VertexId w : g.adj(u)) {
            if (!b.contains(w) || visited[w]) continue;
            visited[w] = 1;
            if (match_of[w] == -1 || augment(match_of[w])) {
                match_of[w] = u;
                a_match[u] = w;
                return true;
            }
        }
        return false;
    };

    const std::vector<VertexId> a_list = a.to_vector();
    VertexId failed = -1;
    for (VertexId u : a_list) {
        std::fill(visited.begin(), visited.end(), 0);
        if (!augment(u)) {
            failed = u;
            break;
        }
    }

    HallResult res;
    if (failed == -1) {
        res.saturated = true;
        res.matching.reserve(a_list.size());
        for (VertexId u : a_list) res.matching.emplace_back(u, a_match[u]);
        return res;
    }

    // Hall violator: A-vertices reachable from the unmatched vertex by
    // alternating paths.  Their joint B-neighbourhood is fully matched into
    // the reachable set minus the unmatched root, hence too small.
    res.saturated = false;
    res.violator = VertexSet(n);
    std::vector<VertexId> stack = {failed};
    res.violator.insert(failed);
    VertexSet seen_b(n);
    while (!stack.empty()) {
        VertexId u = stack.back();
        stack.pop_back();
        for (VertexId w : g.adj(u)) {
            if (!b.contains(w) || seen_b.contains(w)) continue;
            seen_b.insert(w);
            VertexId u2 = match_of[w];
            if (u2 != -1 && !res.violator.contains(u2)) {
                res.violator.insert(u2);
                stack.push_back(u2);
            }
        }
    }
    return res;
}

}  // namespace rgl
