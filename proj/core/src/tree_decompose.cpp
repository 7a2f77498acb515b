#include "rgl/tree_decompose.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "rgl/error.hpp"

namespace rgl {

namespace {

constexpr double kEps = 1e-9;

}  // namespace

std::vector<BarePath> find_bare_paths(const Tree& t, int k) {
    if (k < 1) throw Error(ErrorKind::parameter, "find_bare_paths: k >= 1");
    const int n = t.size();
    std::vector<BarePath> out;
    if (n < 2) return out;

    const std::vector<int>& depth = t.depth();
    auto is_special = [&](VertexId v) { return t.degree(v) != 2; };
    // The deeper endpoint of a segment (ties: larger id) "owns" it: it is
    // the unique special vertex whose parent edge lies inside the segment,
    // so distinct segments own distinct vertices.
    auto owner_is = [&](VertexId a, VertexId b) {
        if (depth[a] != depth[b]) return depth[a] > depth[b] ? a : b;
        return a > b ? a : b;
    };

    for (VertexId s = 0; s < n; ++s) {
        if (!is_special(s)) continue;
        for (VertexId w : t.adj(s)) {
            // Walk the maximal bare segment leaving s through w.
            std::vector<VertexId> seg = {s, w};
            while (!is_special(seg.back())) {
                VertexId prev = seg[seg.size() - 2];
                for (VertexId x : t.adj(seg.back())) {
                    if (x != prev) {
                        seg.push_back(x);
                        break;
                    }
                }
            }
            if (owner_is(s, seg.back()) != s) continue;  // walked twice; keep one
            // Cut consecutive (k+1)-blocks from the owned end; the far
            // endpoint (another segment's vertex or the shared ancestor) is
            // never used.
            const int L = static_cast<int>(seg.size()) - 1;
            for (int start = 0; start + k <= L - 1; start += k + 1) {
                BarePath p;
                p.vertices.assign(seg.begin() + start,
                                  seg.begin() + start + k + 1);
                out.push_back(std::move(p));
            }
        }
    }
    return out;
}

long long bare_path_count_bound(const Tree& t, int k) {
    const long long n = t.size();
    const long long leaves = t.leaf_count();
    // ceil(n/(k+1) - 2*leaves + 2) = ceil((n - (2*leaves-2)*(k+1)) / (k+1))
    const long long num = n - (2 * leaves - 2) * (k + 1);
    const long long den = k + 1;
    long long c = num / den + ((num % den > 0) ? 1 : 0);
    return std::max(0LL, c);
}

std::string bare_paths_fault(const Tree& t, const std::vector<BarePath>& paths,
                             int k) {
    VertexSet used(t.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto& vs = paths[i].vertices;
        if (static_cast<int>(vs.size()) != k + 1) {
            return "path " + std::to_string(i) + " has length " +
                   std::to_string(vs.size() - 1) + ", expected " +
                   std::to_string(k);
        }
        for (std::size_t j = 0; j < vs.size(); ++j) {
            if (used.contains(vs[j])) {
                return "vertex " + std::to_string(vs[j]) +
                       " reused in path " + std::to_string(i);
            }
            used.insert(vs[j]);
            if (j > 0 && !t.has_edge(vs[j - 1], vs[j])) {
                return "path " + std::to_string(i) + " not a tree path at " +
                       std::to_string(vs[j]);
            }
            if (j > 0 && j + 1 < vs.size() && t.degree(vs[j]) != 2) {
                return "internal vertex " + std::to_string(vs[j]) +
                       " of path " + std::to_string(i) + " has degree " +
                       std::to_string(t.degree(vs[j]));
            }
        }
    }
    return "";
}

TreeSplit split_tree(const Tree& t, double gamma, VertexId anchor) {
    const int n = t.size();
    if (n < 2) throw Error(ErrorKind::parameter, "split_tree: need n >= 2");
    if (gamma <= 0 || gamma > 1) {
        throw Error(ErrorKind::parameter, "split_tree: gamma in (0, 1]");
    }
    if (gamma * n + kEps < t.max_degree()) {
        throw Error(ErrorKind::parameter,
                    "split_tree: need gamma*n >= max degree (" +
                        std::to_string(gamma * n) + " < " +
                        std::to_string(t.max_degree()) + ")");
    }
    Tree::Rooted view = t.rooted_at(anchor);
    const double threshold = gamma * n / (2.0 * t.max_degree());

    VertexId best = anchor;
    for (VertexId v = 0; v < n; ++v) {
        if (static_cast<double>(view.subtree[v]) + kEps < threshold) continue;
        if (view.depth[v] > view.depth[best] ||
            (view.depth[v] == view.depth[best] && v < best)) {
            best = v;
        }
    }
    if (best == anchor) {
        throw Error(ErrorKind::parameter,
                    "split_tree: no proper split point (gamma too large)");
    }

    TreeSplit sp;
    sp.v = best;
    sp.t2 = VertexSet(n);
    std::vector<VertexId> stack = {best};
    while (!stack.empty()) {
        VertexId v = stack.back();
        stack.pop_back();
        sp.t2.insert(v);
        for (VertexId w : t.adj(v)) {
            if (w != view.parent[v] && !sp.t2.contains(w)) stack.push_back(w);
        }
    }
    sp.t1 = VertexSet::full(n);
    sp.t1 -= sp.t2;
    sp.t1.insert(best);

    if (static_cast<double>(sp.t2.count()) > gamma * n + 1 + kEps) {
        throw Error(ErrorKind::contract,
                    "split_tree: |T2| = " + std::to_string(sp.t2.count()) +
                        " exceeds gamma*n = " + std::to_string(gamma * n));
    }
    return sp;
}

std::string decomposition_fault(const Tree& t, const TreeDecomposition& d) {
    const int n = t.size();
    const std::size_t l = d.subtrees.size();
    if (l == 0) return "no parts";
    if (d.link_vertices.size() + 1 != l) return "link vertex count mismatch";

    long long edge_sum = 0;
    VertexSet covered(n);
    for (std::size_t i = 0; i < l; ++i) {
        const VertexSet& part = d.subtrees[i];
        if (part.universe() != n) return "part universe mismatch";
        if (part.empty()) return "part " + std::to_string(i) + " empty";
        // Connectivity inside the tree.
        VertexSet seen(n);
        std::vector<VertexId> stack = {part.first()};
        seen.insert(part.first());
        while (!stack.empty()) {
            VertexId v = stack.back();
            stack.pop_back();
            for (VertexId w : t.adj(v)) {
                if (part.contains(w) && !seen.contains(w)) {
                    seen.insert(w);
                    stack.push_back(w);
                }
            }
        }
        if (seen.count() != part.count()) {
            return "part " + std::to_string(i) + " is not connected";
        }
        edge_sum += part.count() - 1;
        covered |= part;
    }
    if (covered.count() != n) return "parts do not cover all vertices";
    if (edge_sum != n - 1) {
        return "part edge sets do not partition E(T): sizes sum to " +
               std::to_string(edge_sum) + " edges, tree has " +
               std::to_string(n - 1);
    }
    for (std::size_t i = 0; i + 1 < l; ++i) {
        VertexSet inter = d.subtrees[i];
        inter &= d.subtrees[i + 1];
        if (inter.count() != 1 || inter.first() != d.link_vertices[i]) {
            return "T_" + std::to_string(i + 1) + " cap T_" +
                   std::to_string(i + 2) + " is not {t_" +
                   std::to_string(i + 1) + "}";
        }
        int link_deg = 0;
        for (VertexId w : t.adj(d.link_vertices[i])) {
            if (d.subtrees[i].contains(w)) ++link_deg;
        }
        if (link_deg > 1) {
            return "t_" + std::to_string(i + 1) + " is not a leaf of T_" +
                   std::to_string(i + 1);
        }
        for (std::size_t j = i + 2; j < l; ++j) {
            if (d.subtrees[i].intersects(d.subtrees[j])) {
                return "T_" + std::to_string(i + 1) + " meets T_" +
                       std::to_string(j + 1);
            }
        }
    }
    return "";
}

bool is_descending_tuple(const std::vector<int>& sizes, double lo, double hi) {
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        double next = sizes[i + 1];
        if (next > hi * sizes[i] + 1 + kEps) return false;
        if (next + 1 + kEps < lo * sizes[i]) return false;
    }
    return true;
}

TreeDecomposition descending_decomposition(const Tree& t, double gamma, int N,
                                           VertexId anchor) {
    const int n = t.size();
    if (gamma <= 0 || gamma >= 0.5) {
        throw Error(ErrorKind::parameter,
                    "descending_decomposition: gamma in (0, 1/2)");
    }
    if (N >= n - 1) {
        throw Error(ErrorKind::parameter,
                    "descending_decomposition: need N < n - 1");
    }
    if (static_cast<double>(N) * gamma + kEps < t.max_degree()) {
        throw Error(ErrorKind::parameter,
                    "descending_decomposition: need N >= max_degree/gamma");
    }
    t.adj(anchor);  // validates the anchor id

    TreeDecomposition d;
    VertexSet rest = VertexSet::full(n);
    VertexId cur_anchor = anchor;
    while (true) {
        if (rest.count() <= N) {
            d.subtrees.push_back(rest);
            break;
        }
        std::vector<VertexId> old_of_new;
        Tree sub = t.induced(rest, cur_anchor, &old_of_new);
        VertexId anchor_new = static_cast<VertexId>(
            std::lower_bound(old_of_new.begin(), old_of_new.end(),
                             cur_anchor) -
            old_of_new.begin());
        TreeSplit sp = split_tree(sub, gamma, anchor_new);

        VertexSet big(n);
        sp.t1.for_each([&](VertexId v) { big.insert(old_of_new[v]); });
        VertexSet small(n);
        sp.t2.for_each([&](VertexId v) { small.insert(old_of_new[v]); });
        VertexId link = old_of_new[sp.v];

        d.subtrees.push_back(big);
        d.link_vertices.push_back(link);
        rest = small;
        cur_anchor = link;
    }

    std::string fault = decomposition_fault(t, d);
    if (!fault.empty()) {
        throw Error(ErrorKind::contract,
                    "descending_decomposition: invalid output: " + fault);
    }
    return d;
}

TreeDecomposition fixed_length_decomposition(const Tree& t, double gamma,
                                             int k, VertexId anchor,
                                             bool enforce_size) {
    const int n = t.size();
    if (gamma <= 0 || gamma >= 0.25) {
        throw Error(ErrorKind::parameter,
                    "fixed_length_decomposition: gamma in (0, 1/4)");
    }
    if (k < 1) {
        throw Error(ErrorKind::parameter, "fixed_length_decomposition: k >= 1");
    }
    const double degree = std::max(1, t.max_degree());
    if (enforce_size &&
        static_cast<double>(n) <= std::pow(8.0 * degree / gamma, k + 1)) {
        throw Error(ErrorKind::parameter,
                    "fixed_length_decomposition: n = " + std::to_string(n) +
                        " not above (8D/gamma)^(k+1)");
    }
    if (k == 1) {
        TreeDecomposition d;
        d.subtrees.push_back(VertexSet::full(n));
        return d;
    }

    // Run the descending decomposition at rate gamma/2 (per-step shrink
    // factor at least gamma/4D), stopping low enough that at least k parts
    // come off before the remainder is reached.
    const double rate = gamma / (4.0 * degree);
    long long cutoff = static_cast<long long>(
        std::floor(n * std::pow(rate, k - 1) / 2.0));
    long long floor_n = static_cast<long long>(
        std::ceil(2.0 * degree / gamma - kEps));
    int big_n = static_cast<int>(std::max(cutoff, floor_n));
    if (!enforce_size) {
        // Below the size threshold the formula cutoff may be unusable;
        // clamp it to the range the descending decomposition accepts, and
        // fall back to a single part when even that range is empty.
        big_n = std::min(big_n, n - 2);
        if (big_n < floor_n) {
            TreeDecomposition single;
            single.subtrees.push_back(VertexSet::full(n));
            return single;
        }
    }
    TreeDecomposition d = descending_decomposition(t, gamma / 2.0, big_n,
                                                   anchor);
    if (static_cast<int>(d.subtrees.size()) < k && enforce_size) {
        throw Error(ErrorKind::contract,
                    "fixed_length_decomposition: only " +
                        std::to_string(d.subtrees.size()) +
                        " parts before merging, expected >= " +
                        std::to_string(k));
    }
    while (static_cast<int>(d.subtrees.size()) > k) {
        VertexSet last = d.subtrees.back();
        d.subtrees.pop_back();
        d.subtrees.back() |= last;
        d.link_vertices.pop_back();
    }
    std::string fault = decomposition_fault(t, d);
    if (!fault.empty()) {
        throw Error(ErrorKind::contract,
                    "fixed_length_decomposition: invalid output: " + fault);
    }
    return d;
}

VertexSet separated_set(const Tree& t, int k) {
    if (k < 0) throw Error(ErrorKind::parameter, "separated_set: k >= 0");
    const int n = t.size();
    const double degree = std::max(1, t.max_degree());
    if (static_cast<double>(n) + kEps < 3.0 * std::pow(degree, k)) {
        throw Error(ErrorKind::size_hypothesis,
                    "separated_set: need |T| >= 3 * max_degree^k");
    }

    const int period = 2 * k + 2;
    const std::vector<int>& depth = t.depth();
    std::vector<int> residue_count(period, 0);
    for (VertexId v = 0; v < n; ++v) ++residue_count[depth[v] % period];
    int best_r = 0;
    for (int r = 1; r < period; ++r) {
        if (residue_count[r] > residue_count[best_r]) best_r = r;
    }

    VertexSet chosen(n);
    VertexSet blocked(n);
    std::vector<int> dist(n);
    for (VertexId v = 0; v < n; ++v) {
        if (depth[v] % period != best_r || blocked.contains(v)) continue;
        chosen.insert(v);
        // Block everything within distance 2k+1.
        std::deque<VertexId> queue = {v};
        std::fill(dist.begin(), dist.end(), -1);
        dist[v] = 0;
        blocked.insert(v);
        while (!queue.empty()) {
            VertexId u = queue.front();
            queue.pop_front();
            if (dist[u] == 2 * k + 1) continue;
            for (VertexId w : t.adj(u)) {
                if (dist[w] == -1) {
                    dist[w] = dist[u] + 1;
                    blocked.insert(w);
                    queue.push_back(w);
                }
            }
        }
    }
    return chosen;
}

}  // namespace rgl
