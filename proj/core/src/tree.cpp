#include "rgl/tree.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <string>

#include "rgl/error.hpp"
#include "rgl/rng.hpp"

namespace rgl {

namespace {

void check_vertex_range(VertexId v, int n, const char* what) {
    if (v < 0 || v >= n) {
        throw Error(ErrorKind::invalid_input,
                    std::string(what) + ": vertex id " + std::to_string(v) +
                        " outside [0," + std::to_string(n) + ")");
    }
}

}  // namespace

void Tree::finish_construction() {
    max_degree_ = 0;
    for (auto& nbrs : adj_) {
        std::sort(nbrs.begin(), nbrs.end());
        if (std::adjacent_find(nbrs.begin(), nbrs.end()) != nbrs.end()) {
            throw Error(ErrorKind::invalid_input, "tree: repeated edge");
        }
        max_degree_ = std::max(max_degree_, static_cast<int>(nbrs.size()));
    }
    default_view_ = rooted_at(root_);
    if (static_cast<int>(default_view_.order.size()) != n_) {
        throw Error(ErrorKind::invalid_input, "tree: not connected");
    }
}

Tree Tree::from_parents(const std::vector<VertexId>& parent) {
    Tree t;
    t.n_ = static_cast<int>(parent.size());
    if (t.n_ == 0) {
        throw Error(ErrorKind::invalid_input, "tree: needs >= 1 vertex");
    }
    t.adj_.resize(t.n_);
    int roots = 0;
    for (VertexId v = 0; v < t.n_; ++v) {
        if (parent[v] == -1) {
            ++roots;
            t.root_ = v;
            continue;
        }
        check_vertex_range(parent[v], t.n_, "tree parent");
        t.adj_[v].push_back(parent[v]);
        t.adj_[parent[v]].push_back(v);
    }
    if (roots != 1) {
        throw Error(ErrorKind::invalid_input,
                    "tree: expected exactly one root (parent -1), found " +
                        std::to_string(roots));
    }
    t.finish_construction();
    return t;
}

Tree Tree::from_edges(int n,
                      const std::vector<std::pair<VertexId, VertexId>>& edges,
                      VertexId root) {
    if (n < 1) throw Error(ErrorKind::invalid_input, "tree: needs >= 1 vertex");
    if (static_cast<int>(edges.size()) != n - 1) {
        throw Error(ErrorKind::invalid_input,
                    "tree: expected " + std::to_string(n - 1) + " edges, got " +
                        std::to_string(edges.size()));
    }
    check_vertex_range(root, n, "tree root");
    Tree t;
    t.n_ = n;
    t.root_ = root;
    t.adj_.resize(n);
    for (auto [u, v] : edges) {
        check_vertex_range(u, n, "tree edge");
        check_vertex_range(v, n, "tree edge");
        if (u == v) throw Error(ErrorKind::invalid_input, "tree: loop edge");
        t.adj_[u].push_back(v);
        t.adj_[v].push_back(u);
    }
    t.finish_construction();
    return t;
}

Tree Tree::path(int n) {
    std::vector<std::pair<VertexId, VertexId>> edges;
    for (int v = 1; v < n; ++v) edges.emplace_back(v - 1, v);
    return from_edges(n, edges, 0);
}

Tree Tree::star(int n) {
    std::vector<std::pair<VertexId, VertexId>> edges;
    for (int v = 1; v < n; ++v) edges.emplace_back(0, v);
    return from_edges(n, edges, 0);
}

const std::vector<VertexId>& Tree::adj(VertexId v) const {
    check_vertex_range(v, n_, "tree");
    return adj_[v];
}

bool Tree::has_edge(VertexId u, VertexId v) const {
    const auto& nbrs = adj(u);
    check_vertex_range(v, n_, "tree");
    return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

std::vector<VertexId> Tree::leaves() const {
    std::vector<VertexId> out;
    for (VertexId v = 0; v < n_; ++v) {
        if (is_leaf(v)) out.push_back(v);
    }
    return out;
}

int Tree::leaf_count() const {
    int c = 0;
    for (VertexId v = 0; v < n_; ++v) c += is_leaf(v) ? 1 : 0;
    return c;
}

VertexId Tree::parent(VertexId v) const {
    check_vertex_range(v, n_, "tree");
    return default_view_.parent[v];
}

Tree::Rooted Tree::rooted_at(VertexId r) const {
    check_vertex_range(r, n_, "tree root");
    Rooted view;
    view.root = r;
    view.parent.assign(n_, -2);
    view.depth.assign(n_, 0);
    view.subtree.assign(n_, 1);
    view.order.reserve(n_);
    view.parent[r] = -1;
    view.order.push_back(r);
    for (std::size_t head = 0; head < view.order.size(); ++head) {
        VertexId v = view.order[head];
        for (VertexId w : adj_[v]) {
            if (view.parent[w] != -2) continue;
            view.parent[w] = v;
            view.depth[w] = view.depth[v] + 1;
            view.order.push_back(w);
        }
    }
    for (auto it = view.order.rbegin(); it != view.order.rend(); ++it) {
        VertexId v = *it;
        if (view.parent[v] >= 0) view.subtree[view.parent[v]] += view.subtree[v];
    }
    return view;
}

int Tree::distance(VertexId u, VertexId v) const {
    check_vertex_range(u, n_, "tree");
    check_vertex_range(v, n_, "tree");
    // Walk up to the common ancestor under the default root.
    const auto& depth = default_view_.depth;
    const auto& par = default_view_.parent;
    int d = 0;
    VertexId a = u;
    VertexId b = v;
    while (depth[a] > depth[b]) {
        a = par[a];
        ++d;
    }
    while (depth[b] > depth[a]) {
        b = par[b];
        ++d;
    }
    while (a != b) {
        a = par[a];
        b = par[b];
        d += 2;
    }
    return d;
}

std::vector<std::pair<VertexId, VertexId>> Tree::edges() const {
    std::vector<std::pair<VertexId, VertexId>> out;
    out.reserve(n_ > 0 ? n_ - 1 : 0);
    for (VertexId v = 0; v < n_; ++v) {
        if (v != root_) out.emplace_back(v, default_view_.parent[v]);
    }
    return out;
}

Graph Tree::to_graph() const {
    Graph g(n_);
    for (auto [c, p] : edges()) g.add_edge(c, p);
    return g;
}

Tree Tree::induced(const VertexSet& keep, VertexId root_old,
                   std::vector<VertexId>* old_of_new) const {
    if (keep.universe() != n_) {
        throw Error(ErrorKind::invalid_input,
                    "tree induced: set universe mismatch");
    }
    if (!keep.contains(root_old)) {
        throw Error(ErrorKind::invalid_input,
                    "tree induced: root not in the kept set");
    }
    std::vector<VertexId> old_ids = keep.to_vector();
    std::vector<VertexId> new_of_old(n_, -1);
    for (std::size_t i = 0; i < old_ids.size(); ++i) {
        new_of_old[old_ids[i]] = static_cast<VertexId>(i);
    }
    std::vector<std::pair<VertexId, VertexId>> new_edges;
    new_edges.reserve(old_ids.size());
    for (VertexId v : old_ids) {
        for (VertexId w : adj_[v]) {
            if (w > v && keep.contains(w)) {
                new_edges.emplace_back(new_of_old[v], new_of_old[w]);
            }
        }
    }
    // from_edges validates the edge count and connectivity, which is
    // exactly the "keep induces a subtree" requirement.
    Tree out = from_edges(static_cast<int>(old_ids.size()), new_edges,
                          new_of_old[root_old]);
    if (old_of_new != nullptr) *old_of_new = std::move(old_ids);
    return out;
}

std::vector<VertexId> traversal_order(const Tree& t, VertexId t1) {
    Tree::Rooted view = t.rooted_at(t1);
    return view.order;
}

std::vector<VertexId> traversal_order_path_greedy(const Tree& t, VertexId t1) {
    const int n = t.size();
    std::vector<char> used(n, 0);
    std::vector<VertexId> out;
    out.reserve(n);
    out.push_back(t1);
    used[t1] = 1;
    // Candidates = unvisited neighbours of the visited prefix; prefer one
    // adjacent to the last output vertex (ascending id), else the smallest
    // candidate overall.  Either way every prefix stays connected.
    VertexSet frontier(n);
    for (VertexId w : t.adj(t1)) frontier.insert(w);
    while (static_cast<int>(out.size()) < n) {
        VertexId next = -1;
        for (VertexId w : t.adj(out.back())) {
            if (!used[w]) {
                next = w;
                break;
            }
        }
        if (next == -1) next = frontier.first();
        if (next < 0) {
            throw Error(ErrorKind::invalid_input,
                        "traversal: tree is not connected");
        }
        used[next] = 1;
        frontier.erase(next);
        for (VertexId w : t.adj(next)) {
            if (!used[w]) frontier.insert(w);
        }
        out.push_back(next);
    }
    return out;
}

VertexSet independent_leaf_set(const Tree& t, int target) {
    if (target < 1) {
        throw Error(ErrorKind::parameter,
                    "independent_leaf_set: target >= 1 required");
    }
    const int n = t.size();
    VertexSet chosen(n);
    VertexSet used_parents(n);
    for (VertexId v = 0; v < n && chosen.count() < target; ++v) {
        if (!t.is_leaf(v)) continue;
        if (t.degree(v) == 0) {  // single-vertex tree
            chosen.insert(v);
            continue;
        }
        VertexId p = t.adj(v)[0];
        if (used_parents.contains(p)) continue;
        used_parents.insert(p);
        chosen.insert(v);
    }
    return chosen;
}

Tree random_tree(int n, int max_degree, std::uint64_t seed) {
    if (n < 1) throw Error(ErrorKind::parameter, "random_tree: n >= 1");
    if (n >= 2 && max_degree < 1) {
        throw Error(ErrorKind::parameter, "random_tree: max_degree >= 1");
    }
    if (n >= 3 && max_degree < 2) {
        throw Error(ErrorKind::parameter,
                    "random_tree: max_degree >= 2 required for n >= 3");
    }
    Rng rng(seed);
    std::vector<int> degree(n, 0);
    std::vector<VertexId> open;  // vertices with spare degree
    std::vector<std::pair<VertexId, VertexId>> edges;
    open.push_back(0);
    for (VertexId v = 1; v < n; ++v) {
        std::size_t i =
            std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng);
        VertexId p = open[i];
        edges.emplace_back(p, v);
        if (++degree[p] >= max_degree) {
            open[i] = open.back();
            open.pop_back();
        }
        degree[v] = 1;
        if (degree[v] < max_degree) open.push_back(v);
    }
    return Tree::from_edges(n, edges, 0);
}

namespace {

// AHU string of the tree rooted at `root`: children encodings sorted, so the
// result is invariant under rooted isomorphism.  Bottom-up over the rooted
// order (parents precede children there), no recursion.
std::string rooted_canonical(const Tree& t, VertexId root) {
    const Tree::Rooted r = t.rooted_at(root);
    std::vector<std::string> canon(t.size());
    for (auto it = r.order.rbegin(); it != r.order.rend(); ++it) {
        const VertexId v = *it;
        std::vector<std::string> kids;
        for (VertexId u : t.adj(v)) {
            if (u != r.parent[v]) kids.push_back(canon[u]);
        }
        std::sort(kids.begin(), kids.end());
        std::string s = "(";
        for (const auto& k : kids) s += k;
        s += ")";
        canon[v] = std::move(s);
    }
    return canon[root];
}

std::vector<VertexId> centroids(const Tree& t) {
    const int n = t.size();
    const Tree::Rooted r = t.rooted_at(t.root());
    int best = n + 1;
    std::vector<VertexId> out;
    for (VertexId v = 0; v < n; ++v) {
        int worst = n - r.subtree[v];
        for (VertexId u : t.adj(v)) {
            if (u != r.parent[v]) worst = std::max(worst, r.subtree[u]);
        }
        if (worst < best) {
            best = worst;
            out.clear();
        }
        if (worst == best) out.push_back(v);
    }
    return out;
}

}  // namespace

std::string tree_canonical_form(const Tree& t) {
    std::string best;
    for (VertexId c : centroids(t)) {
        std::string s = rooted_canonical(t, c);
        if (best.empty() || s < best) best = std::move(s);
    }
    return best;
}

std::vector<Tree> all_trees(int n) {
    if (n < 1) throw Error(ErrorKind::parameter, "all_trees: n >= 1");
    // Canonical level sequences of rooted trees in reverse lexicographic
    // order (Beyer-Hedetniemi successor rule), deduplicated as free trees
    // by the centroid canonical form.
    std::map<std::string, Tree> seen;
    std::vector<int> level(n);
    for (int i = 0; i < n; ++i) level[i] = i + 1;  // the path
    for (;;) {
        std::vector<std::pair<VertexId, VertexId>> edges;
        std::vector<VertexId> last_at(n + 2, -1);
        for (int i = 0; i < n; ++i) {
            if (level[i] > 1) {
                edges.emplace_back(last_at[level[i] - 1],
                                   static_cast<VertexId>(i));
            }
            last_at[level[i]] = i;
        }
        Tree t = Tree::from_edges(n, edges, 0);
        std::string form = tree_canonical_form(t);
        seen.emplace(std::move(form), std::move(t));

        int p = -1;
        for (int i = n - 1; i >= 0; --i) {
            if (level[i] > 2) {
                p = i;
                break;
            }
        }
        if (p < 0) break;  // reached (1,2,2,...,2)
        int q = p - 1;
        while (level[q] != level[p] - 1) --q;
        for (int i = p; i < n; ++i) level[i] = level[i - (p - q)];
    }
    std::vector<Tree> out;
    out.reserve(seen.size());
    for (auto& [form, t] : seen) out.push_back(std::move(t));
    return out;
}

}  // namespace rgl
