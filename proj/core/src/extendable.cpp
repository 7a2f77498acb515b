#include "rgl/extendable.hpp"

#include <algorithm>
#include <string>

#include <nlohmann/json.hpp>

#include "rgl/detail/subset_scan.hpp"
#include "rgl/error.hpp"
#include "rgl/rng.hpp"

namespace rgl {

std::string embedding_fault(const Tree& t, const Graph& host,
                            const Embedding& e, bool require_complete) {
    if (static_cast<int>(e.to_host.size()) != t.size()) {
        return "embedding indexes " + std::to_string(e.to_host.size()) +
               " tree vertices, tree has " + std::to_string(t.size());
    }
    VertexSet used(host.size());
    for (VertexId tv = 0; tv < t.size(); ++tv) {
        VertexId hv = e.to_host[tv];
        if (hv < 0) {
            if (require_complete) {
                return "tree vertex " + std::to_string(tv) + " unmapped";
            }
            continue;
        }
        if (hv >= host.size()) {
            return "image " + std::to_string(hv) + " outside host";
        }
        if (used.contains(hv)) {
            return "image " + std::to_string(hv) + " used twice";
        }
        used.insert(hv);
    }
    for (auto [c, p] : t.edges()) {
        if (e.to_host[c] < 0 || e.to_host[p] < 0) continue;
        if (!host.has_edge(e.to_host[c], e.to_host[p])) {
            return "tree edge (" + std::to_string(c) + "," +
                   std::to_string(p) + ") maps to the non-edge (" +
                   std::to_string(e.to_host[c]) + "," +
                   std::to_string(e.to_host[p]) + ")";
        }
    }
    return "";
}

ExtendableEmbedding::ExtendableEmbedding(const Graph& host, int d, int m,
                                         int m_prime, ExtendOptions options)
    : host_(&host),
      d_(d),
      m_(m),
      m_prime_(m_prime),
      options_(std::move(options)),
      vertices_(host.size()),
      s_adj_(host.size()),
      s_degree_(host.size(), 0),
      outside_degree_(host.size(), 0) {
    if (d_ < 3 || m_ < 1 || m_prime_ < 1) {
        throw Error(ErrorKind::parameter,
                    "extendable embedding: need d >= 3, m >= 1, m' >= 1");
    }
    for (VertexId v = 0; v < host.size(); ++v) {
        outside_degree_[v] = host.degree(v);
    }
}

void ExtendableEmbedding::insert_vertex(VertexId v) {
    vertices_.insert(v);
    for (VertexId x : host_->adj(v)) --outside_degree_[x];
}

void ExtendableEmbedding::erase_vertex(VertexId v) {
    vertices_.erase(v);
    for (VertexId x : host_->adj(v)) ++outside_degree_[x];
}

void ExtendableEmbedding::add_isolated(VertexId v) {
    if (vertices_.contains(v)) {
        throw Error(ErrorKind::invalid_input,
                    "add_isolated: vertex already in S");
    }
    insert_vertex(v);
}

bool ExtendableEmbedding::singleton_ok(VertexId u) const {
    if (vertices_.contains(u)) {
        return outside_degree_[u] >= d_ - s_degree_[u];
    }
    return outside_degree_[u] >= d_ - 1;
}

void ExtendableEmbedding::record_audit(const std::string& message) {
    if (audits_.size() < 32) {
        audits_.push_back(message);
    } else {
        ++audit_overflow_;
    }
}

bool ExtendableEmbedding::candidate_ok(VertexId s, VertexId y) {
    insert_vertex(y);
    s_adj_[s].insert(std::lower_bound(s_adj_[s].begin(), s_adj_[s].end(), y),
                     y);
    s_adj_[y].push_back(s);
    ++s_degree_[s];
    ++s_degree_[y];
    max_s_degree_ = std::max(max_s_degree_, std::max(s_degree_[s],
                                                     s_degree_[y]));

    bool ok;
    if (options_.verify) {
        ok = check().ok;
    } else {
        // Only s, y and y's host neighbours can have a newly violated
        // singleton condition.
        ok = singleton_ok(s) && singleton_ok(y);
        if (ok) {
            for (VertexId x : host_->adj(y)) {
                if (!singleton_ok(x)) {
                    ok = false;
                    break;
                }
            }
        }
    }
    if (!ok) {
        --s_degree_[s];
        --s_degree_[y];
        s_adj_[s].erase(
            std::lower_bound(s_adj_[s].begin(), s_adj_[s].end(), y));
        s_adj_[y].clear();
        erase_vertex(y);
        // max_s_degree_ may momentarily overestimate; recompute cheaply.
        max_s_degree_ = 0;
        vertices_.for_each([&](VertexId v) {
            max_s_degree_ = std::max(max_s_degree_, s_degree_[v]);
        });
    }
    return ok;
}

VertexId ExtendableEmbedding::add_leaf(VertexId s) {
    return add_leaf(s, VertexSet::full(host_->size()));
}

VertexId ExtendableEmbedding::add_leaf(VertexId s, const VertexSet& allowed) {
    if (!vertices_.contains(s)) {
        throw Error(ErrorKind::invalid_input, "add_leaf: s not in V(S)");
    }
    if (s_degree_[s] > d_ - 1) {
        throw Error(ErrorKind::parameter,
                    "add_leaf: d_S(s) = " + std::to_string(s_degree_[s]) +
                        " exceeds d-1 = " + std::to_string(d_ - 1));
    }
    const long long required =
        static_cast<long long>(size()) + (2LL * d_ + 2) * m_ + m_prime_ + 1;
    std::string size_note;
    if (host_->size() < required) {
        size_note = "|G| = " + std::to_string(host_->size()) +
                    " < |S| + (2d+2)m + m' + 1 = " + std::to_string(required);
        if (options_.enforce_size) {
            throw Error(ErrorKind::size_hypothesis, "add_leaf: " + size_note);
        }
        record_audit("add_leaf: " + size_note);
    }

    std::vector<VertexId> candidates;
    for (VertexId y : host_->adj(s)) {
        if (!vertices_.contains(y) && allowed.contains(y)) {
            candidates.push_back(y);
        }
    }
    if (options_.shuffle_seed) {
        Rng rng(derive_seed(*options_.shuffle_seed,
                            static_cast<std::uint64_t>(s),
                            static_cast<std::uint64_t>(size())));
        std::shuffle(candidates.begin(), candidates.end(), rng);
    }
    for (VertexId y : candidates) {
        if (candidate_ok(s, y)) return y;
    }

    nlohmann::json detail;
    detail["s"] = s;
    detail["candidates_tried"] = candidates.size();
    detail["s_size"] = size();
    if (!size_note.empty()) detail["size_audit"] = size_note;
    throw Error(ErrorKind::no_valid_leaf,
                "add_leaf: no neighbour of " + std::to_string(s) +
                    " keeps S extendable (" +
                    std::to_string(candidates.size()) + " candidates)",
                detail.dump());
}

void ExtendableEmbedding::remove_leaf(VertexId s, VertexId y) {
    if (!vertices_.contains(y) || !vertices_.contains(s)) {
        throw Error(ErrorKind::invalid_input,
                    "remove_leaf: both endpoints must be in V(S)");
    }
    if (s_degree_[y] != 1 || s_adj_[y][0] != s) {
        throw Error(ErrorKind::invalid_input,
                    "remove_leaf: y is not a leaf of S attached at s");
    }
    --s_degree_[s];
    --s_degree_[y];
    s_adj_[s].erase(std::lower_bound(s_adj_[s].begin(), s_adj_[s].end(), y));
    s_adj_[y].clear();
    erase_vertex(y);
    max_s_degree_ = 0;
    vertices_.for_each([&](VertexId v) {
        max_s_degree_ = std::max(max_s_degree_, s_degree_[v]);
    });
    if (options_.verify) {
        ExtendabilityCheck c = check();
        if (!c.ok) {
            throw Error(ErrorKind::contract,
                        "remove_leaf: resulting S fails the extendability "
                        "re-check");
        }
    }
}

void ExtendableEmbedding::add_edge(VertexId s, VertexId t) {
    if (!vertices_.contains(s) || !vertices_.contains(t)) {
        throw Error(ErrorKind::invalid_input,
                    "add_edge: both endpoints must be in V(S)");
    }
    if (!host_->has_edge(s, t)) {
        throw Error(ErrorKind::invalid_input,
                    "add_edge: st is not a host edge");
    }
    if (s_degree_[s] > d_ - 1 || s_degree_[t] > d_ - 1) {
        throw Error(ErrorKind::parameter,
                    "add_edge: an endpoint already has S-degree d");
    }
    if (std::binary_search(s_adj_[s].begin(), s_adj_[s].end(), t)) {
        throw Error(ErrorKind::invalid_input, "add_edge: edge already in S");
    }
    s_adj_[s].insert(std::lower_bound(s_adj_[s].begin(), s_adj_[s].end(), t),
                     t);
    s_adj_[t].insert(std::lower_bound(s_adj_[t].begin(), s_adj_[t].end(), s),
                     s);
    ++s_degree_[s];
    ++s_degree_[t];
    max_s_degree_ = std::max(max_s_degree_, std::max(s_degree_[s],
                                                     s_degree_[t]));
    if (options_.verify) {
        ExtendabilityCheck c = check();
        if (!c.ok) {
            throw Error(ErrorKind::contract,
                        "add_edge: resulting S fails the extendability "
                        "re-check");
        }
    }
}

ExtendabilityCheck ExtendableEmbedding::check() const {
    ExtendabilityCheck res;
    if (max_s_degree_ > d_) {
        VertexId bad = -1;
        vertices_.for_each([&](VertexId v) {
            if (bad == -1 && s_degree_[v] > d_) bad = v;
        });
        res.ok = false;
        res.over_degree = bad;
        return res;
    }
    const int n = host_->size();
    for (VertexId u = 0; u < n; ++u) {
        if (!singleton_ok(u)) {
            res.ok = false;
            res.witness = VertexSet::of(n, {u});
            return res;
        }
    }
    res.ok = true;

    std::vector<VertexId> pool(n);
    for (VertexId v = 0; v < n; ++v) pool[v] = v;
    const VerifyBudget& budget = options_.budget;
    for (int s = 2; s <= 2 * m_; ++s) {
        if (s > n) break;
        auto leaf = [&](const std::vector<VertexId>& members,
                        const VertexSet& member_bits,
                        const VertexSet& row_union) {
            (void)member_bits;
            VertexSet outside = row_union;
            outside -= vertices_;
            long long rhs =
                (static_cast<long long>(d_) - 1) * members.size();
            for (VertexId u : members) {
                if (vertices_.contains(u)) rhs -= s_degree_[u] - 1;
            }
            if (outside.count() < rhs) {
                res.ok = false;
                res.witness = member_bits;
                return true;
            }
            return false;
        };
        long long cnt = subset_count_capped(n, s, budget.exact_enum_cap + 1);
        if (budget.exact_ok(cnt)) {
            if (detail::scan_subsets_exact(*host_, pool, s, leaf)) return res;
        } else {
            res.mode = VerifyMode::sampled;
            Rng rng(derive_seed(budget.sample_seed,
                                0x1eaf00ULL + static_cast<std::uint64_t>(s),
                                static_cast<std::uint64_t>(size())));
            if (detail::scan_subsets_sampled(*host_, pool, s,
                                             budget.sample_trials, rng,
                                             leaf)) {
                return res;
            }
        }
    }
    return res;
}

ExpanderResult check_extendable_external(const Graph& g,
                                         const VertexSet& s_vertices, int d,
                                         int m, const VerifyBudget& budget) {
    VertexSet outside = VertexSet::full(g.size());
    outside -= s_vertices;
    return has_relative_expansion(g, VertexSet::full(g.size()), outside,
                                  static_cast<double>(d), 2 * m, budget);
}

Embedding embed_tree_extendably(const Graph& g, ExtendableEmbedding& r,
                                const Tree& tree, VertexId t, VertexId v) {
    if (&g != &r.host()) {
        throw Error(ErrorKind::invalid_input,
                    "embed_tree_extendably: embedding state belongs to a "
                    "different host");
    }
    if (!r.contains(v)) {
        throw Error(ErrorKind::invalid_input,
                    "embed_tree_extendably: v must lie in V(R)");
    }
    if (2 * tree.max_degree() > r.d()) {
        throw Error(ErrorKind::parameter,
                    "embed_tree_extendably: tree max degree " +
                        std::to_string(tree.max_degree()) + " exceeds d/2");
    }
    if (2 * r.max_s_degree() > r.d()) {
        throw Error(ErrorKind::parameter,
                    "embed_tree_extendably: R max degree " +
                        std::to_string(r.max_s_degree()) + " exceeds d/2");
    }
    const long long budget_size = static_cast<long long>(g.size()) -
                                  (2LL * r.d() + 2) * r.m() - r.m_prime();
    if (r.size() + tree.size() > budget_size) {
        std::string note = "|R| + |T| = " +
                           std::to_string(r.size() + tree.size()) +
                           " > |G| - (2d+2)m - m' = " +
                           std::to_string(budget_size);
        if (r.options().enforce_size) {
            throw Error(ErrorKind::size_hypothesis,
                        "embed_tree_extendably: " + note);
        }
        r.record_audit("embed_tree_extendably: " + note);
    }

    Tree::Rooted view = tree.rooted_at(t);
    Embedding phi(tree.size());
    phi.to_host[t] = v;
    for (std::size_t i = 1; i < view.order.size(); ++i) {
        VertexId u = view.order[i];
        VertexId attach = phi.to_host[view.parent[u]];
        try {
            phi.to_host[u] = r.add_leaf(attach);
        } catch (const Error& err) {
            if (err.kind() != ErrorKind::no_valid_leaf) throw;
            nlohmann::json detail;
            detail["tree_vertex"] = u;
            detail["embedded_before_failure"] = static_cast<long long>(i);
            detail["inner"] = err.detail().empty()
                                  ? nlohmann::json()
                                  : nlohmann::json::parse(err.detail());
            throw Error(ErrorKind::no_valid_leaf,
                        "embed_tree_extendably: stuck at tree vertex " +
                            std::to_string(u) + " (" + std::to_string(i) +
                            " of " + std::to_string(tree.size() - 1) +
                            " attachments done): " + err.what(),
                        detail.dump());
        }
    }
    return phi;
}

}  // namespace rgl
