#include "rgl/cover.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rgl/error.hpp"
#include "rgl/graph_checks.hpp"
#include "rgl/rng.hpp"
#include "rgl/tree_decompose.hpp"

namespace rgl {

namespace {

constexpr double kEps = 1e-9;

// Prefix-connected attachment order as (vertex, parent) pairs, the first
// entry being (root, -1).  Without a seed this is the breadth-first
// order; with one, the next vertex is drawn uniformly from the frontier.
std::vector<std::pair<VertexId, VertexId>> attach_order(
    const Tree& tree, VertexId root, std::optional<std::uint64_t> seed) {
    std::vector<std::pair<VertexId, VertexId>> out;
    out.reserve(tree.size());
    if (!seed) {
        Tree::Rooted view = tree.rooted_at(root);
        for (VertexId u : view.order) out.emplace_back(u, view.parent[u]);
        return out;
    }
    Rng rng(*seed);
    std::vector<char> placed(tree.size(), 0);
    std::vector<std::pair<VertexId, VertexId>> frontier;
    out.emplace_back(root, -1);
    placed[root] = 1;
    for (VertexId w : tree.adj(root)) frontier.emplace_back(w, root);
    while (!frontier.empty()) {
        std::size_t pick = std::uniform_int_distribution<std::size_t>(
            0, frontier.size() - 1)(rng);
        std::swap(frontier[pick], frontier.back());
        auto [u, pu] = frontier.back();
        frontier.pop_back();
        if (placed[u]) continue;
        placed[u] = 1;
        out.emplace_back(u, pu);
        for (VertexId w : tree.adj(u)) {
            if (!placed[w]) frontier.emplace_back(w, u);
        }
    }
    return out;
}

// One good/neutral covering pass.  Grows `state` along a prefix-connected
// traversal of `tree` from `root`, whose image is the state vertex
// `v_host`.  A good step maps the next tree vertex onto the smallest-id
// uncovered target adjacent to its parent's image (an edge addition,
// since targets already sit in the state as isolated vertices); otherwise
// a neutral leaf addition is taken.  `uncovered` loses every target the
// pass claims.  A dead end raises a stage failure naming the step.
Embedding cover_pass(ExtendableEmbedding& state, const Graph& host,
                     const Tree& tree, VertexId root, VertexId v_host,
                     VertexSet& uncovered,
                     std::optional<std::uint64_t> order_seed,
                     CoverStepCounts& counts) {
    std::vector<std::pair<VertexId, VertexId>> order =
        attach_order(tree, root, order_seed);
    Embedding phi(tree.size());
    phi.to_host[root] = v_host;
    for (std::size_t i = 1; i < order.size(); ++i) {
        auto [u, pu] = order[i];
        VertexId base = phi.to_host[pu];
        VertexId target = -1;
        for (VertexId x : host.adj(base)) {
            if (uncovered.contains(x)) {
                target = x;
                break;
            }
        }
        if (target >= 0) {
            state.add_edge(base, target);
            uncovered.erase(target);
            phi.to_host[u] = target;
            ++counts.good;
            continue;
        }
        try {
            phi.to_host[u] = state.add_leaf(base);
            ++counts.neutral;
        } catch (const Error& err) {
            if (err.kind() != ErrorKind::no_valid_leaf) throw;
            nlohmann::json detail;
            detail["step"] = static_cast<long long>(i);
            detail["tree_vertex"] = u;
            detail["uncovered"] = uncovered.count();
            throw Error(ErrorKind::stage_failure,
                        "covering pass: no step available at step " +
                            std::to_string(i) + " (tree vertex " +
                            std::to_string(u) + "): " + err.what(),
                        detail.dump());
        }
    }
    return phi;
}

// Leaves of the tree ordered for swap surgery: leaves within tree
// distance <= radius of an anchor first (their neighbourhoods are
// disjoint, so surgeries there cannot interfere), each group in
// ascending id.
std::vector<VertexId> swap_candidates(const Tree& tree,
                                      const VertexSet& anchors, int radius) {
    std::vector<int> dist(tree.size(), -1);
    std::vector<VertexId> queue;
    anchors.for_each([&](VertexId a) {
        dist[a] = 0;
        queue.push_back(a);
    });
    for (std::size_t head = 0; head < queue.size(); ++head) {
        VertexId u = queue[head];
        if (dist[u] == radius) continue;
        for (VertexId w : tree.adj(u)) {
            if (dist[w] < 0) {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    std::vector<VertexId> near, far;
    for (VertexId v = 0; v < tree.size(); ++v) {
        if (!tree.is_leaf(v)) continue;
        (dist[v] >= 0 ? near : far).push_back(v);
    }
    near.insert(near.end(), far.begin(), far.end());
    return near;
}

struct PassOutcome {
    Embedding phi;
    CoverStepCounts counts;
    int attempt = 0;
};

// Runs up to 1 + retries covering passes of `tree` against `state`
// (snapshot semantics: `state` and `uncovered` advance only on success).
// After the pass, up to `rounds` sweeps of leaf surgery re-route leaf
// images onto still-uncovered targets: detach a swappable leaf (image
// outside `targets`), re-attach its tree vertex onto an uncovered target
// adjacent to the same base.  Success means the residual is at most
// `residual_bound`.
PassOutcome run_attempts(ExtendableEmbedding& state, const Graph& host,
                         const Tree& tree, VertexId root, VertexId v_host,
                         VertexSet& uncovered, long long residual_bound,
                         int rounds, const VertexSet& targets,
                         const std::vector<VertexId>& swap_sites,
                         int retries, std::uint64_t seed) {
    std::optional<Error> last;
    for (int attempt = 0; attempt <= retries; ++attempt) {
        ExtendableEmbedding trial = state;
        std::optional<std::uint64_t> order_seed;
        if (attempt > 0) {
            order_seed = derive_seed(seed, 0x07de7ULL,
                                     static_cast<std::uint64_t>(attempt));
            trial.set_shuffle_seed(derive_seed(
                seed, 0x51abULL, static_cast<std::uint64_t>(attempt)));
        }
        VertexSet remaining = uncovered;
        CoverStepCounts counts;
        try {
            Embedding phi = cover_pass(trial, host, tree, root, v_host,
                                       remaining, order_seed, counts);
            for (int round = 1; round <= rounds; ++round) {
                if (remaining.count() <= residual_bound) break;
                for (VertexId x : remaining.to_vector()) {
                    for (VertexId b : swap_sites) {
                        if (b == root) continue;
                        VertexId w = phi.to_host[b];
                        if (w < 0 || targets.contains(w)) continue;
                        VertexId base = phi.to_host[tree.adj(b)[0]];
                        if (!host.has_edge(base, x)) continue;
                        trial.remove_leaf(base, w);
                        trial.add_edge(base, x);
                        phi.to_host[b] = x;
                        remaining.erase(x);
                        break;
                    }
                }
            }
            if (remaining.count() <= residual_bound) {
                state = std::move(trial);
                uncovered = std::move(remaining);
                return {std::move(phi), counts, attempt};
            }
            nlohmann::json detail;
            detail["residual"] = remaining.count();
            detail["bound"] = residual_bound;
            last = Error(ErrorKind::stage_failure,
                         "covering pass: residual " +
                             std::to_string(remaining.count()) +
                             " exceeds the bound " +
                             std::to_string(residual_bound),
                         detail.dump());
        } catch (const Error& err) {
            if (err.kind() != ErrorKind::no_valid_leaf &&
                err.kind() != ErrorKind::stage_failure) {
                throw;
            }
            last = err;
        }
    }
    throw *last;
}

void emit_telemetry(std::ostream* sink, const char* op, int piece,
                    long long residual, const CoverStepCounts& counts,
                    int attempt) {
    if (!sink) return;
    nlohmann::json line;
    line["op"] = op;
    line["piece"] = piece;
    line["residual"] = residual;
    line["good_steps"] = counts.good;
    line["neutral_steps"] = counts.neutral;
    line["attempt"] = attempt;
    *sink << line.dump() << "\n";
}

void assert_valid(const Tree& tree, const Graph& host, const Embedding& phi,
                  bool require_complete, const char* op) {
    std::string fault = embedding_fault(tree, host, phi, require_complete);
    if (!fault.empty()) {
        throw Error(ErrorKind::contract,
                    std::string(op) + ": invalid embedding produced: " +
                        fault);
    }
}

}  // namespace

CoverTask::CoverTask(const Graph& host_graph, VertexSet x, VertexId anchor,
                     const Tree& tree_ref, VertexId root, int d_param,
                     int m_param, double gamma_param, ExtendOptions opts)
    : host(&host_graph),
      X(std::move(x)),
      v(anchor),
      tree(&tree_ref),
      t(root),
      d(d_param),
      m(m_param),
      gamma(gamma_param),
      options(std::move(opts)) {
    if (X.universe() != host->size()) {
        throw Error(ErrorKind::invalid_input,
                    "cover task: X lives in a different universe than the "
                    "host");
    }
    if (v < 0 || v >= host->size() || X.contains(v)) {
        throw Error(ErrorKind::invalid_input,
                    "cover task: anchor v must be a host vertex outside X");
    }
    if (t < 0 || t >= tree->size()) {
        throw Error(ErrorKind::invalid_input,
                    "cover task: root t is not a tree vertex");
    }
    if (d < 3 || m < 1) {
        throw Error(ErrorKind::parameter, "cover task: need d >= 3, m >= 1");
    }
    if (gamma <= 0.0 || gamma >= 1.0) {
        throw Error(ErrorKind::parameter, "cover task: gamma in (0, 1)");
    }
    if (options.verify) {
        ExtendableEmbedding probe(*host, d, m, m, options);
        X.for_each([&](VertexId u) { probe.add_isolated(u); });
        probe.add_isolated(v);
        ExtendabilityCheck c = probe.check();
        if (!c.ok) {
            throw Error(ErrorKind::invalid_input,
                        "cover task: the isolated target set X u {v} is "
                        "not (d,m)-extendable in the host");
        }
    }
}

Embedding cover_most(const CoverTask& task) {
    const Graph& host = *task.host;
    const Tree& tree = *task.tree;
    const int delta = tree.max_degree();
    if (task.d < delta) {
        throw Error(ErrorKind::parameter,
                    "cover_most: need d >= max degree of the tree");
    }
    const long long tree_floor =
        static_cast<long long>(task.X.count()) +
        static_cast<long long>(delta) * task.m + 2;
    if (tree.size() < tree_floor) {
        throw Error(ErrorKind::parameter,
                    "cover_most: |T| = " + std::to_string(tree.size()) +
                        " below |X| + max_degree*m + 2 = " +
                        std::to_string(tree_floor));
    }
    const long long host_floor = static_cast<long long>(tree.size()) +
                                 (2LL * task.d + 4) * task.m + 1;
    if (host.size() < host_floor && task.options.enforce_size) {
        throw Error(ErrorKind::size_hypothesis,
                    "cover_most: |G| = " + std::to_string(host.size()) +
                        " below |T| + (2d+4)m + 1 = " +
                        std::to_string(host_floor));
    }

    ExtendableEmbedding state(host, task.d, task.m, task.m, task.options);
    task.X.for_each([&](VertexId u) { state.add_isolated(u); });
    state.add_isolated(task.v);
    VertexSet uncovered = task.X;
    PassOutcome out = run_attempts(
        state, host, tree, task.t, task.v, uncovered,
        static_cast<long long>(task.m) - 1, /*rounds=*/0, task.X,
        /*swap_sites=*/{}, task.retries, task.seed);
    assert_valid(tree, host, out.phi, true, "cover_most");
    emit_telemetry(task.telemetry, "cover_most", 1, uncovered.count(),
                   out.counts, out.attempt);
    return out.phi;
}

Embedding cover_separated(const Graph& host, ExtendableEmbedding& state,
                          const VertexSet& X, const Tree& tree, VertexId t,
                          VertexId r, int d, int m, int k, int retries,
                          std::uint64_t seed, std::ostream* telemetry,
                          CoverStepCounts* counts_out) {
    if (&host != &state.host()) {
        throw Error(ErrorKind::invalid_input,
                    "cover_separated: state belongs to a different host");
    }
    if (d != state.d() || m != state.m()) {
        throw Error(ErrorKind::parameter,
                    "cover_separated: d, m must match the state's");
    }
    if (k < 0) throw Error(ErrorKind::parameter, "cover_separated: k >= 0");
    if (t < 0 || t >= tree.size()) {
        throw Error(ErrorKind::invalid_input,
                    "cover_separated: t is not a tree vertex");
    }
    if (!state.contains(r) || X.contains(r)) {
        throw Error(ErrorKind::invalid_input,
                    "cover_separated: r must be a state vertex outside X");
    }
    bool bad_target = false;
    X.for_each([&](VertexId x) {
        if (!state.contains(x) || state.s_degree(x) != 0) bad_target = true;
    });
    if (bad_target) {
        throw Error(ErrorKind::invalid_input,
                    "cover_separated: X must sit in the state as isolated "
                    "vertices");
    }
    const bool enforce = state.options().enforce_size;
    if (4 * tree.max_degree() > d || 4 * state.max_s_degree() > d) {
        if (enforce) {
            throw Error(ErrorKind::parameter,
                        "cover_separated: tree and state max degrees must "
                        "be at most d/4");
        }
    }

    // Swap sites prefer leaves near a (4k+4)-separated set of the tree,
    // whose surgery neighbourhoods are pairwise disjoint.
    VertexSet anchors(tree.size());
    std::string sep_note;
    if (!X.empty()) {
        try {
            anchors = separated_set(tree, 2 * k + 1);
        } catch (const Error&) {
            // below the separated-set size threshold; handled with `need`
        }
        const long long need = 3LL * X.count();
        if (anchors.count() < need) {
            if (enforce) {
                throw Error(ErrorKind::parameter,
                            "cover_separated: the tree has no (4k+4)-"
                            "separated set of size 3|X| = " +
                                std::to_string(need));
            }
            sep_note = "separated set smaller than 3|X|";
        }
    }
    const long long size_floor = static_cast<long long>(host.size()) -
                                 10LL * d * m - 2 * k;
    if (state.size() + tree.size() - 1 > size_floor && enforce) {
        throw Error(ErrorKind::size_hypothesis,
                    "cover_separated: |R| + |X| + |T| exceeds |G| - 10dm - "
                    "2k = " + std::to_string(size_floor));
    }

    const double bound_real =
        2.0 * m / std::pow(static_cast<double>(d) - 1.0, k);
    const long long bound =
        static_cast<long long>(std::floor(bound_real + kEps));
    VertexSet uncovered = X;
    PassOutcome out = run_attempts(state, host, tree, t, r, uncovered, bound,
                                   /*rounds=*/k, X,
                                   swap_candidates(tree, anchors, 2 * k + 1),
                                   retries, seed);
    assert_valid(tree, host, out.phi, true, "cover_separated");
    emit_telemetry(telemetry, "cover_separated", 0, uncovered.count(),
                   out.counts, out.attempt);
    if (counts_out) *counts_out = out.counts;
    return out.phi;
}

Embedding embed_covering(const CoverTask& task) {
    const Graph& host = *task.host;
    const Tree& tree = *task.tree;
    const int n_t = tree.size();
    const int delta = tree.max_degree();
    const bool enforce = task.options.enforce_size;

    if (task.d < delta) {
        throw Error(ErrorKind::parameter,
                    "embed_covering: need d >= max degree of the tree");
    }
    if (task.gamma <= 0.0 || task.gamma >= 0.1) {
        throw Error(ErrorKind::parameter,
                    "embed_covering: gamma in (0, 1/10)");
    }
    if (task.X.count() > (1.0 - task.gamma) * n_t + kEps) {
        throw Error(ErrorKind::parameter,
                    "embed_covering: |X| = " + std::to_string(task.X.count()) +
                        " exceeds (1-gamma)|T|");
    }
    VertexId t_prime = -1;
    if (task.t_prime) {
        t_prime = *task.t_prime;
        if (t_prime == task.t || t_prime < 0 || t_prime >= n_t ||
            !tree.is_leaf(t_prime)) {
            throw Error(ErrorKind::parameter,
                        "embed_covering: t' must be a leaf different from t");
        }
    } else {
        for (VertexId leaf : tree.leaves()) {
            if (leaf != task.t) {
                t_prime = leaf;
                break;
            }
        }
        if (t_prime < 0) {
            throw Error(ErrorKind::parameter,
                        "embed_covering: the tree has no leaf other than t");
        }
    }
    if (enforce) {
        if (task.d < 20) {
            throw Error(ErrorKind::parameter, "embed_covering: d >= 20");
        }
        if (static_cast<double>(task.m) < std::pow(task.d, 8)) {
            throw Error(ErrorKind::size_hypothesis,
                        "embed_covering: m >= d^8 fails");
        }
        if (static_cast<long long>(n_t) < 2LL * task.d * task.d * task.m) {
            throw Error(ErrorKind::size_hypothesis,
                        "embed_covering: |T| >= 2 d^2 m fails");
        }
        if (host.size() <
            static_cast<long long>(n_t) + 20LL * task.d * task.m) {
            throw Error(ErrorKind::size_hypothesis,
                        "embed_covering: |G| >= |T| + 20dm fails");
        }
    }
    if (task.options.verify) {
        JoinedResult j = is_joined(host, task.m, task.m, task.options.budget);
        if (!j.joined) {
            throw Error(ErrorKind::invalid_input,
                        "embed_covering: the host is not m-joined");
        }
    }

    // Work on T' = T - t'; t' is re-attached last, automatically landing
    // outside X since X is covered by then.
    VertexSet keep = VertexSet::full(n_t);
    keep.erase(t_prime);
    const VertexId s_attach = tree.adj(t_prime)[0];
    std::vector<VertexId> orig_of_tp;
    Tree tp = tree.induced(keep, task.t, &orig_of_tp);
    std::vector<VertexId> tp_of_orig(n_t, -1);
    for (std::size_t i = 0; i < orig_of_tp.size(); ++i) {
        tp_of_orig[orig_of_tp[i]] = static_cast<VertexId>(i);
    }
    const VertexId t_tp = tp_of_orig[task.t];

    // Smallest piece count whose final residual bound 2m/(d-1)^(pieces-1)
    // drops below one.
    int pieces = 1;
    double power = 1.0;
    while (2.0 * task.m / power >= 1.0) {
        power *= task.d - 1.0;
        ++pieces;
    }
    TreeDecomposition dec = fixed_length_decomposition(
        tp, task.gamma / 5.0, pieces, t_tp, enforce);
    const int stages = static_cast<int>(dec.subtrees.size());

    ExtendableEmbedding state(host, task.d, task.m, task.m, task.options);
    task.X.for_each([&](VertexId u) { state.add_isolated(u); });
    state.add_isolated(task.v);
    VertexSet uncovered = task.X;
    Embedding phi(n_t);
    std::vector<VertexId> phi_tp(tp.size(), -1);

    for (int j = 0; j < stages; ++j) {
        const VertexId root_tp = j == 0 ? t_tp : dec.link_vertices[j - 1];
        const VertexId r_host = j == 0 ? task.v : phi_tp[root_tp];
        std::vector<VertexId> tp_of_piece;
        Tree piece = tp.induced(dec.subtrees[j], root_tp, &tp_of_piece);
        const VertexId root_piece = static_cast<VertexId>(
            std::lower_bound(tp_of_piece.begin(), tp_of_piece.end(),
                             root_tp) -
            tp_of_piece.begin());

        Embedding phi_piece;
        CoverStepCounts counts;
        int attempt_used = 0;
        try {
            if (j == 0) {
                PassOutcome out = run_attempts(
                    state, host, piece, root_piece, r_host, uncovered,
                    static_cast<long long>(task.m) - 1, /*rounds=*/0, task.X,
                    {}, task.retries, derive_seed(task.seed, 0xc0, 0));
                phi_piece = std::move(out.phi);
                counts = out.counts;
                attempt_used = out.attempt;
            } else {
                phi_piece = cover_separated(
                    host, state, uncovered, piece, root_piece, r_host,
                    task.d, task.m, /*k=*/j, task.retries,
                    derive_seed(task.seed, 0xc0,
                                static_cast<std::uint64_t>(j)),
                    nullptr, &counts);
            }
        } catch (const Error& err) {
            if (err.kind() != ErrorKind::stage_failure &&
                err.kind() != ErrorKind::no_valid_leaf) {
                throw;
            }
            nlohmann::json detail;
            detail["piece"] = j + 1;
            detail["residual"] = uncovered.count();
            detail["inner"] = err.detail().empty()
                                  ? nlohmann::json()
                                  : nlohmann::json::parse(err.detail());
            throw Error(ErrorKind::stage_failure,
                        "embed_covering: piece " + std::to_string(j + 1) +
                            " of " + std::to_string(stages) +
                            " failed: " + err.what(),
                        detail.dump());
        }
        for (std::size_t pv = 0; pv < tp_of_piece.size(); ++pv) {
            const VertexId tpv = tp_of_piece[pv];
            const VertexId w = phi_piece.to_host[static_cast<VertexId>(pv)];
            phi_tp[tpv] = w;
            phi.to_host[orig_of_tp[tpv]] = w;
            if (uncovered.contains(w)) uncovered.erase(w);
        }
        emit_telemetry(task.telemetry, "embed_covering", j + 1,
                       uncovered.count(), counts, attempt_used);
    }

    if (!uncovered.empty()) {
        nlohmann::json detail;
        detail["piece"] = stages;
        detail["residual"] = uncovered.count();
        throw Error(ErrorKind::stage_failure,
                    "embed_covering: " + std::to_string(uncovered.count()) +
                        " target vertices remain uncovered after piece " +
                        std::to_string(stages),
                    detail.dump());
    }

    phi.to_host[t_prime] = state.add_leaf(phi_tp[tp_of_orig[s_attach]]);
    assert_valid(tree, host, phi, true, "embed_covering");
    return phi;
}

}  // namespace rgl
