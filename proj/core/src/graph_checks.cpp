#include "rgl/graph_checks.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rgl/detail/subset_scan.hpp"
#include "rgl/error.hpp"
#include "rgl/rng.hpp"

namespace rgl {

namespace {

// Slack for `count >= d * size` comparisons with a floating-point rate.
constexpr double kEps = 1e-9;

nlohmann::json set_to_json(const VertexSet& s) {
    return nlohmann::json(s.to_vector());
}

std::string pair_detail(const VertexSet& a, const VertexSet& b) {
    nlohmann::json j;
    j["a"] = set_to_json(a);
    j["b"] = set_to_json(b);
    return j.dump();
}

// Shared engine: for every U subseteq universe with 1 <= |U| <= m, require
// |N(U) cap target| >= d |U|, where N is the external neighbourhood.
// Sizes are scanned ascending and subsets in lexicographic order, so a
// reported witness is minimal by (size, lex) whenever the size ran exactly.
ExpanderResult expansion_check(const Graph& g, const VertexSet& universe,
                               const VertexSet& target, double d, int m,
                               const VerifyBudget& budget,
                               std::uint64_t seed_tag) {
    if (m < 1) {
        throw Error(ErrorKind::parameter, "expansion check needs m >= 1");
    }
    if (d < 0) {
        throw Error(ErrorKind::parameter, "expansion rate d must be >= 0");
    }
    ExpanderResult res;
    res.expander = true;

    const std::vector<VertexId> pool = universe.to_vector();
    const int p = static_cast<int>(pool.size());
    for (int s = 1; s <= std::min(m, p); ++s) {
        auto leaf = [&](const std::vector<VertexId>& members,
                        const VertexSet& member_bits,
                        const VertexSet& row_union) {
            VertexSet reach = row_union;
            reach -= member_bits;
            reach &= target;
            if (static_cast<double>(reach.count()) + kEps <
                d * static_cast<double>(members.size())) {
                res.expander = false;
                res.witness = member_bits;
                return true;
            }
            return false;
        };
        long long cnt = subset_count_capped(p, s, budget.exact_enum_cap + 1);
        if (budget.exact_ok(cnt)) {
            if (detail::scan_subsets_exact(g, pool, s, leaf)) return res;
        } else {
            res.mode = VerifyMode::sampled;
            Rng rng(derive_seed(budget.sample_seed, seed_tag,
                                (static_cast<std::uint64_t>(s) << 32) |
                                    static_cast<std::uint64_t>(p)));
            if (detail::scan_subsets_sampled(g, pool, s, budget.sample_trials,
                                             rng, leaf)) {
                return res;
            }
        }
    }
    return res;
}

}  // namespace

JoinedResult is_joined_in(const Graph& g, const VertexSet& inside, int m,
                          int m2, const VerifyBudget& budget) {
    if (m < 1 || m2 < 1) {
        throw Error(ErrorKind::parameter, "is_joined needs m, m2 >= 1");
    }
    JoinedResult res;
    res.joined = true;

    const std::vector<VertexId> pool = inside.to_vector();
    const int p = static_cast<int>(pool.size());
    if (m + m2 > p) return res;  // no disjoint pair of these sizes fits

    auto leaf = [&](const std::vector<VertexId>&, const VertexSet& member_bits,
                    const VertexSet& row_union) {
        VertexSet covered = row_union;
        covered &= inside;
        covered |= member_bits;
        if (p - covered.count() >= m2) {
            VertexSet rest = inside;
            rest -= covered;
            res.joined = false;
            res.witness = {member_bits, rest.take(m2)};
            return true;
        }
        return false;
    };
    long long cnt = subset_count_capped(p, m, budget.exact_enum_cap + 1);
    if (budget.exact_ok(cnt)) {
        detail::scan_subsets_exact(g, pool, m, leaf);
    } else {
        res.mode = VerifyMode::sampled;
        Rng rng(derive_seed(budget.sample_seed, 0x6a01ULL,
                            (static_cast<std::uint64_t>(m) << 32) |
                                static_cast<std::uint64_t>(p)));
        detail::scan_subsets_sampled(g, pool, m, budget.sample_trials, rng,
                                     leaf);
    }
    return res;
}

JoinedResult is_joined(const Graph& g, int m, int m2,
                       const VerifyBudget& budget) {
    return is_joined_in(g, VertexSet::full(g.size()), m, m2, budget);
}

ExpanderResult is_expander(const Graph& g, double d, int m,
                           const VerifyBudget& budget) {
    VertexSet all = VertexSet::full(g.size());
    return expansion_check(g, all, all, d, m, budget, 0xe4b0ULL);
}

ExpanderResult is_expander_in(const Graph& g, const VertexSet& inside,
                              double d, int m, const VerifyBudget& budget) {
    return expansion_check(g, inside, inside, d, m, budget, 0xe4b1ULL);
}

ExpanderResult has_relative_expansion(const Graph& g, const VertexSet& universe,
                                      const VertexSet& target, double d, int m,
                                      const VerifyBudget& budget) {
    return expansion_check(g, universe, target, d, m, budget, 0xe4b2ULL);
}

namespace {

// Greedy absorption core shared by both prune procedures.  Repeatedly finds
// a set U (|U| <= m) inside `universe` minus W violating expansion into
// `target` minus W, and folds it into W.  By induction |N(W) cap target| <=
// d|W| throughout, so if W ever reaches size m the input cannot have been
// (m, n0)-joined, and we raise a contract error carrying a witness pair.
VertexSet absorb_violators(const Graph& g, const VertexSet& universe,
                           const VertexSet& target, int m, int n0, double d,
                           const VerifyBudget& budget, VerifyMode* mode_out) {
    const int n = g.size();
    VertexSet w(n);
    while (true) {
        VertexSet uni = universe;
        uni -= w;
        VertexSet tgt = target;
        tgt -= w;
        ExpanderResult step =
            has_relative_expansion(g, uni, tgt, d, m, budget);
        if (step.mode == VerifyMode::sampled && mode_out != nullptr) {
            *mode_out = VerifyMode::sampled;
        }
        if (step.expander) return w;
        w |= *step.witness;
        if (w.count() >= m) {
            // Joinedness of the input must fail: |W| <= 2m and W's
            // neighbourhood in the target is at most d|W|, so an m-subset A
            // of W plus n0 untouched target vertices form a non-adjacent
            // pair.
            VertexSet a = w.take(m);
            VertexSet b = target;
            b -= w;
            b -= external_neighbourhood(g, a);
            if (b.count() < n0) {
                throw Error(ErrorKind::size_hypothesis,
                            "prune: host too small to certify the joinedness "
                            "violation (need " +
                                std::to_string(n0) + " non-neighbours, have " +
                                std::to_string(b.count()) + ")");
            }
            throw Error(ErrorKind::contract,
                        "prune: input is not (" + std::to_string(m) + ", " +
                            std::to_string(n0) +
                            ")-joined; witness pair attached",
                        pair_detail(a, b.take(std::max(n0, 1))));
        }
    }
}

}  // namespace

PruneResult prune_to_expander(const Graph& g, int m, int n0, double d,
                              const VerifyBudget& budget) {
    if (m < 1) throw Error(ErrorKind::parameter, "prune_to_expander: m >= 1");
    if (n0 < 0 || d <= 0) {
        throw Error(ErrorKind::parameter,
                    "prune_to_expander: need n0 >= 0 and d > 0");
    }
    const int n = g.size();
    if (static_cast<double>(n) + kEps < n0 + (2 * d + 2) * m) {
        throw Error(ErrorKind::size_hypothesis,
                    "prune_to_expander: |G| = " + std::to_string(n) +
                        " < n0 + (2d+2)m = " +
                        std::to_string(n0 + (2 * d + 2) * m));
    }

    PruneResult out;
    out.mode = VerifyMode::exact;
    VertexSet all = VertexSet::full(n);
    out.removed = absorb_violators(g, all, all, m, n0, d, budget, &out.mode);
    out.m_prime = m - out.removed.count();

    // The loop's exit condition is exactly "G - W is a (d, m)-expander"; the
    // joinedness half of the guarantee is asserted here.
    VertexSet rest = all;
    rest -= out.removed;
    const int m2 = n0 + static_cast<int>(std::ceil(d * m - kEps));
    JoinedResult joined = is_joined_in(g, rest, out.m_prime, m2, budget);
    if (joined.mode == VerifyMode::sampled) out.mode = VerifyMode::sampled;
    if (!joined.joined) {
        // Lift the witness back to the input graph: A' u W is an m-set, and
        // at least n0 of B' survive removing N(W).
        VertexSet a = joined.witness->first;
        a |= out.removed;
        VertexSet b = joined.witness->second;
        b -= external_neighbourhood(g, out.removed);
        b -= out.removed;
        throw Error(ErrorKind::contract,
                    "prune_to_expander: pruned graph is not (" +
                        std::to_string(out.m_prime) + ", " +
                        std::to_string(m2) +
                        ")-joined, so the input was not (" +
                        std::to_string(m) + ", " + std::to_string(n0) +
                        ")-joined; witness pair attached",
                    pair_detail(a, b.take(std::max(std::min(n0, b.count()),
                                                   1))));
    }
    return out;
}

VertexSet prune_relative_expansion(const Graph& g, const VertexSet& target,
                                   int m, int n0, double d,
                                   const VerifyBudget& budget) {
    if (m < 1) {
        throw Error(ErrorKind::parameter, "prune_relative_expansion: m >= 1");
    }
    if (n0 < 0 || d <= 0) {
        throw Error(ErrorKind::parameter,
                    "prune_relative_expansion: need n0 >= 0 and d > 0");
    }
    if (static_cast<double>(target.count()) + kEps < n0 + (2 * d + 2) * m) {
        throw Error(ErrorKind::size_hypothesis,
                    "prune_relative_expansion: |V| = " +
                        std::to_string(target.count()) +
                        " < n0 + (2d+2)m = " +
                        std::to_string(n0 + (2 * d + 2) * m));
    }
    VertexSet all = VertexSet::full(g.size());
    return absorb_violators(g, all, target, m, n0, d, budget, nullptr);
}

VertexSet prune_relative_expansion(const Graph& g, const VertexSet& universe,
                                   const VertexSet& target, int m, int n0,
                                   double d, const VerifyBudget& budget) {
    if (m < 1) {
        throw Error(ErrorKind::parameter, "prune_relative_expansion: m >= 1");
    }
    if (n0 < 0 || d <= 0) {
        throw Error(ErrorKind::parameter,
                    "prune_relative_expansion: need n0 >= 0 and d > 0");
    }
    if (universe.universe() != g.size() || target.universe() != g.size()) {
        throw Error(ErrorKind::invalid_input,
                    "prune_relative_expansion: set universe mismatch");
    }
    if (static_cast<double>(target.count()) + kEps < n0 + (2 * d + 2) * m) {
        throw Error(ErrorKind::size_hypothesis,
                    "prune_relative_expansion: |target| = " +
                        std::to_string(target.count()) +
                        " < n0 + (2d+2)m = " +
                        std::to_string(n0 + (2 * d + 2) * m));
    }
    return absorb_violators(g, universe, target, m, n0, d, budget, nullptr);
}

}  // namespace rgl
