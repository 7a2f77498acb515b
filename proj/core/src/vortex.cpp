#include "rgl/vortex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rgl/cover.hpp"
#include "rgl/detail/subset_scan.hpp"
#include "rgl/error.hpp"
#include "rgl/extendable.hpp"
#include "rgl/graph_checks.hpp"
#include "rgl/rng.hpp"
#include "rgl/tree_decompose.hpp"

namespace rgl {
namespace {

constexpr double kEps = 1e-9;

std::string id_list(const std::vector<VertexId>& ids, std::size_t cap = 8) {
    std::ostringstream os;
    os << "{";
    for (std::size_t i = 0; i < ids.size() && i < cap; ++i) {
        if (i) os << ",";
        os << ids[i];
    }
    if (ids.size() > cap) os << ",...";
    os << "}";
    return os.str();
}

void require_descending(const std::vector<int>& t, const char* op) {
    if (t.empty()) {
        throw Error(ErrorKind::parameter,
                    std::string(op) + ": the size tuple is empty");
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < 1) {
            throw Error(ErrorKind::parameter,
                        std::string(op) + ": size n_" + std::to_string(i) +
                            " = " + std::to_string(t[i]) + " must be positive");
        }
        if (i > 0 && t[i] >= t[i - 1]) {
            throw Error(ErrorKind::parameter,
                        std::string(op) + ": size tuple is not descending (n_" +
                            std::to_string(i - 1) + " = " +
                            std::to_string(t[i - 1]) + ", n_" +
                            std::to_string(i) + " = " + std::to_string(t[i]) +
                            ")");
        }
    }
}

// First B2 violation over every consecutive level pair, "" if none.
std::string b2_fault(const Graph& g, const std::vector<VertexSet>& levels,
                     int m, double lambda, const VerifyBudget& budget,
                     VerifyMode* mode) {
    for (std::size_t i = 1; i < levels.size(); ++i) {
        const VertexSet& inner = levels[i];
        const int need = static_cast<int>(
            std::ceil((1.0 - lambda) * inner.count() - kEps));
        if (need <= 0) continue;
        std::vector<VertexId> pool = levels[i - 1].to_vector();
        std::string fault;
        auto leaf = [&](const std::vector<VertexId>& members, const VertexSet&,
                        const VertexSet& row_union) {
            VertexSet reach = row_union;
            reach &= inner;
            if (reach.count() >= need) return false;
            std::ostringstream os;
            os << "B2: level " << i << ": the " << m << "-set "
               << id_list(members) << " reaches " << reach.count() << " of "
               << inner.count() << " vertices, needs " << need;
            fault = os.str();
            return true;
        };
        const long long combos = subset_count_capped(
            static_cast<int>(pool.size()), m, budget.exact_enum_cap + 1);
        bool hit = false;
        if (budget.exact_ok(combos)) {
            hit = detail::scan_subsets_exact(g, pool, m, leaf);
        } else {
            if (mode) *mode = VerifyMode::sampled;
            Rng rng(derive_seed(budget.sample_seed, 0xb2b2ULL,
                                static_cast<std::uint64_t>(i)));
            hit = detail::scan_subsets_sampled(g, pool, m, budget.sample_trials,
                                               rng, leaf);
        }
        if (hit) return fault;
    }
    return "";
}

// Uniformly draws `need` fresh elements of free_pool into out.
void sample_into(VertexSet& out, const VertexSet& free_pool, int need,
                 Rng& rng) {
    if (need <= 0) return;
    std::vector<VertexId> pool = free_pool.to_vector();
    std::vector<int> picks =
        sample_without_replacement(static_cast<int>(pool.size()), need, rng);
    for (int p : picks) out.insert(pool[p]);
}

// One candidate chain.  With k >= 2 the proof's layered placement runs
// first: a trinomial per-vertex draw produces V_0 (around level k), guard
// bands W, W' (destined for U_1 \ U_2) and a sub-sample V_1 of V_0 (around
// level l−1); when the draw hits its concentration window, the nested
// uniform draws are constrained to thread the chain through those sets.
// Any infeasibility falls back to plain nested draws on the same
// generator, so the whole candidate stays a deterministic function of rng.
std::vector<VertexSet> draw_levels(const Graph& g, const std::vector<int>& nt,
                                   int k, Rng& rng) {
    const int n = g.size();
    const int l = static_cast<int>(nt.size()) - 1;
    std::vector<VertexSet> levels;
    levels.reserve(nt.size());
    levels.push_back(VertexSet::full(n));

    VertexSet v0(n), v1(n), w(n), wp(n);
    bool layered = k >= 2;
    if (layered) {
        const double p0 = 2.0 * nt[k] / nt[0];
        const double q = (nt[1] - nt[2]) / (4.0 * nt[0]);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (VertexId v = 0; v < n; ++v) {
            const double u = unif(rng);
            if (u < p0) {
                v0.insert(v);
            } else if (u < p0 + q) {
                w.insert(v);
            } else if (u < p0 + 2.0 * q) {
                wp.insert(v);
            }
        }
        const double p1 = 2.0 * nt[l - 1] / nt[k];
        v0.for_each([&](VertexId v) {
            if (unif(rng) < p1) v1.insert(v);
        });
        const int span = nt[1] - nt[2];
        layered = v0.count() >= nt[k] && v0.count() <= 3 * nt[k] &&
                  v1.count() >= nt[l - 1] && v1.count() <= 9 * nt[l - 1] &&
                  6 * w.count() >= span && 3 * w.count() <= span &&
                  6 * wp.count() >= span && 3 * wp.count() <= span;
    }

    auto build = [&](bool use_layers) -> bool {
        levels.resize(1, VertexSet::full(n));
        for (int i = 1; i <= l; ++i) {
            const VertexSet& prev = levels[i - 1];
            VertexSet must(n);
            VertexSet pool = prev;
            if (use_layers) {
                if (i <= k - 1) must |= v0;
                if (i == k) pool &= v0;
                if (i <= l - 2) must |= v1;
                if (i == l - 1) pool &= v1;
                if (i == 1) {
                    must |= w;
                    must |= wp;
                }
                if (i == 2) {
                    pool -= w;
                    pool -= wp;
                }
            }
            if (!must.is_subset_of(pool)) return false;
            VertexSet free_pool = pool;
            free_pool -= must;
            const int need = nt[i] - must.count();
            if (need < 0 || free_pool.count() < need) return false;
            VertexSet ui = must;
            sample_into(ui, free_pool, need, rng);
            levels.push_back(std::move(ui));
        }
        return true;
    };
    if (!layered || !build(true)) {
        build(false);  // cannot fail: nt is descending with nt[0] = |G|
    }
    return levels;
}

// The two op-level posts of sample_vortex beyond B1/B2: joinedness of the
// innermost-but-one level at floor(lambda_in * m), and the neighbour-density
// floor of small sets into the band U_1 \ U_2.
std::string vortex_extra_fault(const Graph& g, const Vortex& v,
                               double lambda_in, const VortexOptions& options,
                               VerifyMode* mode) {
    const int l = static_cast<int>(v.levels.size()) - 1;
    if (l < 1) return "";
    const int jm = static_cast<int>(std::floor(lambda_in * v.m + kEps));
    if (jm >= 1) {
        JoinedResult jr = is_joined_in(g, v.levels[l - 1], jm, jm,
                                       options.budget);
        if (jr.mode == VerifyMode::sampled && mode) *mode = VerifyMode::sampled;
        if (!jr.joined) {
            return "G[U_" + std::to_string(l - 1) + "] is not (" +
                   std::to_string(jm) + ")-joined";
        }
    }
    const int s4 = v.m / 4;
    if (s4 >= 1 && l >= 2) {
        VertexSet band = v.levels[1];
        band -= v.levels[2];
        const int thr = std::max(
            1, static_cast<int>(
                   std::ceil(options.gamma1 * options.D * v.m / 200.0 - kEps)));
        std::vector<VertexId> pool;
        pool.reserve(g.size());
        for (VertexId u = 0; u < g.size(); ++u) pool.push_back(u);
        std::string fault;
        auto leaf = [&](const std::vector<VertexId>& members, const VertexSet&,
                        const VertexSet& row_union) {
            VertexSet reach = row_union;
            reach &= band;
            if (reach.count() >= thr) return false;
            fault = "density floor: the " + std::to_string(s4) + "-set " +
                    id_list(members) + " has " +
                    std::to_string(reach.count()) +
                    " neighbours in U_1 \\ U_2, needs " + std::to_string(thr);
            return true;
        };
        const long long combos = subset_count_capped(
            static_cast<int>(pool.size()), s4, options.budget.exact_enum_cap + 1);
        bool hit = false;
        if (options.budget.exact_ok(combos)) {
            hit = detail::scan_subsets_exact(g, pool, s4, leaf);
        } else {
            if (mode) *mode = VerifyMode::sampled;
            Rng rng(derive_seed(options.budget.sample_seed, 0xd0f1ULL, 0));
            hit = detail::scan_subsets_sampled(g, pool, s4,
                                               options.budget.sample_trials, rng,
                                               leaf);
        }
        if (hit) return fault;
    }
    return "";
}

// C3 specialized to S = I(prev) inside G[prev ∪ cur]: every U with
// 1 <= |U| <= 2 m_ext needs |N'(U) ∩ cur| >= (d−1)|U| + |U ∩ prev|.
// Singletons are swept exhaustively; larger sizes follow a geometric
// schedule (and count as sampled) once the range would be expensive.
std::string c3_fault(const Graph& g, const VertexSet& prev,
                     const VertexSet& cur, std::size_t level, int d, int m_ext,
                     const VerifyBudget& budget, VerifyMode* mode) {
    if (m_ext < 1) return "";
    VertexSet uni = prev;
    uni |= cur;
    std::string fault;
    uni.for_each([&](VertexId u) {
        if (!fault.empty()) return;
        VertexSet reach = g.row(u);
        reach &= cur;
        const int need = (d - 1) + (prev.contains(u) ? 1 : 0);
        if (reach.count() < need) {
            fault = "C3: level " + std::to_string(level) + ": vertex " +
                    std::to_string(u) + " has " +
                    std::to_string(reach.count()) + " neighbours in V_" +
                    std::to_string(level) + ", needs " + std::to_string(need);
        }
    });
    if (!fault.empty()) return fault;

    const int top = std::min(2 * m_ext, uni.count());
    std::vector<int> sizes;
    if (top <= 8) {
        for (int s = 2; s <= top; ++s) sizes.push_back(s);
    } else {
        for (int s = 2; s < top; s *= 2) sizes.push_back(s);
        sizes.push_back(top);
        if (mode) *mode = VerifyMode::sampled;  // the schedule skips sizes
    }
    std::vector<VertexId> pool = uni.to_vector();
    for (int s : sizes) {
        auto leaf = [&](const std::vector<VertexId>& members,
                        const VertexSet& member_bits,
                        const VertexSet& row_union) {
            VertexSet reach = row_union;
            reach &= cur;
            VertexSet in_prev = member_bits;
            in_prev &= prev;
            const int need = (d - 1) * s + in_prev.count();
            if (reach.count() >= need) return false;
            fault = "C3: level " + std::to_string(level) + ": the " +
                    std::to_string(s) + "-set " + id_list(members) +
                    " reaches " + std::to_string(reach.count()) +
                    " vertices of V_" + std::to_string(level) + ", needs " +
                    std::to_string(need);
            return true;
        };
        const long long combos = subset_count_capped(
            static_cast<int>(pool.size()), s, budget.exact_enum_cap + 1);
        bool hit = false;
        if (budget.exact_ok(combos)) {
            hit = detail::scan_subsets_exact(g, pool, s, leaf);
        } else {
            if (mode) *mode = VerifyMode::sampled;
            Rng rng(derive_seed(budget.sample_seed, 0xc3c3ULL,
                                static_cast<std::uint64_t>(level * 1024 + s)));
            hit = detail::scan_subsets_sampled(g, pool, s, budget.sample_trials,
                                               rng, leaf);
        }
        if (hit) return fault;
    }
    return "";
}

}  // namespace

std::string vortex_fault(const Graph& g, const Vortex& v,
                         const VerifyBudget& budget, VerifyMode* mode_out) {
    VerifyMode mode = VerifyMode::exact;
    if (mode_out) *mode_out = mode;
    if (v.levels.empty()) return "B1: vortex has no levels";
    if (v.levels.size() != v.sizes.size()) {
        return "B1: " + std::to_string(v.levels.size()) + " levels but " +
               std::to_string(v.sizes.size()) + " sizes";
    }
    if (v.m < 1) return "B1: m must be positive";
    if (!(v.lambda > 0.0 && v.lambda < 1.0)) return "B1: lambda outside (0,1)";
    for (std::size_t i = 0; i < v.levels.size(); ++i) {
        if (v.levels[i].universe() != g.size()) {
            return "B1: level " + std::to_string(i) + " universe mismatch";
        }
        if (v.levels[i].count() != v.sizes[i]) {
            return "B1: |U_" + std::to_string(i) + "| = " +
                   std::to_string(v.levels[i].count()) + ", expected " +
                   std::to_string(v.sizes[i]);
        }
        if (i == 0 && v.levels[0].count() != g.size()) {
            return "B1: U_0 != V(G)";
        }
        if (i > 0 && !v.levels[i].is_subset_of(v.levels[i - 1])) {
            return "B1: U_" + std::to_string(i) + " is not inside U_" +
                   std::to_string(i - 1);
        }
    }
    std::string fault = b2_fault(g, v.levels, v.m, v.lambda, budget, &mode);
    if (mode_out) *mode_out = mode;
    return fault;
}

Vortex sample_vortex(const Graph& g, const std::vector<int>& n_tuple, int m,
                     double lambda, std::uint64_t seed, int max_retries,
                     const VortexOptions& options) {
    require_descending(n_tuple, "sample_vortex");
    if (n_tuple[0] != g.size()) {
        throw Error(ErrorKind::parameter,
                    "sample_vortex: n_0 = " + std::to_string(n_tuple[0]) +
                        " must equal |G| = " + std::to_string(g.size()));
    }
    if (m < 1) {
        throw Error(ErrorKind::parameter, "sample_vortex: m must be >= 1");
    }
    if (!(lambda > 0.0 && 2.0 * lambda < 1.0)) {
        throw Error(ErrorKind::parameter,
                    "sample_vortex: lambda must lie in (0, 1/2) so the doubled "
                    "slack stays below one");
    }
    if (max_retries < 0) {
        throw Error(ErrorKind::parameter,
                    "sample_vortex: max_retries must be >= 0");
    }

    const int l = static_cast<int>(n_tuple.size()) - 1;
    Vortex out;
    out.sizes = n_tuple;
    out.m = m;
    out.lambda = 2.0 * lambda;

    if (l == 0) {
        out.levels.push_back(VertexSet::full(g.size()));
        out.mode = VerifyMode::exact;
        return out;
    }

    // Aux-layer index: the largest level that V_0 can wrap (a factor-3 gap
    // above it, comfortably above the innermost levels where V_1 must fit).
    // None qualifying, or a short chain, means plain nested draws.
    int k = -1;
    if (l >= 3 && 9 * n_tuple[l - 1] <= n_tuple[l - 2]) {
        for (int i = l - 2; i >= 2; --i) {
            if (3 * n_tuple[i] <= n_tuple[i - 1] &&
                n_tuple[i] > 9 * n_tuple[l - 1]) {
                k = i;
                break;
            }
        }
    }

    std::string last_violation = "no attempt";
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        Rng rng(derive_seed(seed, 0x5a3cULL,
                            static_cast<std::uint64_t>(attempt)));
        out.levels = draw_levels(g, n_tuple, k, rng);
        if (!options.verify) {
            out.mode = VerifyMode::sampled;  // accepted without verification
            return out;
        }
        VerifyMode mode = VerifyMode::exact;
        std::string fault = vortex_fault(g, out, options.budget, &mode);
        if (fault.empty()) {
            fault = vortex_extra_fault(g, out, lambda, options, &mode);
        }
        if (fault.empty()) {
            out.mode = mode;
            return out;
        }
        last_violation = fault;
    }
    nlohmann::json detail{{"violated", last_violation},
                          {"attempts", max_retries + 1}};
    throw Error(ErrorKind::retries_exhausted,
                "sample_vortex: no candidate chain passed verification in " +
                    std::to_string(max_retries + 1) +
                    " attempts; last violation: " + last_violation,
                detail.dump());
}

std::string vortex_partition_fault(const Graph& g, const VortexPartition& p,
                                   const VerifyBudget& budget,
                                   VerifyMode* mode_out) {
    VerifyMode mode = VerifyMode::exact;
    if (mode_out) *mode_out = mode;
    const int n = g.size();
    if (p.parts.empty()) return "C1: partition has no parts";
    if (p.parts.size() != p.sizes.size()) {
        return "C1: " + std::to_string(p.parts.size()) + " parts but " +
               std::to_string(p.sizes.size()) + " sizes";
    }
    if (p.d < 1) return "C1: d must be positive";
    if (!(p.lambda > 0.0 && p.lambda < 1.0)) return "C1: lambda outside (0,1)";
    VertexSet seen(n);
    for (std::size_t i = 0; i < p.parts.size(); ++i) {
        if (p.parts[i].universe() != n) {
            return "C1: part V_" + std::to_string(i) + " universe mismatch";
        }
        if (p.parts[i].intersects(seen)) {
            return "C1: part V_" + std::to_string(i) + " overlaps an earlier part";
        }
        seen |= p.parts[i];
    }
    if (seen.count() != n) return "C1: parts do not cover V(G)";
    for (std::size_t i = 0; i < p.parts.size(); ++i) {
        const double slack = p.lambda * p.sizes[i] + kEps;
        const double off = std::abs(p.parts[i].count() - p.sizes[i]);
        if (off > slack) {
            return "C1: |V_" + std::to_string(i) + "| = " +
                   std::to_string(p.parts[i].count()) + " is outside (1±" +
                   std::to_string(p.lambda) + ")·" + std::to_string(p.sizes[i]);
        }
    }
    for (std::size_t i = 1; i < p.parts.size(); ++i) {
        const int pj = static_cast<int>(
            std::floor(p.lambda * p.sizes[i - 1] + kEps));
        if (pj >= 1) {
            VertexSet pair = p.parts[i - 1];
            pair |= p.parts[i];
            JoinedResult jr = is_joined_in(g, pair, pj, pj, budget);
            if (jr.mode == VerifyMode::sampled) mode = VerifyMode::sampled;
            if (!jr.joined) {
                return "C2: G[V_" + std::to_string(i - 1) + " ∪ V_" +
                       std::to_string(i) + "] is not (" + std::to_string(pj) +
                       ")-joined";
            }
        }
        std::string c3 =
            c3_fault(g, p.parts[i - 1], p.parts[i], i, p.d, pj, budget, &mode);
        if (!c3.empty()) {
            if (mode_out) *mode_out = mode;
            return c3;
        }
    }
    if (mode_out) *mode_out = mode;
    return "";
}

namespace {

// One cleaning pass over a sampled vortex; nullopt (with `violation` set)
// when a property check or waste cap fails and a resample may help.
std::optional<VortexPartitionResult> partition_attempt(
    const Graph& g, const std::vector<int>& n_tuple,
    const std::vector<int>& suffix, const ParamSet& params,
    std::uint64_t seed, const VortexOptions& options,
    const VortexOptions& inner, VerifyMode pre_mode, std::string* violation) {
    const int n = g.size();
    const int l = static_cast<int>(n_tuple.size()) - 1;
    const int m = params.m;
    const int d = params.d;
    const double lam2 = 2.0 * params.lambda;
    const int s4 = m / 4;
    try {
        Vortex vx = sample_vortex(g, suffix, m, params.lambda, seed,
                                  options.max_retries, inner);
        VerifyMode mode =
            (vx.mode == VerifyMode::sampled || pre_mode == VerifyMode::sampled)
                ? VerifyMode::sampled
                : VerifyMode::exact;

        // Provisional parts: consecutive level differences.
        std::vector<VertexSet> vparts(l + 1, VertexSet(n));
        for (int i = 0; i < l; ++i) {
            vparts[i] = vx.levels[i];
            vparts[i] -= vx.levels[i + 1];
        }
        vparts[l] = vx.levels[l];

        // Inside-out waste removal: W_j collects the vertices of the two
        // adjacent parts whose small subsets fail to expand at rate d into
        // the level-j part.  Steps whose target is too small for the prune
        // contract are skipped (the up-front sizing either raised a hard
        // error already or noted the skip as acceptable).
        std::vector<VertexSet> waste(l + 2, VertexSet(n));
        for (int j = l; j >= 1; --j) {
            VertexSet target = vparts[j];
            target -= waste[j + 1];
            const int n0 = static_cast<int>(
                std::ceil(lam2 * n_tuple[j - 1] - kEps));
            if (target.count() < n0 + (2 * d + 2) * m) continue;
            VertexSet universe = vparts[j - 1];
            universe |= vparts[j];
            universe -= waste[j + 1];
            waste[j] = prune_relative_expansion(g, universe, target, m, n0,
                                                static_cast<double>(d),
                                                options.budget);
        }

        // Final waste: vertices whose <= floor(m/4)-subsets see fewer than
        // 10 d |U| neighbours in the cleaned V_1.  These leave the host.
        VertexSet w0(n);
        if (s4 >= 1 && l >= 1) {
            VertexSet v1_now = vparts[1];
            v1_now -= waste[1];
            v1_now -= waste[2];
            if (v1_now.count() >= (20.0 * d + 2.0) * s4) {
                w0 = prune_relative_expansion(g, VertexSet::full(n), v1_now, s4,
                                              0, 10.0 * d, options.budget);
            }
        }

        // Assemble: waste sets W_1.. fold back into V_0; W_0 is discarded.
        VertexSet keep = VertexSet::full(n);
        keep -= w0;
        std::vector<VertexSet> parts_old(l + 1, VertexSet(n));
        VertexSet used(n);
        for (int i = 1; i <= l; ++i) {
            parts_old[i] = vparts[i];
            parts_old[i] -= waste[i];
            parts_old[i] -= waste[i + 1];
            parts_old[i] -= w0;
            used |= parts_old[i];
        }
        parts_old[0] = keep;
        parts_old[0] -= used;

        // Structural: no residual waste vertex may sit in a later part.
        for (int j = 1; j <= l; ++j) {
            for (int i = 1; i <= l; ++i) {
                if (waste[j].intersects(parts_old[i])) {
                    throw Error(ErrorKind::contract,
                                "vortex_partition: waste set W_" +
                                    std::to_string(j) +
                                    " leaked into part V_" + std::to_string(i));
                }
            }
        }
        if (w0.count() > std::max(0, s4 - 1)) {
            *violation = "waste set W_0 has " + std::to_string(w0.count()) +
                         " vertices, cap is " +
                         std::to_string(std::max(0, s4 - 1));
            return std::nullopt;
        }

        VortexPartitionResult res;
        std::vector<VertexId> new_of_old;
        res.g_prime = g.induced(keep, &res.original_of_new, &new_of_old);
        res.discarded = w0;
        res.partition.sizes = n_tuple;
        res.partition.lambda = lam2;
        res.partition.d = d;
        res.partition.parts.assign(static_cast<std::size_t>(l) + 1,
                                   VertexSet(res.g_prime.size()));
        for (int i = 0; i <= l; ++i) {
            parts_old[i].for_each([&](VertexId v) {
                res.partition.parts[i].insert(new_of_old[v]);
            });
        }

        if (options.verify) {
            VerifyMode vmode = VerifyMode::exact;
            std::string fault = vortex_partition_fault(
                res.g_prime, res.partition, options.budget, &vmode);
            if (!fault.empty()) {
                *violation = fault;
                return std::nullopt;
            }
            if (vmode == VerifyMode::sampled) mode = VerifyMode::sampled;
            const int jm = static_cast<int>(
                std::floor(params.lambda * m + kEps));
            if (jm >= 1 && l >= 1) {
                VertexSet pair = res.partition.parts[l - 1];
                pair |= res.partition.parts[l];
                JoinedResult jr =
                    is_joined_in(res.g_prime, pair, jm, jm, options.budget);
                if (jr.mode == VerifyMode::sampled) mode = VerifyMode::sampled;
                if (!jr.joined) {
                    *violation = "G[V_" + std::to_string(l - 1) + " ∪ V_" +
                                 std::to_string(l) + "] is not (" +
                                 std::to_string(jm) + ")-joined";
                    return std::nullopt;
                }
            }
            res.partition.mode = mode;
        } else {
            res.partition.mode = VerifyMode::sampled;
        }
        return res;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::contract ||
            e.kind() == ErrorKind::retries_exhausted) {
            *violation = e.what();
            return std::nullopt;
        }
        throw;
    }
}

}  // namespace

VortexPartitionResult vortex_partition(const Graph& g,
                                       const std::vector<int>& n_tuple,
                                       const ParamSet& params,
                                       std::uint64_t seed,
                                       const VortexOptions& options) {
    params.validate();
    require_descending(n_tuple, "vortex_partition");
    const int n = g.size();
    const long long total =
        std::accumulate(n_tuple.begin(), n_tuple.end(), 0LL);
    if (total != n) {
        throw Error(ErrorKind::parameter,
                    "vortex_partition: part sizes sum to " +
                        std::to_string(total) + ", need |G| = " +
                        std::to_string(n));
    }
    if (options.max_retries < 0) {
        throw Error(ErrorKind::parameter,
                    "vortex_partition: max_retries must be >= 0");
    }
    const int l = static_cast<int>(n_tuple.size()) - 1;
    const int m = params.m;
    const int d = params.d;
    const double lam2 = 2.0 * params.lambda;

    // Extendability at level i is outright unsatisfiable when its largest
    // quantified set already demands more neighbours than the part holds;
    // that is a parameter infeasibility, not a sampling failure.
    for (int i = 1; i <= l; ++i) {
        const int m_ext = static_cast<int>(
            std::floor(lam2 * n_tuple[i - 1] + kEps));
        if (m_ext >= 1 && static_cast<double>(d) * 2.0 * m_ext >
                              (1.0 - lam2) * n_tuple[i] + kEps) {
            throw Error(
                ErrorKind::parameter,
                "vortex_partition: extendability cannot hold at level " +
                    std::to_string(i) + ": d·2·floor(2λ·n_" +
                    std::to_string(i - 1) + ") = " +
                    std::to_string(2 * d * m_ext) + " exceeds (1−2λ)·n_" +
                    std::to_string(i) + " = " +
                    std::to_string((1.0 - lam2) * n_tuple[i]));
        }
    }

    // Level sizing for the cleaning steps; only asymptotically guaranteed,
    // so a shortfall is a hard error exactly when enforce_size is set.
    for (int j = 1; j <= l; ++j) {
        const int floor_needed =
            static_cast<int>(std::ceil(lam2 * n_tuple[j - 1] - kEps)) +
            (2 * d + 2) * m;
        if (n_tuple[j] - m < floor_needed && options.enforce_size) {
            throw Error(ErrorKind::size_hypothesis,
                        "vortex_partition: level " + std::to_string(j) +
                            " is too small to clean: n_j − m = " +
                            std::to_string(n_tuple[j] - m) +
                            " < ceil(2λ·n_{j−1}) + (2d+2)m = " +
                            std::to_string(floor_needed));
        }
    }

    VerifyMode pre_mode = VerifyMode::exact;
    if (options.verify) {
        const int mu_n =
            static_cast<int>(std::ceil(params.mu * n - kEps));
        JoinedResult jr = is_joined(g, m, mu_n, options.budget);
        if (jr.mode == VerifyMode::sampled) pre_mode = VerifyMode::sampled;
        if (!jr.joined) {
            throw Error(ErrorKind::invalid_input,
                        "vortex_partition: host is not (" + std::to_string(m) +
                            ", " + std::to_string(mu_n) + ")-joined");
        }
        ExpanderResult ex = is_expander(g, params.D, m, options.budget);
        if (ex.mode == VerifyMode::sampled) pre_mode = VerifyMode::sampled;
        if (!ex.expander) {
            throw Error(ErrorKind::invalid_input,
                        "vortex_partition: host is not a (" +
                            std::to_string(params.D) + ", " +
                            std::to_string(m) + ")-expander");
        }
    }

    std::vector<int> suffix(static_cast<std::size_t>(l) + 1);
    suffix[l] = n_tuple[l];
    for (int i = l - 1; i >= 0; --i) suffix[i] = suffix[i + 1] + n_tuple[i];

    VortexOptions inner = options;
    inner.partition_out = nullptr;
    inner.stats_out = nullptr;
    if (inner.gamma1 <= 0.0) inner.gamma1 = params.gamma1;
    if (inner.D <= 0) inner.D = params.D;

    std::string last_violation = "no attempt";
    for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
        std::string violation;
        std::optional<VortexPartitionResult> res = partition_attempt(
            g, n_tuple, suffix, params,
            derive_seed(seed, 0x9a27ULL, static_cast<std::uint64_t>(attempt)),
            options, inner, pre_mode, &violation);
        if (res) {
            if (options.partition_out) *options.partition_out = *res;
            return *res;
        }
        last_violation = violation;
    }
    nlohmann::json detail{{"violated", last_violation},
                          {"attempts", options.max_retries + 1}};
    throw Error(ErrorKind::retries_exhausted,
                "vortex_partition: no cleaned partition passed verification "
                "in " +
                    std::to_string(options.max_retries + 1) +
                    " attempts; last violation: " + last_violation,
                detail.dump());
}

namespace {

// Piece-local index of a parent-tree vertex (old_of_new is ascending).
VertexId piece_id_of(const std::vector<VertexId>& old_of_new, VertexId old_id) {
    auto it = std::lower_bound(old_of_new.begin(), old_of_new.end(), old_id);
    if (it == old_of_new.end() || *it != old_id) {
        throw Error(ErrorKind::contract,
                    "embed_via_vortex: link vertex " + std::to_string(old_id) +
                        " is missing from its piece");
    }
    return static_cast<VertexId>(it - old_of_new.begin());
}

Embedding pipeline_once(const Graph& g, const Tree& tree,
                        const ParamSet& params, const TreeDecomposition& dec,
                        const std::vector<int>& host_sizes, std::uint64_t seed,
                        const VortexOptions& options, VortexEmbedStats* stats,
                        VortexPartitionResult* partition_keep) {
    const int stages = static_cast<int>(dec.subtrees.size());
    const int m = params.m;
    const int d = params.d;
    const double lam2 = 2.0 * params.lambda;
    const double gamma = params.gamma2 / 2.0;

    VortexOptions popt = options;
    popt.partition_out = nullptr;
    popt.stats_out = nullptr;
    VortexPartitionResult part = vortex_partition(
        g, host_sizes, params, derive_seed(seed, 0x9a27eULL, 0), popt);
    const Graph& gp = part.g_prime;
    const int np = gp.size();
    const std::vector<VertexSet>& V = part.partition.parts;

    ExtendOptions fast;
    fast.verify = false;
    fast.enforce_size = false;
    fast.budget = options.budget;

    Embedding phi(tree.size());  // tree id -> gp id
    VertexSet covered(np);
    if (V[0].empty()) {
        throw Error(ErrorKind::contract, "embed_via_vortex: part V_0 is empty");
    }
    const VertexId v0 = V[0].first();
    VertexId v_prev = v0;  // image (gp id) of the previous link

    for (int j = 1; j <= stages; ++j) {
        const VertexSet& prev_part = V[j - 1];
        const VertexSet& cur_part = V[j];

        std::vector<VertexId> tree_of_piece;
        const VertexId piece_root_old =
            (j >= 2) ? dec.link_vertices[j - 2] : dec.subtrees[0].first();
        Tree piece =
            tree.induced(dec.subtrees[j - 1], piece_root_old, &tree_of_piece);

        // Stage root: the previous link for later stages; for the first
        // stage, the least leaf that is not the next link.
        VertexId t_root_piece;
        if (j >= 2) {
            t_root_piece = piece_id_of(tree_of_piece, dec.link_vertices[j - 2]);
        } else {
            VertexId avoid = -1;
            if (stages >= 2) {
                avoid = piece_id_of(tree_of_piece, dec.link_vertices[0]);
            }
            t_root_piece = -1;
            for (VertexId lf : piece.leaves()) {
                if (lf != avoid) {
                    t_root_piece = lf;
                    break;
                }
            }
            if (t_root_piece < 0) {
                throw Error(ErrorKind::parameter,
                            "embed_via_vortex: the first subtree has no free "
                            "leaf to start from");
            }
        }

        VertexSet X = prev_part;
        X -= covered;
        X.erase(v_prev);
        VertexSet slice = X;
        slice.insert(v_prev);
        slice |= cur_part;
        std::vector<VertexId> gp_of_h(static_cast<std::size_t>(0));
        std::vector<VertexId> h_of_gp;
        Graph H = gp.induced(slice, &gp_of_h, &h_of_gp);
        VertexSet X_h(H.size());
        X.for_each([&](VertexId v) { X_h.insert(h_of_gp[v]); });
        const VertexId v_h = h_of_gp[v_prev];

        if (j == stages && stats) {
            stats->spare_before_final = H.size() - piece.size();
        }

        const int m_cov = std::max(
            1, static_cast<int>(std::floor(lam2 * host_sizes[j - 1] + kEps)));
        const std::uint64_t sseed =
            derive_seed(seed, 0x57a6eULL, static_cast<std::uint64_t>(j));

        Embedding phi_piece(piece.size());
        bool stage_covered = true;
        if (piece.size() == 1) {
            phi_piece.to_host[0] = v_h;
            stage_covered = X_h.empty();
        } else if (j < stages) {
            CoverTask task(H, X_h, v_h, piece, t_root_piece, d, m_cov, gamma,
                           fast);
            task.t_prime = piece_id_of(tree_of_piece, dec.link_vertices[j - 1]);
            task.seed = sseed;
            phi_piece = embed_covering(task);
        } else {
            // Final stage: prefer the covering route (every leftover of the
            // previous part gets used); fall back to a plain extendable
            // embedding, which may leave spares anywhere in the slice.
            VertexId t_last = -1;
            for (VertexId lf : piece.leaves()) {
                if (lf != t_root_piece) {
                    t_last = lf;
                    break;
                }
            }
            bool done = false;
            if (t_last >= 0) {
                try {
                    CoverTask task(H, X_h, v_h, piece, t_root_piece, d, m_cov,
                                   gamma, fast);
                    task.t_prime = t_last;
                    task.seed = sseed;
                    phi_piece = embed_covering(task);
                    done = true;
                } catch (const Error&) {
                    done = false;
                }
            }
            if (!done) {
                stage_covered = false;
                const int m_fin = std::max(
                    1,
                    static_cast<int>(std::floor(params.lambda * m + kEps)));
                ExtendableEmbedding st(H, d, m_fin, m_fin, fast);
                st.add_isolated(v_h);
                phi_piece = embed_tree_extendably(H, st, piece, t_root_piece,
                                                  v_h);
            }
        }

        // Merge the stage into the global embedding.
        for (VertexId pv = 0; pv < piece.size(); ++pv) {
            if (!phi_piece.is_mapped(pv)) {
                throw Error(ErrorKind::stage_failure,
                            "embed_via_vortex: stage " + std::to_string(j) +
                                " left a piece vertex unmapped",
                            nlohmann::json{{"stage", j}}.dump());
            }
            const VertexId tv = tree_of_piece[pv];
            const VertexId gv = gp_of_h[phi_piece.to_host[pv]];
            if (phi.is_mapped(tv)) {
                if (phi.to_host[tv] != gv) {
                    throw Error(
                        ErrorKind::stage_failure,
                        "embed_via_vortex: stage " + std::to_string(j) +
                            " moved the link image of tree vertex " +
                            std::to_string(tv),
                        nlohmann::json{{"stage", j}, {"property", "F3"}}
                            .dump());
                }
                continue;
            }
            if (covered.contains(gv)) {
                throw Error(ErrorKind::stage_failure,
                            "embed_via_vortex: stage " + std::to_string(j) +
                                " reused host vertex " + std::to_string(gv),
                            nlohmann::json{{"stage", j}, {"property", "F4"}}
                                .dump());
            }
            phi.to_host[tv] = gv;
            covered.insert(gv);
        }

        // F1: the next link lands in the current part.
        if (j < stages) {
            const VertexId t_next = dec.link_vertices[j - 1];
            const VertexId v_next = phi.to_host[t_next];
            if (!cur_part.contains(v_next)) {
                throw Error(ErrorKind::stage_failure,
                            "embed_via_vortex: stage " + std::to_string(j) +
                                ": the link image " + std::to_string(v_next) +
                                " is outside part V_" + std::to_string(j),
                            nlohmann::json{{"stage", j}, {"property", "F1"}}
                                .dump());
            }
            v_prev = v_next;
        }

        // F2: the previous part is now fully used.  The final stage only
        // guarantees this on its covering route; otherwise the shortfall
        // is the recorded spare slack.
        VertexSet miss = prev_part;
        miss -= covered;
        if (!miss.empty()) {
            if (j < stages || stage_covered) {
                throw Error(ErrorKind::stage_failure,
                            "embed_via_vortex: stage " + std::to_string(j) +
                                " left " + std::to_string(miss.count()) +
                                " vertices of V_" + std::to_string(j - 1) +
                                " uncovered",
                            nlohmann::json{{"stage", j}, {"property", "F2"}}
                                .dump());
            }
        }
        if (j == stages && stats) stats->final_stage_covered = stage_covered;
    }

    if (!phi.complete()) {
        throw Error(ErrorKind::stage_failure,
                    "embed_via_vortex: embedding incomplete after the final "
                    "stage",
                    nlohmann::json{{"stage", stages}}.dump());
    }

    Embedding out(tree.size());
    for (VertexId tv = 0; tv < tree.size(); ++tv) {
        out.to_host[tv] = part.original_of_new[phi.to_host[tv]];
    }
    std::string fault = embedding_fault(tree, g, out, true);
    if (!fault.empty()) {
        throw Error(ErrorKind::contract, "embed_via_vortex: " + fault);
    }
    if (partition_keep) *partition_keep = std::move(part);
    return out;
}

}  // namespace

Embedding embed_via_vortex(const Graph& g, const Tree& tree,
                           const ParamSet& params, std::uint64_t seed,
                           const VortexOptions& options) {
    params.validate();
    const int n = g.size();
    const int m = params.m;
    const int delta = tree.max_degree();
    if (tree.size() != n - m + 1) {
        throw Error(ErrorKind::parameter,
                    "embed_via_vortex: need |T| = |G| − m + 1, got |T| = " +
                        std::to_string(tree.size()) + ", |G| = " +
                        std::to_string(n) + ", m = " + std::to_string(m));
    }
    if (tree.size() < 3) {
        throw Error(ErrorKind::parameter,
                    "embed_via_vortex: the tree needs at least 3 vertices");
    }
    if (params.d < std::max(3, 2 * delta)) {
        throw Error(ErrorKind::parameter,
                    "embed_via_vortex: need d ≥ max(3, 2Δ(T)) = " +
                        std::to_string(std::max(3, 2 * delta)) +
                        " for the stage embeddings, got d = " +
                        std::to_string(params.d));
    }
    if (m < params.d + 1) {
        // The final stage runs the host down to its m−1 spare vertices, and
        // each of those must keep d−1 free neighbours to stay extendable.
        throw Error(ErrorKind::parameter,
                    "embed_via_vortex: need m > d so the spare slack covers "
                    "the extendability floor, got m = " +
                        std::to_string(m) + ", d = " +
                        std::to_string(params.d));
    }
    const double gamma = params.gamma2 / 2.0;
    if (!(gamma > 0.0 && gamma < 0.1)) {
        throw Error(ErrorKind::parameter,
                    "embed_via_vortex: gamma2/2 must lie in (0, 1/10) for the "
                    "covering stages");
    }
    if (options.max_retries < 0) {
        throw Error(ErrorKind::parameter,
                    "embed_via_vortex: max_retries must be >= 0");
    }

    if (options.verify) {
        const int mu_n = static_cast<int>(std::ceil(params.mu * n - kEps));
        JoinedResult jr = is_joined(g, m, mu_n, options.budget);
        if (!jr.joined) {
            throw Error(ErrorKind::invalid_input,
                        "embed_via_vortex: host is not (" + std::to_string(m) +
                            ", " + std::to_string(mu_n) + ")-joined");
        }
        ExpanderResult ex = is_expander(g, params.D, m, options.budget);
        if (!ex.expander) {
            throw Error(ErrorKind::invalid_input,
                        "embed_via_vortex: host is not a (" +
                            std::to_string(params.D) + ", " +
                            std::to_string(m) + ")-expander");
        }
    }

    TreeDecomposition dec =
        descending_decomposition(tree, gamma, params.K * m, 0);

    // Host part sizes: the top part carries the bulk of the first subtree;
    // each later part carries a gamma2-fraction of its subtree plus the
    // bulk of the next; the innermost part adds the m−1 spare vertices.
    const double g2 = params.gamma2;
    auto derive_host = [&](const std::vector<int>& npr) {
        const int st = static_cast<int>(npr.size());
        std::vector<int> hs(static_cast<std::size_t>(st) + 1);
        hs[0] = static_cast<int>(std::ceil((1.0 - g2) * npr[0] - kEps));
        for (int j = 1; j <= st - 1; ++j) {
            hs[j] = static_cast<int>(std::floor(g2 * npr[j - 1] + kEps)) +
                    static_cast<int>(std::ceil((1.0 - g2) * npr[j] - kEps));
        }
        hs[st] =
            static_cast<int>(std::floor(g2 * npr[st - 1] + kEps)) + m - 1;
        return hs;
    };
    auto sizes_ok = [](const std::vector<int>& hs) {
        for (std::size_t i = 0; i < hs.size(); ++i) {
            if (hs[i] < 1 || (i > 0 && hs[i] >= hs[i - 1])) return false;
        }
        return true;
    };

    // An innermost piece too small for its gamma2 share plus the spare to
    // fill a host part merges into its predecessor (the link between them
    // becomes interior), flattening the chain by one stage.
    std::vector<int> host_sizes = derive_host(dec.part_sizes());
    while (!sizes_ok(host_sizes) && dec.subtrees.size() >= 2) {
        const std::size_t s = dec.subtrees.size();
        dec.subtrees[s - 2] |= dec.subtrees[s - 1];
        dec.subtrees.pop_back();
        dec.link_vertices.pop_back();
        host_sizes = derive_host(dec.part_sizes());
    }
    if (!sizes_ok(host_sizes)) {
        throw Error(ErrorKind::parameter,
                    "embed_via_vortex: no descending host sizes exist for "
                    "gamma2 = " +
                        std::to_string(g2) + " on this tree");
    }
    const int stages = static_cast<int>(dec.subtrees.size());
    const long long total =
        std::accumulate(host_sizes.begin(), host_sizes.end(), 0LL);
    if (total != n) {
        throw Error(ErrorKind::contract,
                    "embed_via_vortex: host part sizes sum to " +
                        std::to_string(total) + ", expected " +
                        std::to_string(n));
    }

    VortexEmbedStats stats;
    stats.stages = stages;

    std::optional<Error> last;
    for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
        try {
            VortexPartitionResult part;
            Embedding out = pipeline_once(
                g, tree, params, dec, host_sizes,
                derive_seed(seed, 0xe3b7ULL,
                            static_cast<std::uint64_t>(attempt)),
                options, &stats, &part);
            stats.partition_attempts = attempt + 1;
            if (options.stats_out) *options.stats_out = stats;
            if (options.partition_out) {
                *options.partition_out = std::move(part);
            }
            return out;
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::stage_failure ||
                e.kind() == ErrorKind::retries_exhausted ||
                e.kind() == ErrorKind::no_valid_leaf) {
                last = e;
                continue;
            }
            throw;
        }
    }
    throw *last;
}

}  // namespace rgl
