// rgl: command-line front end for the certificate engine, the brute-force
// Ramsey search, tree decompositions and the extremal construction.  Every
// command is deterministic under a fixed seed; structured output is JSON,
// graphs and trees travel in the plain text formats of rgl/io.hpp.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rgl/engine.hpp"
#include "rgl/error.hpp"
#include "rgl/graph_extremal.hpp"
#include "rgl/io.hpp"
#include "rgl/oracle.hpp"
#include "rgl/params.hpp"
#include "rgl/tree.hpp"
#include "rgl/tree_decompose.hpp"
#include "rgl/vortex.hpp"

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kInconclusive = 2;

// RGL_SEED in the environment overrides whatever the command line says, so
// a whole scripted run can be re-seeded without touching the script.
std::uint64_t resolve_seed(std::uint64_t cli_seed) {
  const char* env = std::getenv("RGL_SEED");
  if (env == nullptr || *env == '\0') return cli_seed;
  const std::string text(env);
  try {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(text, &used, 0);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw rgl::Error(rgl::ErrorKind::parameter,
                     "RGL_SEED must be an unsigned integer, got \"" + text +
                         "\"");
  }
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) {
    throw rgl::Error(rgl::ErrorKind::io,
                     "cannot open " + path + " for writing");
  }
  out << j.dump(2) << "\n";
}

json error_detail_json(const rgl::Error& e) {
  if (e.detail().empty()) return nullptr;
  json parsed = json::parse(e.detail(), nullptr, false);
  if (parsed.is_discarded()) return e.detail();
  return parsed;
}

std::vector<int> sorted_ids(const rgl::VertexSet& s) {
  std::vector<int> out = s.to_vector();
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

struct SolveArgs {
  std::string colouring_path;
  std::string tree_path;
  std::string params_path;
  std::string trace_path;
  std::string vortex_dump_path;
  int k = 2;
  int s = 1;
  int m = 1;
  std::uint64_t seed = 0;
};

// The vortex tap lives on the pruned host; report everything in input ids
// and add the nested suffix unions U_j = V_j u ... u V_l alongside the
// parts themselves.
json vortex_dump_json(const rgl::VortexPartitionResult& tap) {
  if (tap.partition.parts.empty()) {
    return json{{"captured", false},
                {"note", "the vortex branch did not run for this instance"}};
  }
  const auto& oon = tap.original_of_new;
  auto lift = [&](const rgl::VertexSet& s) {
    std::vector<int> out;
    s.for_each([&](rgl::VertexId v) {
      out.push_back(v < static_cast<int>(oon.size()) ? oon[v] : v);
    });
    std::sort(out.begin(), out.end());
    return out;
  };
  std::vector<std::vector<int>> parts;
  parts.reserve(tap.partition.parts.size());
  for (const auto& p : tap.partition.parts) parts.push_back(lift(p));
  std::vector<std::vector<int>> nested(parts.size());
  std::vector<int> acc;
  for (int i = static_cast<int>(parts.size()) - 1; i >= 0; --i) {
    acc.insert(acc.end(), parts[i].begin(), parts[i].end());
    std::sort(acc.begin(), acc.end());
    nested[i] = acc;
  }
  return json{{"captured", true},
              {"parts", parts},
              {"nested_sets", nested},
              {"sizes", tap.partition.sizes},
              {"lambda", tap.partition.lambda},
              {"d", tap.partition.d},
              {"mode", to_string(tap.partition.mode)},
              {"discarded", sorted_ids(tap.discarded)}};
}

int run_solve(const SolveArgs& a) {
  const rgl::TwoColouring col = rgl::read_colouring_file(a.colouring_path);
  const rgl::Tree t = rgl::read_tree_file(a.tree_path);
  const rgl::ParamSet params =
      a.params_path.empty()
          ? rgl::ParamSet::defaults_for_max_degree(t.max_degree())
          : rgl::ParamSet::from_file(a.params_path);
  const std::uint64_t seed = resolve_seed(a.seed);
  rgl::VortexPartitionResult tap;
  rgl::VortexPartitionResult* tap_ptr =
      a.vortex_dump_path.empty() ? nullptr : &tap;
  try {
    const rgl::SolveResult r =
        rgl::solve(col, t, a.k, a.s, a.m, params, seed, tap_ptr);
    if (!a.trace_path.empty()) {
      write_json_file(a.trace_path, r.trace.to_json());
    }
    if (tap_ptr) write_json_file(a.vortex_dump_path, vortex_dump_json(tap));
    emit(rgl::certificate_to_json(r.certificate, col.size()));
    return r.certificate.verified ? kOk : kInconclusive;
  } catch (const rgl::Error& e) {
    if (e.kind() != rgl::ErrorKind::budget_exhausted &&
        e.kind() != rgl::ErrorKind::retries_exhausted) {
      throw;
    }
    if (tap_ptr) write_json_file(a.vortex_dump_path, vortex_dump_json(tap));
    json j{{"status", "inconclusive"}, {"error", e.what()}};
    const json d = error_detail_json(e);
    if (!d.is_null()) j["detail"] = d;
    emit(j);
    return kInconclusive;
  }
}

// ---------------------------------------------------------------------------
// ramsey
// ---------------------------------------------------------------------------

struct RamseyArgs {
  std::string tree_path;
  std::string h_spec;
  std::string witness_path;
  int cap = 8;
  int jobs = 1;
};

// "--h k,s,m" gives the class parameters directly; anything without a comma
// is read as a graph file (which must be complete multipartite).
std::optional<rgl::WitnessShape> parse_shape(const std::string& spec) {
  if (spec.find(',') == std::string::npos) return std::nullopt;
  std::vector<int> vals;
  std::stringstream ss(spec);
  std::string field;
  while (std::getline(ss, field, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stoi(field, &used));
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      throw rgl::Error(rgl::ErrorKind::parameter,
                       "--h shape must be three integers k,s,m; got \"" +
                           spec + "\"");
    }
  }
  if (vals.size() != 3) {
    throw rgl::Error(rgl::ErrorKind::parameter,
                     "--h shape must be three integers k,s,m; got \"" + spec +
                         "\"");
  }
  return rgl::WitnessShape{vals[0], vals[1], vals[2]};
}

int run_ramsey(const RamseyArgs& a) {
  const rgl::Tree t = rgl::read_tree_file(a.tree_path);
  rgl::RamseyResult res;
  json shape_json;
  if (const auto shape = parse_shape(a.h_spec)) {
    res = rgl::brute_ramsey(t, *shape, a.cap, a.jobs);
    shape_json = json{{"k", shape->k}, {"s", shape->s}, {"m", shape->m}};
  } else {
    const rgl::Graph h = rgl::read_graph_file(a.h_spec);
    const rgl::WitnessShape derived = rgl::witness_shape_of(h);
    res = rgl::brute_ramsey(t, h, a.cap, a.jobs);
    shape_json = json{{"k", derived.k},
                      {"s", derived.s},
                      {"m", derived.m},
                      {"h_file", a.h_spec}};
  }
  json out{{"tree_vertices", t.size()}, {"shape", shape_json},
           {"cap", a.cap},             {"lower", res.lower},
           {"exact", res.exact()},     {"method", res.method},
           {"nodes", res.nodes}};
  out["value"] = res.exact() ? json(*res.value) : json(nullptr);
  if (!a.witness_path.empty() && res.witness.has_value()) {
    rgl::write_colouring_file(a.witness_path, *res.witness);
    out["witness_file"] = a.witness_path;
  }
  emit(out);
  return res.exact() ? kOk : kInconclusive;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string colouring_path;
  std::string certificate_path;
};

int run_verify(const VerifyArgs& a) {
  const rgl::TwoColouring col = rgl::read_colouring_file(a.colouring_path);
  std::ifstream in(a.certificate_path);
  if (!in) {
    throw rgl::Error(rgl::ErrorKind::io, "cannot open " + a.certificate_path);
  }
  json cj;
  try {
    cj = json::parse(in);
  } catch (const json::parse_error& e) {
    throw rgl::Error(rgl::ErrorKind::parse,
                     a.certificate_path + ": " + e.what());
  }
  const rgl::Certificate cert = rgl::certificate_from_json(cj);
  const std::string fault = rgl::verify_certificate(col, cert);
  if (fault.empty()) {
    emit(json{{"valid", true},
              {"kind", cert.kind == rgl::Certificate::Kind::red_tree
                           ? "red_tree"
                           : "blue_witness"},
              {"mode", to_string(cert.mode)}});
    return kOk;
  }
  emit(json{{"valid", false}, {"fault", fault}});
  return kError;
}

// ---------------------------------------------------------------------------
// decompose
// ---------------------------------------------------------------------------

struct DecomposeArgs {
  std::string tree_path;
  bool bare_paths = false;
  bool split = false;
  bool descending = false;
  bool fixed_k = false;
  bool separated = false;
  bool validate = false;
  int k = -1;
  double gamma = 0.25;
  int cutoff = 8;
  int anchor = 0;
};

std::string split_fault(const rgl::Tree& t, double gamma, rgl::VertexId anchor,
                        const rgl::TreeSplit& sp) {
  const int n = t.size();
  if (sp.v < 0 || sp.v >= n) return "shared vertex out of range";
  if (!sp.t1.contains(sp.v) || !sp.t2.contains(sp.v)) {
    return "shared vertex missing from a side";
  }
  if (sp.t1.intersection_count(sp.t2) != 1) {
    return "sides share more than the split vertex";
  }
  rgl::VertexSet both = sp.t1;
  both |= sp.t2;
  if (both.count() != n) return "sides do not cover the tree";
  if (!sp.t1.contains(anchor) || (sp.t2.contains(anchor) && anchor != sp.v)) {
    return "anchor left the anchor side";
  }
  int v_deg_in_t1 = 0;
  for (rgl::VertexId u : t.adj(sp.v)) {
    if (sp.t1.contains(u)) ++v_deg_in_t1;
  }
  if (v_deg_in_t1 != 1) return "split vertex is not a leaf of the first side";
  const double size2 = sp.t2.count();
  const double upper = gamma * n;
  const double lower = gamma * n / (2.0 * std::max(1, t.max_degree()));
  if (size2 > upper + 1e-9) return "second side larger than gamma*n";
  if (size2 + 1e-9 < lower) {
    return "second side smaller than gamma*n/(2*max_degree)";
  }
  return "";
}

std::string separated_fault(const rgl::Tree& t, int k,
                            const rgl::VertexSet& s) {
  const std::vector<int> vs = sorted_ids(s);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = i + 1; j < vs.size(); ++j) {
      if (t.distance(vs[i], vs[j]) < 2 * k + 2) {
        return "vertices " + std::to_string(vs[i]) + " and " +
               std::to_string(vs[j]) + " are closer than 2k+2";
      }
    }
  }
  const double denom =
      (8.0 * k + 8.0) * std::pow(std::max(1, t.max_degree()), k);
  const long long need =
      static_cast<long long>(std::ceil(t.size() / denom));
  if (static_cast<long long>(vs.size()) < need) {
    return "set has " + std::to_string(vs.size()) + " vertices, needs " +
           std::to_string(need);
  }
  return "";
}

int run_decompose(const DecomposeArgs& a) {
  const int modes = static_cast<int>(a.bare_paths) + static_cast<int>(a.split) +
                    static_cast<int>(a.descending) +
                    static_cast<int>(a.fixed_k) + static_cast<int>(a.separated);
  if (modes != 1) {
    throw rgl::Error(rgl::ErrorKind::parameter,
                     "choose exactly one of --bare-paths, --split, "
                     "--descending, --fixed-k, --separated");
  }
  if ((a.bare_paths || a.fixed_k || a.separated) && a.k < 1) {
    throw rgl::Error(rgl::ErrorKind::parameter,
                     "this mode needs --k >= 1");
  }
  const rgl::Tree t = rgl::read_tree_file(a.tree_path);
  if (a.anchor < 0 || a.anchor >= t.size()) {
    throw rgl::Error(rgl::ErrorKind::parameter,
                     "--anchor must name a vertex of the tree");
  }

  json j;
  std::string fault;
  if (a.bare_paths) {
    const auto paths = rgl::find_bare_paths(t, a.k);
    const long long bound = rgl::bare_path_count_bound(t, a.k);
    json arr = json::array();
    for (const auto& p : paths) arr.push_back(p.vertices);
    j = json{{"mode", "bare-paths"},
             {"k", a.k},
             {"count", paths.size()},
             {"bound", bound},
             {"paths", arr}};
    if (a.validate) {
      fault = rgl::bare_paths_fault(t, paths, a.k);
      if (fault.empty() &&
          static_cast<long long>(paths.size()) < bound) {
        fault = "found " + std::to_string(paths.size()) +
                " paths, guaranteed " + std::to_string(bound);
      }
    }
  } else if (a.split) {
    const rgl::TreeSplit sp = rgl::split_tree(t, a.gamma, a.anchor);
    j = json{{"mode", "split"},
             {"gamma", a.gamma},
             {"anchor", a.anchor},
             {"v", sp.v},
             {"t1", sorted_ids(sp.t1)},
             {"t2", sorted_ids(sp.t2)}};
    if (a.validate) fault = split_fault(t, a.gamma, a.anchor, sp);
  } else if (a.descending || a.fixed_k) {
    const rgl::TreeDecomposition d =
        a.descending
            ? rgl::descending_decomposition(t, a.gamma, a.cutoff, a.anchor)
            : rgl::fixed_length_decomposition(t, a.gamma, a.k, a.anchor);
    json subtrees = json::array();
    for (const auto& s : d.subtrees) subtrees.push_back(sorted_ids(s));
    j = json{{"mode", a.descending ? "descending" : "fixed-k"},
             {"gamma", a.gamma},
             {"anchor", a.anchor},
             {"parts", d.subtrees.size()},
             {"sizes", d.part_sizes()},
             {"links", d.link_vertices},
             {"subtrees", subtrees}};
    if (a.descending) j["cutoff"] = a.cutoff;
    if (a.fixed_k) j["k"] = a.k;
    if (a.validate) {
      fault = rgl::decomposition_fault(t, d);
      const double dmax = std::max(1, t.max_degree());
      const double lo =
          a.descending ? a.gamma / (4.0 * dmax) : a.gamma / (8.0 * dmax);
      if (fault.empty() &&
          !rgl::is_descending_tuple(d.part_sizes(), lo, 2.0 * a.gamma)) {
        fault = "part sizes violate the descending ratio bounds";
      }
      if (fault.empty() && a.fixed_k &&
          static_cast<int>(d.subtrees.size()) != a.k) {
        fault = "expected " + std::to_string(a.k) + " parts, got " +
                std::to_string(d.subtrees.size());
      }
    }
  } else {
    const rgl::VertexSet s = rgl::separated_set(t, a.k);
    j = json{{"mode", "separated"},
             {"k", a.k},
             {"size", s.count()},
             {"vertices", sorted_ids(s)}};
    if (a.validate) fault = separated_fault(t, a.k, s);
  }

  if (a.validate) j["validate"] = fault.empty() ? "pass" : fault;
  emit(j);
  return fault.empty() ? kOk : kError;
}

// ---------------------------------------------------------------------------
// extremal
// ---------------------------------------------------------------------------

struct ExtremalArgs {
  int n = 2;
  int k = 2;
  int sigma = 1;
  std::string out;
  bool check = false;
};

int run_extremal(const ExtremalArgs& a) {
  const rgl::TwoColouring col = rgl::burr_colouring(a.n, a.k, a.sigma);
  rgl::write_colouring_file(a.out, col);
  json j{{"n", a.n},
         {"k", a.k},
         {"sigma", a.sigma},
         {"vertices", col.size()},
         {"out", a.out}};
  if (a.check) {
    const std::vector<rgl::Tree> types = rgl::all_trees(a.n);
    bool red_absent = true;
    for (const rgl::Tree& t : types) {
      if (rgl::contains_red_tree(col, t).found) {
        red_absent = false;
        break;
      }
    }
    bool witness_absent;
    if (a.k >= 2) {
      const auto w =
          rgl::contains_blue_witness(col, a.k - 1, a.sigma, a.sigma);
      witness_absent = !w.found && w.proven_absent;
    } else {
      // No cross classes: the witness is a bare sigma-set, present exactly
      // when the host has that many vertices.
      witness_absent = col.size() < a.sigma;
    }
    j["check"] = json{{"tree_types", types.size()},
                      {"red_tree_absent", red_absent},
                      {"blue_witness_absent", witness_absent},
                      {"status",
                       red_absent && witness_absent ? "pass" : "fail"}};
    if (!red_absent || !witness_absent) {
      emit(j);
      std::cerr << "error: extremal construction failed its own check\n";
      return kError;
    }
  }
  emit(j);
  return kOk;
}

// ---------------------------------------------------------------------------
// gen-tree
// ---------------------------------------------------------------------------

struct GenTreeArgs {
  int n = 1;
  int max_degree = 2;
  std::uint64_t seed = 0;
  std::string out;
};

int run_gen_tree(const GenTreeArgs& a) {
  const rgl::Tree t = rgl::random_tree(a.n, a.max_degree, resolve_seed(a.seed));
  if (a.out.empty()) {
    rgl::write_tree(std::cout, t);
  } else {
    rgl::write_tree_file(a.out, t);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Ramsey certificates for trees against complete multipartite targets"};
  app.require_subcommand(1);

  SolveArgs sa;
  CLI::App* solve_cmd = app.add_subcommand(
      "solve",
      "decide one colouring: red spanning tree copy or blue witness");
  solve_cmd->add_option("--colouring", sa.colouring_path, "two-colouring file")
      ->required();
  solve_cmd->add_option("--tree", sa.tree_path, "tree file")->required();
  solve_cmd->add_option("--k", sa.k, "total witness class count")->required();
  solve_cmd->add_option("--s", sa.s, "size of the k-1 equal classes")
      ->required();
  solve_cmd->add_option("--m", sa.m, "size of the final class")->required();
  solve_cmd->add_option("--seed", sa.seed,
                        "RNG seed (RGL_SEED in the environment overrides)");
  solve_cmd->add_option("--params", sa.params_path,
                        "key=value parameter file");
  solve_cmd->add_option("--trace", sa.trace_path,
                        "write the case-analysis trace JSON here");
  solve_cmd->add_option("--vortex-dump", sa.vortex_dump_path,
                        "write the vortex nested sets JSON here");

  RamseyArgs ra;
  CLI::App* ramsey_cmd = app.add_subcommand(
      "ramsey", "smallest host size forcing the red tree or the blue target");
  // --h below would collide with the default -h,--help pair.
  ramsey_cmd->set_help_flag("--help", "print this help message and exit");
  ramsey_cmd->add_option("--tree", ra.tree_path, "tree file")->required();
  ramsey_cmd
      ->add_option("--h", ra.h_spec,
                   "target: 'k,s,m' or a complete multipartite graph file")
      ->required();
  ramsey_cmd->add_option("--cap", ra.cap, "largest host size to certify");
  ramsey_cmd->add_option("--jobs", ra.jobs,
                         "worker threads for the enumeration");
  ramsey_cmd->add_option("--witness", ra.witness_path,
                         "write the largest avoiding colouring here");

  VerifyArgs va;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "re-check a certificate against its host");
  verify_cmd->add_option("--colouring", va.colouring_path,
                         "two-colouring file")
      ->required();
  verify_cmd->add_option("--certificate", va.certificate_path,
                         "certificate JSON file")
      ->required();

  DecomposeArgs da;
  CLI::App* decompose_cmd =
      app.add_subcommand("decompose", "tree decompositions and special sets");
  decompose_cmd->add_option("--tree", da.tree_path, "tree file")->required();
  decompose_cmd->add_flag("--bare-paths", da.bare_paths,
                          "disjoint bare paths of length k");
  decompose_cmd->add_flag("--split", da.split,
                          "one split step at rate gamma");
  decompose_cmd->add_flag("--descending", da.descending,
                          "descending chain decomposition");
  decompose_cmd->add_flag("--fixed-k", da.fixed_k,
                          "descending chain with exactly k parts");
  decompose_cmd->add_flag("--separated", da.separated,
                          "pairwise distance >= 2k+2 vertex set");
  decompose_cmd->add_option("--k", da.k, "mode parameter k");
  decompose_cmd->add_option("--gamma", da.gamma, "split rate");
  decompose_cmd->add_option("--cutoff", da.cutoff,
                            "descending mode: stop size of the remainder");
  decompose_cmd->add_option("--anchor", da.anchor, "anchor vertex");
  decompose_cmd->add_flag("--validate", da.validate,
                          "re-run the validator on the output");

  ExtremalArgs ea;
  CLI::App* extremal_cmd = app.add_subcommand(
      "extremal", "write the block colouring avoiding both structures");
  extremal_cmd->add_option("n", ea.n, "tree order to avoid in red")
      ->required();
  extremal_cmd->add_option("k", ea.k, "witness class count to avoid in blue")
      ->required();
  extremal_cmd->add_option("sigma", ea.sigma, "witness class size to avoid")
      ->required();
  extremal_cmd->add_option("out", ea.out, "output colouring file")
      ->required();
  extremal_cmd->add_flag("--check", ea.check,
                         "verify the construction with the exact oracles");

  GenTreeArgs ga;
  CLI::App* gen_tree_cmd = app.add_subcommand(
      "gen-tree", "random bounded-degree tree in the text format");
  gen_tree_cmd->add_option("--n", ga.n, "number of vertices")->required();
  gen_tree_cmd->add_option("--max-degree", ga.max_degree,
                           "largest allowed degree")
      ->required();
  gen_tree_cmd->add_option("--seed", ga.seed,
                           "RNG seed (RGL_SEED in the environment overrides)");
  gen_tree_cmd->add_option("--out", ga.out,
                           "output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kError;
  }

  try {
    if (solve_cmd->parsed()) return run_solve(sa);
    if (ramsey_cmd->parsed()) return run_ramsey(ra);
    if (verify_cmd->parsed()) return run_verify(va);
    if (decompose_cmd->parsed()) return run_decompose(da);
    if (extremal_cmd->parsed()) return run_extremal(ea);
    if (gen_tree_cmd->parsed()) return run_gen_tree(ga);
  } catch (const rgl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (!e.detail().empty()) std::cerr << e.detail() << "\n";
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;  // unreachable: require_subcommand(1)
}
