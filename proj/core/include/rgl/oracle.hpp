#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "rgl/embedding.hpp"
#include "rgl/engine.hpp"
#include "rgl/graph.hpp"
#include "rgl/params.hpp"
#include "rgl/tree.hpp"

namespace rgl {

// ---------------------------------------------------------------------------
// Exact containment checks
// ---------------------------------------------------------------------------

// Exact backtracking search for a copy of `t` whose edges are all red.
// `found == false` is a proven absence (the search is exhaustive).
struct TreeContainment {
  bool found = false;
  Embedding embedding;  // a witness copy when found
};

TreeContainment contains_red_tree(const TwoColouring& colouring,
                                  const Tree& t);

// Search for k_minus_1 disjoint classes of size s plus one class of size m,
// pairwise joined entirely by blue edges (class interiors unconstrained).
// `proven_absent` distinguishes an exhausted search from a budget stop.
struct WitnessContainment {
  bool found = false;
  bool proven_absent = false;
  MultipartiteWitness witness;
  std::uint64_t nodes = 0;
};

WitnessContainment contains_blue_witness(const TwoColouring& colouring,
                                         int k_minus_1, int s, int m,
                                         std::uint64_t node_budget =
                                             20'000'000);

// ---------------------------------------------------------------------------
// Brute-force Ramsey numbers
// ---------------------------------------------------------------------------

// Target blue structure given directly as class parameters.
struct WitnessShape {
  int k = 2;  // total classes = k-1 of size s, plus one of size m
  int s = 1;
  int m = 1;
};

// Smallest N such that every 2-colouring of K_N contains a red copy of `t`
// or the blue witness.  `value` is set only when certified by exhausting the
// (pruned) search at N; otherwise `lower` carries the best bound and
// `witness` an avoiding colouring on lower-1 vertices.
struct RamseyResult {
  int lower = 1;
  std::optional<int> value;
  std::string method = "pruned-backtracking";
  std::optional<TwoColouring> witness;
  std::uint64_t nodes = 0;

  bool exact() const { return value.has_value(); }
};

RamseyResult brute_ramsey(const Tree& t, const WitnessShape& shape,
                          int n_cap = 8, int jobs = 1);

// Variant taking the avoided blue graph itself.  `h` must be complete
// multipartite with all classes equal except possibly one (the shapes the
// witness search can express); anything else is rejected as invalid input.
RamseyResult brute_ramsey(const Tree& t, const Graph& h, int n_cap = 8,
                          int jobs = 1);

// Derives the witness shape for a complete multipartite `h`, or throws.
WitnessShape witness_shape_of(const Graph& h);

// ---------------------------------------------------------------------------
// Certificate verification
// ---------------------------------------------------------------------------

// Re-checks a certificate against the colouring it claims to decide.
// Returns "" when valid, else a human-readable description of the first
// fault found (missing tree, non-injective map, non-red tree edge, class
// size mismatch, red cross pair, ...).
std::string verify_certificate(const TwoColouring& colouring,
                               const Certificate& cert);

// ---------------------------------------------------------------------------
// Host generation
// ---------------------------------------------------------------------------

// A random graph that is verifiably (m, ceil(mu*n))-joined: sampled at a
// density with the expected miss count below the allowance, then checked,
// regenerating from derived seeds until the check passes.
struct JoinedGraphResult {
  Graph graph;
  VerifyMode mode = VerifyMode::exact;  // how joinedness was established
  int attempts = 1;                     // generation attempts consumed
  double density = 0.0;                 // realised edge density
};

JoinedGraphResult random_joined_graph(int n, int m, double mu,
                                      std::uint64_t seed,
                                      int max_attempts = 16);

}  // namespace rgl
