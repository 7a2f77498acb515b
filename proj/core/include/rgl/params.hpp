#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "rgl/error.hpp"

namespace rgl {

// Every named constant of the embedding machinery, as explicit runtime
// values. The asymptotic hierarchy (1/m ≪ mu ≪ 1/K ≪ ...) is NOT assumed:
// procedures check feasibility at the supplied values and report when a
// hypothesis fails, instead of silently relying on "n large enough".
struct ParamSet {
  // integer knobs
  int d = 12;   // extendability degree bound
  int D = 20;   // expansion factor demanded of pruned expander hosts
  int K = 40;   // vortex sizing factor (innermost level ~ K*m)
  int L = 12;   // long bare-path length used by the sparse embedder
  int ell = 4;  // connector-path length through the reservoir set
  int m = 2;    // joinedness small side / spare-vertex budget

  // fractional knobs, all in (0,1)
  double mu = 0.05;      // joinedness large side, as a fraction of n
  double lambda = 0.05;  // neighbourhood-capture slack
  double gamma1 = 0.04 / 48;  // descending-tuple lower ratio
  double gamma2 = 0.04;       // descending-tuple upper ratio
  double delta = 0.1;    // sparse-case connectivity margin
  double epsilon = 0.02; // witness class size, as a fraction of n

  // Throws ErrorKind::parameter if any field is out of range or
  // gamma1 < gamma2 < 1 fails.
  void validate() const;

  // Desk-scale defaults calibrated for trees of maximum degree `max_degree`.
  static ParamSet defaults_for_max_degree(int max_degree);

  // key=value file, one pair per line, '#' comments. Unknown keys error.
  static ParamSet from_file(const std::string& path);
  void apply_key_value(const std::string& key, const std::string& value);

  nlohmann::json to_json() const;
  static ParamSet from_json(const nlohmann::json& j);

  bool operator==(const ParamSet&) const = default;
};

// How a quantified property ("for all sets U ...") was established.
enum class VerifyMode { exact, sampled };

inline const char* to_string(VerifyMode m) {
  return m == VerifyMode::exact ? "exact" : "sampled";
}

// Policy for choosing between exhaustive subset enumeration and seeded
// random spot-checks. A quantified check ("for all sets of size s ...") runs
// exactly when the implied enumeration stays under exact_enum_cap subsets;
// otherwise it draws `sample_trials` random sets per size and the result is
// tagged VerifyMode::sampled.
struct VerifyBudget {
  long long exact_enum_cap = 60'000'000;
  int sample_trials = 400;
  std::uint64_t sample_seed = 0x5eedULL;

  bool exact_ok(long long subset_count) const {
    return subset_count >= 0 && subset_count <= exact_enum_cap;
  }
};

// Number of k-subsets of an n-set, saturating at cap_hint (< 0 never).
long long subset_count_capped(int n, int k, long long cap_hint = 1LL << 62);

}  // namespace rgl
