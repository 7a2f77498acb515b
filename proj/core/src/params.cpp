#include "rgl/params.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace rgl {

void ParamSet::validate() const {
  auto positive = [](long long v, const char* name) {
    if (v <= 0)
      throw Error(ErrorKind::parameter, std::string(name) + " must be positive");
  };
  positive(d, "d");
  positive(D, "D");
  positive(K, "K");
  positive(L, "L");
  positive(ell, "ell");
  positive(m, "m");
  auto fraction = [](double v, const char* name) {
    if (!(v > 0.0 && v < 1.0))
      throw Error(ErrorKind::parameter, std::string(name) + " must lie in (0,1)");
  };
  fraction(mu, "mu");
  fraction(lambda, "lambda");
  fraction(gamma1, "gamma1");
  fraction(gamma2, "gamma2");
  fraction(delta, "delta");
  fraction(epsilon, "epsilon");
  if (!(gamma1 < gamma2))
    throw Error(ErrorKind::parameter, "gamma1 must be smaller than gamma2");
}

ParamSet ParamSet::defaults_for_max_degree(int max_degree) {
  if (max_degree < 1)
    throw Error(ErrorKind::parameter, "max_degree must be at least 1");
  ParamSet p;
  p.d = 4 * std::max(3, max_degree);
  p.gamma2 = 0.04;
  p.gamma1 = p.gamma2 / (16.0 * max_degree);
  p.validate();
  return p;
}

void ParamSet::apply_key_value(const std::string& key, const std::string& value) {
  auto as_int = [&](int& field) {
    std::size_t pos = 0;
    int v = std::stoi(value, &pos);
    if (pos != value.size())
      throw Error(ErrorKind::parse, "bad integer for key '" + key + "': " + value);
    field = v;
  };
  auto as_double = [&](double& field) {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size())
      throw Error(ErrorKind::parse, "bad number for key '" + key + "': " + value);
    field = v;
  };
  if (key == "d") as_int(d);
  else if (key == "D") as_int(D);
  else if (key == "K") as_int(K);
  else if (key == "L") as_int(L);
  else if (key == "ell") as_int(ell);
  else if (key == "m") as_int(m);
  else if (key == "mu") as_double(mu);
  else if (key == "lambda") as_double(lambda);
  else if (key == "gamma1") as_double(gamma1);
  else if (key == "gamma2") as_double(gamma2);
  else if (key == "delta") as_double(delta);
  else if (key == "epsilon") as_double(epsilon);
  else
    throw Error(ErrorKind::parse, "unknown parameter key '" + key + "'");
}

ParamSet ParamSet::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open parameter file " + path);
  ParamSet p;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    auto is_space = [](unsigned char c) { return std::isspace(c); };
    while (!line.empty() && is_space(line.front())) line.erase(line.begin());
    while (!line.empty() && is_space(line.back())) line.pop_back();
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::parse, path + ":" + std::to_string(lineno) +
                                        ": expected key=value, got '" + line + "'");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && is_space(key.back())) key.pop_back();
    while (!value.empty() && is_space(value.front())) value.erase(value.begin());
    try {
      p.apply_key_value(key, value);
    } catch (const Error& e) {
      throw Error(e.kind(), path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  p.validate();
  return p;
}

nlohmann::json ParamSet::to_json() const {
  return nlohmann::json{{"d", d},           {"D", D},
                        {"K", K},           {"L", L},
                        {"ell", ell},       {"m", m},
                        {"mu", mu},         {"lambda", lambda},
                        {"gamma1", gamma1}, {"gamma2", gamma2},
                        {"delta", delta},   {"epsilon", epsilon}};
}

ParamSet ParamSet::from_json(const nlohmann::json& j) {
  ParamSet p;
  p.d = j.at("d").get<int>();
  p.D = j.at("D").get<int>();
  p.K = j.at("K").get<int>();
  p.L = j.at("L").get<int>();
  p.ell = j.at("ell").get<int>();
  p.m = j.at("m").get<int>();
  p.mu = j.at("mu").get<double>();
  p.lambda = j.at("lambda").get<double>();
  p.gamma1 = j.at("gamma1").get<double>();
  p.gamma2 = j.at("gamma2").get<double>();
  p.delta = j.at("delta").get<double>();
  p.epsilon = j.at("epsilon").get<double>();
  p.validate();
  return p;
}

long long subset_count_capped(int n, int k, long long cap_hint) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long result = 1;
  for (int i = 1; i <= k; ++i) {
    // result *= (n - k + i) / i, guarding overflow against the cap
    if (result > cap_hint / (n - k + i) + 1) return cap_hint + 1;
    result = result * (n - k + i) / i;
    if (result > cap_hint) return cap_hint + 1;
  }
  return result;
}

}  // namespace rgl
