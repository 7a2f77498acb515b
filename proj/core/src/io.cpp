#include "rgl/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rgl/error.hpp"

namespace rgl {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(int line_no, const std::string& what) {
  throw Error(ErrorKind::parse,
              "line " + std::to_string(line_no) + ": " + what);
}

// Streams non-blank, non-comment lines with their 1-based numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& out) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::size_t i = line.find_first_not_of(" \t");
      if (i == std::string::npos || line[i] == '#') continue;
      out = line;
      return true;
    }
    return false;
  }

  int line_no() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

struct Fields {
  std::string tag;
  std::vector<long long> nums;
};

Fields split_line(const std::string& line, int line_no) {
  std::istringstream ss(line);
  Fields f;
  if (!(ss >> f.tag)) parse_fail(line_no, "empty record");
  std::string tok;
  while (ss >> tok) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      f.nums.push_back(v);
    } catch (const std::exception&) {
      parse_fail(line_no, "expected an integer, got '" + tok + "'");
    }
  }
  return f;
}

Graph read_graph_body(LineReader& lr) {
  std::string line;
  if (!lr.next(line)) parse_fail(lr.line_no() + 1, "missing 'p <n> <m>' header");
  Fields f = split_line(line, lr.line_no());
  if (f.tag != "p" || f.nums.size() != 2) {
    parse_fail(lr.line_no(), "expected 'p <n> <m>', got '" + line + "'");
  }
  const long long n = f.nums[0], m = f.nums[1];
  if (n < 0 || m < 0) parse_fail(lr.line_no(), "negative size in header");
  Graph g(static_cast<int>(n));
  long long seen = 0;
  while (seen < m) {
    if (!lr.next(line)) {
      parse_fail(lr.line_no() + 1,
                 "expected " + std::to_string(m) + " edges, got " +
                     std::to_string(seen));
    }
    f = split_line(line, lr.line_no());
    if (f.tag != "e" || f.nums.size() != 2) {
      parse_fail(lr.line_no(), "expected 'e <u> <v>', got '" + line + "'");
    }
    const long long u = f.nums[0], v = f.nums[1];
    if (u < 0 || u >= n || v < 0 || v >= n) {
      parse_fail(lr.line_no(), "endpoint out of range [0, " +
                                   std::to_string(n) + ")");
    }
    if (u == v) parse_fail(lr.line_no(), "self-loop not allowed");
    if (g.has_edge(static_cast<VertexId>(u), static_cast<VertexId>(v))) {
      parse_fail(lr.line_no(), "duplicate edge");
    }
    g.add_edge(static_cast<VertexId>(u), static_cast<VertexId>(v));
    ++seen;
  }
  return g;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// text formats
// ---------------------------------------------------------------------------

Graph read_graph(std::istream& in) {
  LineReader lr(in);
  return read_graph_body(lr);
}

void write_graph(std::ostream& out, const Graph& g) {
  out << "p " << g.size() << ' ' << g.edge_count() << '\n';
  for (const auto& [u, v] : g.edges()) {
    out << "e " << u << ' ' << v << '\n';
  }
}

TwoColouring read_colouring(std::istream& in) {
  LineReader lr(in);
  std::string line;
  if (!lr.next(line)) parse_fail(lr.line_no() + 1, "missing 'c red' header");
  std::istringstream ss(line);
  std::string tag, colour;
  ss >> tag >> colour;
  if (tag != "c" || colour != "red") {
    parse_fail(lr.line_no(), "expected 'c red', got '" + line + "'");
  }
  return TwoColouring(read_graph_body(lr));
}

void write_colouring(std::ostream& out, const TwoColouring& c) {
  out << "c red\n";
  write_graph(out, c.red());
}

Tree read_tree(std::istream& in) {
  LineReader lr(in);
  std::string line;
  if (!lr.next(line)) parse_fail(lr.line_no() + 1, "missing 't <n>' header");
  Fields f = split_line(line, lr.line_no());
  if (f.tag != "t" || f.nums.size() != 1) {
    parse_fail(lr.line_no(), "expected 't <n>', got '" + line + "'");
  }
  const long long n = f.nums[0];
  if (n <= 0) parse_fail(lr.line_no(), "tree size must be positive");
  std::vector<VertexId> parent(static_cast<std::size_t>(n), -2);
  for (long long i = 0; i < n; ++i) {
    if (!lr.next(line)) {
      parse_fail(lr.line_no() + 1,
                 "expected " + std::to_string(n) + " parent records");
    }
    f = split_line(line, lr.line_no());
    if (f.tag != "p" || f.nums.size() != 2) {
      parse_fail(lr.line_no(), "expected 'p <child> <parent>', got '" + line + "'");
    }
    const long long c = f.nums[0], p = f.nums[1];
    if (c < 0 || c >= n) parse_fail(lr.line_no(), "child out of range");
    if (p < -1 || p >= n) parse_fail(lr.line_no(), "parent out of range");
    if (parent[static_cast<std::size_t>(c)] != -2) {
      parse_fail(lr.line_no(), "duplicate record for vertex " + std::to_string(c));
    }
    parent[static_cast<std::size_t>(c)] = static_cast<VertexId>(p);
  }
  try {
    return Tree::from_parents(parent);
  } catch (const Error& e) {
    parse_fail(lr.line_no(), std::string("invalid tree: ") + e.what());
  }
}

void write_tree(std::ostream& out, const Tree& t) {
  out << "t " << t.size() << '\n';
  const auto view = t.rooted_at(t.root());
  for (VertexId v = 0; v < t.size(); ++v) {
    out << "p " << v << ' ' << view.parent[v] << '\n';
  }
}

Graph read_graph_file(const std::string& path) {
  auto in = open_in(path);
  return read_graph(in);
}

void write_graph_file(const std::string& path, const Graph& g) {
  auto out = open_out(path);
  write_graph(out, g);
}

TwoColouring read_colouring_file(const std::string& path) {
  auto in = open_in(path);
  return read_colouring(in);
}

void write_colouring_file(const std::string& path, const TwoColouring& c) {
  auto out = open_out(path);
  write_colouring(out, c);
}

Tree read_tree_file(const std::string& path) {
  auto in = open_in(path);
  return read_tree(in);
}

void write_tree_file(const std::string& path, const Tree& t) {
  auto out = open_out(path);
  write_tree(out, t);
}

// ---------------------------------------------------------------------------
// JSON forms
// ---------------------------------------------------------------------------

json embedding_to_json(const Embedding& e) {
  json arr = json::array();
  for (std::size_t i = 0; i < e.to_host.size(); ++i) {
    if (e.to_host[i] >= 0) {
      arr.push_back({static_cast<int>(i), e.to_host[i]});
    }
  }
  return arr;
}

Embedding embedding_from_json(const json& j, int tree_size) {
  if (!j.is_array()) {
    throw Error(ErrorKind::parse, "embedding JSON must be an array of pairs");
  }
  Embedding e(tree_size);
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2) {
      throw Error(ErrorKind::parse, "embedding entry must be [tree, host]");
    }
    const int t = pair[0].get<int>();
    const int h = pair[1].get<int>();
    if (t < 0 || t >= tree_size) {
      throw Error(ErrorKind::parse, "embedding tree vertex out of range");
    }
    e.to_host[t] = h;
  }
  return e;
}

json vertex_set_to_json(const VertexSet& s) { return json(s.to_vector()); }

VertexSet vertex_set_from_json(const json& j, int universe) {
  if (!j.is_array()) {
    throw Error(ErrorKind::parse, "vertex set JSON must be an array");
  }
  VertexSet s(universe);
  for (const auto& v : j) {
    const int x = v.get<int>();
    if (x < 0 || x >= universe) {
      throw Error(ErrorKind::parse, "vertex out of range in set");
    }
    s.insert(x);
  }
  return s;
}

json witness_to_json(const MultipartiteWitness& w, int universe) {
  json classes = json::array();
  for (const auto& c : w.classes) classes.push_back(vertex_set_to_json(c));
  return json{{"universe", universe}, {"classes", classes}};
}

MultipartiteWitness witness_from_json(const json& j) {
  if (!j.is_object() || !j.contains("universe") || !j.contains("classes")) {
    throw Error(ErrorKind::parse, "witness JSON needs universe and classes");
  }
  const int universe = j["universe"].get<int>();
  if (universe < 0) throw Error(ErrorKind::parse, "negative witness universe");
  MultipartiteWitness w;
  for (const auto& c : j["classes"]) {
    w.classes.push_back(vertex_set_from_json(c, universe));
  }
  return w;
}

json tree_to_json(const Tree& t) {
  const auto view = t.rooted_at(t.root());
  json parents = json::array();
  for (VertexId v = 0; v < t.size(); ++v) parents.push_back(view.parent[v]);
  return json{{"n", t.size()}, {"parent", parents}};
}

Tree tree_from_json(const json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("parent")) {
    throw Error(ErrorKind::parse, "tree JSON needs n and parent");
  }
  const int n = j["n"].get<int>();
  const auto& pa = j["parent"];
  if (!pa.is_array() || static_cast<int>(pa.size()) != n) {
    throw Error(ErrorKind::parse, "tree JSON parent array has wrong length");
  }
  std::vector<VertexId> parent;
  parent.reserve(pa.size());
  for (const auto& p : pa) parent.push_back(p.get<VertexId>());
  try {
    return Tree::from_parents(parent);
  } catch (const Error& e) {
    throw Error(ErrorKind::parse, std::string("invalid tree JSON: ") + e.what());
  }
}

json certificate_to_json(const Certificate& c, int universe) {
  json out{{"kind", c.kind == Certificate::Kind::red_tree ? "red_tree"
                                                          : "blue_witness"},
           {"input_digest", std::to_string(c.input_digest)},
           {"parameters", c.parameters},
           {"mode", to_string(c.mode)},
           {"verified", c.verified},
           {"universe", universe}};
  if (c.tree) out["tree"] = tree_to_json(*c.tree);
  if (c.kind == Certificate::Kind::red_tree) {
    out["embedding"] = embedding_to_json(c.embedding);
  } else {
    out["witness"] = witness_to_json(c.witness, universe);
  }
  return out;
}

Certificate certificate_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) {
    throw Error(ErrorKind::parse, "certificate JSON needs a kind");
  }
  Certificate c;
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "red_tree") {
    c.kind = Certificate::Kind::red_tree;
  } else if (kind == "blue_witness") {
    c.kind = Certificate::Kind::blue_witness;
  } else {
    throw Error(ErrorKind::parse, "unknown certificate kind '" + kind + "'");
  }
  if (j.contains("tree")) c.tree = tree_from_json(j["tree"]);
  if (c.kind == Certificate::Kind::red_tree) {
    if (!j.contains("embedding") || !c.tree) {
      throw Error(ErrorKind::parse, "red certificate needs tree and embedding");
    }
    c.embedding = embedding_from_json(j["embedding"], c.tree->size());
  } else {
    if (!j.contains("witness")) {
      throw Error(ErrorKind::parse, "blue certificate needs a witness");
    }
    c.witness = witness_from_json(j["witness"]);
  }
  if (j.contains("input_digest")) {
    const auto& d = j["input_digest"];
    try {
      c.input_digest = d.is_string()
                           ? std::stoull(d.get<std::string>())
                           : d.get<std::uint64_t>();
    } catch (const std::exception&) {
      throw Error(ErrorKind::parse, "input_digest is not a 64-bit value");
    }
  }
  if (j.contains("parameters")) c.parameters = j["parameters"];
  if (j.contains("mode")) {
    const std::string m = j["mode"].get<std::string>();
    if (m == "exact") {
      c.mode = VerifyMode::exact;
    } else if (m == "sampled") {
      c.mode = VerifyMode::sampled;
    } else {
      throw Error(ErrorKind::parse, "unknown verify mode '" + m + "'");
    }
  }
  if (j.contains("verified")) c.verified = j["verified"].get<bool>();
  return c;
}

json vortex_to_json(const Vortex& v) {
  json levels = json::array();
  for (const auto& lv : v.levels) levels.push_back(vertex_set_to_json(lv));
  return json{{"levels", levels},
              {"sizes", v.sizes},
              {"m", v.m},
              {"lambda", v.lambda},
              {"mode", to_string(v.mode)}};
}

json vortex_partition_to_json(const VortexPartition& p) {
  json parts = json::array();
  for (const auto& pt : p.parts) parts.push_back(vertex_set_to_json(pt));
  return json{{"parts", parts},
              {"sizes", p.sizes},
              {"lambda", p.lambda},
              {"d", p.d},
              {"mode", to_string(p.mode)}};
}

}  // namespace rgl
