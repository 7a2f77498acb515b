#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "rgl/embedding.hpp"
#include "rgl/engine.hpp"
#include "rgl/graph.hpp"
#include "rgl/tree.hpp"
#include "rgl/vortex.hpp"

namespace rgl {

// Line-oriented text formats for interchange.  Graph:
//     p <n> <edge_count>
//     e <u> <v>            (one per edge, 0-based endpoints)
// TwoColouring: the same with an extra first line `c red`; the e-lines list
// the red edges, blue is the complement within K_n.  Tree:
//     t <n>
//     p <child> <parent>   (root has parent -1)
// Blank lines and lines starting with '#' are ignored everywhere.  Parse
// failures throw Error(parse) with the 1-based line number in the message.

Graph read_graph(std::istream& in);
void write_graph(std::ostream& out, const Graph& g);
Graph read_graph_file(const std::string& path);
void write_graph_file(const std::string& path, const Graph& g);

TwoColouring read_colouring(std::istream& in);
void write_colouring(std::ostream& out, const TwoColouring& c);
TwoColouring read_colouring_file(const std::string& path);
void write_colouring_file(const std::string& path, const TwoColouring& c);

Tree read_tree(std::istream& in);
void write_tree(std::ostream& out, const Tree& t);
Tree read_tree_file(const std::string& path);
void write_tree_file(const std::string& path, const Tree& t);

// JSON forms.  Embeddings are a list of [tree_vertex, host_vertex] pairs
// (unmapped vertices omitted); witnesses carry their universe so the class
// bitsets can be rebuilt; certificates embed tree, map/witness, digest
// (decimal string: 64-bit values do not survive JSON number precision),
// parameter record, verification mode and verified flag.

nlohmann::json embedding_to_json(const Embedding& e);
Embedding embedding_from_json(const nlohmann::json& j, int tree_size);

nlohmann::json vertex_set_to_json(const VertexSet& s);
VertexSet vertex_set_from_json(const nlohmann::json& j, int universe);

nlohmann::json witness_to_json(const MultipartiteWitness& w, int universe);
MultipartiteWitness witness_from_json(const nlohmann::json& j);

nlohmann::json tree_to_json(const Tree& t);
Tree tree_from_json(const nlohmann::json& j);

nlohmann::json certificate_to_json(const Certificate& c, int universe);
Certificate certificate_from_json(const nlohmann::json& j);

nlohmann::json vortex_to_json(const Vortex& v);
nlohmann::json vortex_partition_to_json(const VortexPartition& p);

}  // namespace rgl
