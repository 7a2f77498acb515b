#pragma once

#include <string>
#include <vector>

#include "rgl/graph.hpp"
#include "rgl/tree.hpp"

namespace rgl {

// Map from tree vertices to host vertices; -1 marks an unmapped vertex, so
// partial states during an embedding run are representable.
struct Embedding {
    std::vector<VertexId> to_host;

    explicit Embedding(int tree_size = 0) : to_host(tree_size, -1) {}

    bool is_mapped(VertexId tree_v) const { return to_host[tree_v] >= 0; }
    int mapped_count() const {
        int c = 0;
        for (VertexId v : to_host) c += (v >= 0) ? 1 : 0;
        return c;
    }
    bool complete() const {
        return mapped_count() == static_cast<int>(to_host.size());
    }

    bool operator==(const Embedding&) const = default;
};

// "" when e is a valid (partial) embedding of t into host: sizes match,
// images are in range and pairwise distinct, and every tree edge with both
// ends mapped lands on a host edge.  With require_complete, unmapped
// vertices are also faults.
std::string embedding_fault(const Tree& t, const Graph& host,
                            const Embedding& e, bool require_complete = true);

}  // namespace rgl
