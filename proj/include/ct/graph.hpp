#ifndef CT_GRAPH_HPP
#define CT_GRAPH_HPP

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ct {

using Vertex = int;

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ContractError : std::logic_error {
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

/// Undirected simple graph over dense vertex ids 0..n-1.
/// Neighbor lists are kept sorted; construction deduplicates edges and
/// rejects self-loops. Immutable after construction.
class Graph {
public:
    Graph() = default;
    explicit Graph(int n);
    Graph(int n, std::vector<std::pair<Vertex, Vertex>> edges);

    int n() const { return n_; }
    int m() const { return m_; }

    bool has_edge(Vertex u, Vertex v) const;
    const std::vector<Vertex>& neighbors(Vertex v) const;
    int degree(Vertex v) const { return static_cast<int>(neighbors(v).size()); }

    std::vector<std::pair<Vertex, Vertex>> edges() const;

    /// True if every vertex of `verts` is pairwise adjacent.
    bool is_clique(const std::vector<Vertex>& verts) const;

    bool operator==(const Graph& other) const {
        return n_ == other.n_ && adj_ == other.adj_;
    }

private:
    void check_vertex(Vertex v) const;

    int n_ = 0;
    int m_ = 0;
    std::vector<std::vector<Vertex>> adj_;
};

/// Parses the text graph format: header `p <n> <m>`, edge lines `e <u> <v>`
/// with 1-indexed endpoints, comment lines starting with `c`. Duplicate
/// edges are accepted silently; malformed lines, out-of-range ids and
/// self-loops raise ParseError naming the line number.
Graph parse_graph(std::string_view text);

/// Inverse of parse_graph, 1-indexed, deterministic edge order.
std::string format_graph(const Graph& g);

/// Partition of the vertex ids into maximal connected blocks, each block
/// sorted, blocks ordered by smallest member.
std::vector<std::vector<Vertex>> connected_components(const Graph& g);

/// Subgraph induced on `verts` (sorted, distinct). Vertex i of the result
/// corresponds to verts[i].
Graph induced_subgraph(const Graph& g, const std::vector<Vertex>& verts);

}  // namespace ct

#endif
