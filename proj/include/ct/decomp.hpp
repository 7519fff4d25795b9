#ifndef CT_DECOMP_HPP
#define CT_DECOMP_HPP

#include <string>
#include <vector>

#include "ct/chordal.hpp"
#include "ct/graph.hpp"

namespace ct {

struct DecompNode {
    std::vector<Vertex> bag;  // sorted, induces a clique in the host graph
    int parent = -1;
    std::vector<int> children;
    bool is_maximal = true;  // bag is a maximal clique of the host graph
};

/// Rooted tree of bags. Invariants (checked by validate_decomposition):
/// every edge of the host graph lies in some bag and every bag induces a
/// clique; for each vertex the nodes containing it form a subtree.
struct TreeDecomposition {
    std::vector<DecompNode> nodes;
    int root = -1;

    int size() const { return static_cast<int>(nodes.size()); }
    const std::vector<Vertex>& bag(int u) const { return nodes[u].bag; }
    bool bag_contains(int u, Vertex v) const;
    std::vector<Vertex> shared_with_parent(int u) const;

    /// Children-before-parents order; children visited in ascending id.
    std::vector<int> post_order() const;

    /// All nodes of the subtree rooted at u, ascending id.
    std::vector<int> subtree(int u) const;
};

/// Subtree of a nice decomposition rooted at a 4-clique node that shares
/// exactly {alpha, beta} with its parent and has no 3-clique descendant.
struct Branch {
    int root_node;
    Vertex alpha, beta;
    std::vector<int> node_set;  // all descendants incl. root_node, ascending
};

/// Clique tree: one node per maximal non-trivial clique, connected by a
/// maximum-weight spanning tree of the clique intersection graph. Requires
/// g connected with at least one edge; throws ContractError otherwise.
TreeDecomposition clique_tree(const Graph& g, const Peo& peo);

/// Reroot the tree at `new_root` (parent pointers flipped along the path).
void reroot(TreeDecomposition& td, int new_root);

/// Transforms a rooted maximal-clique tree into a nice decomposition of g:
/// optionally grafts a new root with bag `root_clique` onto a node whose bag
/// contains it, then subdivides oversized bags and contracts adjacent
/// duplicates. Node ids are compacted in BFS order from the root.
TreeDecomposition make_nice(const Graph& g, TreeDecomposition td,
                            const std::vector<Vertex>* root_clique);

/// Nice tree-decomposition rooted at root_clique, which must be a maximal
/// 3-clique if g has one, otherwise any clique of size >= 4.
TreeDecomposition nice_decomposition(const Graph& g, const std::vector<Vertex>& root_clique);

/// Tree-decomposition invariants only.
std::vector<std::string> validate_decomposition(const TreeDecomposition& td, const Graph& g);

/// Tree-decomposition invariants plus the four niceness properties.
std::vector<std::string> validate_nice(const TreeDecomposition& td, const Graph& g);

/// All maximal branches (a branch nested inside another is not reported).
std::vector<Branch> find_branches(const TreeDecomposition& td);

/// Structured export: one line per node, "id | parent | bag (1-indexed)".
std::string format_decomposition(const TreeDecomposition& td);

}  // namespace ct

#endif
