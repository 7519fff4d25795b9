#ifndef CT_TEST_HELPERS_HPP
#define CT_TEST_HELPERS_HPP

#include <algorithm>
#include <optional>
#include <vector>

#include "ct/generators.hpp"
#include "ct/graph.hpp"

namespace ct::test {

/// Random graph with edge probability pct/100; independent of the library's
/// 4-chordal generator.
inline Graph random_graph(Rng& rng, int n, int pct) {
    std::vector<std::pair<Vertex, Vertex>> edges;
    for (Vertex u = 0; u < n; ++u)
        for (Vertex v = u + 1; v < n; ++v)
            if (rng.chance(pct)) edges.emplace_back(u, v);
    return Graph(n, std::move(edges));
}

/// Exhaustive induced-cycle search: true iff g has an induced cycle of
/// length >= 4. Only for small n.
inline bool naive_has_hole(const Graph& g) {
    int n = g.n();
    for (int mask = 0; mask < (1 << n); ++mask) {
        std::vector<Vertex> verts;
        for (Vertex v = 0; v < n; ++v)
            if (mask & (1 << v)) verts.push_back(v);
        if (verts.size() < 4) continue;
        // Induced subgraph must be a single cycle: all degrees 2, connected.
        bool deg_ok = true;
        for (Vertex v : verts) {
            int d = 0;
            for (Vertex w : verts)
                if (w != v && g.has_edge(v, w)) ++d;
            if (d != 2) {
                deg_ok = false;
                break;
            }
        }
        if (!deg_ok) continue;
        Graph sub = induced_subgraph(g, verts);
        if (connected_components(sub).size() == 1) return true;
    }
    return false;
}

/// All maximal cliques by subset enumeration. Only for small n.
inline std::vector<std::vector<Vertex>> naive_maximal_cliques(const Graph& g) {
    int n = g.n();
    std::vector<int> clique_masks;
    for (int mask = 1; mask < (1 << n); ++mask) {
        std::vector<Vertex> verts;
        for (Vertex v = 0; v < n; ++v)
            if (mask & (1 << v)) verts.push_back(v);
        if (g.is_clique(verts)) clique_masks.push_back(mask);
    }
    std::vector<std::vector<Vertex>> out;
    for (int m : clique_masks) {
        bool maximal = true;
        for (int other : clique_masks)
            if (other != m && (other & m) == m) {
                maximal = false;
                break;
            }
        if (!maximal) continue;
        std::vector<Vertex> verts;
        for (Vertex v = 0; v < g.n(); ++v)
            if (m & (1 << v)) verts.push_back(v);
        out.push_back(verts);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Exact minimum clique transversal by subset enumeration. Only for small n.
inline int naive_min_transversal(const Graph& g) {
    auto cliques = naive_maximal_cliques(g);
    std::vector<int> targets;
    for (const auto& c : cliques) {
        if (c.size() < 2) continue;
        int m = 0;
        for (Vertex v : c) m |= 1 << v;
        targets.push_back(m);
    }
    if (targets.empty()) return 0;
    int n = g.n();
    for (int size = 0; size <= n; ++size) {
        for (int mask = 0; mask < (1 << n); ++mask) {
            if (__builtin_popcount(static_cast<unsigned>(mask)) != size) continue;
            bool hits = true;
            for (int t : targets)
                if ((t & mask) == 0) {
                    hits = false;
                    break;
                }
            if (hits) return size;
        }
    }
    return n;
}

}  // namespace ct::test

#endif
