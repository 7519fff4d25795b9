#include "ct/generators.hpp"

#include <algorithm>

#include "ct/chordal.hpp"

namespace ct {

namespace {

void add_clique_edges(std::vector<std::pair<Vertex, Vertex>>& edges,
                      const std::vector<Vertex>& verts) {
    for (size_t i = 0; i < verts.size(); ++i)
        for (size_t j = i + 1; j < verts.size(); ++j)
            edges.emplace_back(verts[i], verts[j]);
}

}  // namespace

Graph complete_graph(int n) {
    if (n < 1) throw ContractError("complete_graph: n must be >= 1");
    std::vector<std::pair<Vertex, Vertex>> edges;
    for (Vertex u = 0; u < n; ++u)
        for (Vertex v = u + 1; v < n; ++v) edges.emplace_back(u, v);
    return Graph(n, std::move(edges));
}

namespace {

struct HkLayout {
    Vertex a, a1, a2, a3;
    Vertex d, d1, d2, d3;
    int k;
    Vertex b(int i) const { return 4 + 7 * i; }        // i in 0..k-1
    Vertex b1(int i) const { return 4 + 7 * i + 1; }
    Vertex b2(int i) const { return 4 + 7 * i + 2; }
    Vertex c(int i) const { return 4 + 7 * i + 3; }
    Vertex c1(int i) const { return 4 + 7 * i + 4; }
    Vertex c2(int i) const { return 4 + 7 * i + 5; }
    Vertex c3(int i) const { return 4 + 7 * i + 6; }
};

HkLayout hk_layout(int k) {
    HkLayout l;
    l.a = 0;
    l.a1 = 1;
    l.a2 = 2;
    l.a3 = 3;
    l.k = k;
    l.d = 7 * k + 4;
    l.d1 = 7 * k + 5;
    l.d2 = 7 * k + 6;
    l.d3 = 7 * k + 7;
    return l;
}

}  // namespace

Graph h_graph(int k) {
    if (k < 0) throw ContractError("h_graph: k must be >= 0");
    auto l = hk_layout(k);
    int n = 7 * k + 8;
    std::vector<std::pair<Vertex, Vertex>> edges;
    add_clique_edges(edges, {l.a, l.a1, l.a2, l.a3});
    add_clique_edges(edges, {l.d, l.d1, l.d2, l.d3});
    for (int i = 0; i < k; ++i) {
        add_clique_edges(edges, {l.b(i), l.b1(i), l.b2(i)});
        add_clique_edges(edges, {l.c(i), l.c1(i), l.c2(i), l.c3(i)});
        add_clique_edges(edges, {l.b1(i), l.b2(i), l.c(i), l.c1(i)});
        if (i + 1 < k) add_clique_edges(edges, {l.b(i), l.b2(i), l.b(i + 1), l.b1(i + 1)});
    }
    if (k == 0) {
        add_clique_edges(edges, {l.a2, l.a3, l.d, l.d1});
    } else {
        add_clique_edges(edges, {l.a2, l.a3, l.b(0), l.b1(0)});
        add_clique_edges(edges, {l.b(k - 1), l.b2(k - 1), l.d, l.d1});
    }
    return Graph(n, std::move(edges));
}

Graph lower_bound_graph(int n) {
    if (n < 5) throw ContractError("lower_bound_graph: n must be >= 5");
    if (n <= 7) return complete_graph(n);
    int k = (n - 8) / 7;
    int z = (n - 1) % 7;
    auto l = hk_layout(k);
    Graph base = h_graph(k);
    auto edges = base.edges();
    int base_n = base.n();
    if (z <= 3) {
        for (int j = 0; j < z; ++j) {
            Vertex e = base_n + j;
            for (Vertex w : {l.d, l.d1, l.d2, l.d3}) edges.emplace_back(e, w);
        }
    } else {
        std::vector<Vertex> block;
        for (int j = 0; j < z; ++j) block.push_back(base_n + j);
        add_clique_edges(edges, block);
        for (Vertex e : {block[0], block[1]}) {
            edges.emplace_back(e, l.d2);
            edges.emplace_back(e, l.d3);
        }
    }
    return Graph(n + 0, std::move(edges));
}

namespace {

/// One attempt at a random bag tree; may fail 4-chordality (then the caller
/// retries with a perturbed seed).
Graph random_attempt(Rng& rng, int target_nodes, int max_bag) {
    struct Bag {
        std::vector<Vertex> verts;
    };
    std::vector<Bag> bags;
    int next_vertex = 0;
    auto fresh = [&] { return next_vertex++; };

    int root_size = rng.range(4, max_bag);
    Bag root;
    for (int i = 0; i < root_size; ++i) root.verts.push_back(fresh());
    bags.push_back(root);

    while (static_cast<int>(bags.size()) < target_nodes) {
        const Bag& parent = bags[rng.below(bags.size())];
        bool triangle = rng.chance(20) && parent.verts.size() >= 2;
        Bag child;
        if (triangle) {
            // Maximal 3-clique sharing an edge with the parent, its other
            // two edges covered by fresh 4-clique bags below.
            size_t i = rng.below(parent.verts.size());
            size_t j = rng.below(parent.verts.size() - 1);
            if (j >= i) ++j;
            Vertex x = parent.verts[i], y = parent.verts[j], zv = fresh();
            child.verts = {x, y, zv};
            bags.push_back(child);
            for (Vertex other : {x, y}) {
                Bag cover;
                cover.verts = {other, zv, fresh(), fresh()};
                bags.push_back(cover);
            }
            continue;
        }
        int size = rng.range(4, max_bag);
        int shared = rng.range(1, std::min<int>(size - 1, static_cast<int>(parent.verts.size())));
        std::vector<Vertex> pool = parent.verts;
        for (int s = 0; s < shared; ++s) {
            size_t i = rng.below(pool.size());
            child.verts.push_back(pool[i]);
            pool.erase(pool.begin() + static_cast<long>(i));
        }
        while (static_cast<int>(child.verts.size()) < size) child.verts.push_back(fresh());
        bags.push_back(child);
    }

    std::vector<std::pair<Vertex, Vertex>> edges;
    for (const auto& b : bags) add_clique_edges(edges, b.verts);
    return Graph(next_vertex, std::move(edges));
}

}  // namespace

Graph random_four_chordal(uint64_t seed, int target_nodes, int max_bag) {
    if (target_nodes < 1) throw ContractError("random_four_chordal: target_nodes must be >= 1");
    if (max_bag < 4 || max_bag > 12)
        throw ContractError("random_four_chordal: max_bag must be in [4, 12]");
    for (uint64_t attempt = 0;; ++attempt) {
        Rng rng(seed * 0x100000001b3ULL + attempt);
        Graph g = random_attempt(rng, target_nodes, max_bag);
        if (is_four_chordal(g)) return g;
    }
}

}  // namespace ct
