#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ct/decomp.hpp"
#include "ct/generators.hpp"
#include "ct/oracle.hpp"
#include "helpers.hpp"

using namespace ct;

namespace {

TreeDecomposition clique_tree_of(const Graph& g) {
    auto peo = std::get<Peo>(is_chordal(g));
    return clique_tree(g, peo);
}

Graph graph_from_bags(const TreeDecomposition& td, int n) {
    std::vector<std::pair<Vertex, Vertex>> edges;
    for (int u = 0; u < td.size(); ++u) {
        const auto& b = td.bag(u);
        for (size_t i = 0; i < b.size(); ++i)
            for (size_t j = i + 1; j < b.size(); ++j) edges.emplace_back(b[i], b[j]);
    }
    return Graph(n, std::move(edges));
}

}  // namespace

TEST_CASE("clique_tree on fixed instances") {
    {
        auto td = clique_tree_of(complete_graph(5));
        CHECK(td.size() == 1);
        CHECK(td.bag(0) == Clique{0, 1, 2, 3, 4});
    }
    {
        Graph path(3, {{0, 1}, {1, 2}});
        auto td = clique_tree_of(path);
        REQUIRE(td.size() == 2);
        CHECK(validate_decomposition(td, path).empty());
    }
    {
        auto g = h_graph(0);
        auto td = clique_tree_of(g);
        CHECK(td.size() == 3);
        CHECK(validate_decomposition(td, g).empty());
    }
    CHECK_THROWS_AS(clique_tree_of(Graph(3, {})), ContractError);
}

TEST_CASE("clique_tree covers the graph and satisfies the subtree property") {
    Rng rng(5);
    for (int trial = 0; trial < 120; ++trial) {
        Graph g = random_four_chordal(rng.next(), rng.range(1, 16), rng.range(4, 7));
        auto td = clique_tree_of(g);
        CHECK(validate_decomposition(td, g).empty());
        CHECK(graph_from_bags(td, g.n()) == g);
    }
}

TEST_CASE("nice_decomposition roots where asked and validates") {
    {
        auto g = complete_graph(5);
        auto nd = nice_decomposition(g, {0, 1, 2, 3, 4});
        CHECK(nd.size() == 1);
        CHECK(validate_nice(nd, g).empty());
    }
    {
        auto g = h_graph(1);
        // The only maximal 3-clique.
        auto peo = std::get<Peo>(is_chordal(g));
        Clique tri;
        for (const auto& c : maximal_cliques(g, peo))
            if (c.size() == 3) tri = c;
        REQUIRE(tri.size() == 3);
        auto nd = nice_decomposition(g, tri);
        CHECK(nd.bag(nd.root) == tri);
        CHECK(validate_nice(nd, g).empty());
    }
    {
        auto g = h_graph(0);
        // Root at the connecting clique {a'', a''', d, d'} = {2, 3, 4, 5}.
        auto nd = nice_decomposition(g, {2, 3, 4, 5});
        CHECK(nd.bag(nd.root) == Clique{2, 3, 4, 5});
        CHECK(validate_nice(nd, g).empty());
        for (int u = 0; u < nd.size(); ++u) CHECK(nd.bag(u).size() == 4);
    }
}

TEST_CASE("nice_decomposition rejects a bad root") {
    auto g = h_graph(1);  // has a maximal 3-clique
    CHECK_THROWS_AS(nice_decomposition(g, {0, 1, 2, 3}), ContractError);
    Graph c4(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    CHECK_THROWS_AS(nice_decomposition(c4, {0, 1, 2, 3}), ContractError);
}

TEST_CASE("validate_nice flags constructed violations") {
    auto g = complete_graph(4);
    TreeDecomposition td;
    td.nodes.resize(2);
    td.nodes[0].bag = {0, 1, 2, 3};
    td.nodes[0].children = {1};
    td.nodes[1].bag = {0, 1, 2, 3};
    td.nodes[1].parent = 0;
    td.root = 0;
    auto bad = validate_nice(td, g);
    bool dup = false;
    for (const auto& m : bad) dup |= m.find("duplicate") != std::string::npos;
    CHECK(dup);

    // A size-6 non-root bag sharing only 3 vertices with its parent.
    auto g9 = complete_graph(9);
    TreeDecomposition wide;
    wide.nodes.resize(2);
    wide.nodes[0].bag = {0, 1, 2, 3, 4, 5, 6, 7, 8};
    wide.nodes[0].children = {1};
    wide.nodes[1].bag = {0, 1, 2, 6, 7, 8};
    wide.nodes[1].parent = 0;
    wide.root = 0;
    auto bad2 = validate_nice(wide, g9);
    bool sharing = false;
    for (const auto& m : bad2) sharing |= m.find("expected k-1") != std::string::npos;
    CHECK(sharing);
}

TEST_CASE("nice_decomposition output validates over a fuzz corpus") {
    Rng rng(17);
    for (int trial = 0; trial < 120; ++trial) {
        Graph g = random_four_chordal(rng.next(), rng.range(1, 18), rng.range(4, 8));
        if (connected_components(g).size() != 1) continue;
        auto peo = std::get<Peo>(is_chordal(g));
        auto cliques = maximal_cliques(g, peo);
        Clique root;
        for (const auto& c : cliques)
            if (c.size() == 3) {
                root = c;
                break;
            }
        if (root.empty())
            for (const auto& c : cliques)
                if (c.size() >= 4) {
                    root = c;
                    break;
                }
        auto nd = nice_decomposition(g, root);
        auto violations = validate_nice(nd, g);
        CHECK(violations.empty());
        if (!violations.empty())
            for (const auto& m : violations) MESSAGE(m);
    }
}

TEST_CASE("find_branches on fixed shapes") {
    {
        auto g = complete_graph(5);
        auto nd = nice_decomposition(g, {0, 1, 2, 3, 4});
        CHECK(find_branches(nd).empty());
    }
    {
        auto g = h_graph(1);
        auto peo = std::get<Peo>(is_chordal(g));
        Clique tri;
        for (const auto& c : maximal_cliques(g, peo))
            if (c.size() == 3) tri = c;
        auto nd = nice_decomposition(g, tri);
        auto branches = find_branches(nd);
        CHECK(branches.size() >= 3);  // t = 1, so at least t + 2
        for (const auto& b : branches) {
            CHECK(nd.bag(b.root_node).size() == 4);
            auto shared = nd.shared_with_parent(b.root_node);
            CHECK(shared == std::vector<Vertex>{b.alpha, b.beta});
            for (int u : b.node_set) CHECK(nd.bag(u).size() != 3);
        }
    }
}

TEST_CASE("at least t+2 branches over a fuzz corpus") {
    Rng rng(29);
    int checked = 0;
    for (int trial = 0; trial < 200 && checked < 60; ++trial) {
        Graph g = random_four_chordal(rng.next(), rng.range(2, 16), rng.range(4, 7));
        if (connected_components(g).size() != 1) continue;
        int t = count_maximal_triangles(g);
        if (t < 1) continue;
        ++checked;
        auto peo = std::get<Peo>(is_chordal(g));
        Clique tri;
        for (const auto& c : maximal_cliques(g, peo))
            if (c.size() == 3) {
                tri = c;
                break;
            }
        auto nd = nice_decomposition(g, tri);
        auto branches = find_branches(nd);
        CHECK(static_cast<int>(branches.size()) >= t + 2);
        // Maximal branches never nest.
        for (const auto& a : branches)
            for (const auto& b : branches)
                if (a.root_node != b.root_node)
                    CHECK(!std::binary_search(a.node_set.begin(), a.node_set.end(), b.root_node));
    }
    CHECK(checked >= 30);
}
