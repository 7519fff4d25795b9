#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ct/chordal.hpp"
#include "ct/generators.hpp"
#include "ct/graph.hpp"
#include "helpers.hpp"

using namespace ct;

TEST_CASE("parse_graph reads the text format") {
    Graph g = parse_graph("p 3 2\ne 1 2\ne 2 3\n");
    CHECK(g.n() == 3);
    CHECK(g.m() == 2);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 2));
    CHECK(!g.has_edge(0, 2));
}

TEST_CASE("parse_graph accepts comments, blanks and duplicate edges") {
    Graph g = parse_graph("c a complete graph\np 4 6\ne 1 2\ne 1 2\n\ne 1 3\ne 1 4\ne 2 3\ne 2 4\ne 3 4\n");
    CHECK(g.n() == 4);
    CHECK(g.m() == 6);
}

TEST_CASE("parse_graph rejects bad input with line numbers") {
    CHECK_THROWS_AS(parse_graph("p 2 1\ne 1 1\n"), ParseError);
    CHECK_THROWS_AS(parse_graph("p 2 1\ne 1 5\n"), ParseError);
    CHECK_THROWS_AS(parse_graph("p 2 1\nq 1 2\n"), ParseError);
    CHECK_THROWS_AS(parse_graph("e 1 2\n"), ParseError);
    try {
        parse_graph("p 3 1\ne 1 1\n");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("format_graph round trips") {
    Graph g = complete_graph(4);
    Graph h = parse_graph(format_graph(g));
    CHECK(g == h);
}

TEST_CASE("connected_components partitions the vertex set") {
    Graph g(8, {{0, 1}, {1, 2}, {2, 3}, {0, 2}, {4, 5}, {5, 6}, {4, 6}, {4, 7}});
    auto comps = connected_components(g);
    REQUIRE(comps.size() == 2);
    CHECK(comps[0] == std::vector<Vertex>{0, 1, 2, 3});
    CHECK(comps[1] == std::vector<Vertex>{4, 5, 6, 7});

    Graph empty(3, {});
    CHECK(connected_components(empty).size() == 3);
}

TEST_CASE("is_chordal accepts complete graphs and rejects cycles") {
    auto res = is_chordal(complete_graph(4));
    CHECK(std::holds_alternative<Peo>(res));

    Graph c4(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    auto bad = is_chordal(c4);
    REQUIRE(std::holds_alternative<CycleWitness>(bad));
    CHECK(std::get<CycleWitness>(bad).cycle.size() == 4);
}

TEST_CASE("chordality witness is an induced cycle") {
    Rng rng(7);
    for (int trial = 0; trial < 400; ++trial) {
        Graph g = test::random_graph(rng, rng.range(4, 8), rng.range(20, 80));
        auto res = is_chordal(g);
        if (auto* hole = std::get_if<CycleWitness>(&res)) {
            const auto& cyc = hole->cycle;
            REQUIRE(cyc.size() >= 4);
            for (size_t i = 0; i < cyc.size(); ++i)
                for (size_t j = i + 1; j < cyc.size(); ++j) {
                    bool adjacent_on_cycle = (j == i + 1) || (i == 0 && j == cyc.size() - 1);
                    CHECK(g.has_edge(cyc[i], cyc[j]) == adjacent_on_cycle);
                }
        } else {
            CHECK(verify_peo(g, std::get<Peo>(res)));
        }
    }
}

TEST_CASE("is_chordal agrees with exhaustive hole search on small graphs") {
    Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        Graph g = test::random_graph(rng, rng.range(1, 8), rng.range(10, 90));
        bool chordal = std::holds_alternative<Peo>(is_chordal(g));
        CHECK(chordal == !test::naive_has_hole(g));
    }
}

TEST_CASE("maximal_cliques on known graphs") {
    {
        auto g = complete_graph(4);
        auto peo = std::get<Peo>(is_chordal(g));
        auto cs = maximal_cliques(g, peo);
        REQUIRE(cs.size() == 1);
        CHECK(cs[0] == Clique{0, 1, 2, 3});
    }
    {
        Graph path(3, {{0, 1}, {1, 2}});
        auto peo = std::get<Peo>(is_chordal(path));
        auto cs = maximal_cliques(path, peo);
        REQUIRE(cs.size() == 2);
        CHECK(cs[0] == Clique{0, 1});
        CHECK(cs[1] == Clique{1, 2});
    }
    {
        // Three maximal cliques: the two end 4-cliques and the connector.
        auto g = h_graph(0);
        auto peo = std::get<Peo>(is_chordal(g));
        auto cs = maximal_cliques(g, peo);
        CHECK(cs.size() == 3);
        CHECK(cs == test::naive_maximal_cliques(g));
    }
}

TEST_CASE("maximal_cliques matches subset enumeration on random graphs") {
    Rng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        Graph g = test::random_graph(rng, rng.range(1, 8), rng.range(10, 90));
        auto res = is_chordal(g);
        auto* peo = std::get_if<Peo>(&res);
        if (!peo) continue;
        auto cs = maximal_cliques(g, *peo);
        CHECK(cs == test::naive_maximal_cliques(g));
        for (const auto& c : cs) CHECK(g.is_clique(c));
    }
}

TEST_CASE("maximal_cliques rejects an invalid elimination order") {
    Graph path(3, {{0, 1}, {1, 2}});
    Peo bogus{{1, 0, 2}};  // later neighbors of 1 are {0,2}, not adjacent
    CHECK_THROWS_AS(maximal_cliques(path, bogus), ContractError);
}

TEST_CASE("is_four_chordal classifies the basics") {
    CHECK(!is_four_chordal(complete_graph(3)));
    CHECK(is_four_chordal(complete_graph(4)));
    CHECK(is_four_chordal(h_graph(2)));
    Graph c4(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    auto w = std::get<FourChordalWitness>(check_four_chordal(c4));
    CHECK(w.hole.has_value());
    auto thin = std::get<FourChordalWitness>(check_four_chordal(complete_graph(3)));
    CHECK(thin.edge.has_value());
}

TEST_CASE("count_maximal_triangles") {
    CHECK(count_maximal_triangles(complete_graph(4)) == 0);
    CHECK(count_maximal_triangles(complete_graph(3)) == 1);
    CHECK(count_maximal_triangles(h_graph(1)) == 1);
    CHECK(count_maximal_triangles(h_graph(2)) == 2);
    CHECK(count_maximal_triangles(h_graph(0)) == 0);
}
