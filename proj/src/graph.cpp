#include "ct/graph.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace ct {

Graph::Graph(int n) : n_(n), adj_(n) {
    if (n < 0) throw ContractError("graph: negative vertex count");
}

Graph::Graph(int n, std::vector<std::pair<Vertex, Vertex>> edges) : Graph(n) {
    for (auto& [u, v] : edges) {
        check_vertex(u);
        check_vertex(v);
        if (u == v) throw ContractError("graph: self-loop");
        adj_[u].push_back(v);
        adj_[v].push_back(u);
    }
    m_ = 0;
    for (auto& nb : adj_) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        m_ += static_cast<int>(nb.size());
    }
    m_ /= 2;
}

void Graph::check_vertex(Vertex v) const {
    if (v < 0 || v >= n_) throw ContractError("graph: vertex id out of range");
}

bool Graph::has_edge(Vertex u, Vertex v) const {
    check_vertex(u);
    check_vertex(v);
    const auto& nb = adj_[u];
    return std::binary_search(nb.begin(), nb.end(), v);
}

const std::vector<Vertex>& Graph::neighbors(Vertex v) const {
    check_vertex(v);
    return adj_[v];
}

std::vector<std::pair<Vertex, Vertex>> Graph::edges() const {
    std::vector<std::pair<Vertex, Vertex>> out;
    out.reserve(m_);
    for (Vertex u = 0; u < n_; ++u)
        for (Vertex v : adj_[u])
            if (u < v) out.emplace_back(u, v);
    return out;
}

bool Graph::is_clique(const std::vector<Vertex>& verts) const {
    for (size_t i = 0; i < verts.size(); ++i)
        for (size_t j = i + 1; j < verts.size(); ++j)
            if (!has_edge(verts[i], verts[j])) return false;
    return true;
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& what) {
    throw ParseError("parse error at line " + std::to_string(line) + ": " + what);
}

bool to_int(std::string_view tok, long long& out) {
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc{} && p == tok.data() + tok.size();
}

}  // namespace

Graph parse_graph(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    long long n = -1, m = -1;
    std::vector<std::pair<Vertex, Vertex>> edges;

    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;  // blank
        if (tag == "c") continue;
        if (tag == "p") {
            if (n >= 0) parse_fail(lineno, "duplicate header");
            std::string a, b, rest;
            if (!(ls >> a >> b) || (ls >> rest)) parse_fail(lineno, "expected 'p <n> <m>'");
            if (!to_int(a, n) || !to_int(b, m) || n < 0 || m < 0)
                parse_fail(lineno, "invalid header counts");
        } else if (tag == "e") {
            if (n < 0) parse_fail(lineno, "edge before header");
            std::string a, b, rest;
            if (!(ls >> a >> b) || (ls >> rest)) parse_fail(lineno, "expected 'e <u> <v>'");
            long long u, v;
            if (!to_int(a, u) || !to_int(b, v)) parse_fail(lineno, "invalid endpoint");
            if (u < 1 || u > n || v < 1 || v > n) parse_fail(lineno, "vertex id out of range");
            if (u == v) parse_fail(lineno, "self-loop");
            edges.emplace_back(static_cast<Vertex>(u - 1), static_cast<Vertex>(v - 1));
        } else {
            parse_fail(lineno, "unknown line tag '" + tag + "'");
        }
    }
    if (n < 0) throw ParseError("parse error: missing 'p <n> <m>' header");
    return Graph(static_cast<int>(n), std::move(edges));
}

std::string format_graph(const Graph& g) {
    std::ostringstream out;
    out << "p " << g.n() << " " << g.m() << "\n";
    for (auto [u, v] : g.edges()) out << "e " << u + 1 << " " << v + 1 << "\n";
    return out.str();
}

std::vector<std::vector<Vertex>> connected_components(const Graph& g) {
    std::vector<std::vector<Vertex>> comps;
    std::vector<bool> seen(g.n(), false);
    for (Vertex s = 0; s < g.n(); ++s) {
        if (seen[s]) continue;
        std::vector<Vertex> block, stack{s};
        seen[s] = true;
        while (!stack.empty()) {
            Vertex v = stack.back();
            stack.pop_back();
            block.push_back(v);
            for (Vertex w : g.neighbors(v))
                if (!seen[w]) {
                    seen[w] = true;
                    stack.push_back(w);
                }
        }
        std::sort(block.begin(), block.end());
        comps.push_back(std::move(block));
    }
    return comps;
}

Graph induced_subgraph(const Graph& g, const std::vector<Vertex>& verts) {
    std::vector<int> index(g.n(), -1);
    for (size_t i = 0; i < verts.size(); ++i) index[verts[i]] = static_cast<int>(i);
    std::vector<std::pair<Vertex, Vertex>> edges;
    for (Vertex u : verts)
        for (Vertex w : g.neighbors(u))
            if (index[w] >= 0 && u < w) edges.emplace_back(index[u], index[w]);
    return Graph(static_cast<int>(verts.size()), std::move(edges));
}

}  // namespace ct
