#include "ct/chordal.hpp"

#include <algorithm>
#include <deque>

namespace ct {

namespace {

/// Maximum cardinality search. Returns an elimination order: vertices are
/// selected for positions n-1 down to 0, each time taking the unselected
/// vertex with the most selected neighbors (ties by smallest id).
std::vector<Vertex> mcs_order(const Graph& g) {
    int n = g.n();
    std::vector<int> weight(n, 0);
    std::vector<bool> selected(n, false);
    std::vector<Vertex> order(n);
    for (int pos = n - 1; pos >= 0; --pos) {
        Vertex best = -1;
        for (Vertex v = 0; v < n; ++v)
            if (!selected[v] && (best == -1 || weight[v] > weight[best])) best = v;
        selected[best] = true;
        order[pos] = best;
        for (Vertex w : g.neighbors(best))
            if (!selected[w]) ++weight[w];
    }
    return order;
}

/// Searches for an induced cycle of length >= 4. Only called on graphs that
/// already failed PEO verification, so a hole exists; still returns nullopt
/// defensively if none is found.
std::optional<CycleWitness> find_hole(const Graph& g) {
    int n = g.n();
    for (Vertex v = 0; v < n; ++v) {
        const auto& nb = g.neighbors(v);
        for (size_t i = 0; i < nb.size(); ++i) {
            for (size_t j = i + 1; j < nb.size(); ++j) {
                Vertex u = nb[i], w = nb[j];
                if (g.has_edge(u, w)) continue;
                // BFS from u to w avoiding v and N(v) \ {u,w}; a shortest
                // path here closes an induced cycle through v.
                std::vector<int> prev(n, -2);
                prev[v] = -3;
                for (Vertex x : nb)
                    if (x != u && x != w) prev[x] = -3;
                std::deque<Vertex> queue{u};
                prev[u] = -1;
                while (!queue.empty()) {
                    Vertex x = queue.front();
                    queue.pop_front();
                    if (x == w) break;
                    for (Vertex y : g.neighbors(x))
                        if (prev[y] == -2) {
                            prev[y] = x;
                            queue.push_back(y);
                        }
                }
                if (prev[w] < -1) continue;
                std::vector<Vertex> path;
                for (Vertex x = w; x != -1; x = prev[x]) path.push_back(x);
                std::reverse(path.begin(), path.end());  // u ... w
                path.push_back(v);
                return CycleWitness{std::move(path)};
            }
        }
    }
    return std::nullopt;
}

}  // namespace

bool verify_peo(const Graph& g, const Peo& peo) {
    int n = g.n();
    if (static_cast<int>(peo.order.size()) != n) return false;
    std::vector<int> pos(n, -1);
    for (int i = 0; i < n; ++i) {
        Vertex v = peo.order[i];
        if (v < 0 || v >= n || pos[v] != -1) return false;
        pos[v] = i;
    }
    for (Vertex v = 0; v < n; ++v) {
        std::vector<Vertex> later;
        for (Vertex w : g.neighbors(v))
            if (pos[w] > pos[v]) later.push_back(w);
        for (size_t i = 0; i < later.size(); ++i)
            for (size_t j = i + 1; j < later.size(); ++j)
                if (!g.has_edge(later[i], later[j])) return false;
    }
    return true;
}

std::variant<Peo, CycleWitness> is_chordal(const Graph& g) {
    Peo peo{mcs_order(g)};
    if (verify_peo(g, peo)) return peo;
    auto hole = find_hole(g);
    if (!hole) throw ContractError("chordal: MCS verification failed but no hole found");
    return *hole;
}

std::vector<Clique> maximal_cliques(const Graph& g, const Peo& peo) {
    if (!verify_peo(g, peo)) throw ContractError("maximal_cliques: invalid elimination order");
    int n = g.n();
    std::vector<int> pos(n);
    for (int i = 0; i < n; ++i) pos[peo.order[i]] = i;

    std::vector<Clique> cand;
    cand.reserve(n);
    for (Vertex v = 0; v < n; ++v) {
        Clique c{v};
        for (Vertex w : g.neighbors(v))
            if (pos[w] > pos[v]) c.push_back(w);
        std::sort(c.begin(), c.end());
        cand.push_back(std::move(c));
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

    // Drop candidates strictly contained in another candidate.
    std::vector<Clique> out;
    for (const auto& c : cand) {
        bool dominated = false;
        for (const auto& d : cand) {
            if (d.size() <= c.size()) continue;
            if (std::includes(d.begin(), d.end(), c.begin(), c.end())) {
                dominated = true;
                break;
            }
        }
        if (!dominated) out.push_back(c);
    }
    return out;
}

std::variant<std::monostate, FourChordalWitness> check_four_chordal(const Graph& g) {
    auto chord = is_chordal(g);
    if (auto* hole = std::get_if<CycleWitness>(&chord))
        return FourChordalWitness{*hole, std::nullopt};
    auto cliques = maximal_cliques(g, std::get<Peo>(chord));
    // Every edge lies in a 4-clique iff the largest maximal clique containing
    // it has size >= 4.
    for (auto [u, v] : g.edges()) {
        bool covered = false;
        for (const auto& c : cliques) {
            if (c.size() < 4) continue;
            if (std::binary_search(c.begin(), c.end(), u) &&
                std::binary_search(c.begin(), c.end(), v)) {
                covered = true;
                break;
            }
        }
        if (!covered) return FourChordalWitness{std::nullopt, std::make_pair(u, v)};
    }
    return std::monostate{};
}

bool is_four_chordal(const Graph& g) {
    return std::holds_alternative<std::monostate>(check_four_chordal(g));
}

int count_maximal_triangles(const Graph& g) {
    auto chord = is_chordal(g);
    if (!std::holds_alternative<Peo>(chord))
        throw ContractError("count_maximal_triangles: graph not chordal");
    auto cliques = maximal_cliques(g, std::get<Peo>(chord));
    int t = 0;
    for (const auto& c : cliques)
        if (c.size() == 3) ++t;
    return t;
}

}  // namespace ct
