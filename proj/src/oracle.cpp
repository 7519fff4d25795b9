#include "ct/oracle.hpp"

#include <algorithm>

namespace ct {

namespace {

void bk_recurse(const Graph& g, std::vector<Vertex>& r, std::vector<Vertex> p,
                std::vector<Vertex> x, std::vector<Clique>& out) {
    if (p.empty() && x.empty()) {
        Clique c = r;
        std::sort(c.begin(), c.end());
        out.push_back(std::move(c));
        return;
    }
    // Pivot: vertex of P ∪ X with most neighbors in P.
    Vertex pivot = -1;
    int best = -1;
    for (const auto& side : {p, x})
        for (Vertex u : side) {
            int cnt = 0;
            for (Vertex v : p)
                if (g.has_edge(u, v)) ++cnt;
            if (cnt > best) {
                best = cnt;
                pivot = u;
            }
        }
    std::vector<Vertex> ext;
    for (Vertex v : p)
        if (pivot == -1 || !g.has_edge(pivot, v)) ext.push_back(v);
    for (Vertex v : ext) {
        std::vector<Vertex> np, nx;
        for (Vertex u : p)
            if (g.has_edge(u, v)) np.push_back(u);
        for (Vertex u : x)
            if (g.has_edge(u, v)) nx.push_back(u);
        r.push_back(v);
        bk_recurse(g, r, std::move(np), std::move(nx), out);
        r.pop_back();
        p.erase(std::find(p.begin(), p.end(), v));
        x.push_back(v);
    }
}

}  // namespace

std::vector<Clique> bron_kerbosch(const Graph& g) {
    std::vector<Vertex> r, p(g.n()), x;
    for (Vertex v = 0; v < g.n(); ++v) p[v] = v;
    std::vector<Clique> out;
    bk_recurse(g, r, std::move(p), std::move(x), out);
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<Clique> transversal_gap(const Graph& g, const std::vector<Vertex>& s) {
    std::vector<bool> in_s(g.n(), false);
    for (Vertex v : s) {
        if (v < 0 || v >= g.n()) throw ContractError("is_transversal: vertex out of range");
        in_s[v] = true;
    }
    for (const auto& c : bron_kerbosch(g)) {
        if (c.size() < 2) continue;
        bool hit = false;
        for (Vertex v : c)
            if (in_s[v]) {
                hit = true;
                break;
            }
        if (!hit) return c;
    }
    return std::nullopt;
}

bool is_transversal(const Graph& g, const std::vector<Vertex>& s) {
    return !transversal_gap(g, s).has_value();
}

namespace {

struct HittingSearch {
    const std::vector<Clique>& cliques;
    std::vector<bool> hit;  // per clique
    std::vector<bool> chosen;
    std::vector<Vertex> current;
    long long explored = 0;

    explicit HittingSearch(const std::vector<Clique>& cs, int n)
        : cliques(cs), hit(cs.size(), false), chosen(n, false) {}

    /// Greedy count of pairwise disjoint unhit cliques; each needs its own
    /// vertex, so it lower-bounds the remaining budget.
    int disjoint_lower_bound(const std::vector<bool>& used0) const {
        std::vector<bool> used = used0;
        int cnt = 0;
        for (size_t i = 0; i < cliques.size(); ++i) {
            if (hit[i]) continue;
            bool free = true;
            for (Vertex v : cliques[i])
                if (used[v]) {
                    free = false;
                    break;
                }
            if (!free) continue;
            ++cnt;
            for (Vertex v : cliques[i]) used[v] = true;
        }
        return cnt;
    }

    bool dfs(int budget) {
        ++explored;
        int target = -1;
        for (size_t i = 0; i < cliques.size(); ++i) {
            if (hit[i]) continue;
            if (target == -1 || cliques[i].size() < cliques[target].size())
                target = static_cast<int>(i);
        }
        if (target == -1) return true;
        if (budget == 0) return false;
        if (budget > 1) {
            std::vector<bool> none(chosen.size(), false);
            if (disjoint_lower_bound(none) > budget) return false;
        }
        for (Vertex v : cliques[target]) {
            chosen[v] = true;
            current.push_back(v);
            std::vector<int> touched;
            for (size_t i = 0; i < cliques.size(); ++i) {
                if (hit[i]) continue;
                if (std::binary_search(cliques[i].begin(), cliques[i].end(), v)) {
                    hit[i] = true;
                    touched.push_back(static_cast<int>(i));
                }
            }
            if (dfs(budget - 1)) return true;
            for (int i : touched) hit[i] = false;
            current.pop_back();
            chosen[v] = false;
        }
        return false;
    }
};

}  // namespace

OracleResult min_transversal_exact(const Graph& g, int size_cap) {
    auto all = bron_kerbosch(g);
    std::vector<Clique> cliques;
    for (auto& c : all)
        if (c.size() >= 2) cliques.push_back(std::move(c));

    OracleResult res;
    if (cliques.empty()) return res;  // nothing to hit

    for (int budget = 0; budget <= size_cap; ++budget) {
        HittingSearch search(cliques, g.n());
        if (search.dfs(budget)) {
            res.minimum_size = budget;
            res.witness = search.current;
            std::sort(res.witness.begin(), res.witness.end());
            res.explored += search.explored;
            return res;
        }
        res.explored += search.explored;
    }
    res.cap_exceeded = true;
    res.minimum_size = size_cap + 1;  // exceeds cap; not a certified value
    return res;
}

}  // namespace ct
