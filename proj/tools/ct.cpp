#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ct/decomp.hpp"
#include "ct/engine.hpp"
#include "ct/generators.hpp"
#include "ct/oracle.hpp"
#include "ct/replay.hpp"

using namespace ct;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUser = 1;
constexpr int kExitCap = 2;
constexpr int kExitInvariant = 3;

Graph load_graph(const std::string& path) {
    std::ostringstream buf;
    if (path == "-") {
        buf << std::cin.rdbuf();
    } else {
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open " + path);
        buf << in.rdbuf();
    }
    return parse_graph(buf.str());
}

std::string one_indexed(const std::vector<Vertex>& vs) {
    std::ostringstream out;
    for (size_t i = 0; i < vs.size(); ++i) out << (i ? " " : "") << vs[i] + 1;
    return out.str();
}

std::vector<Vertex> parse_vertex_list(const std::string& text, int n) {
    std::istringstream in(text);
    std::vector<Vertex> out;
    long long v;
    while (in >> v) {
        if (v < 1 || v > n) throw ParseError("vertex id out of range in set: " + std::to_string(v));
        out.push_back(static_cast<Vertex>(v - 1));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

SolveMode parse_mode(const std::string& mode) {
    if (mode == "auto") return SolveMode::automatic;
    if (mode == "thmA") return SolveMode::thm_a;
    if (mode == "thmB") return SolveMode::thm_b;
    if (mode == "basic") return SolveMode::basic;
    throw ParseError("unknown mode " + mode);
}

int cmd_check(const std::string& path, bool as_json) {
    Graph g = load_graph(path);
    auto chord = is_chordal(g);
    ordered_json j;
    j["n"] = g.n();
    j["m"] = g.m();
    if (auto* hole = std::get_if<CycleWitness>(&chord)) {
        std::vector<Vertex> cyc;
        for (Vertex v : hole->cycle) cyc.push_back(v + 1);
        j["chordal"] = false;
        j["hole"] = cyc;
        if (as_json)
            std::cout << j.dump() << "\n";
        else
            std::cout << "not chordal; induced cycle: " << one_indexed(hole->cycle) << "\n";
        return kExitOk;
    }
    j["chordal"] = true;
    auto fc = check_four_chordal(g);
    if (auto* w = std::get_if<FourChordalWitness>(&fc)) {
        j["four_chordal"] = false;
        j["thin_edge"] = {w->edge->first + 1, w->edge->second + 1};
        if (as_json)
            std::cout << j.dump() << "\n";
        else
            std::cout << "chordal but not 4-chordal; edge (" << w->edge->first + 1 << ","
                      << w->edge->second + 1 << ") lies in no 4-clique\n";
        return kExitOk;
    }
    int t = count_maximal_triangles(g);
    j["four_chordal"] = true;
    j["t"] = t;
    j["bound"] = bound(std::max(g.n(), 1));
    if (as_json)
        std::cout << j.dump() << "\n";
    else
        std::cout << "4-chordal; n=" << g.n() << " m=" << g.m() << " t=" << t
                  << " bound=" << bound(std::max(g.n(), 1)) << "\n";
    return kExitOk;
}

int cmd_cliques(const std::string& path, bool as_json) {
    Graph g = load_graph(path);
    auto chord = is_chordal(g);
    std::vector<Clique> cliques;
    if (auto* peo = std::get_if<Peo>(&chord))
        cliques = maximal_cliques(g, *peo);
    else
        cliques = bron_kerbosch(g);
    if (as_json) {
        ordered_json arr = ordered_json::array();
        for (const auto& c : cliques) {
            std::vector<Vertex> one;
            for (Vertex v : c) one.push_back(v + 1);
            arr.push_back(one);
        }
        std::cout << ordered_json{{"cliques", arr}}.dump() << "\n";
    } else {
        for (const auto& c : cliques) std::cout << one_indexed(c) << "\n";
    }
    return kExitOk;
}

int cmd_decompose(const std::string& path, bool as_json) {
    Graph g = load_graph(path);
    if (connected_components(g).size() != 1)
        throw ParseError("decompose expects a connected graph");
    auto chord = is_chordal(g);
    auto* peo = std::get_if<Peo>(&chord);
    if (!peo) throw ParseError("graph is not chordal");
    auto cliques = maximal_cliques(g, *peo);
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
    if (root.empty()) throw ParseError("graph has no clique of size 3 or more to root at");
    auto nd = nice_decomposition(g, root);
    auto violations = validate_nice(nd, g);
    if (!violations.empty()) {
        for (const auto& v : violations) std::cerr << "violation: " << v << "\n";
        return kExitInvariant;
    }
    if (as_json) {
        ordered_json arr = ordered_json::array();
        for (int u = 0; u < nd.size(); ++u) {
            std::vector<Vertex> one;
            for (Vertex v : nd.bag(u)) one.push_back(v + 1);
            arr.push_back({{"id", u}, {"parent", nd.nodes[u].parent}, {"bag", one}});
        }
        std::cout << ordered_json{{"nodes", arr}}.dump() << "\n";
    } else {
        std::cout << format_decomposition(nd);
    }
    return kExitOk;
}

int cmd_solve(const std::string& path, const std::string& mode_name, const std::string& trace_path,
              bool as_json) {
    Graph g = load_graph(path);
    TransversalResult res = solve(g, parse_mode(mode_name));
    if (!trace_path.empty()) {
        std::ofstream out(trace_path);
        if (!out) throw ParseError("cannot write " + trace_path);
        out << trace_to_jsonl(res.trace);
    }
    if (as_json) {
        ordered_json j;
        std::vector<Vertex> one;
        for (Vertex v : res.red) one.push_back(v + 1);
        j["red"] = one;
        j["size"] = res.red.size();
        j["bound"] = bound(std::max<long long>(res.n, 1));
        j["saved"] = res.saved;
        j["t"] = res.t;
        j["bound_ok"] = res.bound_ok;
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "red: " << one_indexed(res.red) << "\n";
        std::cout << "size=" << res.red.size() << " bound=" << bound(std::max<long long>(res.n, 1))
                  << " saved=" << res.saved << " t=" << res.t
                  << " bound_ok=" << (res.bound_ok ? "yes" : "no") << "\n";
    }
    return kExitOk;
}

int cmd_verify(const std::string& path, const std::string& set_text,
               const std::string& trace_path) {
    Graph g = load_graph(path);
    if (!set_text.empty()) {
        auto set = parse_vertex_list(set_text, g.n());
        if (auto gap = transversal_gap(g, set)) {
            std::cout << "not a transversal; missed clique: " << one_indexed(*gap) << "\n";
            return kExitUser;
        }
        std::cout << "transversal of size " << set.size() << " confirmed\n";
        return kExitOk;
    }
    if (!trace_path.empty()) {
        std::ifstream in(trace_path);
        if (!in) throw ParseError("cannot open " + trace_path);
        std::ostringstream buf;
        buf << in.rdbuf();
        Trace trace = trace_from_jsonl(buf.str());
        if (auto verdict = replay_verify(trace, g)) {
            std::cout << "replay violation: " << *verdict << "\n";
            return kExitInvariant;
        }
        std::cout << "trace replays cleanly\n";
        return kExitOk;
    }
    throw ParseError("verify needs --set or --trace");
}

int cmd_oracle(const std::string& path, int cap, bool as_json) {
    Graph g = load_graph(path);
    auto res = min_transversal_exact(g, cap);
    if (res.cap_exceeded) {
        std::cout << "minimum exceeds cap " << cap << "\n";
        return kExitCap;
    }
    if (as_json) {
        std::vector<Vertex> one;
        for (Vertex v : res.witness) one.push_back(v + 1);
        std::cout << ordered_json{{"minimum", res.minimum_size},
                                  {"witness", one},
                                  {"explored", res.explored}}
                         .dump()
                  << "\n";
    } else {
        std::cout << "minimum=" << res.minimum_size << " witness: " << one_indexed(res.witness)
                  << "\n";
    }
    return kExitOk;
}

struct FuzzOutcome {
    uint64_t seed = 0;
    bool failed = false;
    std::string what;
};

int cmd_fuzz(uint64_t seed0, int count, int nodes, int max_bag, int jobs) {
    std::vector<FuzzOutcome> outcomes(count);
    std::atomic<int> next{0};
    auto worker = [&] {
        while (true) {
            int i = next.fetch_add(1);
            if (i >= count) return;
            uint64_t seed = seed0 + static_cast<uint64_t>(i);
            auto& out = outcomes[i];
            out.seed = seed;
            try {
                Rng rng(seed);
                int want_nodes = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(nodes)));
                int want_bag = 4 + static_cast<int>(rng.below(static_cast<uint64_t>(max_bag - 3)));
                Graph g = random_four_chordal(seed, want_nodes, want_bag);
                auto res = solve(g);
                if (!is_transversal(g, res.red)) throw ContractError("result not a transversal");
                if (g.n() >= 5 && static_cast<long long>(res.red.size()) > bound(g.n()))
                    throw ContractError("bound exceeded");
                if (auto verdict = replay_verify(res.trace, g))
                    throw ContractError("replay: " + *verdict);
                if (res.t >= 1 && res.saved < res.t + 2)
                    throw ContractError("saved less than t+2");
            } catch (const std::exception& e) {
                out.failed = true;
                out.what = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < std::max(1, jobs); ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    int ok = 0;
    for (const auto& out : outcomes) ok += !out.failed;
    std::cout << ok << "/" << count << " within bound\n";
    for (const auto& out : outcomes)
        if (out.failed) {
            std::cout << "first failing seed: " << out.seed << " (" << out.what << ")\n";
            return kExitInvariant;
        }
    return kExitOk;
}

int cmd_gen(const std::string& kind, int k, int n, uint64_t seed, int nodes, int max_bag) {
    Graph g;
    if (kind == "hk")
        g = h_graph(k);
    else if (kind == "lower")
        g = lower_bound_graph(n);
    else if (kind == "complete")
        g = complete_graph(n);
    else if (kind == "random")
        g = random_four_chordal(seed, nodes, max_bag);
    else
        throw ParseError("unknown generator " + kind);
    std::cout << format_graph(g);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clique transversals in 4-chordal graphs"};
    app.require_subcommand(1);

    std::string path, mode = "auto", trace_path, set_text;
    bool as_json = false;
    int cap = 16, k = 1, n = 8;
    uint64_t seed = 1;
    int gen_nodes = 10, max_bag = 6;
    int fuzz_count = 1000, fuzz_nodes = 20, fuzz_bag = 7, jobs = 4;

    auto* check = app.add_subcommand("check", "recognize chordality and 4-chordality");
    check->add_option("file", path)->required();
    check->add_flag("--json", as_json);

    auto* cliques = app.add_subcommand("cliques", "list all maximal cliques");
    cliques->add_option("file", path)->required();
    cliques->add_flag("--json", as_json);

    auto* decompose = app.add_subcommand("decompose", "print a nice tree-decomposition");
    decompose->add_option("file", path)->required();
    decompose->add_flag("--json", as_json);

    auto* solve_cmd = app.add_subcommand("solve", "construct a clique transversal within the bound");
    solve_cmd->add_option("file", path)->required();
    solve_cmd->add_option("--mode", mode, "auto|thmA|thmB|basic");
    solve_cmd->add_option("--trace", trace_path, "write the replayable event log here");
    solve_cmd->add_flag("--json", as_json);

    auto* verify = app.add_subcommand("verify", "check a vertex set or replay a trace");
    verify->add_option("file", path)->required();
    verify->add_option("--set", set_text, "1-indexed vertex list");
    verify->add_option("--trace", trace_path, "trace file to replay");

    auto* oracle_cmd = app.add_subcommand("oracle", "exact minimum clique transversal");
    oracle_cmd->add_option("file", path)->required();
    oracle_cmd->add_option("--cap", cap, "search depth cap");
    oracle_cmd->add_flag("--json", as_json);

    auto* gen = app.add_subcommand("gen", "emit generator output in the graph file format");
    std::string gen_kind;
    gen->add_option("kind", gen_kind, "hk|lower|complete|random")->required();
    gen->add_option("--k", k);
    gen->add_option("--n", n);
    gen->add_option("--seed", seed);
    gen->add_option("--nodes", gen_nodes);
    gen->add_option("--max-bag", max_bag);

    auto* fuzz = app.add_subcommand("fuzz", "seeded random instances, bound and ledger asserted");
    fuzz->add_option("--seed", seed);
    fuzz->add_option("--count", fuzz_count);
    fuzz->add_option("--nodes", fuzz_nodes);
    fuzz->add_option("--max-bag", fuzz_bag);
    fuzz->add_option("--jobs", jobs);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(check)) return cmd_check(path, as_json);
        if (app.got_subcommand(cliques)) return cmd_cliques(path, as_json);
        if (app.got_subcommand(decompose)) return cmd_decompose(path, as_json);
        if (app.got_subcommand(solve_cmd)) return cmd_solve(path, mode, trace_path, as_json);
        if (app.got_subcommand(verify)) return cmd_verify(path, set_text, trace_path);
        if (app.got_subcommand(oracle_cmd)) return cmd_oracle(path, cap, as_json);
        if (app.got_subcommand(gen)) return cmd_gen(gen_kind, k, n, seed, gen_nodes, max_bag);
        if (app.got_subcommand(fuzz)) {
            if (const char* env = std::getenv("CT_SEED")) seed = std::strtoull(env, nullptr, 10);
            return cmd_fuzz(seed, fuzz_count, fuzz_nodes, fuzz_bag, jobs);
        }
    } catch (const BoundMissError& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        std::ofstream out("boundmiss.trace.jsonl");
        out << trace_to_jsonl(e.trace);
        std::cerr << "trace written to boundmiss.trace.jsonl\n";
        return kExitInvariant;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUser;
    }
    return kExitUser;
}
