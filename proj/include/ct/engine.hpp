#ifndef CT_ENGINE_HPP
#define CT_ENGINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "ct/decomp.hpp"
#include "ct/graph.hpp"
#include "ct/ledger.hpp"
#include "ct/trace.hpp"

namespace ct {

/// floor(2(n-1)/7), the guaranteed transversal size for n >= 5.
inline long long bound(long long n) { return 2 * (n - 1) / 7; }

/// Raised when a driver completes with more red vertices than the bound
/// allows, or a branch fails to fund itself. Indicates an engine defect;
/// carries the trace for diagnosis.
struct BoundMissError : std::runtime_error {
    BoundMissError(const std::string& msg, Trace trace)
        : std::runtime_error(msg), trace(std::move(trace)) {}
    Trace trace;
};

struct TransversalResult {
    std::vector<Vertex> red;
    long long saved = 0;
    long long paid = 0;
    long long n = 0;
    long long t = 0;
    bool bound_ok = true;  // false only for the K_4 exception
    Trace trace;
};

enum class SolveMode { automatic, thm_a, thm_b, basic };

/// Branch processing context: carries the anchor pair shared with the rest
/// of the decomposition and the in-flight debt iteration state. The deep
/// surgeries (the ones whose payoff arrives while climbing) must fire at the
/// last two-tuple collision on the climb; that point is found by attempts,
/// each deferring them one collision further.
struct BranchCtx {
    std::vector<int> node_set;
    std::vector<bool> in_branch;  // by node id
    int branch_root = -1;
    Vertex alpha = -1, beta = -1;
    long long saved_at_start = 0;
    bool active = true;  // surgeries engaged until the branch goal is met
    int skip_budget = 0;          // deep surgery opportunities to pass over
    int opportunities_seen = 0;
    std::vector<Vertex> xset;  // live escort set of the debt iteration
};

/// The rule machine over one (graph, decomposition, ledger) triple.
/// Drivers construct decompositions and feed nodes; the engine owns rule
/// selection, zloty movements and trace emission.
class Engine {
public:
    /// `scope` limits the engine to a vertex subset (a connected piece of
    /// the work graph); vertices outside it are never touched. Null means
    /// all vertices.
    Engine(const Graph& g, Ledger& ledger, Trace& trace,
           const std::vector<Vertex>* scope = nullptr);

    /// Installs the decomposition, seeds one zloty per maximal-3-clique
    /// node, emits the decomposition event. Vertices keep their funds across
    /// decompositions (the no-triangle driver loads several).
    void load(TreeDecomposition dec);

    const TreeDecomposition& decomposition() const { return dec_; }
    const std::vector<bool>& red() const { return red_; }
    bool vertex_alive(Vertex v) const { return vertex_alive_[v]; }
    bool node_alive(int u) const { return node_alive_[u]; }

    /// First applicable rule for private vertex v of node u, by the fixed
    /// precedence (B1,G1,G2,B2,B3,G3,G4,B4,G5,B5 for bags of size >= 4;
    /// T1..T5 for size-3 bags).
    std::string select_rule(int u, Vertex v) const;

    /// Processes one current leaf (or the root as the last node): applies
    /// rules to all private vertices, then removes the node.
    void process_node(int u, BranchCtx* ctx = nullptr);

    /// Processes every node of the branch in the stipulated order, saving
    /// at least one zloty; throws BoundMissError if the branch ends unsaved
    /// or with outstanding debt.
    void process_branch(const Branch& branch);

    /// Same machinery with caller-chosen anchors over a caller-chosen node
    /// set (used by the no-triangle driver's synthetic branches).
    void process_branch_as(const std::vector<int>& node_set, int branch_root, Vertex alpha,
                           Vertex beta);

    /// Remaining alive nodes in leaf-up order, root last.
    void process_all_remaining();

    /// Alive nodes except `exempt`, leaf-up.
    void process_all_except(const std::vector<int>& exempt);

    /// Removes every remaining vertex (saving non-red funds) and node.
    /// Callers must have discharged all tuples; live tuples here are a bug.
    void teardown_all_remaining(const std::string& why);

    /// All vertices and nodes dead, no live tuples, no debt.
    void assert_all_done() const;

    // -- driver-level primitives (terminal cases of the no-triangle proof) --

    /// Colors v red paying 7 from the given source vertices' funds plus all
    /// tuples containing v; remaining gathered funds are saved.
    void endgame_color(Vertex v, const std::vector<Vertex>& fund_sources, const std::string& why);

    /// Removes a vertex outside any rule, saving its funds.
    void teardown_vertex(Vertex v, const std::string& why);

    /// Removes a node outside processing (its fund, if any, is saved).
    void teardown_node(int u, const std::string& why);

    /// Creates a distinguished tuple funded by draining (and removing) the
    /// `funders`; surplus saved. Creation funds: 3 for a pair, 2 for a triple.
    void introduce_tuple(const std::vector<Vertex>& members, const std::vector<Vertex>& funders,
                         const std::string& why);

    /// Replaces two triples sharing two vertices by one pair on the shared
    /// vertices; one zloty is saved.
    void merge_triples(int t1, int t2, const std::string& why);

    /// Terminal wrap-up: colors every vertex of `colors`, ceasing their
    /// tuples, draining and removing the `drain` vertices, paying 7 per red
    /// and saving the rest.
    void endgame_finale(const std::vector<Vertex>& colors, const std::vector<Vertex>& drain,
                        const std::string& why);

    /// Live tuples containing v.
    std::vector<int> tuples_with(Vertex v) const;
    const DistinguishedTuple& tuple(int id) const { return tuples_[id]; }
    std::vector<const DistinguishedTuple*> live_tuples() const;

    int red_count() const;
    std::vector<Vertex> red_vertices() const;
    int vertex_funds(Vertex v) const;

    /// Every rule keeps this true; asserted after each event.
    void check_conservation(const char* where) const;

private:
    struct Gather {
        std::vector<Move> moves_in;  // sources, to filled at distribution
        long long total = 0;
    };

    const std::vector<Vertex>& bag(int u) const { return dec_.nodes[u].bag; }
    std::vector<Vertex> private_vertices(int u) const;
    bool red_in_bag_except(int u, Vertex v) const;

    void gather_vertex(Gather& g, Vertex v);
    void gather_tuple(Gather& g, int tid, TraceEvent& ev);
    void gather_node(Gather& g, int u);
    /// Distributes gathered funds: 7 per vertex in `color`, then tuple
    /// births, then debt repayment, then saved. `debt_spend` allows paying
    /// one zloty more than gathered (the single debt surgery).
    void distribute(TraceEvent& ev, Gather& g, const std::vector<Vertex>& color,
                    const std::vector<TupleBirth>& births, bool repay_debt, int debt_spend);

    int new_tuple(std::vector<Vertex> members, int funds, int lineage);
    void kill_tuple(int tid);
    void remove_vertex(Vertex v, TraceEvent& ev);
    void emit(TraceEvent ev);

    void apply_rule(int u, Vertex v, const std::string& rule, BranchCtx* ctx);
    void handle_vertex(int u, Vertex v, BranchCtx* ctx, bool salvage);
    void process_case4(int u, const std::vector<Vertex>& privates, BranchCtx* ctx);
    bool try_branch_surgery(int u, Vertex v, const std::string& rule, BranchCtx* ctx);
    void surgery_b2(int u, Vertex v, BranchCtx* ctx, bool& handled);
    void surgery_b3(int u, Vertex v, BranchCtx* ctx, bool& handled);
    void maybe_debt_prestep(int u, BranchCtx* ctx);
    void debt_prestep(int u, BranchCtx* ctx);
    bool branch_goal_met(const BranchCtx& ctx) const;
    bool run_branch(BranchCtx& ctx);

    struct Snapshot {
        std::vector<bool> node_alive, vertex_alive, red, doomed;
        std::vector<DistinguishedTuple> tuples;
        std::vector<std::vector<int>> tuples_of;
        Ledger ledger;
        size_t trace_len = 0;
    };
    Snapshot snapshot() const;
    void restore(const Snapshot& snap);

    std::vector<Vertex> b5_pick(int u, Vertex v, BranchCtx* ctx) const;

    const Graph& g_;
    Ledger& ledger_;
    Trace& trace_;
    TreeDecomposition dec_;
    std::vector<bool> node_alive_;
    std::vector<bool> vertex_alive_;
    std::vector<bool> red_;
    std::vector<bool> doomed_;  // scheduled for silent removal, skip rules
    std::vector<DistinguishedTuple> tuples_;
    std::vector<std::vector<int>> tuples_of_;
    bool salvage_node_ = false;  // current node removable without a hit
    int salvage_node_id_ = -1;

    friend class ReplayChecker;
};

// ---- drivers ----

/// Theorem driver for connected 4-chordal graphs with t >= 1 maximal
/// 3-cliques and n >= 5: nice decomposition rooted at a maximal 3-clique,
/// one saving per branch (>= t+2 of them), basic rules elsewhere.
TransversalResult solve_with_triangle(const Graph& g);

/// Reduction driver for connected 4-chordal graphs with no maximal
/// 3-clique: n >= 5 gives size <= floor(2(n-1)/7); the single K_4 input is
/// returned with bound_ok = false.
TransversalResult solve_without_triangle(const Graph& g);

/// Basic algorithm only (no branch savings); size <= (2n+t)/7.
TransversalResult solve_basic(const Graph& g);

/// Top-level dispatch: splits components, runs the matching driver per
/// component, unions the results, verifies the transversal and the bound.
/// Throws ParseError-style errors for non-4-chordal input and
/// BoundMissError if any driver exceeds its guarantee.
TransversalResult solve(const Graph& g, SolveMode mode = SolveMode::automatic);

namespace detail {
/// The no-triangle reduction driver over one component, sharing the
/// component ledger and trace.
std::vector<Vertex> drive_thm_b(const Graph& g, Ledger& ledger, Trace& trace);
}  // namespace detail

}  // namespace ct

#endif
