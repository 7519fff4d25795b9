#ifndef CT_LEDGER_HPP
#define CT_LEDGER_HPP

#include <string>
#include <vector>

#include "ct/graph.hpp"

namespace ct {

/// Tracked pair or triple of non-red vertices inducing a complete subgraph,
/// carrying zloty funds. Pairs hold 3 zlotys at creation, triples 2.
struct DistinguishedTuple {
    int id = -1;
    std::vector<Vertex> members;  // sorted, size 2 or 3
    int funds = 0;
    int lineage = -1;  // predecessor tuple id, -1 if none
    bool alive = false;

    bool is_pair() const { return members.size() == 2; }
    bool is_triple() const { return members.size() == 3; }
    bool has_member(Vertex v) const;
};

/// Exact integer accounting. Invariant after every trace event:
///   universe == paid + saved + held - debt
/// where held sums vertex funds, node funds and live tuple funds. Seven
/// zlotys are paid per red vertex; debt is nonzero only transiently inside
/// one branch surgery and never exceeds 1.
struct Ledger {
    std::vector<int> vertex_funds;
    std::vector<int> node_funds;
    long long tuple_funds_total = 0;
    long long paid = 0;
    long long saved = 0;
    int debt = 0;
    long long universe = 0;

    long long held() const;
    bool conserved() const { return universe == paid + saved + held() - debt; }
    std::string summary() const;
};

}  // namespace ct

#endif
