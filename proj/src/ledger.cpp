#include "ct/ledger.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace ct {

bool DistinguishedTuple::has_member(Vertex v) const {
    return std::binary_search(members.begin(), members.end(), v);
}

long long Ledger::held() const {
    long long h = tuple_funds_total;
    h = std::accumulate(vertex_funds.begin(), vertex_funds.end(), h);
    h = std::accumulate(node_funds.begin(), node_funds.end(), h);
    return h;
}

std::string Ledger::summary() const {
    std::ostringstream out;
    out << "universe=" << universe << " paid=" << paid << " saved=" << saved
        << " held=" << held() << " debt=" << debt;
    return out.str();
}

}  // namespace ct
