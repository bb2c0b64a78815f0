#pragma once

#include "mot/curtain.hpp"
#include "mot/payoffs.hpp"

namespace mot {

// The pair of reflected laws (-X, -Y); preserves convex order, negates means.
MarginalPair reflect_pair(const MarginalPair& pair);

// chat(x,y) = -c(-x,-y): the coupling whose upper bound under the reflected
// pair is the negated lower bound of c; chat_xyy(x,y) = c_xyy(-x,-y).
Coupling reflect_coupling(const Coupling& c);

// Right-monotone maps in the original coordinates, built as the left curtain
// of the reflected pair.
CurtainMaps right_monotone_build(const MarginalPair& pair);

struct LowerBoundResult {
    double value = 0.0;
    double gap = 0.0;       // duality gap of the reflected problem
    double min_slack = 0.0; // subhedge slack, as superhedge slack of chat
    double pushforward_err = 0.0;
};

// inf E[c(X,Y)] over martingale couplings, attained by the right-monotone
// plan when c_xyy > 0. Diagnostics come from the reflected upper problem.
LowerBoundResult lower_bound(const MarginalPair& pair, const Coupling& c);

} // namespace mot
