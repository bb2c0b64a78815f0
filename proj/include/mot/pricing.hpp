#pragma once

#include <memory>

#include "mot/dual.hpp"
#include "mot/mirror.hpp"

namespace mot {

struct BoundDiagnostics {
    double pushforward_err = 0.0;
    double gap = 0.0;
    double min_slack = 0.0;
};

struct BoundResult {
    Side side = Side::Upper;
    double value = 0.0;
    std::shared_ptr<const CurtainMaps> maps;
    std::shared_ptr<const HedgeStrategy> hedge; // reflected-problem hedge for the lower side
    BoundDiagnostics diagnostics;
    bool degenerate_payoff = false; // c_xyy == 0 identically (kernel-independent value)
};

// sup E[c(X,Y)] over martingale couplings of the pair; attained by the
// left-curtain kernel when c_xyy > 0. A payoff with c_xyy identically zero
// has a kernel-independent value and is priced as degenerate.
BoundResult upper_bound(const MarginalPair& pair, const Coupling& c);

// inf E[c(X,Y)]; delegates to the mirror construction.
BoundResult lower_bound_op(const MarginalPair& pair, const Coupling& c);

} // namespace mot
