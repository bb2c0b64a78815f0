#pragma once

#include <functional>
#include <string>

#include "mot/pair.hpp"

namespace mot {

// A coupling payoff c(x,y) with its partial derivatives. Built-ins carry
// closed forms; user payoffs fall back to centred finite differences (step
// scaled per coordinate, wider for the higher orders).
struct Coupling {
    std::string name;
    std::function<double(double, double)> c;
    std::function<double(double, double)> cx;
    std::function<double(double, double)> cy;
    std::function<double(double, double)> cxy;
    std::function<double(double, double)> cxyy;
    enum class Growth { Linear, Other } growth = Growth::Linear;
    bool positive_support_only = false;

    // Derivative-free constructor: finite-difference everything.
    static Coupling from_function(std::string name, std::function<double(double, double)> f);
};

// Payoff selector strings: "varswap", "power:p=3", "basket:k=1.0", "absdiff",
// "quad".
Coupling builtin_coupling(const std::string& selector);

Coupling varswap_coupling();
Coupling power_coupling(double p);
Coupling basket_coupling(double k);
Coupling absdiff_coupling();
Coupling quadratic_coupling();

struct SpenceReport {
    bool holds = false;       // sampled min of c_xyy > 0
    bool degenerate = false;  // c_xyy vanishes identically on the sample
    double min_value = 0.0;
    double max_value = 0.0;
    double argmin_x = 0.0, argmin_y = 0.0;
};

// Sampled certificate of the martingale Spence-Mirrlees condition c_xyy > 0
// on a 64x64 grid over the truncated support product. A certificate, not a
// proof.
SpenceReport spence_check(const Coupling& c, const MarginalPair& pair);

// Monotone (Frechet-Hoeffding) and antimonotone rearrangement maps.
std::function<double(double)> frechet_hoeffding_map(const MarginalPair& pair);
std::function<double(double)> antimonotone_map(const MarginalPair& pair);

enum class Side { Upper, Lower };

struct ClassicalBound {
    double value = 0.0;
    // Static dual pair on evaluation grids.
    std::function<double(double)> phi;
    std::function<double(double)> psi;
    double min_slack = 0.0; // min over the verification grid of phi+psi-c (upper side)
};

// Classical (non-martingale) transport bound under c_xy > 0: the monotone
// map attains the upper bound, the antimonotone map the lower bound. The
// dual pair is assembled from the first-order conditions; the basket payoff
// uses its closed-form dual with the fixed-point strike.
ClassicalBound classical_bound(const MarginalPair& pair, const Coupling& c, Side side);

} // namespace mot
