#pragma once

#include <memory>
#include <vector>

#include "mot/intervals.hpp"
#include "mot/pair.hpp"

namespace mot {

// g(x,y) = Qnu(Fmu(x) + deltaF(y)). Arguments leaving [0,1] map to the
// +/-inf sentinels of the right-continuous inverse.
double g_eval(const MarginalPair& pair, double x, double y);

// G^A(t,x): partial-moment terms plus the Stieltjes integral of (g - id)
// over A cut at t, by adaptive quadrature with density weights and explicit
// nu-atom terms. Value may be +inf when g overflows inside the cut.
double big_g_eval(const MarginalPair& pair, const IntervalSet& A, double t, double x);

// The unique t in A with G^A(t-,x) <= 0 <= G^A(t,x); bisection over the
// flattened coordinate of A to width 1e-10.
double solve_t_a(const MarginalPair& pair, const IntervalSet& A, double m, double x);

// inf{x > m : g(x, t^A(x,m)) <= x}, or +inf if there is no crossing before
// the truncation point.
double find_xbar(const MarginalPair& pair, const IntervalSet& A, double m);

struct CurtainStep {
    int index = 0;    // 1-based
    double m = 0.0;   // breakpoint m_i
    double x_end = 0.0; // x_i; +inf when the step runs to the truncation
    IntervalSet a_set;  // A_i
    IntervalSet b_after; // B_i
    double t_reach = 0.0; // td at the step end
    std::vector<double> xs, td, tu; // graded nodes; duplicated x marks a jump
    struct Jump {
        double x_star, upper, lower;
    };
    std::vector<Jump> jumps;
};

class CurtainMaps {
  public:
    CurtainMaps() = default;

    double td(double x) const;
    double tu(double x) const;
    double q(double x) const; // (x - td)/(tu - td); 1 on D by convention
    bool in_d(double x) const;

    const MarginalPair& pair() const { return *pair_; }
    const std::vector<CurtainStep>& steps() const { return steps_; }
    double x0() const { return x0_; }
    bool mirrored() const { return mirrored_; }
    const CurtainMaps* base() const { return base_.get(); }

    // D as closed intervals [lo, hi]; the first piece extends to -inf.
    std::vector<std::pair<double, double>> d_intervals() const;

    // Breakpoint sequence (m_i, x_i).
    std::vector<std::pair<double, double>> breakpoints() const;

  private:
    friend CurtainMaps build_curtain(const MarginalPair& pair);
    friend CurtainMaps make_mirrored(std::shared_ptr<const CurtainMaps> base,
                                     const MarginalPair& original_pair);

    std::shared_ptr<const MarginalPair> pair_;
    std::vector<CurtainStep> steps_;
    double x0_ = kInf;
    bool mirrored_ = false;
    std::shared_ptr<const CurtainMaps> base_;

    const CurtainStep* find_step(double x) const;
};

// Execute the step construction. Requires convex order (checked) and finitely
// many local maxima of deltaF inside the truncated window.
CurtainMaps build_curtain(const MarginalPair& pair);

// Wrap a curtain built on the reflected pair as right-monotone maps in the
// original coordinates.
CurtainMaps make_mirrored(std::shared_ptr<const CurtainMaps> base,
                          const MarginalPair& original_pair);

// T_*(x, (-inf, y]).
double kernel_cdf(const CurtainMaps& maps, double x, double y);

// int T_*(x, (-inf,y]) mu(dx); must reproduce F_nu(y) within 1e-4.
double pushforward_cdf(const MarginalPair& pair, const CurtainMaps& maps, double y);

} // namespace mot
