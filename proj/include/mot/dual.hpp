#pragma once

#include <memory>
#include <vector>

#include "mot/curtain.hpp"
#include "mot/payoffs.hpp"
#include "mot/piecewise.hpp"

namespace mot {

// Semi-static hedge (phi, psi, h): static vanilla positions at both dates
// plus a dynamic forward position, replicating c on the kernel graph.
class HedgeStrategy {
  public:
    double phi(double x) const;
    double psi(double y) const;
    double dpsi(double y) const;
    double h(double x) const;

    double anchor_point() const { return anchor_; }
    const CurtainMaps& maps() const { return *maps_; }
    const Coupling& coupling() const { return c_; }

    // Replication defect c(x,Tu)-psi(Tu) - [c(x,Td)-psi(Td)] - (Tu-Td) h(x),
    // identically zero off D when the constants are consistent.
    double delta_h(double x) const;

    // Residual of the solved inter-step constant equations (diagnostic).
    double constant_residual() const { return constant_residual_; }

    // Export grids.
    const std::vector<double>& x_nodes() const { return xs_export_; }
    const std::vector<double>& y_nodes() const { return ys_export_; }

  private:
    friend HedgeStrategy build_hedge(const MarginalPair& pair,
                                     std::shared_ptr<const CurtainMaps> maps,
                                     const Coupling& c);

    struct Region {
        enum class Kind { Up, Down, Identity };
        Kind kind;
        int step;                 // C-variable index; -1 for none
        std::vector<double> ys;   // ascending
        std::vector<double> xs;   // aligned source x (empty for Identity)
        std::vector<double> dpsi; // final psi' at nodes
        std::vector<double> psi_v;
        double y_lo() const { return ys.front(); }
        double y_hi() const { return ys.back(); }
    };

    std::shared_ptr<const CurtainMaps> maps_;
    Coupling c_;
    std::vector<Region> regions_; // ascending in y
    HermiteCurve psi_;
    std::vector<std::vector<double>> h_step_x_, h_step_v_; // per step: hhat + C
    std::vector<double> c_const_;
    double anchor_ = 0.0;
    double constant_residual_ = 0.0;
    std::vector<double> xs_export_, ys_export_;

    const Region* down_region_at(double y) const;
};

HedgeStrategy build_hedge(const MarginalPair& pair, std::shared_ptr<const CurtainMaps> maps,
                          const Coupling& c);

inline HedgeStrategy build_hedge(const MarginalPair& pair, const CurtainMaps& maps,
                                 const Coupling& c) {
    return build_hedge(pair, std::make_shared<CurtainMaps>(maps), c);
}

struct SlackReport {
    double min_slack = 0.0;
    double argmin_x = 0.0, argmin_y = 0.0;
};

// min over the grid of phi(x) + psi(y) + h(x)(y-x) - c(x,y).
SlackReport superhedge_check(const HedgeStrategy& strategy, const Coupling& c,
                             const std::vector<double>& xs, const std::vector<double>& ys);

struct GapReport {
    double primal = 0.0;
    double dual = 0.0;
    double gap = 0.0;
};

// E[c] under the kernel, by breakpoint-aware adaptive quadrature.
double kernel_expectation(const MarginalPair& pair, const CurtainMaps& maps, const Coupling& c);

GapReport duality_gap(const MarginalPair& pair, const CurtainMaps& maps,
                      const HedgeStrategy& strategy, const Coupling& c);

} // namespace mot
