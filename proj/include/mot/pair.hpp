#pragma once

#include <cstdint>
#include <vector>

#include "mot/intervals.hpp"
#include "mot/marginal.hpp"

namespace mot {

struct OrderReport {
    bool same_mean = false;
    bool dominated = false;
    double worst_k = 0.0;
    double worst_violation = 0.0; // max over k of int_{[k,inf)} deltaF
};

struct DeltaFStructure {
    double x0 = kInf;            // inf of the increase set; +inf iff mu == nu
    std::vector<double> maxima;  // local maximizers m_i of deltaF, increasing
    IntervalSet increase_set;    // where deltaF is (strictly) increasing
    std::vector<double> grid;    // scan grid
    std::vector<std::uint8_t> increase_mask; // delta density > 0 at grid points
};

// Two marginals in (candidate) convex order. mu must be atomless; nu may
// carry atoms. Unbounded supports are truncated at the 1e-9 and 1-1e-9
// quantiles of nu, beyond which all integrands are below tolerance.
class MarginalPair {
  public:
    MarginalPair(Marginal mu, Marginal nu, int grid_resolution = 4096);

    const Marginal& mu() const { return mu_; }
    const Marginal& nu() const { return nu_; }
    double x_lo() const { return x_lo_; }
    double x_hi() const { return x_hi_; }
    int grid_resolution() const { return grid_res_; }

    double delta_f(double x) const { return nu_.cdf(x) - mu_.cdf(x); }
    double delta_density(double x) const { return nu_.pdf(x) - mu_.pdf(x); }

    // Atoms of nu inside the truncated window.
    const std::vector<Atom>& nu_atoms() const { return nu_atoms_; }

    MarginalPair reflected() const;

  private:
    Marginal mu_, nu_;
    double x_lo_, x_hi_;
    int grid_res_;
    std::vector<Atom> nu_atoms_;
};

OrderReport check_convex_order(const MarginalPair& pair);

// Detect x0, the local maximizers of deltaF, and the increase set, by a
// sign scan of the delta density refined by bisection. Throws
// AccumulationDetected when two refined maxima collapse onto one grid cell.
DeltaFStructure delta_f_structure(const MarginalPair& pair);

} // namespace mot
