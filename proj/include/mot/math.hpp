#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "mot/errors.hpp"

namespace mot {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double normal_pdf(double z) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z * 0.7071067811865475244);
}

// Wichura's PPND16 rational approximation, polished with one Halley step on
// erfc so the result is accurate to a few ulps across the whole range.
double normal_quantile(double p);

// Adaptive Simpson quadrature. Throws QuadratureFailure when the recursion
// budget is exhausted before the tolerance is met.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-9, double abs_tol = 1e-12, int max_depth = 48);

// Composite Simpson cumulative integral on a (possibly nonuniform) node grid.
// Returns I with I[0] = 0 and I[j] = integral of the tabulated integrand from
// xs[0] to xs[j]. Consecutive equal nodes (jump markers) contribute zero.
std::vector<double> cumulative_simpson(const std::vector<double>& xs,
                                       const std::vector<double>& fs);

// Bisection for a monotone nondecreasing predicate: returns x in [lo, hi]
// with pred false just below and true at the returned point, to tolerance tol.
double bisect_first_true(const std::function<bool(double)>& pred, double lo, double hi,
                         double tol);

} // namespace mot
