#include "mot/pair.hpp"

#include <algorithm>
#include <cmath>

namespace mot {

MarginalPair::MarginalPair(Marginal mu, Marginal nu, int grid_resolution)
    : mu_(std::move(mu)), nu_(std::move(nu)), grid_res_(std::max(grid_resolution, 64)) {
    if (!std::isfinite(mu_.mean()) || !std::isfinite(nu_.mean()))
        throw NonFiniteMean("pair: marginal mean diverges");
    if (mu_.has_atoms())
        throw AtomicMuRejected(
            "mu must be atomless; smooth it first (gaussian_smoothed) if needed");
    x_lo_ = nu_.quantile(1e-9);
    x_hi_ = nu_.quantile(1.0 - 1e-9);
    if (!std::isfinite(x_lo_)) x_lo_ = nu_.support_lo();
    if (!std::isfinite(x_hi_)) x_hi_ = nu_.support_hi();
    if (!(x_hi_ > x_lo_)) throw Error("pair: degenerate truncated support");
    for (const auto& a : nu_.atoms())
        if (a.x >= x_lo_ && a.x <= x_hi_) nu_atoms_.push_back(a);
}

MarginalPair MarginalPair::reflected() const {
    return MarginalPair(mu_.reflected(), nu_.reflected(), grid_res_);
}

OrderReport check_convex_order(const MarginalPair& pair) {
    OrderReport rep;
    const double m1 = pair.mu().mean();
    const double m2 = pair.nu().mean();
    if (!std::isfinite(m1) || !std::isfinite(m2)) throw NonFiniteMean("check_convex_order");
    const double mean_tol = 1e-8 * (1.0 + std::fabs(m1));
    rep.same_mean = std::fabs(m1 - m2) <= mean_tol;

    // int_{[k,inf)} deltaF = E_mu (X-k)^+ - E_nu (X-k)^+, in closed form from
    // the partial moments. Scan k over the verification grid.
    const int n = pair.grid_resolution();
    const double lo = pair.x_lo(), hi = pair.x_hi();
    double worst = -kInf, worst_k = lo;
    for (int j = 0; j <= n; ++j) {
        const double k = lo + (hi - lo) * j / n;
        const double v = pair.mu().call_price(k) - pair.nu().call_price(k);
        if (v > worst) {
            worst = v;
            worst_k = k;
        }
    }
    rep.worst_k = worst_k;
    rep.worst_violation = worst;
    const double tol = 1e-8 * (1.0 + std::fabs(m1));
    rep.dominated = rep.same_mean && worst <= tol;
    return rep;
}

DeltaFStructure delta_f_structure(const MarginalPair& pair) {
    DeltaFStructure st;
    const int n = pair.grid_resolution();
    const double lo = pair.x_lo(), hi = pair.x_hi();
    const double cell = (hi - lo) / n;
    st.grid.resize(n + 1);
    st.increase_mask.resize(n + 1);
    std::vector<double> df(n + 1);
    for (int j = 0; j <= n; ++j) {
        const double x = lo + cell * j;
        st.grid[j] = x;
        df[j] = pair.delta_density(x);
        st.increase_mask[j] = df[j] > 0.0 ? 1 : 0;
    }

    const double atol = 1e-12;

    // x0 = inf of the increase set = first point where deltaF leaves zero.
    int first_pos = -1;
    for (int j = 0; j <= n; ++j) {
        if (pair.delta_f(st.grid[j]) > atol) {
            first_pos = j;
            break;
        }
    }
    if (first_pos < 0) {
        st.x0 = kInf; // mu == nu within tolerance
        return st;
    }
    if (first_pos == 0) {
        st.x0 = lo;
    } else {
        const double a = st.grid[first_pos - 1], b = st.grid[first_pos];
        st.x0 = bisect_first_true([&](double x) { return pair.delta_f(x) > atol; }, a, b,
                                  1e-10 * (1.0 + std::fabs(b)));
    }

    // Sign transitions of the delta density: down-crossings are maximizers,
    // refined by bisection; a flat stretch is represented by its rightmost
    // point (the bisection of the strict predicate converges there).
    std::vector<IntervalSet::Piece> up_pieces;
    double piece_start = st.increase_mask[0] ? lo : 0.0;
    bool in_up = st.increase_mask[0] != 0;
    if (in_up) piece_start = lo;
    for (int j = 1; j <= n; ++j) {
        const bool pos = st.increase_mask[j] != 0;
        if (pos && !in_up) {
            const double a = st.grid[j - 1], b = st.grid[j];
            piece_start = bisect_first_true(
                [&](double x) { return pair.delta_density(x) > 0.0; }, a, b,
                1e-10 * (1.0 + std::fabs(b)));
            in_up = true;
        } else if (!pos && in_up) {
            const double a = st.grid[j - 1], b = st.grid[j];
            const double m = bisect_first_true(
                [&](double x) { return !(pair.delta_density(x) > 0.0); }, a, b,
                1e-10 * (1.0 + std::fabs(b)));
            up_pieces.push_back({piece_start, m});
            if (pair.delta_f(m) > atol && m > st.x0) st.maxima.push_back(m);
            in_up = false;
        }
    }
    if (in_up) up_pieces.push_back({piece_start, hi});

    // When the increase region runs into the truncation edge, extend it to a
    // far deeper quantile of nu: the omitted dF-mass otherwise biases the
    // G-roots near the breakpoints. Partial moments are closed-form, so the
    // extension is free.
    if (!up_pieces.empty() && up_pieces.front().lo == lo && st.increase_mask[0]) {
        double deep = pair.nu().quantile(1e-15);
        if (!std::isfinite(deep)) deep = pair.nu().support_lo();
        if (std::isfinite(deep) && deep < lo) {
            bool all_pos = true;
            for (int k = 0; k < 6 && all_pos; ++k) {
                const double u = std::pow(10.0, -14.0 + k); // 1e-14 .. 1e-9
                const double x = pair.nu().quantile(u);
                if (std::isfinite(x) && x > deep && x < lo)
                    all_pos = pair.delta_density(x) > 0.0;
            }
            if (all_pos) {
                up_pieces.front().lo = deep;
                st.x0 = std::min(st.x0, deep);
            }
        }
    }
    st.increase_set = IntervalSet(std::move(up_pieces));

    for (std::size_t i = 1; i < st.maxima.size(); ++i) {
        if (st.maxima[i] - st.maxima[i - 1] < cell)
            throw AccumulationDetected("two local maxima of deltaF within one grid cell");
    }
    return st;
}

} // namespace mot
