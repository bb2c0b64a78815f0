#include "mot/pricing.hpp"

#include <cmath>

namespace mot {

BoundResult upper_bound(const MarginalPair& pair, const Coupling& c) {
    const SpenceReport sp = spence_check(c, pair);
    if (!sp.holds && !sp.degenerate)
        throw SpenceMirrleesViolated("upper_bound: c_xyy > 0 fails (sampled min " +
                                     std::to_string(sp.min_value) + " at x=" +
                                     std::to_string(sp.argmin_x) + ", y=" +
                                     std::to_string(sp.argmin_y) + ")");
    BoundResult out;
    out.side = Side::Upper;
    out.degenerate_payoff = sp.degenerate;
    auto maps = std::make_shared<CurtainMaps>(build_curtain(pair));
    out.maps = maps;
    out.value = kernel_expectation(pair, *maps, c);

    auto hedge = std::make_shared<HedgeStrategy>(build_hedge(pair, maps, c));
    out.hedge = hedge;
    const GapReport gr = duality_gap(pair, *maps, *hedge, c);
    out.diagnostics.gap = gr.gap;
    {
        const int n = 200;
        std::vector<double> xs(n), ys(n);
        for (int i = 0; i < n; ++i) {
            xs[i] = pair.x_lo() + (pair.x_hi() - pair.x_lo()) * (i + 0.5) / n;
            ys[i] = xs[i];
        }
        out.diagnostics.min_slack = superhedge_check(*hedge, c, xs, ys).min_slack;
    }
    double worst = 0.0;
    for (int j = 0; j <= 100; ++j) {
        const double y = pair.x_lo() + (pair.x_hi() - pair.x_lo()) * j / 100.0;
        worst = std::max(worst,
                         std::fabs(pushforward_cdf(pair, *maps, y) - pair.nu().cdf(y)));
    }
    out.diagnostics.pushforward_err = worst;
    return out;
}

BoundResult lower_bound_op(const MarginalPair& pair, const Coupling& c) {
    const SpenceReport sp = spence_check(c, pair);
    BoundResult out;
    out.side = Side::Lower;
    out.degenerate_payoff = sp.degenerate;
    const LowerBoundResult lb = lower_bound(pair, c);
    out.value = lb.value;
    out.maps = std::make_shared<CurtainMaps>(right_monotone_build(pair));
    out.diagnostics.gap = lb.gap;
    out.diagnostics.min_slack = lb.min_slack;
    out.diagnostics.pushforward_err = lb.pushforward_err;
    return out;
}

} // namespace mot
