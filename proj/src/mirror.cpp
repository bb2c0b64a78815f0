#include "mot/mirror.hpp"

#include <cmath>

#include "mot/dual.hpp"

namespace mot {

MarginalPair reflect_pair(const MarginalPair& pair) { return pair.reflected(); }

Coupling reflect_coupling(const Coupling& c) {
    Coupling r;
    r.name = "mirror(" + c.name + ")";
    r.growth = c.growth;
    r.c = [f = c.c](double x, double y) { return -f(-x, -y); };
    r.cx = [f = c.cx](double x, double y) { return f(-x, -y); };
    r.cy = [f = c.cy](double x, double y) { return f(-x, -y); };
    r.cxy = [f = c.cxy](double x, double y) { return -f(-x, -y); };
    r.cxyy = [f = c.cxyy](double x, double y) { return f(-x, -y); };
    return r;
}

CurtainMaps right_monotone_build(const MarginalPair& pair) {
    const MarginalPair refl = reflect_pair(pair);
    auto base = std::make_shared<CurtainMaps>(build_curtain(refl));
    return make_mirrored(std::move(base), pair);
}

LowerBoundResult lower_bound(const MarginalPair& pair, const Coupling& c) {
    const SpenceReport sp = spence_check(c, pair);
    if (!sp.holds && !sp.degenerate)
        throw SpenceMirrleesViolated("lower_bound: c_xyy > 0 fails (min " +
                                     std::to_string(sp.min_value) + ")");

    const MarginalPair refl = reflect_pair(pair);
    const Coupling chat = reflect_coupling(c);
    auto base = std::make_shared<CurtainMaps>(build_curtain(refl));

    LowerBoundResult out;
    const double upper_hat = kernel_expectation(refl, *base, chat);
    out.value = -upper_hat;

    const HedgeStrategy hedge = build_hedge(refl, base, chat);
    const GapReport gr = duality_gap(refl, *base, hedge, chat);
    out.gap = gr.gap;
    {
        const int n = 200;
        std::vector<double> xs(n), ys(n);
        for (int i = 0; i < n; ++i) {
            xs[i] = refl.x_lo() + (refl.x_hi() - refl.x_lo()) * (i + 0.5) / n;
            ys[i] = xs[i];
        }
        out.min_slack = superhedge_check(hedge, chat, xs, ys).min_slack;
    }
    const CurtainMaps mirrored = make_mirrored(base, pair);
    double worst = 0.0;
    for (int j = 0; j <= 100; ++j) {
        const double y = pair.x_lo() + (pair.x_hi() - pair.x_lo()) * j / 100.0;
        worst = std::max(worst,
                         std::fabs(pushforward_cdf(pair, mirrored, y) - pair.nu().cdf(y)));
    }
    out.pushforward_err = worst;
    return out;
}

} // namespace mot
