#include "mot/payoffs.hpp"

#include <algorithm>
#include <cmath>

#include "mot/piecewise.hpp"

namespace mot {

namespace {

double fd_step1(double v) { return 1e-5 * (1.0 + std::fabs(v)); }
double fd_step2(double v) { return 1e-3 * (1.0 + std::fabs(v)); }

std::function<double(double, double)> fd_x(std::function<double(double, double)> f) {
    return [f = std::move(f)](double x, double y) {
        const double h = fd_step1(x);
        return (f(x + h, y) - f(x - h, y)) / (2.0 * h);
    };
}
std::function<double(double, double)> fd_y(std::function<double(double, double)> f) {
    return [f = std::move(f)](double x, double y) {
        const double h = fd_step1(y);
        return (f(x, y + h) - f(x, y - h)) / (2.0 * h);
    };
}
std::function<double(double, double)> fd_xy_of_cy(std::function<double(double, double)> cy) {
    return [cy = std::move(cy)](double x, double y) {
        const double h = fd_step2(x);
        return (cy(x + h, y) - cy(x - h, y)) / (2.0 * h);
    };
}
std::function<double(double, double)> fd_yy_of_cxy(std::function<double(double, double)> cxy) {
    return [cxy = std::move(cxy)](double x, double y) {
        const double h = fd_step2(y);
        return (cxy(x, y + h) - cxy(x, y - h)) / (2.0 * h);
    };
}

void require_positive(double x, double y, const char* who) {
    if (x <= 0.0 || y <= 0.0)
        throw UnsupportedSupport(std::string(who) + ": requires positive support");
}

} // namespace

Coupling Coupling::from_function(std::string name, std::function<double(double, double)> f) {
    Coupling c;
    c.name = std::move(name);
    c.c = f;
    c.cx = fd_x(f);
    c.cy = fd_y(f);
    c.cxy = fd_xy_of_cy(c.cy);
    c.cxyy = fd_yy_of_cxy(c.cxy);
    c.growth = Coupling::Growth::Other;
    return c;
}

Coupling varswap_coupling() {
    Coupling c;
    c.name = "varswap";
    c.positive_support_only = true;
    c.c = [](double x, double y) {
        require_positive(x, y, "varswap");
        const double l = std::log(y / x);
        return l * l;
    };
    c.cx = [](double x, double y) { return -2.0 * std::log(y / x) / x; };
    c.cy = [](double x, double y) { return 2.0 * std::log(y / x) / y; };
    c.cxy = [](double x, double y) { return -2.0 / (x * y); };
    c.cxyy = [](double x, double y) { return 2.0 / (x * y * y); };
    return c;
}

Coupling power_coupling(double p) {
    if (!(p > 1.0)) throw Error("power coupling requires p > 1");
    Coupling c;
    c.name = "power:p=" + std::to_string(p);
    c.positive_support_only = true;
    c.c = [p](double x, double y) {
        require_positive(x, y, "power");
        return -std::pow(y / x, p);
    };
    c.cx = [p](double x, double y) { return p * std::pow(y / x, p) / x; };
    c.cy = [p](double x, double y) { return -p * std::pow(y, p - 1.0) / std::pow(x, p); };
    c.cxy = [p](double x, double y) {
        return p * p * std::pow(y, p - 1.0) / std::pow(x, p + 1.0);
    };
    c.cxyy = [p](double x, double y) {
        return p * p * (p - 1.0) * std::pow(y, p - 2.0) / std::pow(x, p + 1.0);
    };
    return c;
}

Coupling basket_coupling(double k) {
    Coupling c;
    c.name = "basket:k=" + std::to_string(k);
    c.c = [k](double x, double y) { return std::max(x + y - k, 0.0); };
    c.cx = [k](double x, double y) { return x + y > k ? 1.0 : 0.0; };
    c.cy = c.cx;
    c.cxy = fd_xy_of_cy(c.cy);
    c.cxyy = fd_yy_of_cxy(c.cxy);
    return c;
}

Coupling absdiff_coupling() {
    Coupling c;
    c.name = "absdiff";
    c.c = [](double x, double y) { return std::fabs(x - y); };
    c.cx = [](double x, double y) { return x > y ? 1.0 : (x < y ? -1.0 : 0.0); };
    c.cy = [](double x, double y) { return y > x ? 1.0 : (y < x ? -1.0 : 0.0); };
    c.cxy = fd_xy_of_cy(c.cy);
    c.cxyy = fd_yy_of_cxy(c.cxy);
    return c;
}

Coupling quadratic_coupling() {
    Coupling c;
    c.name = "quad";
    c.c = [](double x, double y) { return (y - x) * (y - x); };
    c.cx = [](double x, double y) { return -2.0 * (y - x); };
    c.cy = [](double x, double y) { return 2.0 * (y - x); };
    c.cxy = [](double, double) { return -2.0; };
    c.cxyy = [](double, double) { return 0.0; };
    return c;
}

Coupling builtin_coupling(const std::string& selector) {
    if (selector == "varswap") return varswap_coupling();
    if (selector == "absdiff") return absdiff_coupling();
    if (selector == "quad") return quadratic_coupling();
    const auto colon = selector.find(':');
    if (colon != std::string::npos) {
        const std::string head = selector.substr(0, colon);
        const std::string tail = selector.substr(colon + 1);
        const auto eq = tail.find('=');
        if (eq == std::string::npos) throw ParseError("payoff selector: expected key=value");
        const double v = std::stod(tail.substr(eq + 1));
        if (head == "power") return power_coupling(v);
        if (head == "basket") return basket_coupling(v);
    }
    throw ParseError("unknown payoff selector: " + selector);
}

SpenceReport spence_check(const Coupling& c, const MarginalPair& pair) {
    SpenceReport rep;
    const int n = 64;
    const double lo = pair.x_lo(), hi = pair.x_hi();
    rep.min_value = kInf;
    rep.max_value = -kInf;
    for (int i = 0; i < n; ++i) {
        const double x = lo + (hi - lo) * (i + 0.5) / n;
        for (int j = 0; j < n; ++j) {
            const double y = lo + (hi - lo) * (j + 0.5) / n;
            const double v = c.cxyy(x, y);
            if (v < rep.min_value) {
                rep.min_value = v;
                rep.argmin_x = x;
                rep.argmin_y = y;
            }
            rep.max_value = std::max(rep.max_value, v);
        }
    }
    rep.holds = rep.min_value > 0.0;
    rep.degenerate = std::fabs(rep.min_value) <= 1e-12 && std::fabs(rep.max_value) <= 1e-12;
    return rep;
}

std::function<double(double)> frechet_hoeffding_map(const MarginalPair& pair) {
    const Marginal mu = pair.mu(), nu = pair.nu();
    return [mu, nu](double x) { return nu.quantile(mu.cdf(x)); };
}

std::function<double(double)> antimonotone_map(const MarginalPair& pair) {
    const Marginal mu = pair.mu(), nu = pair.nu();
    return [mu, nu](double x) { return nu.quantile(1.0 - mu.cdf(x)); };
}

ClassicalBound classical_bound(const MarginalPair& pair, const Coupling& c, Side side) {
    // Sampled classical Spence-Mirrlees certificate: c_xy nonnegative with
    // some strictly positive mass (kinky payoffs like the basket sit at the
    // boundary and are admitted).
    {
        const int n = 48;
        double mn = kInf, mx = -kInf;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double x = pair.x_lo() + (pair.x_hi() - pair.x_lo()) * (i + 0.5) / n;
                const double y = pair.x_lo() + (pair.x_hi() - pair.x_lo()) * (j + 0.5) / n;
                const double v = c.cxy(x, y);
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
        if (mn < -1e-7 || !(mx > 0.0))
            throw SpenceMirrleesViolated("classical bound requires c_xy >= 0 with c_xy > 0 somewhere");
    }

    const bool upper = side == Side::Upper;
    const Marginal mu = pair.mu(), nu = pair.nu();
    auto tmap = upper ? frechet_hoeffding_map(pair) : antimonotone_map(pair);

    const double mu_lo = std::max(pair.x_lo(), mu.quantile(1e-12));
    const double mu_hi = std::min(pair.x_hi(), mu.quantile(1.0 - 1e-12));
    ClassicalBound out;
    out.value = adaptive_simpson(
        [&](double x) { return c.c(x, tmap(x)) * mu.pdf(x); }, mu_lo, mu_hi, 1e-8, 1e-11);

    // Dual pair. Basket payoffs take the closed form with the fixed-point
    // strike; otherwise integrate the first-order condition for psi.
    const bool is_basket = c.name.rfind("basket", 0) == 0;
    if (is_basket && upper) {
        const double k = std::stod(c.name.substr(c.name.find('=') + 1));
        auto fh = frechet_hoeffding_map(pair);
        // ybar solves T(k - ybar) = ybar; zeta(y) = T(k-y) - y is decreasing.
        double lo = pair.x_lo(), hi = pair.x_hi();
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (fh(k - mid) - mid > 0.0)
                lo = mid;
            else
                hi = mid;
        }
        const double ybar = 0.5 * (lo + hi);
        out.psi = [ybar](double y) { return std::max(y - ybar, 0.0); };
        out.phi = [fh, k, ybar](double x) {
            return std::max(fh(x) + x - k, 0.0) - std::max(fh(x) - ybar, 0.0);
        };
    } else {
        const int n = 2048;
        std::vector<double> ys(n + 1), dpsi(n + 1);
        const double ylo = pair.x_lo(), yhi = pair.x_hi();
        for (int j = 0; j <= n; ++j) {
            const double y = ylo + (yhi - ylo) * j / n;
            ys[j] = y;
            const double tinv =
                upper ? mu.quantile(nu.cdf(y)) : mu.quantile(1.0 - nu.cdf(y));
            dpsi[j] = c.cy(tinv, y);
        }
        auto cum = cumulative_simpson(ys, dpsi);
        const double anchor_y = nu.quantile(0.5);
        double anchor_v = 0.0;
        {
            PiecewiseLinear interp(ys, cum);
            anchor_v = interp(anchor_y);
        }
        for (auto& v : cum) v -= anchor_v;
        HermiteCurve psi(std::move(ys), std::move(cum), std::move(dpsi));
        out.psi = [psi](double y) { return psi.value(y); };
        auto tm = tmap;
        auto cf = c.c;
        auto psi_f = out.psi;
        out.phi = [tm, cf, psi_f](double x) {
            const double t = tm(x);
            return cf(x, t) - psi_f(t);
        };
    }

    // Verification grid slack: phi + psi - c, signed toward feasibility.
    double slack = kInf;
    const int gn = 120;
    for (int i = 0; i <= gn; ++i)
        for (int j = 0; j <= gn; ++j) {
            const double x = mu_lo + (mu_hi - mu_lo) * i / gn;
            const double y = pair.x_lo() + (pair.x_hi() - pair.x_lo()) * j / gn;
            const double h = out.phi(x) + out.psi(y) - c.c(x, y);
            slack = std::min(slack, upper ? h : -h);
        }
    out.min_slack = slack;
    return out;
}

} // namespace mot
