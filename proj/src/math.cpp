#include "mot/math.hpp"

#include <algorithm>
#include <cmath>

namespace mot {

namespace {

double ppnd16(double p) {
    const double q = p - 0.5;
    double r;
    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) *
                        r +
                    4.5921953931549871457e+4) *
                       r +
                   1.3731693765509461125e+4) *
                      r +
                  1.9715909503065514427e+3) *
                     r +
                 1.3314166789178437745e+2) *
                    r +
                3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) *
                        r +
                    2.1213794301586595867e+4) *
                       r +
                   5.3941960214247511077e+3) *
                      r +
                  6.8718700749205790830e+2) *
                     r +
                 4.2313330701600911252e+1) *
                    r +
                1.0);
    }
    r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) *
                       r +
                   1.27045825245236838258e+0) *
                      r +
                  3.64784832476320460504e+0) *
                     r +
                 5.76949722146069140550e+0) *
                    r +
                4.63033784615654529590e+0) *
                   r +
               1.42343711074968357734e+0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) *
                       r +
                   1.48103976427480074590e-1) *
                      r +
                  6.89767334985100004550e-1) *
                     r +
                 1.67638483018380384940e+0) *
                    r +
                2.05319162663775882187e+0) *
                   r +
               1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) *
                       r +
                   2.65321895265761230930e-2) *
                      r +
                  2.96560571828504891230e-1) *
                     r +
                 1.78482653991729133580e+0) *
                    r +
                5.46378491116411436990e+0) *
                   r +
               6.65790464350110377720e+0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) *
                       r +
                   7.86869131145613259100e-4) *
                      r +
                  1.48753612908506148525e-2) *
                     r +
                 1.36929880922735805310e-1) *
                    r +
                5.99832206555887937690e-1) *
                   r +
               1.0);
    }
    return q < 0.0 ? -val : val;
}

} // namespace

double normal_quantile(double p) {
    if (p <= 0.0) return -kInf;
    if (p >= 1.0) return kInf;
    double z = ppnd16(p);
    // Halley polish on F(z) - p = 0.
    for (int it = 0; it < 2; ++it) {
        const double e = normal_cdf(z) - p;
        const double d = normal_pdf(z);
        if (d <= 0.0) break;
        const double u = e / d;
        const double step = u / (1.0 + 0.5 * z * u);
        z -= step;
        if (std::fabs(step) < 1e-14 * (1.0 + std::fabs(z))) break;
    }
    return z;
}

namespace {

struct SimpsonCtx {
    const std::function<double(double)>& f;
    double rel_tol;
    double abs_tol;
    int max_depth;
    bool failed = false;
};

double simpson_rec(SimpsonCtx& ctx, double a, double b, double fa, double fm, double fb,
                   double whole, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = ctx.f(lm);
    const double frm = ctx.f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    const double scale = ctx.abs_tol + ctx.rel_tol * std::fabs(left + right);
    if (std::fabs(delta) <= 15.0 * scale || (b - a) < 1e-14 * (1.0 + std::fabs(a)))
        return left + right + delta / 15.0;
    if (depth >= ctx.max_depth) {
        ctx.failed = true;
        return left + right + delta / 15.0;
    }
    return simpson_rec(ctx, a, m, fa, flm, fm, left, depth + 1) +
           simpson_rec(ctx, m, b, fm, frm, fb, right, depth + 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, double abs_tol, int max_depth) {
    if (!(a < b)) return 0.0;
    SimpsonCtx ctx{f, rel_tol, abs_tol, max_depth};
    const double fa = f(a);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double result = simpson_rec(ctx, a, b, fa, fm, fb, whole, 0);
    if (ctx.failed) throw QuadratureFailure("adaptive_simpson: refinement budget exhausted");
    return result;
}

std::vector<double> cumulative_simpson(const std::vector<double>& xs,
                                       const std::vector<double>& fs) {
    const std::size_t n = xs.size();
    std::vector<double> out(n, 0.0);
    if (n < 2) return out;
    // Per-interval quadratic fit through (x_{j-1}, x_j, x_{j+1}) where
    // possible, integrating only over [x_{j-1}, x_j]; trapezoid fallback at
    // the ends and across zero-length jump segments.
    auto trap = [&](std::size_t j) {
        return 0.5 * (xs[j + 1] - xs[j]) * (fs[j] + fs[j + 1]);
    };
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double h = xs[j + 1] - xs[j];
        if (h <= 0.0) {
            out[j + 1] = out[j];
            continue;
        }
        double seg;
        // Choose a neighbour triple with distinct nodes for the parabola.
        if (j + 2 < n && xs[j + 2] > xs[j + 1]) {
            const double x0 = xs[j], x1 = xs[j + 1], x2 = xs[j + 2];
            const double f0 = fs[j], f1 = fs[j + 1], f2 = fs[j + 2];
            const double d01 = (f1 - f0) / (x1 - x0);
            const double d12 = (f2 - f1) / (x2 - x1);
            const double c2 = (d12 - d01) / (x2 - x0);
            // Integral of f0 + d01 (x-x0) + c2 (x-x0)(x-x1) over [x0,x1].
            seg = h * (f0 + 0.5 * d01 * h + c2 * (h * h / 3.0 - 0.5 * h * h));
        } else if (j >= 1 && xs[j] > xs[j - 1]) {
            const double x0 = xs[j - 1], x1 = xs[j], x2 = xs[j + 1];
            const double f0 = fs[j - 1], f1 = fs[j], f2 = fs[j + 1];
            const double d01 = (f1 - f0) / (x1 - x0);
            const double d12 = (f2 - f1) / (x2 - x1);
            const double c2 = (d12 - d01) / (x2 - x0);
            // Same Newton-form parabola, integrated over [x1, x2].
            const double a = x1 - x0, b = x2 - x0;
            seg = f0 * (b - a) + 0.5 * d01 * (b * b - a * a) +
                  c2 * ((b * b * b - a * a * a) / 3.0 - 0.5 * (x1 - x0) * (b * b - a * a));
        } else {
            seg = trap(j);
        }
        out[j + 1] = out[j] + seg;
    }
    return out;
}

double bisect_first_true(const std::function<bool(double)>& pred, double lo, double hi,
                         double tol) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (pred(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

} // namespace mot
