#include "mot/curtain.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace {

// Right-continuous linear interpolation over node arrays (no copies).
double interp_nodes(const std::vector<double>& xs, const std::vector<double>& vs, double x) {
    if (x <= xs.front()) return vs.front();
    if (x >= xs.back()) return vs.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    std::size_t lo = hi - 1;
    if (xs[lo] == x) {
        while (lo + 1 < xs.size() && xs[lo + 1] == x) ++lo;
        return vs[lo];
    }
    const double h = xs[hi] - xs[lo];
    if (h <= 0.0) return vs[hi];
    return vs[lo] + (x - xs[lo]) / h * (vs[hi] - vs[lo]);
}

} // namespace

namespace mot {

namespace {

constexpr double kTWidth = 1e-10;   // bisection width for t^A
constexpr double kXbarTol = 1e-9;   // bisection width for xbar
constexpr int kMarchPoints = 1024;  // coarse march resolution for xbar
constexpr int kMaxSteps = 64;

// int_0^w Qnu, extended with +inf above 1 (g overflow encodes G = +inf).
double iq_ext(const Marginal& nu, double w) {
    if (w > 1.0 + 1e-12) return kInf;
    return nu.integral_quantile(w);
}

// Cached evaluator for G^A(t, x) built from partial moments: on each
// atom-free piece of A the Stieltjes integral of g d(deltaF) collapses to a
// difference of integrated quantiles, and nu-atoms contribute explicit
// point terms.
struct GContext {
    const MarginalPair* pr = nullptr;
    IntervalSet a; // original pieces (jump bookkeeping)

    struct Piece {
        double a, b;       // (a, b]
        double df_a;       // deltaF(a)
        double df_b;       // deltaF(b)
        double df_b_left;  // deltaF(b-) = df_b - atom mass
        double atom_mass;  // nu atom at b, possibly 0
        double xi_full;    // int_{(a,b]} xi d(deltaF), atom included
    };
    std::vector<Piece> pieces;

    GContext(const MarginalPair& pair, IntervalSet A) : pr(&pair), a(std::move(A)) {
        const auto& atoms = pair.nu_atoms();
        for (const auto& p : a.pieces()) {
            std::vector<double> cuts;
            for (const auto& at : atoms)
                if (at.x > p.lo && at.x < p.hi) cuts.push_back(at.x);
            std::sort(cuts.begin(), cuts.end());
            cuts.push_back(p.hi);
            double lo = p.lo;
            for (double hi : cuts) {
                Piece q;
                q.a = lo;
                q.b = hi;
                q.df_a = pair.delta_f(lo);
                q.df_b = pair.delta_f(hi);
                q.atom_mass = 0.0;
                for (const auto& at : atoms)
                    if (at.x == hi) q.atom_mass = at.mass;
                q.df_b_left = q.df_b - q.atom_mass;
                q.xi_full = (pair.nu().partial_moment(hi) - pair.nu().partial_moment(lo)) -
                            (pair.mu().partial_moment(hi) - pair.mu().partial_moment(lo));
                pieces.push_back(q);
                lo = hi;
            }
        }
    }

    double gamma(double x, double px) const {
        const double q = pr->nu().quantile(px);
        const double mn = std::isfinite(q) ? pr->nu().partial_moment(q) : pr->nu().mean();
        return mn - pr->mu().partial_moment(x);
    }

    // G(t, x) given px = Fmu(x) and gam = gamma(x, px).
    double value(double px, double gam, double t) const {
        double s = gam;
        const auto& nu = pr->nu();
        const auto& mu = pr->mu();
        for (const auto& p : pieces) {
            if (t <= p.a) break;
            if (t >= p.b) {
                const double up = iq_ext(nu, px + p.df_b_left) - iq_ext(nu, px + p.df_a);
                if (!std::isfinite(up)) return kInf;
                s += up - p.xi_full;
                if (p.atom_mass > 0.0) {
                    const double gb = nu.quantile(std::min(px + p.df_b, 1.0));
                    if (!std::isfinite(gb)) return kInf;
                    s += (gb - p.b) * p.atom_mass;
                }
            } else {
                const double dft = pr->delta_f(t);
                const double up = iq_ext(nu, px + dft) - iq_ext(nu, px + p.df_a);
                if (!std::isfinite(up)) return kInf;
                const double xi = (nu.partial_moment(t) - nu.partial_moment(p.a)) -
                                  (mu.partial_moment(t) - mu.partial_moment(p.a));
                s += up - xi;
                break;
            }
        }
        return s;
    }
};

struct RootSolver {
    const GContext& ctx;
    double s_max; // flattened length of A

    explicit RootSolver(const GContext& c) : ctx(c), s_max(c.a.total_length()) {}

    // Root for a fixed x; hint is a flattened upper bound from the previous
    // (smaller) x, valid because t^A(x, m) is nonincreasing in x.
    double solve(double x, double m, double hint = -1.0) const {
        const auto& pr = *ctx.pr;
        if (x <= m) return std::min(m, ctx.a.upper());
        const double px = pr.mu().cdf(x);
        const double gam = ctx.gamma(x, px);
        const double top = std::min(ctx.a.coord_of(m), s_max);
        auto g_at = [&](double s) { return ctx.value(px, gam, ctx.a.point_at(s)); };
        const double brack_tol = 1e-9;
        const double g0 = g_at(0.0);
        if (g0 > brack_tol) throw RootNotBracketed("G^A is positive at the lower end of A");
        if (g0 >= 0.0) return ctx.a.point_at(0.0);
        double hi = top;
        if (hint > 0.0 && hint < top && g_at(hint) >= 0.0) {
            hi = hint;
        } else {
            const double gt = g_at(top);
            if (!(gt >= 0.0)) {
                // Residual truncation bias can push G(m, x) a hair below zero
                // right at x = m; the root is then pinned at the top.
                if (gt >= -brack_tol) return ctx.a.point_at(top);
                throw RootNotBracketed("G^A is negative on all of A");
            }
        }
        double lo = 0.0;
        while (hi - lo > kTWidth) {
            const double mid = 0.5 * (lo + hi);
            if (g_at(mid) >= 0.0)
                hi = mid;
            else
                lo = mid;
        }
        return ctx.a.point_at(hi);
    }
};

// Effective construction ceiling: beyond the 1 - 1e-13 quantile of mu the
// remaining mass cannot move any integral at working tolerance, and Fmu
// rounds to 1 which would overflow g.
double mu_ceiling(const MarginalPair& pair) {
    const double qc = pair.mu().quantile(1.0 - 1e-13);
    return std::min(pair.x_hi(), std::isfinite(qc) ? qc : pair.x_hi());
}

double xbar_impl(const MarginalPair& pair, const GContext& ctx, double m,
                 const std::vector<double>& checkpoints) {
    const RootSolver solver(ctx);
    const double ceil = mu_ceiling(pair);
    if (m >= ceil) return kInf;

    auto crossed = [&](double x) {
        double root;
        try {
            root = solver.solve(x, m);
        } catch (const RootNotBracketed&) {
            return true;
        }
        return g_eval(pair, x, root) <= x;
    };

    std::vector<double> xs;
    xs.reserve(kMarchPoints + checkpoints.size());
    for (int k = 1; k <= kMarchPoints; ++k) xs.push_back(m + (ceil - m) * k / kMarchPoints);
    for (double c : checkpoints)
        if (c > m && c < ceil) xs.push_back(c);
    std::sort(xs.begin(), xs.end());

    double prev = m;
    for (double x : xs) {
        if (crossed(x)) {
            if (x - prev < kXbarTol) return x;
            return bisect_first_true(crossed, prev, x, kXbarTol);
        }
        prev = x;
    }
    return kInf;
}

} // namespace

double g_eval(const MarginalPair& pair, double x, double y) {
    const double w = pair.mu().cdf(x) + pair.delta_f(y);
    if (w < 0.0) return -kInf;
    if (w > 1.0) return kInf;
    return pair.nu().quantile(w);
}

double big_g_eval(const MarginalPair& pair, const IntervalSet& A, double t, double x) {
    const double px = pair.mu().cdf(x);
    const double qx = pair.nu().quantile(px);
    double s = (std::isfinite(qx) ? pair.nu().partial_moment(qx) : pair.nu().mean()) -
               pair.mu().partial_moment(x);
    for (const auto& p : A.pieces()) {
        if (t <= p.lo) break;
        const double hi = std::min(p.hi, t);
        // Overflow probe at the right end, where the argument of g peaks.
        if (!std::isfinite(g_eval(pair, x, hi))) return kInf;
        auto integrand = [&](double xi) {
            const double g = g_eval(pair, x, xi);
            return (g - xi) * pair.delta_density(xi);
        };
        s += adaptive_simpson(integrand, p.lo, hi, 1e-9, 1e-13);
        for (const auto& at : pair.nu_atoms()) {
            if (at.x > p.lo && at.x <= hi) {
                const double g = g_eval(pair, x, at.x);
                if (!std::isfinite(g)) return kInf;
                s += (g - at.x) * at.mass;
            }
        }
    }
    return s;
}

double solve_t_a(const MarginalPair& pair, const IntervalSet& A, double m, double x) {
    if (A.empty()) throw RootNotBracketed("solve_t_a: empty A");
    GContext ctx(pair, A);
    return RootSolver(ctx).solve(x, m);
}

double find_xbar(const MarginalPair& pair, const IntervalSet& A, double m) {
    if (A.empty()) return kInf;
    GContext ctx(pair, A);
    std::vector<double> checkpoints;
    try {
        checkpoints = delta_f_structure(pair).maxima;
    } catch (const AccumulationDetected&) {
        // march without checkpoints
    }
    return xbar_impl(pair, ctx, m, checkpoints);
}

namespace {

void solve_step_grid(const MarginalPair& pair, const GContext& ctx, CurtainStep& step,
                     double grid_hi, int n_nodes) {
    const RootSolver solver(ctx);
    const double m = step.m;
    step.xs.clear();
    step.td.clear();
    step.tu.clear();
    step.xs.push_back(m);
    step.td.push_back(m);
    step.tu.push_back(m);

    double prev_x = m;
    double prev_root = std::min(m, ctx.a.upper());
    int prev_piece = ctx.a.piece_index(prev_root);
    if (prev_piece < 0) prev_piece = static_cast<int>(ctx.a.size()) - 1;

    auto push_node = [&](double x, double root) {
        const double td = std::min({root, x, step.td.back()});
        double tu = g_eval(pair, x, td);
        if (!std::isfinite(tu)) tu = std::max(x, step.tu.back());
        tu = std::max(tu, x);
        step.xs.push_back(x);
        step.td.push_back(td);
        step.tu.push_back(tu);
    };

    for (int j = 1; j <= n_nodes; ++j) {
        const double u = static_cast<double>(j) / n_nodes;
        const double x = m + u * u * (grid_hi - m);
        if (x <= prev_x) continue;
        const double hint = ctx.a.coord_of(prev_root) + 1e-9;
        const double root = solver.solve(x, m, hint);
        int piece = ctx.a.piece_index(root);
        if (piece < 0) piece = prev_piece;

        // The root may traverse one or more gaps of A between consecutive
        // nodes; locate each crossing and store the jump as a duplicated node.
        while (piece < prev_piece) {
            const auto& upper_piece = ctx.a.pieces()[prev_piece];
            const auto& lower_piece = ctx.a.pieces()[prev_piece - 1];
            const double gap_hi = upper_piece.lo; // bottom of the upper piece
            const double gap_lo = lower_piece.hi; // top of the lower piece
            auto below_gap = [&](double xq) {
                try {
                    return solver.solve(xq, m) <= gap_lo + 1e-12;
                } catch (const RootNotBracketed&) {
                    return true;
                }
            };
            const double x_star = bisect_first_true(below_gap, prev_x, x, kXbarTol);
            push_node(x_star, gap_hi);
            push_node(x_star, gap_lo);
            step.jumps.push_back({x_star, gap_hi, gap_lo});
            --prev_piece;
        }
        push_node(x, root);
        prev_x = x;
        prev_root = root;
        prev_piece = piece;
    }
    step.t_reach = step.td.back();
}

} // namespace

CurtainMaps build_curtain(const MarginalPair& pair) {
    const OrderReport order = check_convex_order(pair);
    if (!order.dominated)
        throw ConvexOrderViolated(order.same_mean
                                      ? "call-price dominance fails"
                                      : "marginals do not share a mean");
    const DeltaFStructure st = delta_f_structure(pair);

    CurtainMaps maps;
    maps.pair_ = std::make_shared<MarginalPair>(pair);
    maps.x0_ = st.x0;
    if (!std::isfinite(st.x0)) return maps; // mu == nu: identity everywhere

    const double ceil = mu_ceiling(pair);
    IntervalSet b = st.increase_set;
    double x_prev = st.x0;
    const double df_scale = [&] {
        double s = 0.0;
        for (double m : st.maxima) s = std::max(s, pair.delta_f(m));
        return s;
    }();

    for (int i = 1; i <= kMaxSteps; ++i) {
        auto it = std::lower_bound(st.maxima.begin(), st.maxima.end(), x_prev - 1e-12);
        if (it == st.maxima.end()) {
            // All remaining deltaF mass is below tolerance: identity tail.
            double residual = 0.0;
            for (int k = 0; k <= 64; ++k) {
                const double x = x_prev + (ceil - x_prev) * k / 64.0;
                residual = std::max(residual, pair.delta_f(x));
            }
            if (residual > 1e-7 * (1.0 + df_scale))
                throw Error("curtain: no maximizer beyond x_i with deltaF mass remaining");
            break;
        }
        CurtainStep step;
        step.index = i;
        step.m = *it;
        step.a_set = b.intersected(st.x0, step.m);
        if (step.a_set.empty())
            throw Error("curtain: empty increase set at step " + std::to_string(i));

        GContext ctx(pair, step.a_set);
        step.x_end = xbar_impl(pair, ctx, step.m, st.maxima);
        const bool final_step = !(step.x_end < ceil);
        const double grid_hi = final_step ? ceil : step.x_end;
        if (final_step) step.x_end = kInf;

        solve_step_grid(pair, ctx, step, grid_hi, pair.grid_resolution());
        step.b_after =
            final_step ? b : b.subtracted(step.t_reach, step.x_end);
        maps.steps_.push_back(std::move(step));
        if (final_step) return maps;
        b = maps.steps_.back().b_after;
        x_prev = maps.steps_.back().x_end;
    }
    throw AccumulationDetected("curtain: step budget exhausted");
}

CurtainMaps make_mirrored(std::shared_ptr<const CurtainMaps> base,
                          const MarginalPair& original_pair) {
    CurtainMaps m;
    m.pair_ = std::make_shared<MarginalPair>(original_pair);
    m.mirrored_ = true;
    m.base_ = std::move(base);
    m.x0_ = m.base_->x0();
    return m;
}

const CurtainStep* CurtainMaps::find_step(double x) const {
    for (const auto& s : steps_) {
        const double hi = std::isfinite(s.x_end) ? s.x_end : kInf;
        if (x >= s.m && x < hi) return &s;
    }
    return nullptr;
}

bool CurtainMaps::in_d(double x) const {
    if (mirrored_) return base_->in_d(-x);
    if (steps_.empty()) return true;
    return find_step(x) == nullptr;
}

double CurtainMaps::td(double x) const {
    if (mirrored_) return -base_->tu(-x);
    const CurtainStep* s = find_step(x);
    if (s == nullptr) return x;
    return interp_nodes(s->xs, s->td, x);
}

double CurtainMaps::tu(double x) const {
    if (mirrored_) return -base_->td(-x);
    const CurtainStep* s = find_step(x);
    if (s == nullptr) return x;
    // Evaluate through g on the interpolated td so the defining relation
    // T_u = g(., T_d) holds pointwise, not just at the stored nodes.
    const double t = td(x);
    const double g = g_eval(pair(), x, t);
    if (!std::isfinite(g)) return std::max(x, interp_nodes(s->xs, s->tu, x));
    return std::max(g, x);
}

double CurtainMaps::q(double x) const {
    if (in_d(x)) return 1.0;
    if (mirrored_) return 1.0 - base_->q(-x);
    const double a = td(x), b = tu(x);
    if (!(b > a)) return 1.0;
    return (x - a) / (b - a);
}

std::vector<std::pair<double, double>> CurtainMaps::d_intervals() const {
    if (mirrored_) {
        auto bd = base_->d_intervals();
        std::vector<std::pair<double, double>> out;
        for (auto it = bd.rbegin(); it != bd.rend(); ++it) out.emplace_back(-it->second, -it->first);
        return out;
    }
    std::vector<std::pair<double, double>> out;
    if (steps_.empty()) {
        out.emplace_back(-kInf, kInf);
        return out;
    }
    out.emplace_back(-kInf, steps_.front().m);
    for (std::size_t i = 0; i + 1 < steps_.size(); ++i)
        out.emplace_back(steps_[i].x_end, steps_[i + 1].m);
    if (std::isfinite(steps_.back().x_end)) out.emplace_back(steps_.back().x_end, kInf);
    return out;
}

std::vector<std::pair<double, double>> CurtainMaps::breakpoints() const {
    std::vector<std::pair<double, double>> out;
    const CurtainMaps* src = mirrored_ ? base_.get() : this;
    for (const auto& s : src->steps_) out.emplace_back(s.m, s.x_end);
    return out;
}

double kernel_cdf(const CurtainMaps& maps, double x, double y) {
    if (maps.in_d(x)) return y >= x ? 1.0 : 0.0;
    const double qu = maps.q(x);
    const double a = maps.td(x), b = maps.tu(x);
    double s = 0.0;
    if (y >= a) s += 1.0 - qu;
    if (y >= b) s += qu;
    return s;
}

namespace {

double simpson_weighted(const MarginalPair& pair, const CurtainMaps& maps, double a, double b,
                        bool up_branch) {
    if (!(b > a)) return 0.0;
    auto f = [&](double x) {
        const double q = maps.q(x);
        const double w = up_branch ? q : 1.0 - q;
        return w * pair.mu().pdf(x);
    };
    return adaptive_simpson(f, a, b, 1e-8, 1e-11);
}

} // namespace

double pushforward_cdf(const MarginalPair& pair, const CurtainMaps& maps, double y) {
    if (maps.mirrored()) {
        // P(-Y_base <= y) = 1 - P(Y_base <= -y) for atomless nu_base.
        return 1.0 - pushforward_cdf(maps.base()->pair(), *maps.base(), -y);
    }
    double mass = 0.0;
    for (const auto& d : maps.d_intervals()) {
        const double lo = d.first, hi = std::min(d.second, y);
        if (!(hi > lo)) continue;
        const double flo = std::isinf(lo) ? 0.0 : pair.mu().cdf(lo);
        const double fhi = std::isinf(hi) ? 1.0 : pair.mu().cdf(hi);
        mass += std::max(0.0, fhi - flo);
    }
    for (const auto& s : maps.steps()) {
        const double x_top = s.xs.back();
        // Upper branch: {x : tu(x) <= y} = [m, xu].
        if (y >= s.tu.front()) {
            double xu;
            if (y >= s.tu.back()) {
                xu = x_top;
            } else {
                auto it = std::upper_bound(s.tu.begin(), s.tu.end(), y);
                const std::size_t hi = static_cast<std::size_t>(it - s.tu.begin());
                const std::size_t lo = hi - 1;
                const double dv = s.tu[hi] - s.tu[lo];
                const double w = dv > 0 ? (y - s.tu[lo]) / dv : 1.0;
                xu = s.xs[lo] + w * (s.xs[hi] - s.xs[lo]);
            }
            mass += simpson_weighted(pair, maps, s.m, xu, true);
        }
        // Lower branch: {x : td(x) <= y} = [xd, end].
        if (y >= s.td.back()) {
            double xd;
            if (y >= s.td.front()) {
                xd = s.m;
            } else {
                auto it = std::upper_bound(s.td.begin(), s.td.end(), y, std::greater<double>());
                const std::size_t hi = static_cast<std::size_t>(it - s.td.begin());
                const std::size_t lo = hi - 1;
                const double dv = s.td[hi] - s.td[lo];
                const double w = dv < 0 ? (y - s.td[lo]) / dv : 1.0;
                xd = s.xs[lo] + w * (s.xs[hi] - s.xs[lo]);
            }
            mass += simpson_weighted(pair, maps, xd, x_top, false);
        }
    }
    return std::min(mass, 1.0);
}

} // namespace mot
