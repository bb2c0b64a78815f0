#include "mot/dual.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mot {

namespace {

// Affine expression a + sum_s b[s] * C_s in the per-step h constants.
struct Affine {
    double a = 0.0;
    std::vector<double> b;
    explicit Affine(std::size_t k = 0) : b(k, 0.0) {}
};

Affine operator+(Affine l, const Affine& r) {
    l.a += r.a;
    for (std::size_t i = 0; i < l.b.size(); ++i) l.b[i] += r.b[i];
    return l;
}
Affine operator-(Affine l, const Affine& r) {
    l.a -= r.a;
    for (std::size_t i = 0; i < l.b.size(); ++i) l.b[i] -= r.b[i];
    return l;
}

// Solve the small linear system rows * C = rhs by Gaussian elimination with
// partial pivoting; extra rows are checked as residuals.
std::pair<std::vector<double>, double> solve_constants(std::vector<std::vector<double>> rows,
                                                       std::vector<double> rhs, std::size_t k) {
    std::vector<double> c(k, 0.0);
    std::vector<int> used(rows.size(), 0);
    std::vector<int> pivot_row(k, -1);
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t best = rows.size();
        double best_mag = 1e-12;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (used[r]) continue;
            if (std::fabs(rows[r][col]) > best_mag) {
                best_mag = std::fabs(rows[r][col]);
                best = r;
            }
        }
        if (best == rows.size()) continue; // unresolved: stays zero
        used[best] = 1;
        pivot_row[col] = static_cast<int>(best);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (static_cast<int>(r) == pivot_row[col] || std::fabs(rows[r][col]) < 1e-300)
                continue;
            const double f = rows[r][col] / rows[best][col];
            for (std::size_t j = 0; j < k; ++j) rows[r][j] -= f * rows[best][j];
            rhs[r] -= f * rhs[best];
        }
    }
    // Back-substitute (rows are now diagonalized on their pivot columns).
    for (std::size_t col = 0; col < k; ++col) {
        if (pivot_row[col] >= 0) c[col] = rhs[pivot_row[col]] / rows[pivot_row[col]][col];
    }
    double residual = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (used[r]) continue;
        residual = std::max(residual, std::fabs(rhs[r]));
    }
    return {c, residual};
}

std::vector<double> step_boundaries(const CurtainMaps& maps, double lo, double hi) {
    std::vector<double> cuts{lo, hi};
    auto add = [&](double v) {
        if (v > lo && v < hi) cuts.push_back(v);
    };
    const CurtainMaps* src = maps.mirrored() ? maps.base() : &maps;
    const double sgn = maps.mirrored() ? -1.0 : 1.0;
    for (const auto& s : src->steps()) {
        add(sgn * s.m);
        if (std::isfinite(s.x_end)) add(sgn * s.x_end);
        add(sgn * s.xs.back());
        for (const auto& j : s.jumps) add(sgn * j.x_star);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return cuts;
}

} // namespace

double kernel_expectation(const MarginalPair& pair, const CurtainMaps& maps, const Coupling& c) {
    const double lo = std::max(pair.x_lo(), pair.mu().quantile(1e-14));
    const double hi = std::min(pair.x_hi(), pair.mu().quantile(1.0 - 1e-14));
    const auto cuts = step_boundaries(maps, lo, hi);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        if (!(b > a)) continue;
        auto f = [&](double x) {
            const double fx = pair.mu().pdf(x);
            if (fx <= 0.0) return 0.0;
            if (maps.in_d(x)) return c.c(x, x) * fx;
            const double td = maps.td(x), tu = maps.tu(x), q = maps.q(x);
            return (q * c.c(x, tu) + (1.0 - q) * c.c(x, td)) * fx;
        };
        total += adaptive_simpson(f, a, b, 1e-7, 1e-12);
    }
    return total;
}

HedgeStrategy build_hedge(const MarginalPair& pair, std::shared_ptr<const CurtainMaps> maps,
                          const Coupling& c) {
    if (maps->mirrored())
        throw Error("build_hedge: hedge the reflected problem, not the mirrored maps");
    HedgeStrategy hs;
    hs.maps_ = maps;
    hs.c_ = c;
    hs.anchor_ = pair.nu().quantile(0.5);
    const auto& steps = maps->steps();
    const std::size_t K = steps.size();

    if (K == 0) {
        // Identity kernel: diagonal construction h' = c_xy on the diagonal,
        // psi' = c_y(y,y) - h(y).
        const int n = 1024;
        std::vector<double> ys(n + 1), dh(n + 1);
        for (int j = 0; j <= n; ++j) {
            ys[j] = pair.x_lo() + (pair.x_hi() - pair.x_lo()) * j / n;
            dh[j] = c.cxy(ys[j], ys[j]);
        }
        auto hv = cumulative_simpson(ys, dh);
        std::vector<double> dpsi(n + 1), psiv;
        for (int j = 0; j <= n; ++j) dpsi[j] = c.cy(ys[j], ys[j]) - hv[j];
        psiv = cumulative_simpson(ys, dpsi);
        HedgeStrategy::Region reg;
        reg.kind = HedgeStrategy::Region::Kind::Identity;
        reg.step = -1;
        reg.ys = ys;
        reg.dpsi = dpsi;
        reg.psi_v = psiv;
        hs.regions_.push_back(std::move(reg));
        hs.h_step_x_.push_back(ys);
        hs.h_step_v_.push_back(hv);
        hs.c_const_.assign(1, 0.0);
        const double shift = PiecewiseLinear(ys, psiv)(hs.anchor_);
        for (auto& v : psiv) v -= shift;
        hs.regions_[0].psi_v = psiv;
        hs.psi_ = HermiteCurve(ys, psiv, dpsi);
        hs.ys_export_ = ys;
        hs.xs_export_ = ys;
        return hs;
    }

    // --- per-step dynamic component, zero-anchored at m_i ---
    std::vector<std::vector<double>> hhat(K);
    for (std::size_t s = 0; s < K; ++s) {
        const auto& st = steps[s];
        const std::size_t n = st.xs.size();
        std::vector<double> dh(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double x = st.xs[j], a = st.td[j], b = st.tu[j];
            const double w = b - a;
            dh[j] = w > 1e-9 * (1.0 + std::fabs(x)) ? (c.cx(x, b) - c.cx(x, a)) / w
                                                    : c.cxy(x, x);
        }
        hhat[s] = cumulative_simpson(st.xs, dh);
    }

    // --- y-line regions ---
    using Region = HedgeStrategy::Region;
    std::vector<Region> regions;
    struct JumpRef {
        int step;
        double x_star, upper, lower;
    };
    std::vector<JumpRef> jumps;

    for (std::size_t s = 0; s < K; ++s) {
        const auto& st = steps[s];
        const std::size_t n = st.xs.size();
        // Up region: y = tu ascending; duplicates keep the largest x
        // (right-continuous inverse).
        Region up;
        up.kind = Region::Kind::Up;
        up.step = static_cast<int>(s);
        for (std::size_t j = 0; j < n; ++j) {
            const double y = st.tu[j];
            const double base = c.cy(st.xs[j], y) - hhat[s][j];
            if (!up.ys.empty() && y <= up.ys.back() + 1e-13 * (1.0 + std::fabs(y))) {
                up.ys.back() = std::max(up.ys.back(), y);
                up.xs.back() = st.xs[j];
                up.dpsi.back() = base;
            } else {
                up.ys.push_back(y);
                up.xs.push_back(st.xs[j]);
                up.dpsi.push_back(base);
            }
        }
        if (up.ys.size() >= 2) regions.push_back(std::move(up));

        // Down pieces: td descending, split at jump double-nodes; duplicates
        // keep the smallest x.
        Region piece;
        piece.kind = Region::Kind::Down;
        piece.step = static_cast<int>(s);
        auto flush = [&]() {
            if (piece.ys.size() >= 2) {
                std::reverse(piece.ys.begin(), piece.ys.end());
                std::reverse(piece.xs.begin(), piece.xs.end());
                std::reverse(piece.dpsi.begin(), piece.dpsi.end());
                regions.push_back(piece);
            }
            piece.ys.clear();
            piece.xs.clear();
            piece.dpsi.clear();
        };
        for (std::size_t j = 0; j < n; ++j) {
            const double y = st.td[j];
            const double base = c.cy(st.xs[j], y) - hhat[s][j];
            const bool is_jump_marker =
                j > 0 && st.xs[j] == st.xs[j - 1] && st.td[j] < st.td[j - 1] - 1e-12;
            if (is_jump_marker) flush();
            if (!piece.ys.empty() && y >= piece.ys.back() - 1e-13 * (1.0 + std::fabs(y)))
                continue; // flat: keep the first hit
            piece.ys.push_back(y);
            piece.xs.push_back(st.xs[j]);
            piece.dpsi.push_back(base);
        }
        flush();
        for (const auto& j : st.jumps)
            jumps.push_back({static_cast<int>(s), j.x_star, j.upper, j.lower});
    }

    std::sort(regions.begin(), regions.end(),
              [](const Region& a, const Region& b) { return a.y_lo() < b.y_lo(); });

    // Identity glue over any uncovered stretch of the y-line.
    {
        std::vector<Region> glued;
        double cursor = std::min(regions.front().y_lo(), pair.x_lo());
        auto nearest_down = [&](double y) -> const Region* {
            const Region* best = nullptr;
            double dist = kInf;
            for (const auto& r : regions) {
                if (r.kind != Region::Kind::Down) continue;
                const double d =
                    y < r.y_lo() ? r.y_lo() - y : (y > r.y_hi() ? y - r.y_hi() : 0.0);
                if (d < dist) {
                    dist = d;
                    best = &r;
                }
            }
            return best;
        };
        for (const auto& r : regions) {
            if (r.y_lo() > cursor + 1e-9) {
                Region id;
                id.kind = Region::Kind::Identity;
                const Region* anchor_region = nearest_down(0.5 * (cursor + r.y_lo()));
                int astep = anchor_region ? anchor_region->step : 0;
                double xstar = pair.x_lo();
                double hbase = 0.0;
                if (anchor_region) {
                    const bool above = anchor_region->y_lo() >= r.y_lo();
                    xstar = above ? anchor_region->xs.front() : anchor_region->xs.back();
                    const auto& sx = steps[astep].xs;
                    const auto& hv = hhat[astep];
                    xstar = std::clamp(xstar, sx.front(), sx.back());
                    // interp hhat at xstar
                    auto it = std::upper_bound(sx.begin(), sx.end(), xstar);
                    std::size_t hi2 = std::min<std::size_t>(sx.size() - 1,
                                                            static_cast<std::size_t>(it - sx.begin()));
                    std::size_t lo2 = hi2 == 0 ? 0 : hi2 - 1;
                    const double w = sx[hi2] > sx[lo2]
                                         ? (xstar - sx[lo2]) / (sx[hi2] - sx[lo2])
                                         : 0.0;
                    hbase = hv[lo2] + w * (hv[hi2] - hv[lo2]);
                }
                id.step = astep;
                const int gn = 64;
                for (int j = 0; j <= gn; ++j) {
                    const double y = cursor + (r.y_lo() - cursor) * j / gn;
                    id.ys.push_back(y);
                    id.dpsi.push_back(c.cy(xstar, y) - hbase);
                }
                glued.push_back(std::move(id));
            }
            cursor = std::max(cursor, r.y_hi());
            glued.push_back(r);
        }
        regions = std::move(glued);
        std::sort(regions.begin(), regions.end(),
                  [](const Region& a, const Region& b) { return a.y_lo() < b.y_lo(); });
    }

    // --- affine sweep for the inter-step constants ---
    std::vector<std::vector<double>> base_cum(regions.size());
    for (std::size_t r = 0; r < regions.size(); ++r)
        base_cum[r] = cumulative_simpson(regions[r].ys, regions[r].dpsi);

    std::vector<std::vector<double>> eq_rows;
    std::vector<double> eq_rhs;
    // gauge: C_0 = 0
    {
        std::vector<double> row(K, 0.0);
        row[0] = 1.0;
        eq_rows.push_back(row);
        eq_rhs.push_back(0.0);
    }

    std::vector<Affine> region_level(regions.size(), Affine(K));
    Affine level(K);
    std::map<std::pair<int, long long>, Affine> jump_bottom; // (step, key of lower y) -> psi(l)
    auto key_of = [](double v) { return static_cast<long long>(std::llround(v * 1e9)); };

    for (std::size_t r = 0; r < regions.size(); ++r) {
        const Region& reg = regions[r];
        // jump equation when this region is the upper Down piece of a jump
        for (const auto& J : jumps) {
            if (reg.kind != Region::Kind::Down || reg.step != J.step) continue;
            if (std::fabs(reg.y_lo() - J.upper) > 1e-7 * (1.0 + std::fabs(J.upper))) continue;
            auto it = jump_bottom.find({J.step, key_of(J.lower)});
            if (it == jump_bottom.end()) continue;
            const Affine& e = it->second;
            // level - psi(l) + c(x*,l) - c(x*,u) + (u-l)(hhat_s(x*) + C_s) = 0
            const auto& sx = steps[J.step].xs;
            const auto& hv = hhat[J.step];
            double hstar = 0.0;
            {
                auto pos = std::lower_bound(sx.begin(), sx.end(), J.x_star);
                std::size_t idx = std::min<std::size_t>(
                    sx.size() - 1, static_cast<std::size_t>(pos - sx.begin()));
                hstar = hv[idx];
            }
            Affine eq = level - e;
            eq.a += c.c(J.x_star, J.lower) - c.c(J.x_star, J.upper) +
                    (J.upper - J.lower) * hstar;
            eq.b[J.step] += J.upper - J.lower;
            eq_rows.push_back(eq.b);
            eq_rhs.push_back(-eq.a);
        }
        region_level[r] = level;
        // advance level to the end of the region
        level.a += base_cum[r].back();
        level.b[reg.step] -= reg.y_hi() - reg.y_lo();
        // record psi at the top if this is the lower piece of a jump
        for (const auto& J : jumps) {
            if (reg.kind != Region::Kind::Down || reg.step != J.step) continue;
            if (std::fabs(reg.y_hi() - J.lower) > 1e-7 * (1.0 + std::fabs(J.lower))) continue;
            jump_bottom[{J.step, key_of(J.lower)}] = level;
        }
    }

    auto [cvals, resid] = solve_constants(eq_rows, eq_rhs, K);
    hs.c_const_ = cvals;
    hs.constant_residual_ = resid;

    // --- materialize psi ---
    std::vector<double> gy, gv, gd;
    for (std::size_t r = 0; r < regions.size(); ++r) {
        Region& reg = regions[r];
        double k0 = region_level[r].a;
        for (std::size_t s = 0; s < K; ++s) k0 += region_level[r].b[s] * cvals[s];
        const double cs = cvals[reg.step];
        reg.psi_v.resize(reg.ys.size());
        for (std::size_t j = 0; j < reg.ys.size(); ++j) {
            reg.psi_v[j] = k0 + base_cum[r][j] - cs * (reg.ys[j] - reg.y_lo());
            reg.dpsi[j] -= cs;
        }
        for (std::size_t j = 0; j < reg.ys.size(); ++j) {
            if (!gy.empty() && reg.ys[j] <= gy.back() + 1e-13 * (1.0 + std::fabs(gy.back())))
                continue;
            gy.push_back(reg.ys[j]);
            gv.push_back(reg.psi_v[j]);
            gd.push_back(reg.dpsi[j]);
        }
    }
    // anchor psi at the nu-median
    {
        const double shift = PiecewiseLinear(gy, gv)(hs.anchor_);
        for (auto& v : gv) v -= shift;
        for (auto& r : regions)
            for (auto& v : r.psi_v) v -= shift;
    }
    hs.regions_ = std::move(regions);
    hs.psi_ = HermiteCurve(gy, gv, gd);
    hs.ys_export_ = gy;

    // --- h on the active steps ---
    hs.h_step_x_.resize(K);
    hs.h_step_v_.resize(K);
    for (std::size_t s = 0; s < K; ++s) {
        hs.h_step_x_[s] = steps[s].xs;
        hs.h_step_v_[s] = hhat[s];
        for (auto& v : hs.h_step_v_[s]) v += cvals[s];
    }
    std::vector<double> xs;
    for (const auto& st : steps) xs.insert(xs.end(), st.xs.begin(), st.xs.end());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    hs.xs_export_ = std::move(xs);
    return hs;
}

const HedgeStrategy::Region* HedgeStrategy::down_region_at(double y) const {
    const Region* best = nullptr;
    double dist = kInf;
    for (const auto& r : regions_) {
        if (r.kind != Region::Kind::Down) continue;
        const double d = y < r.y_lo() ? r.y_lo() - y : (y > r.y_hi() ? y - r.y_hi() : 0.0);
        if (d < dist) {
            dist = d;
            best = &r;
        }
        if (d == 0.0) break;
    }
    return best;
}

double HedgeStrategy::psi(double y) const { return psi_.value(y); }
double HedgeStrategy::dpsi(double y) const { return psi_.deriv(y); }

double HedgeStrategy::h(double x) const {
    const auto& steps = maps_->steps();
    if (steps.empty()) {
        return PiecewiseLinear(h_step_x_[0], h_step_v_[0])(x);
    }
    if (!maps_->in_d(x)) {
        for (std::size_t s = 0; s < steps.size(); ++s) {
            const double hi = std::isfinite(steps[s].x_end) ? steps[s].x_end : kInf;
            if (x >= steps[s].m && x < hi)
                return PiecewiseLinear(h_step_x_[s], h_step_v_[s])(x);
        }
    }
    // On D: transported relation through Td^{-1}, clamped beyond coverage.
    const Region* r = down_region_at(x);
    if (r == nullptr) return 0.0;
    double xstar;
    if (x <= r->y_lo())
        xstar = r->xs.front();
    else if (x >= r->y_hi())
        xstar = r->xs.back();
    else
        xstar = PiecewiseLinear(r->ys, r->xs)(x);
    const double h_at = PiecewiseLinear(h_step_x_[r->step], h_step_v_[r->step])(xstar);
    return h_at + c_.cy(x, x) - c_.cy(xstar, x);
}

double HedgeStrategy::phi(double x) const {
    if (maps_->in_d(x)) return c_.c(x, x) - psi(x);
    const double td = maps_->td(x), tu = maps_->tu(x), q = maps_->q(x);
    return q * (c_.c(x, tu) - psi(tu)) + (1.0 - q) * (c_.c(x, td) - psi(td));
}

double HedgeStrategy::delta_h(double x) const {
    if (maps_->in_d(x)) return 0.0;
    const double td = maps_->td(x), tu = maps_->tu(x);
    return c_.c(x, tu) - psi(tu) - (c_.c(x, td) - psi(td)) - (tu - td) * h(x);
}

SlackReport superhedge_check(const HedgeStrategy& strategy, const Coupling& c,
                             const std::vector<double>& xs, const std::vector<double>& ys) {
    SlackReport rep;
    rep.min_slack = kInf;
    std::vector<double> phis(xs.size()), hsv(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        phis[i] = strategy.phi(xs[i]);
        hsv[i] = strategy.h(xs[i]);
    }
    std::vector<double> psis(ys.size());
    for (std::size_t j = 0; j < ys.size(); ++j) psis[j] = strategy.psi(ys[j]);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < ys.size(); ++j) {
            const double slack =
                phis[i] + psis[j] + hsv[i] * (ys[j] - xs[i]) - c.c(xs[i], ys[j]);
            if (slack < rep.min_slack) {
                rep.min_slack = slack;
                rep.argmin_x = xs[i];
                rep.argmin_y = ys[j];
            }
        }
    }
    return rep;
}

GapReport duality_gap(const MarginalPair& pair, const CurtainMaps& maps,
                      const HedgeStrategy& strategy, const Coupling& c) {
    GapReport rep;
    rep.primal = kernel_expectation(pair, maps, c);

    const double lo = std::max(pair.x_lo(), pair.mu().quantile(1e-14));
    const double hi = std::min(pair.x_hi(), pair.mu().quantile(1.0 - 1e-14));
    const auto cuts = step_boundaries(maps, lo, hi);
    double mu_phi = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        mu_phi += adaptive_simpson(
            [&](double x) { return strategy.phi(x) * pair.mu().pdf(x); }, cuts[i], cuts[i + 1],
            1e-7, 1e-12);
    }
    double nu_psi = 0.0;
    {
        std::vector<double> ycuts{pair.x_lo(), pair.x_hi()};
        for (const auto& bp : maps.breakpoints()) {
            if (bp.first > pair.x_lo() && bp.first < pair.x_hi()) ycuts.push_back(bp.first);
            if (std::isfinite(bp.second) && bp.second > pair.x_lo() && bp.second < pair.x_hi())
                ycuts.push_back(bp.second);
        }
        std::sort(ycuts.begin(), ycuts.end());
        ycuts.erase(std::unique(ycuts.begin(), ycuts.end()), ycuts.end());
        for (std::size_t i = 0; i + 1 < ycuts.size(); ++i) {
            nu_psi += adaptive_simpson(
                [&](double y) { return strategy.psi(y) * pair.nu().pdf(y); }, ycuts[i],
                ycuts[i + 1], 1e-7, 1e-12);
        }
        for (const auto& a : pair.nu_atoms()) nu_psi += strategy.psi(a.x) * a.mass;
    }
    rep.dual = mu_phi + nu_psi;
    rep.gap = rep.dual - rep.primal;
    return rep;
}

} // namespace mot
