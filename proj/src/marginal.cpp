#include "mot/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mot {

namespace {

class NormalDist final : public Dist {
  public:
    NormalDist(double mean, double sd) : mu_(mean), sd_(sd) {
        if (!(sd > 0.0) || !std::isfinite(mean)) throw Error("normal: bad parameters");
    }
    double cdf(double x) const override { return normal_cdf((x - mu_) / sd_); }
    double pdf(double x) const override { return normal_pdf((x - mu_) / sd_) / sd_; }
    double quantile(double u) const override {
        if (u <= 0.0) return -kInf;
        if (u >= 1.0) return kInf;
        return mu_ + sd_ * normal_quantile(u);
    }
    double mean() const override { return mu_; }
    double support_lo() const override { return -kInf; }
    double support_hi() const override { return kInf; }
    double partial_moment(double y) const override {
        const double z = (y - mu_) / sd_;
        return mu_ * normal_cdf(z) - sd_ * normal_pdf(z);
    }
    std::string kind() const override { return "normal"; }

    double mu_, sd_;
};

class LognormalDist final : public Dist {
  public:
    LognormalDist(double m, double s2) : m_(m), s_(std::sqrt(s2)) {
        if (!(s2 > 0.0) || !std::isfinite(m)) throw Error("lognormal: bad parameters");
        mean_ = std::exp(m_ + 0.5 * s_ * s_);
    }
    double cdf(double x) const override {
        if (x <= 0.0) return 0.0;
        return normal_cdf((std::log(x) - m_) / s_);
    }
    double pdf(double x) const override {
        if (x <= 0.0) return 0.0;
        return normal_pdf((std::log(x) - m_) / s_) / (x * s_);
    }
    double quantile(double u) const override {
        if (u <= 0.0) return 0.0;
        if (u >= 1.0) return kInf;
        return std::exp(m_ + s_ * normal_quantile(u));
    }
    double mean() const override { return mean_; }
    double support_lo() const override { return 0.0; }
    double support_hi() const override { return kInf; }
    double partial_moment(double y) const override {
        if (y <= 0.0) return 0.0;
        return mean_ * normal_cdf((std::log(y) - m_ - s_ * s_) / s_);
    }
    std::string kind() const override { return "lognormal"; }

    double m_, s_, mean_;
};

class UniformDist final : public Dist {
  public:
    UniformDist(double a, double b) : a_(a), b_(b) {
        if (!(b > a)) throw Error("uniform: requires b > a");
    }
    double cdf(double x) const override {
        if (x <= a_) return 0.0;
        if (x >= b_) return 1.0;
        return (x - a_) / (b_ - a_);
    }
    double pdf(double x) const override { return (x > a_ && x < b_) ? 1.0 / (b_ - a_) : 0.0; }
    double quantile(double u) const override {
        if (u <= 0.0) return a_;
        if (u >= 1.0) return b_;
        return a_ + u * (b_ - a_);
    }
    double mean() const override { return 0.5 * (a_ + b_); }
    double support_lo() const override { return a_; }
    double support_hi() const override { return b_; }
    double partial_moment(double y) const override {
        const double t = std::clamp(y, a_, b_);
        return 0.5 * (t * t - a_ * a_) / (b_ - a_);
    }
    std::string kind() const override { return "uniform"; }

    double a_, b_;
};

class MixtureDist final : public Dist {
  public:
    MixtureDist(std::vector<Marginal> comps, std::vector<double> weights)
        : comps_(std::move(comps)), w_(std::move(weights)) {
        if (comps_.empty() || comps_.size() != w_.size())
            throw Error("mixture: components/weights mismatch");
        double tot = std::accumulate(w_.begin(), w_.end(), 0.0);
        if (!(tot > 0.0)) throw Error("mixture: weights must be positive");
        for (auto& w : w_) {
            if (w < 0.0) throw Error("mixture: negative weight");
            w /= tot;
        }
        mean_ = 0.0;
        lo_ = kInf;
        hi_ = -kInf;
        double var_proxy = 0.0;
        for (std::size_t i = 0; i < comps_.size(); ++i) {
            mean_ += w_[i] * comps_[i].mean();
            lo_ = std::min(lo_, comps_[i].support_lo());
            hi_ = std::max(hi_, comps_[i].support_hi());
            var_proxy += w_[i] * comps_[i].mean() * comps_[i].mean();
        }
        if (!std::isfinite(mean_)) throw NonFiniteMean("mixture: mean diverges");
        spread_ = std::sqrt(std::max(var_proxy - mean_ * mean_, 0.0)) + 1.0;
    }
    double cdf(double x) const override {
        double s = 0.0;
        for (std::size_t i = 0; i < comps_.size(); ++i) s += w_[i] * comps_[i].cdf(x);
        return s;
    }
    double pdf(double x) const override {
        double s = 0.0;
        for (std::size_t i = 0; i < comps_.size(); ++i) s += w_[i] * comps_[i].pdf(x);
        return s;
    }
    double quantile(double u) const override {
        if (u <= 0.0) return lo_;
        if (u >= 1.0) return hi_;
        // Bracket, then safeguarded Newton on F(x) = u.
        double lo = std::isfinite(lo_) ? lo_ : mean_ - spread_;
        double hi = std::isfinite(hi_) ? hi_ : mean_ + spread_;
        while (cdf(lo) > u) lo -= spread_ * 4.0;
        while (cdf(hi) < u) hi += spread_ * 4.0;
        double x = 0.5 * (lo + hi);
        for (int it = 0; it < 200; ++it) {
            const double f = cdf(x) - u;
            if (f > 0.0)
                hi = x;
            else
                lo = x;
            if (hi - lo < 1e-15 * (1.0 + std::fabs(x))) break;
            const double d = pdf(x);
            double nx = d > 1e-300 ? x - f / d : 0.5 * (lo + hi);
            if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
            x = nx;
        }
        return x;
    }
    double mean() const override { return mean_; }
    double support_lo() const override { return lo_; }
    double support_hi() const override { return hi_; }
    double partial_moment(double y) const override {
        double s = 0.0;
        for (std::size_t i = 0; i < comps_.size(); ++i) s += w_[i] * comps_[i].partial_moment(y);
        return s;
    }
    std::vector<Atom> atoms() const override {
        std::vector<Atom> out;
        for (std::size_t i = 0; i < comps_.size(); ++i)
            for (const auto& a : comps_[i].atoms()) out.push_back({a.x, w_[i] * a.mass});
        return out;
    }
    std::string kind() const override { return "mixture"; }

    std::vector<Marginal> comps_;
    std::vector<double> w_;
    double mean_, lo_, hi_, spread_;
};

class PointMassDist final : public Dist {
  public:
    explicit PointMassDist(double x) : x_(x) {
        if (!std::isfinite(x)) throw Error("point mass: non-finite location");
    }
    double cdf(double x) const override { return x >= x_ ? 1.0 : 0.0; }
    double pdf(double) const override { return 0.0; }
    double quantile(double u) const override { return u >= 1.0 ? x_ : (u >= 0.0 ? x_ : -kInf); }
    double mean() const override { return x_; }
    double support_lo() const override { return x_; }
    double support_hi() const override { return x_; }
    double partial_moment(double y) const override { return y >= x_ ? x_ : 0.0; }
    std::vector<Atom> atoms() const override { return {{x_, 1.0}}; }
    std::string kind() const override { return "point"; }

    double x_;
};

// Piecewise-linear CDF with explicit atoms. Nodes store the CDF value from
// the left and from the right; an atom is a node with fr > fl.
class TabulatedDist final : public Dist {
  public:
    TabulatedDist(std::vector<double> xs, std::vector<double> fl, std::vector<double> fr)
        : x_(std::move(xs)), fl_(std::move(fl)), fr_(std::move(fr)) {
        const std::size_t n = x_.size();
        if (n < 1 || fl_.size() != n || fr_.size() != n) throw Error("tabulated: bad table");
        for (std::size_t i = 0; i < n; ++i) {
            if (fr_[i] < fl_[i]) throw Error("tabulated: cdf not monotone at a node");
            if (i + 1 < n && (x_[i + 1] <= x_[i] || fl_[i + 1] < fr_[i]))
                throw Error("tabulated: nodes must increase and cdf must be monotone");
        }
        fl_.front() = std::max(fl_.front(), 0.0);
        fr_.back() = std::min(fr_.back(), 1.0);
        // Cumulative first moments at node boundaries.
        cum_.assign(n, 0.0);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += x_[i] * (fr_[i] - fl_[i]); // atom at the node
            cum_[i] = acc;
            if (i + 1 < n) {
                const double mass = fl_[i + 1] - fr_[i];
                acc += 0.5 * (x_[i] + x_[i + 1]) * mass; // uniform chunk
            }
        }
        mean_ = acc;
    }

    double cdf(double x) const override {
        if (x < x_.front()) return 0.0;
        if (x >= x_.back()) return 1.0;
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        const std::size_t hi = static_cast<std::size_t>(it - x_.begin());
        const std::size_t lo = hi - 1;
        if (x == x_[lo]) return fr_[lo];
        const double w = (x - x_[lo]) / (x_[hi] - x_[lo]);
        return fr_[lo] + w * (fl_[hi] - fr_[lo]);
    }
    double pdf(double x) const override {
        if (x <= x_.front() || x >= x_.back()) return 0.0;
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        const std::size_t hi = static_cast<std::size_t>(it - x_.begin());
        const std::size_t lo = hi - 1;
        return (fl_[hi] - fr_[lo]) / (x_[hi] - x_[lo]);
    }
    double quantile(double u) const override {
        if (u <= 0.0) return x_.front();
        if (u >= 1.0) return x_.back();
        // inf{y : F(y) > u}: scan segments right-continuously.
        for (std::size_t i = 0; i < x_.size(); ++i) {
            if (fr_[i] > u) return x_[i];
            if (i + 1 < x_.size() && fl_[i + 1] > u) {
                const double mass = fl_[i + 1] - fr_[i];
                const double w = (u - fr_[i]) / mass;
                return x_[i] + w * (x_[i + 1] - x_[i]);
            }
        }
        return x_.back();
    }
    double mean() const override { return mean_; }
    double support_lo() const override { return x_.front(); }
    double support_hi() const override { return x_.back(); }
    double partial_moment(double y) const override {
        if (y < x_.front()) return 0.0;
        if (y >= x_.back()) return mean_;
        auto it = std::upper_bound(x_.begin(), x_.end(), y);
        const std::size_t hi = static_cast<std::size_t>(it - x_.begin());
        const std::size_t lo = hi - 1;
        double acc = cum_[lo];
        if (y > x_[lo]) {
            const double rho = (fl_[hi] - fr_[lo]) / (x_[hi] - x_[lo]);
            acc += 0.5 * rho * (y * y - x_[lo] * x_[lo]);
        }
        return acc;
    }
    std::vector<Atom> atoms() const override {
        std::vector<Atom> out;
        for (std::size_t i = 0; i < x_.size(); ++i)
            if (fr_[i] - fl_[i] > 1e-14) out.push_back({x_[i], fr_[i] - fl_[i]});
        return out;
    }
    std::string kind() const override { return "tabulated"; }

    std::vector<double> x_, fl_, fr_;
    std::vector<double> cum_;
    double mean_;
};

class ReflectedDist final : public Dist {
  public:
    explicit ReflectedDist(std::shared_ptr<const Dist> base) : b_(std::move(base)) {}
    // F(x) = P(-X <= x) = P(X >= -x) = 1 - F_base((-x)-).
    double cdf(double x) const override { return 1.0 - cdf_left(*b_, -x); }
    double pdf(double x) const override { return b_->pdf(-x); }
    double quantile(double u) const override {
        if (u <= 0.0) return -b_->support_hi();
        if (u >= 1.0) return -b_->support_lo();
        // inf{y : F(y) > u} = -sup{z : F_base(z-) >= 1-u}.
        const double target = 1.0 - u;
        // Right-continuous base quantile at target gives sup{z: F(z-) <= ...};
        // handle flats by querying just below.
        double z = b_->quantile(target);
        if (cdf_left(*b_, z) > target + 1e-15) {
            // Base CDF jumps over the level: the reflected quantile sits at
            // the atom location.
            return -z;
        }
        // Where the base CDF is continuous, F(z) == target and the reflected
        // inverse is -z; a flat of the base CDF maps to a jump here, which the
        // right-continuous convention resolves by the upper endpoint.
        return -z;
    }
    double mean() const override { return -b_->mean(); }
    double support_lo() const override { return -b_->support_hi(); }
    double support_hi() const override { return -b_->support_lo(); }
    double partial_moment(double y) const override {
        // int_{(-inf,y]} x dF(x) = -int_{[-y, inf)} z dF_base(z)
        //                        = partial_base((-y)-) - mean_base.
        return pm_left(*b_, -y) - b_->mean();
    }
    std::vector<Atom> atoms() const override {
        auto as = b_->atoms();
        std::vector<Atom> out;
        for (auto it = as.rbegin(); it != as.rend(); ++it) out.push_back({-it->x, it->mass});
        return out;
    }
    std::string kind() const override { return "reflected:" + b_->kind(); }

  private:
    static double cdf_left(const Dist& d, double x) {
        // Left limit of the CDF: subtract the atom at x if present.
        double f = d.cdf(x);
        for (const auto& a : d.atoms())
            if (a.x == x) f -= a.mass;
        return f;
    }
    static double pm_left(const Dist& d, double x) {
        double m = d.partial_moment(x);
        for (const auto& a : d.atoms())
            if (a.x == x) m -= a.x * a.mass;
        return m;
    }
    std::shared_ptr<const Dist> b_;
};

} // namespace

Marginal::Marginal(std::shared_ptr<const Dist> d) : d_(std::move(d)) {
    if (!std::isfinite(d_->mean())) throw NonFiniteMean("marginal mean is not finite");
}

Marginal Marginal::normal(double mean, double sd) {
    return Marginal(std::make_shared<NormalDist>(mean, sd));
}
Marginal Marginal::lognormal(double log_mean, double log_var) {
    return Marginal(std::make_shared<LognormalDist>(log_mean, log_var));
}
Marginal Marginal::uniform(double a, double b) {
    return Marginal(std::make_shared<UniformDist>(a, b));
}
Marginal Marginal::mixture(std::vector<Marginal> components, std::vector<double> weights) {
    return Marginal(std::make_shared<MixtureDist>(std::move(components), std::move(weights)));
}
Marginal Marginal::point_mass(double x) { return Marginal(std::make_shared<PointMassDist>(x)); }

Marginal Marginal::tabulated(std::vector<double> xs, std::vector<double> cdf) {
    if (xs.size() != cdf.size() || xs.size() < 2) throw Error("tabulated: need >= 2 nodes");
    // Split duplicated x nodes into left/right CDF values (atoms).
    std::vector<double> x, fl, fr;
    std::size_t i = 0;
    while (i < xs.size()) {
        std::size_t j = i;
        while (j + 1 < xs.size() && xs[j + 1] == xs[i]) ++j;
        x.push_back(xs[i]);
        fl.push_back(cdf[i]);
        fr.push_back(cdf[j]);
        i = j + 1;
    }
    return Marginal(std::make_shared<TabulatedDist>(std::move(x), std::move(fl), std::move(fr)));
}

Marginal Marginal::gaussian_smoothed(const Marginal& m, double sigma, int n_components) {
    if (!(sigma > 0.0)) throw Error("gaussian_smoothed: sigma must be positive");
    std::vector<Marginal> comps;
    std::vector<double> w;
    const int n = std::max(2, n_components);
    for (int k = 0; k < n; ++k) {
        const double u0 = static_cast<double>(k) / n, u1 = static_cast<double>(k + 1) / n;
        const double q0 = m.quantile(u0), q1 = m.quantile(u1);
        const double mass = 1.0 / n;
        double centre = n * (m.partial_moment(std::isfinite(q1) ? q1 : kInf) -
                             m.partial_moment(std::isfinite(q0) ? q0 : -kInf));
        if (!std::isfinite(centre)) centre = m.mean();
        comps.push_back(Marginal::normal(centre, sigma));
        w.push_back(mass);
    }
    return mixture(std::move(comps), std::move(w));
}

double Marginal::integral_quantile(double w) const {
    if (w <= 0.0) return 0.0;
    if (w >= 1.0) return mean();
    const double q = quantile(w);
    if (!std::isfinite(q)) return mean(); // only hit when w rounds to 1
    return partial_moment(q) - q * (cdf(q) - w);
}

double Marginal::second_moment() const {
    // E X^2 = 2 int_0^inf k (1-F(k)) dk - 2 int_{-inf}^0 k F(k) dk; computed
    // instead from the quantile representation with adaptive quadrature.
    auto f = [this](double u) {
        const double q = quantile(u);
        return q * q;
    };
    const double eps = 1e-10;
    return adaptive_simpson(f, eps, 1.0 - eps, 1e-9, 1e-12);
}

Marginal Marginal::reflected() const {
    return Marginal(std::make_shared<ReflectedDist>(d_));
}

Marginal implied_from_calls(const std::vector<double>& strikes,
                            const std::vector<double>& call_prices) {
    const std::size_t n = strikes.size();
    if (n < 4 || call_prices.size() != n)
        throw ArbitrageInInput("need at least 4 strikes with matching prices");
    const double scale = std::max(1.0, std::fabs(call_prices.front()));
    const double tol = 1e-9 * scale;
    std::vector<double> slope(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (strikes[i + 1] <= strikes[i]) throw ArbitrageInInput("strikes must increase");
        slope[i] = (call_prices[i + 1] - call_prices[i]) / (strikes[i + 1] - strikes[i]);
        if (slope[i] > tol || slope[i] < -1.0 - tol)
            throw ArbitrageInInput("call slopes must lie in [-1, 0]");
        if (i > 0 && slope[i] < slope[i - 1] - tol)
            throw ArbitrageInInput("call prices must be convex in strike");
    }
    // CDF F = 1 + C' sampled at interval midpoints, monotonized, clamped.
    // A slope jump carrying most of the probability is kept as an exact atom
    // at the strike rather than smeared across the midpoint gap.
    std::vector<double> xs, fs;
    auto push = [&](double x, double f) {
        f = std::clamp(f, 0.0, 1.0);
        if (!fs.empty()) f = std::max(f, fs.back());
        xs.push_back(x);
        fs.push_back(f);
    };
    push(strikes.front(), 1.0 + slope.front());
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (i > 0 && slope[i] - slope[i - 1] >= 0.9) {
            push(strikes[i], 1.0 + slope[i - 1]);
            push(strikes[i], 1.0 + slope[i]); // duplicated node = atom
        }
        push(0.5 * (strikes[i] + strikes[i + 1]), 1.0 + slope[i]);
    }
    push(strikes.back(), 1.0);
    if (fs.front() > 0.0) {
        // Mass below the first strike is unresolved by the data; represent it
        // as an atom at the first node.
        std::vector<double> x2{xs.front()};
        std::vector<double> f2{0.0};
        x2.insert(x2.end(), xs.begin(), xs.end());
        f2.insert(f2.end(), fs.begin(), fs.end());
        xs = std::move(x2);
        fs = std::move(f2);
    }
    return Marginal::tabulated(std::move(xs), std::move(fs));
}

} // namespace mot
