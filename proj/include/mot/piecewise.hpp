#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <vector>

namespace mot {

// Piecewise-linear function on sorted nodes. Repeated x-nodes encode a jump;
// evaluation is right-continuous there.
class PiecewiseLinear {
  public:
    PiecewiseLinear() = default;
    PiecewiseLinear(std::vector<double> xs, std::vector<double> vs)
        : xs_(std::move(xs)), vs_(std::move(vs)) {
        assert(xs_.size() == vs_.size());
    }

    bool empty() const { return xs_.empty(); }
    const std::vector<double>& xs() const { return xs_; }
    const std::vector<double>& values() const { return vs_; }
    double x_front() const { return xs_.front(); }
    double x_back() const { return xs_.back(); }

    double operator()(double x) const {
        if (xs_.empty()) return 0.0;
        if (x <= xs_.front()) return vs_.front();
        if (x >= xs_.back()) return vs_.back();
        // First node strictly greater than x.
        auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        std::size_t hi = static_cast<std::size_t>(it - xs_.begin());
        std::size_t lo = hi - 1;
        // Right-continuity across duplicated nodes.
        if (xs_[lo] == x) {
            while (lo + 1 < xs_.size() && xs_[lo + 1] == x) ++lo;
            return vs_[lo];
        }
        const double h = xs_[hi] - xs_[lo];
        if (h <= 0.0) return vs_[hi];
        const double w = (x - xs_[lo]) / h;
        return vs_[lo] + w * (vs_[hi] - vs_[lo]);
    }

  private:
    std::vector<double> xs_;
    std::vector<double> vs_;
};

// Cubic Hermite curve: nodes carry both value and derivative, which keeps
// derivative queries exact at nodes (the hedge first-order conditions are
// imposed there).
class HermiteCurve {
  public:
    HermiteCurve() = default;
    HermiteCurve(std::vector<double> xs, std::vector<double> vs, std::vector<double> ds)
        : xs_(std::move(xs)), vs_(std::move(vs)), ds_(std::move(ds)) {
        assert(xs_.size() == vs_.size() && vs_.size() == ds_.size());
    }

    bool empty() const { return xs_.empty(); }
    const std::vector<double>& xs() const { return xs_; }
    const std::vector<double>& values() const { return vs_; }
    const std::vector<double>& derivs() const { return ds_; }

    double value(double x) const { return eval(x).first; }
    double deriv(double x) const { return eval(x).second; }

    std::pair<double, double> eval(double x) const {
        if (xs_.empty()) return {0.0, 0.0};
        if (x <= xs_.front())
            return {vs_.front() + (x - xs_.front()) * ds_.front(), ds_.front()};
        if (x >= xs_.back()) return {vs_.back() + (x - xs_.back()) * ds_.back(), ds_.back()};
        auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        std::size_t hi = static_cast<std::size_t>(it - xs_.begin());
        std::size_t lo = hi - 1;
        const double h = xs_[hi] - xs_[lo];
        if (h <= 0.0) return {vs_[hi], ds_[hi]};
        const double t = (x - xs_[lo]) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        const double v = h00 * vs_[lo] + h10 * h * ds_[lo] + h01 * vs_[hi] + h11 * h * ds_[hi];
        const double dh00 = (6 * t2 - 6 * t) / h, dh10 = 3 * t2 - 4 * t + 1;
        const double dh01 = (-6 * t2 + 6 * t) / h, dh11 = 3 * t2 - 2 * t;
        const double d = dh00 * vs_[lo] + dh10 * ds_[lo] + dh01 * vs_[hi] + dh11 * ds_[hi];
        return {v, d};
    }

  private:
    std::vector<double> xs_;
    std::vector<double> vs_;
    std::vector<double> ds_;
};

} // namespace mot
