#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace mot {

// Ordered union of disjoint half-open intervals (lo, hi], kept in symbolic
// form so that repeated subtraction in the step construction cannot leak
// measure-zero slivers.
class IntervalSet {
  public:
    struct Piece {
        double lo, hi; // (lo, hi]
    };

    IntervalSet() = default;
    explicit IntervalSet(std::vector<Piece> pieces) : pieces_(std::move(pieces)) { normalize(); }

    static IntervalSet single(double lo, double hi) {
        IntervalSet s;
        if (hi > lo) s.pieces_.push_back({lo, hi});
        return s;
    }

    const std::vector<Piece>& pieces() const { return pieces_; }
    bool empty() const { return pieces_.empty(); }
    std::size_t size() const { return pieces_.size(); }

    double lower() const { return pieces_.front().lo; }
    double upper() const { return pieces_.back().hi; }

    double total_length() const {
        double s = 0.0;
        for (const auto& p : pieces_) s += p.hi - p.lo;
        return s;
    }

    bool contains(double x) const {
        for (const auto& p : pieces_)
            if (x > p.lo && x <= p.hi) return true;
        return false;
    }

    // Index of the piece containing x, or -1.
    int piece_index(double x) const {
        for (std::size_t i = 0; i < pieces_.size(); ++i)
            if (x > pieces_[i].lo && x <= pieces_[i].hi) return static_cast<int>(i);
        return -1;
    }

    // Restrict to (-inf, hi].
    IntervalSet clipped_above(double hi) const {
        IntervalSet out;
        for (const auto& p : pieces_) {
            if (p.lo >= hi) break;
            out.pieces_.push_back({p.lo, std::min(p.hi, hi)});
        }
        return out;
    }

    IntervalSet intersected(double lo, double hi) const {
        IntervalSet out;
        for (const auto& p : pieces_) {
            const double a = std::max(p.lo, lo);
            const double b = std::min(p.hi, hi);
            if (b > a) out.pieces_.push_back({a, b});
        }
        return out;
    }

    // Remove the open-ish zone (lo, hi); endpoint bookkeeping stays exact
    // because pieces keep their original endpoints outside the cut.
    IntervalSet subtracted(double lo, double hi) const {
        IntervalSet out;
        for (const auto& p : pieces_) {
            if (p.hi <= lo || p.lo >= hi) {
                out.pieces_.push_back(p);
                continue;
            }
            if (p.lo < lo) out.pieces_.push_back({p.lo, std::min(p.hi, lo)});
            if (p.hi > hi) out.pieces_.push_back({std::max(p.lo, hi), p.hi});
        }
        return out;
    }

    // Map a flattened coordinate s in [0, total_length] to a point of the set,
    // and back. Used to bisect monotone functions across gaps.
    double point_at(double s) const {
        for (const auto& p : pieces_) {
            const double len = p.hi - p.lo;
            if (s <= len) return p.lo + s;
            s -= len;
        }
        return pieces_.empty() ? 0.0 : pieces_.back().hi;
    }

    double coord_of(double x) const {
        double s = 0.0;
        for (const auto& p : pieces_) {
            if (x >= p.hi) {
                s += p.hi - p.lo;
                continue;
            }
            if (x > p.lo) s += x - p.lo;
            break;
        }
        return s;
    }

  private:
    void normalize() {
        std::sort(pieces_.begin(), pieces_.end(),
                  [](const Piece& a, const Piece& b) { return a.lo < b.lo; });
        std::vector<Piece> merged;
        for (const auto& p : pieces_) {
            if (p.hi <= p.lo) continue;
            if (!merged.empty() && p.lo <= merged.back().hi) {
                merged.back().hi = std::max(merged.back().hi, p.hi);
            } else {
                merged.push_back(p);
            }
        }
        pieces_ = std::move(merged);
    }

    std::vector<Piece> pieces_;
};

} // namespace mot
