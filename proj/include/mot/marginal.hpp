#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mot/errors.hpp"
#include "mot/math.hpp"

namespace mot {

struct Atom {
    double x;
    double mass;
};

// A one-dimensional probability law. CDF is right-continuous; quantile is the
// right-continuous inverse inf{y : F(y) > u}, with quantile = +inf on (1,inf)
// and -inf on (-inf,0). partial_moment(y) is the truncated first moment
// over (-inf, y], which every family exposes in closed form.
class Dist {
  public:
    virtual ~Dist() = default;
    virtual double cdf(double x) const = 0;
    virtual double pdf(double x) const = 0;
    virtual double quantile(double u) const = 0;
    virtual double mean() const = 0;
    virtual double support_lo() const = 0;
    virtual double support_hi() const = 0;
    virtual double partial_moment(double y) const = 0;
    virtual std::vector<Atom> atoms() const { return {}; }
    virtual std::string kind() const = 0;
};

class Marginal {
  public:
    Marginal() = default;
    explicit Marginal(std::shared_ptr<const Dist> d);

    static Marginal normal(double mean, double sd);
    static Marginal lognormal(double log_mean, double log_var);
    static Marginal uniform(double a, double b);
    static Marginal mixture(std::vector<Marginal> components, std::vector<double> weights);
    static Marginal point_mass(double x);
    // Piecewise-linear CDF through (x_k, cdf_k); jumps may be encoded by
    // repeating an x with two cdf values.
    static Marginal tabulated(std::vector<double> xs, std::vector<double> cdf);
    // Gaussian-kernel smoothing: an n-component normal mixture centred at the
    // conditional-mean quantization atoms. Approximation entry point for
    // measures that violate the atomless requirement; no accuracy guarantee.
    static Marginal gaussian_smoothed(const Marginal& m, double sigma, int n_components = 256);

    double cdf(double x) const { return d_->cdf(x); }
    double pdf(double x) const { return d_->pdf(x); }
    double quantile(double u) const {
        if (u < 0.0) return -kInf;
        if (u > 1.0) return kInf;
        return d_->quantile(u);
    }
    double mean() const { return d_->mean(); }
    double support_lo() const { return d_->support_lo(); }
    double support_hi() const { return d_->support_hi(); }
    double partial_moment(double y) const { return d_->partial_moment(y); }
    std::vector<Atom> atoms() const { return d_->atoms(); }
    bool has_atoms() const { return !d_->atoms().empty(); }
    std::string kind() const { return d_->kind(); }

    // E[(X - k)^+], in closed form from the partial moment.
    double call_price(double k) const {
        return mean() - partial_moment(k) - k * (1.0 - cdf(k));
    }

    // Integral of the quantile over (0, w]; handles atoms and flats of F.
    double integral_quantile(double w) const;

    // Second moment via the partial-moment identity E X^2 = 2*int (x-k)^+ dk
    // is avoided; families integrate x^2 f numerically where needed, except
    // normal/lognormal/uniform/mixture which have this in closed form.
    double second_moment() const;

    // Law of -X.
    Marginal reflected() const;

    const Dist& dist() const { return *d_; }
    std::shared_ptr<const Dist> ptr() const { return d_; }

  private:
    std::shared_ptr<const Dist> d_;
};

// Breeden-Litzenberger: recover a tabulated marginal from a call-price curve.
// Strikes must be increasing, prices convex and nonincreasing with slopes in
// [-1, 0]; throws ArbitrageInInput otherwise.
Marginal implied_from_calls(const std::vector<double>& strikes,
                            const std::vector<double>& call_prices);

} // namespace mot
