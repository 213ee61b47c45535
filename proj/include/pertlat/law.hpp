#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pertlat/rng.hpp"

namespace pertlat {

enum class LawKind { Gaussian, PolyRadial, PolyCoord, PointMass };

// A perturbation distribution on R^d together with its exact
// distributional functions. All tail/avoidance probabilities use the
// l-infinity norm. Instances are immutable and safe to share across
// threads; samplers draw from caller-provided per-site streams.
//
// Polynomial laws put the radial part on [1,inf) with P(R >= r) = r^-alpha,
// so the two-sided coordinate tail is exactly min(1, r^-alpha).
class PerturbationLaw {
public:
    static PerturbationLaw gaussian(double sigma, int dim);
    static PerturbationLaw poly_radial(double alpha, int dim);
    static PerturbationLaw poly_coord(double alpha, int dim);
    static PerturbationLaw point_mass(std::vector<double> offset);

    // Grammar: gaussian:sigma=1.0 | poly-radial:alpha=2.0 |
    // poly-coord:alpha=0.5 | pointmass:0,0
    static PerturbationLaw parse(std::string_view spec, int dim);

    int dim() const { return dim_; }
    LawKind kind() const { return kind_; }
    double sigma() const { return sigma_; }
    double alpha() const { return alpha_; }
    const std::vector<double>& offset() const { return offset_; }
    std::string to_string() const;

    // Draws xi into out (size dim). Stream consumption order is fixed.
    void sample(SiteRng& rng, std::span<double> out) const;

    // p(r) = P(||xi||_inf >= r)
    double tail_probability(double r) const;
    double log_tail_probability(double r) const;

    // P(v + xi outside [-r, r]^d), exact from the law's CDF.
    double box_avoidance_probability(std::span<const double> v, double r) const;

    // E[||xi|| 1{||xi|| >= r}]; throws DivergentMean when alpha <= 1.
    double truncated_mean(double r) const;

    // Smallest r with p(r) <= q (by bisection on the monotone tail).
    double tail_inverse(double q) const;

    // True when the coordinates are independent so per-coordinate CDFs
    // factor d-dimensional probabilities (Gaussian, PolyCoord, PointMass,
    // and PolyRadial in d=1 where it coincides with PolyCoord).
    bool per_coordinate() const;

    // Marginal of one coordinate; only valid when per_coordinate().
    double coord_cdf(double x) const;
    double coord_quantile(double p) const;
    double coord_interval_probability(double lo, double hi) const;
    double coord_exclusion_probability(double lo, double hi) const; // P(xi_1 outside [lo,hi])
    double coord_log_tail_below(double x) const;                    // log P(xi_1 <= x)
    double coord_log_tail_above(double x) const;                    // log P(xi_1 >= x)
    double coord_abs_tail(double r) const;                          // P(|xi_1| >= r)

private:
    PerturbationLaw() = default;

    double radial_tail_d2(double r) const;       // P(||R u||_inf >= r), d=2
    double radial_box_mass_d2(std::span<const double> lo, std::span<const double> hi) const;

    LawKind kind_ = LawKind::PointMass;
    int dim_ = 1;
    double sigma_ = 0.0;
    double alpha_ = 0.0;
    std::vector<double> offset_;
    double minf_moment_alpha_ = 0.0; // E[||u||_inf^alpha] for radial d=2
};

// log(erfc(z)), usable far beyond the underflow range of erfc itself.
double log_erfc(double z);
double logaddexp(double a, double b);

} // namespace pertlat
