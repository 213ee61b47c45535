#pragma once

#include <cstdint>
#include <vector>

#include "pertlat/curve.hpp"
#include "pertlat/law.hpp"

namespace pertlat {

// log h(r) for h(r) = prod_v P(v + xi not in B_r), carried in log space.
// Per-coordinate laws: the grid sum over [-K, K]^d is augmented by a
// first-order far-field correction obtained from the exactly factorized
// outside mass (1d tails refined far beyond the grid); `bound` is the
// rigorous remainder: second-order terms of -log(1-p) plus the residual
// 1d-tail uncertainty. K grows until bound <= tolerance.
// Radial d=2: grid sum with a shell-wise remainder bound and no
// correction; tight tolerances may be genuinely unreachable there
// (ToleranceUnreachable).
struct HoleExact {
    double log_h = 0.0;
    double bound = 0.0;  // |true log h - log_h| <= bound
    bool zero = false;   // h is exactly 0 (a factor vanishes)
    int64_t grid_half_width = 0;
};
HoleExact hole_probability_exact(const PerturbationLaw& law, double r, double tolerance = 1e-6);

struct HoleMc {
    double estimate = 0.0;
    double stderr_ = 0.0;
    bool all_misses = false; // no trial produced an empty ball
    int64_t trials = 0;
};
HoleMc hole_probability_mc(const PerturbationLaw& law, double r, int64_t trials, uint64_t seed,
                           int threads = 0);

// rho(r) = log h(r) / (r^d log p(r)); the sandwich holds when rho stays in
// a bounded positive window.
struct HoleBoundsReport {
    std::vector<double> r;
    std::vector<double> rho;
    double rho_min = 0.0;
    double rho_max = 0.0;
    bool pass = false;
};
HoleBoundsReport hole_bounds_check(const PerturbationLaw& law, const std::vector<double>& r_grid,
                                   double ratio_cap = 10.0);

// (Int): int_r^inf p(t) dt <= C r p(r).
struct IntCheckReport {
    std::vector<double> r;
    std::vector<double> ratio;
    bool divergent = false; // alpha <= 1: the integral diverges
    double max_ratio = 0.0;
    bool pass = false;
};
IntCheckReport assumption_int_check(const PerturbationLaw& law, const std::vector<double>& r_grid);

// (Reg): sup_r log p(kr) / log p(r) finite for each k.
struct RegCheckReport {
    std::vector<double> k;
    std::vector<double> max_ratio;         // over the grid
    std::vector<double> max_ratio_refined; // over a doubled grid
    bool pass = false;
};
RegCheckReport assumption_reg_check(const PerturbationLaw& law, const std::vector<double>& k_list,
                                    const std::vector<double>& r_grid);

// Monte Carlo tail of the cover radius at the center site against h(r)^c.
struct RadiusTailReport {
    TailCurve curve;             // empirical P(R_0 > r)
    std::vector<double> log_h;   // exact log h(r) on the grid
    double c_star = 0.0;         // min over resolvable r of log p-hat / log h
    bool unresolvable = false;   // nothing resolvable beyond the first point
    bool pass = false;           // c* > 0 and curve <= h^{c*/2} where resolvable
    int64_t retries = 0;
};
RadiusTailReport radius_tail_vs_hole(const PerturbationLaw& law, int64_t core_half_width,
                                     int64_t trials, uint64_t seed,
                                     const std::vector<double>& r_grid, int threads = 0);

// Cover-neighborhood matching distance at the center site over trials.
struct MatchTailReport {
    TailCurve curve; // empirical P(||M(0)|| > r)
    int64_t retries = 0;
    double max_distance = 0.0;
};
MatchTailReport match_tail_curve(const PerturbationLaw& law, int64_t core_half_width,
                                 int64_t trials, uint64_t seed, const std::vector<double>& r_grid,
                                 int threads = 0);

enum class FitTransform {
    LogLog,    // log r vs log value
    LogNegLog, // log r vs log(-log value)   (value a probability)
    LogNeg,    // log r vs log(-value)       (value already a log-probability)
};

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    size_t points_used = 0;
};
// Ordinary least squares on the transformed coordinates; throws
// DegenerateFit with fewer than 3 usable points.
FitResult fit_loglog(const TailCurve& curve, FitTransform transform);
FitResult fit_xy(const std::vector<double>& x, const std::vector<double>& y);

// Least squares of y ~ scale * x^exponent + offset, exponent profiled by
// golden-section search. The right estimator when the leading power law
// carries an additive lower-order term, which plain log-log OLS absorbs
// into a biased slope.
struct PowerOffsetFit {
    double exponent = 0.0;
    double scale = 0.0;
    double offset = 0.0;
    double rms = 0.0;
};
PowerOffsetFit fit_power_offset(const std::vector<double>& x, const std::vector<double>& y,
                                double s_lo = 0.05, double s_hi = 1.5);

} // namespace pertlat
