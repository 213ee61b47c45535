#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pertlat/curve.hpp"
#include "pertlat/realization.hpp"

namespace pertlat {

// Greedy stable matching on a 1d window: iteratively match mutually
// closest (site, point) pairs. Ties in distance go to the left-most site;
// a site equidistant to two points takes the left point; coincident
// positions fall back to label order. The output has no blocking pairs
// under these rules.
struct StableMatchInstance {
    int64_t core_half_width = 0;
    std::vector<double> matched_pos;   // per extended site index
    std::vector<int64_t> matched_label;
    std::vector<double> distance;

    // match distance of the central site
    double center_distance = 0.0;
};

StableMatchInstance greedy_stable_match(const WindowRealization& real);

// Blocking pair audit: (v, x) with |v-x| < |v-M(v)| and |v-x| < |M^-1(x)-x|.
// Returns the number of blocking pairs found (0 for a stable matching).
size_t count_blocking_pairs(const WindowRealization& real, const StableMatchInstance& match);

// The infinite process restricted to [-W - 1/2, W + 1/2): points of the
// window sites censored to the region, plus the points of far sites that
// land inside, sampled exactly (direct Bernoullis out to 2W, then a
// Poisson-thinned tail whose per-site occupancy is exactly Bernoulli(p_v)).
// The region holds one point per unit length in expectation, so matching
// against it carries none of the systematic deficit a plain window has
// when tails are heavy.
struct Region1D {
    int64_t half_width = 0;     // sites are -W .. W
    std::vector<double> points; // positions inside the region
};
Region1D sample_region_1d(const PerturbationLaw& law, int64_t half_width, uint64_t seed);

// Greedy stable matching between explicit 1d item sets. Sites and points
// may have unequal counts; leftovers stay unmatched.
struct ItemsMatch {
    std::vector<int32_t> site_to_point; // -1 when unmatched
    std::vector<int32_t> point_to_site;
    std::vector<double> site_distance;  // +inf when unmatched
};
ItemsMatch greedy_match_items(std::span<const double> site_pos,
                              std::span<const double> point_pos);
size_t count_blocking_pairs_items(std::span<const double> site_pos,
                                  std::span<const double> point_pos, const ItemsMatch& match);

struct RegionMatch1D {
    Region1D region;
    ItemsMatch match;
    double center_distance = 0.0;
    bool center_matched = false;
};
RegionMatch1D match_region_1d(const PerturbationLaw& law, int64_t half_width, uint64_t seed);

// F(r) = r - #(points of the window in [0, r)). The audit bounds the
// chance that points from beyond the window could enter [0, r): the
// nearest unseen site carries at most tail_probability(W + 1 - r), which
// must stay below leak_tolerance (per site).
double discrepancy_F(const WindowRealization& real, double r, double leak_tolerance = 1e-9);

// Var(Pi[0,t)) as the exact sum over sites of p_k (1 - p_k). For the
// polynomial law the two tails are telescoped in closed form and the
// remaining sum of squares is finished with an integral tail whose error
// is below 1e-8.
double variance_exact(const PerturbationLaw& law, int64_t t);

struct TailCurveM0 {
    TailCurve curve;            // empirical P(|M(0)| > r)
    std::vector<double> samples; // per-trial |M(0)|
    int64_t flagged = 0;         // trials with |M(0)| > L/2
};

// Monte Carlo over independent windows: match, read the center site's
// distance. Margins retry-double while |M(0)| >= margin (up to 3 times);
// throws WindowTooSmall when more than 0.1% of trials stay flagged.
TailCurveM0 tail_curve_M0(const PerturbationLaw& law, int64_t core_half_width, int64_t trials,
                          uint64_t seed, const std::vector<double>& r_grid, int threads = 0,
                          int64_t initial_margin = -1);

struct MomentCurve {
    std::vector<double> t;
    std::vector<double> value; // E[Z ^ t] / t^{(1-alpha)/2}
    std::vector<double> lo, hi; // bootstrap 95% band
    double slope = 0.0;         // log-log fit of value vs t
    std::string verdict;        // bounded-below | decaying
};

// Normalized truncated-mean diagnostic. "bounded-below" needs the 95%
// lower band positive across the grid and a log-log slope above
// -(1-alpha)/4 (half the decay a finite-moment law would show).
MomentCurve truncated_moment_curve(const std::vector<double>& samples, double alpha,
                                   const std::vector<double>& t_grid, int bootstrap = 1000,
                                   uint64_t seed = 1);

} // namespace pertlat
