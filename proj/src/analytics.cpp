#include "pertlat/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pertlat/cover.hpp"
#include "pertlat/errors.hpp"
#include "pertlat/matching.hpp"
#include "pertlat/parallel.hpp"
#include "pertlat/quadrature.hpp"
#include "pertlat/realization.hpp"
#include "pertlat/rng.hpp"

namespace pertlat {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct KahanSum {
    double sum = 0.0, carry = 0.0;
    void add(double x) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

// Per-coordinate ingredients for the shifted interval [-r - k, r - k].
struct CoordTable {
    std::vector<double> log_q;   // log P(xi_1 inside), index k + K
    std::vector<double> log_eps; // log P(xi_1 outside)
    double sum_q = 0.0;          // sum of q over |k| <= K
    double max_q = 0.0;
};

CoordTable build_coord_table(const PerturbationLaw& law, double r, int64_t K) {
    CoordTable t;
    t.log_q.resize(static_cast<size_t>(2 * K + 1));
    t.log_eps.resize(static_cast<size_t>(2 * K + 1));
    KahanSum sq;
    for (int64_t k = -K; k <= K; ++k) {
        double lo = -r - static_cast<double>(k);
        double hi = r - static_cast<double>(k);
        double eps = law.coord_exclusion_probability(lo, hi);
        double le;
        if (eps > 1e-290) {
            le = std::log(eps);
        } else {
            le = logaddexp(law.coord_log_tail_below(lo), law.coord_log_tail_above(hi));
            eps = std::exp(le);
        }
        size_t idx = static_cast<size_t>(k + K);
        t.log_eps[idx] = le;
        t.log_q[idx] = eps >= 1.0 ? kNegInf : std::log1p(-eps);
        double q = eps >= 1.0 ? 0.0 : 1.0 - eps;
        sq.add(q);
        t.max_q = std::max(t.max_q, q);
    }
    t.sum_q = sq.sum;
    return t;
}

double coord_q(const PerturbationLaw& law, double r, int64_t k) {
    return law.coord_interval_probability(-r - static_cast<double>(k),
                                          r - static_cast<double>(k));
}

// h = 0 for a point mass iff some lattice site lands its point in the ball.
bool point_mass_hits(const PerturbationLaw& law, double r) {
    for (int j = 0; j < law.dim(); ++j) {
        double off = law.offset()[static_cast<size_t>(j)];
        if (std::ceil(-r - off) > std::floor(r - off)) return false;
    }
    return true;
}

HoleExact hole_exact_per_coordinate(const PerturbationLaw& law, double r, double tolerance) {
    const int d = law.dim();
    int64_t K = static_cast<int64_t>(std::ceil(r)) + 64;
    const int64_t k_cap = d == 1 ? (int64_t{1} << 26) : (d == 2 ? 16384 : 512);

    for (;; K = K + K / 2 + 16) {
        if (K > k_cap)
            throw ToleranceUnreachable("hole_probability_exact: tolerance " +
                                       std::to_string(tolerance) + " unreachable at K cap");
        CoordTable table = build_coord_table(law, r, K);

        // grid sum of log(1 - p_v) over the box [-K, K]^d
        KahanSum grid;
        bool zero = false;
        const int64_t side = 2 * K + 1;
        std::vector<int64_t> v(static_cast<size_t>(d), 0);
        size_t cells = 1;
        for (int j = 0; j < d; ++j) cells *= static_cast<size_t>(side);
        for (size_t cell = 0; cell < cells && !zero; ++cell) {
            size_t rest = cell;
            double s = 0.0;
            for (int j = d - 1; j >= 0; --j) {
                size_t c = rest % static_cast<size_t>(side);
                rest /= static_cast<size_t>(side);
                v[static_cast<size_t>(j)] = static_cast<int64_t>(c);
                s += table.log_q[c];
            }
            double log_factor;
            if (s == 0.0) {
                // every coordinate's exclusion underflowed: a_v ~ sum eps
                double acc = kNegInf;
                for (int j = 0; j < d; ++j)
                    acc = logaddexp(acc, table.log_eps[static_cast<size_t>(v[static_cast<size_t>(j)])]);
                log_factor = acc;
            } else {
                double inside = -std::expm1(s); // 1 - p_v
                log_factor = inside > 0.0 ? std::log(inside) : kNegInf;
            }
            if (log_factor == kNegInf) {
                zero = true;
                break;
            }
            grid.add(log_factor);
        }
        if (zero) return {kNegInf, 0.0, true, K};

        // refine the 1d outside mass far beyond the grid
        int64_t K1 = std::max<int64_t>(4 * K, 65536);
        KahanSum tail_1d;
        for (int64_t k = K + 1; k <= K1; ++k) {
            double q_hi = coord_q(law, r, k);
            double q_lo = coord_q(law, r, -k);
            tail_1d.add(q_hi + q_lo);
            if (q_hi + q_lo < 1e-300 && k > K + 8) {
                K1 = k;
                break;
            }
        }
        // mass past K1: midpoint integral of q(k) = ((k-r)^-a - (k+r)^-a)/2
        // in closed form for the polynomial marginal (the Euler-Maclaurin
        // remainder is the stated error); Gaussian tails just get the
        // covering bound, which is already negligible after the early break.
        double far_value = 0.0, far_err;
        if (law.kind() == LawKind::PolyCoord || law.kind() == LawKind::PolyRadial) {
            double alpha = law.alpha();
            double x0 = static_cast<double>(K1) + 0.5;
            double one_side =
                alpha == 1.0
                    ? 0.5 * std::log((x0 + r) / (x0 - r))
                    : 0.5 * (std::pow(x0 + r, 1.0 - alpha) - std::pow(x0 - r, 1.0 - alpha)) /
                          (1.0 - alpha);
            far_value = 2.0 * one_side;
            far_err = alpha * (alpha + 1.0) * r / 3.0 * std::pow(x0 - r, -alpha - 2.0);
        } else {
            far_err = (std::floor(2.0 * r) + 1.0) *
                      (std::exp(law.coord_log_tail_below(-(static_cast<double>(K1 + 1) - r))) +
                       std::exp(law.coord_log_tail_above(static_cast<double>(K1 + 1) - r)));
        }
        double s_grid = table.sum_q;
        double s_inf = s_grid + tail_1d.sum + far_value;
        double u1 = far_err;

        double powd = 1.0, powd_grid = 1.0;
        for (int j = 0; j < d; ++j) {
            powd *= s_inf;
            powd_grid *= s_grid;
        }
        double outside = powd - powd_grid;

        double q_out = coord_q(law, r, K + 1);
        double x_max = q_out;
        for (int j = 1; j < d; ++j) x_max *= table.max_q;
        double second_order =
            x_max < 0.5 ? 0.5 * x_max / (1.0 - x_max) * outside : std::numeric_limits<double>::infinity();
        double slop = static_cast<double>(d) * std::pow(s_inf + u1, d - 1) * u1;
        // compensated-summation round-off, ~2 eps per unit of |log h|
        double bound = second_order + slop + 8e-16 * (1.0 + std::abs(grid.sum));

        if (bound <= tolerance)
            return {grid.sum - outside, bound, false, K};
    }
}

HoleExact hole_exact_radial_d2(const PerturbationLaw& law, double r, double tolerance) {
    const double alpha = law.alpha();
    int64_t K = static_cast<int64_t>(std::ceil(r)) + 64;
    const int64_t k_cap = 4096;

    for (;; K = K + K / 2 + 16) {
        if (K > k_cap)
            throw ToleranceUnreachable(
                "hole_probability_exact: radial d=2 shell bound cannot reach tolerance " +
                std::to_string(tolerance) + "; pass a looser tolerance or smaller r");

        // remainder bound from shells beyond K (no correction applied):
        // P(xi in B_r - v) <= angular fraction * radial interval mass
        double rem = 0.0;
        const int64_t m_hi = K + 2000000;
        for (int64_t m = K + 1; m <= m_hi; ++m) {
            double gap = static_cast<double>(m) - r;
            double ang = std::min(1.0, r * M_SQRT2 / (2.0 * gap));
            double mass = std::min(std::pow(gap, -alpha),
                                   2.0 * M_SQRT2 * alpha * r * std::pow(gap, -alpha - 1.0));
            rem += 8.0 * static_cast<double>(m) * ang * mass;
        }
        // integral comparison past m_hi: shell bound <= 32 alpha r^2 u^{-alpha-1}
        rem += 32.0 * r * r * std::pow(static_cast<double>(m_hi) - r, -alpha);
        double bound = 2.0 * rem + 1e-10;
        if (bound > tolerance) continue;

        KahanSum grid;
        std::vector<double> v(2);
        for (int64_t x = -K; x <= K; ++x)
            for (int64_t y = -K; y <= K; ++y) {
                v[0] = static_cast<double>(x);
                v[1] = static_cast<double>(y);
                double avoid = law.box_avoidance_probability(v, r);
                if (avoid <= 0.0) return {kNegInf, 0.0, true, K};
                grid.add(std::log(avoid));
            }
        return {grid.sum, bound, false, K};
    }
}

} // namespace

HoleExact hole_probability_exact(const PerturbationLaw& law, double r, double tolerance) {
    if (!(r > 0.0)) throw ValidationError("hole_probability_exact: r must be positive");
    if (!(tolerance > 0.0)) throw ValidationError("hole_probability_exact: tolerance > 0");
    if (law.kind() == LawKind::PointMass)
        return point_mass_hits(law, r) ? HoleExact{kNegInf, 0.0, true, 0}
                                       : HoleExact{0.0, 0.0, false, 0};
    if (law.per_coordinate()) return hole_exact_per_coordinate(law, r, tolerance);
    if (law.kind() == LawKind::PolyRadial && law.dim() == 2)
        return hole_exact_radial_d2(law, r, tolerance);
    throw UnsupportedDimension("hole_probability_exact: poly-radial supported for d <= 2");
}

HoleMc hole_probability_mc(const PerturbationLaw& law, double r, int64_t trials, uint64_t seed,
                           int threads) {
    if (!(r > 0.0)) throw ValidationError("hole_probability_mc: r must be positive");
    if (trials < 1) throw ValidationError("hole_probability_mc: trials must be >= 1");
    const int d = law.dim();

    // Near sites are simulated one realization at a time; sites whose
    // in-ball mass is below 1e-12 fold into an exact avoidance factor
    // instead (for heavy tails the literal per-site reach radius would be
    // astronomically wide).
    int64_t reach = static_cast<int64_t>(std::ceil(r)) + 8;
    double far_log_factor = 0.0;
    if (law.per_coordinate()) {
        while (coord_q(law, r, reach + 1) > 1e-12 &&
               reach < static_cast<int64_t>(std::ceil(r)) + 64)
            ++reach;
        if (coord_q(law, r, reach + 1) > 1e-12) {
            // exact outside product over [-reach, reach]^d complement
            CoordTable table = build_coord_table(law, r, reach);
            int64_t K1 = std::max<int64_t>(4 * reach, 65536);
            KahanSum tail_1d;
            for (int64_t k = reach + 1; k <= K1; ++k)
                tail_1d.add(coord_q(law, r, k) + coord_q(law, r, -k));
            double alpha = law.alpha();
            double x0 = static_cast<double>(K1) + 0.5;
            double one_side =
                alpha == 1.0
                    ? 0.5 * std::log((x0 + r) / (x0 - r))
                    : 0.5 * (std::pow(x0 + r, 1.0 - alpha) - std::pow(x0 - r, 1.0 - alpha)) /
                          (1.0 - alpha);
            double s_inf = table.sum_q + tail_1d.sum + 2.0 * one_side;
            double powd = 1.0, powd_grid = 1.0;
            for (int j = 0; j < d; ++j) {
                powd *= s_inf;
                powd_grid *= table.sum_q;
            }
            far_log_factor = -(powd - powd_grid);
        }
    } else {
        reach = static_cast<int64_t>(std::ceil(r + law.tail_inverse(1e-12))) + 1;
        double sites = std::pow(2.0 * static_cast<double>(reach) + 1.0, d);
        if (sites > 4e6)
            throw ToleranceUnreachable(
                "hole_probability_mc: per-site reach needs " + std::to_string(sites) +
                " sites for this law; use a per-coordinate law or smaller r");
    }
    GridWindow win(d, reach);

    // scan sites from the ball outward so most trials exit on an early hit
    std::vector<uint32_t> order(win.size());
    {
        std::vector<std::pair<int64_t, uint32_t>> keyed(win.size());
        std::vector<int64_t> site(static_cast<size_t>(d));
        for (size_t idx = 0; idx < win.size(); ++idx) {
            win.site_at(idx, site);
            int64_t norm = 0;
            for (int j = 0; j < d; ++j) norm = std::max(norm, std::abs(site[static_cast<size_t>(j)]));
            keyed[idx] = {norm, static_cast<uint32_t>(idx)};
        }
        std::sort(keyed.begin(), keyed.end());
        for (size_t i = 0; i < keyed.size(); ++i) order[i] = keyed[i].second;
    }

    std::vector<uint8_t> hole(static_cast<size_t>(trials), 0);
    parallel_for(static_cast<size_t>(trials), threads, [&](size_t i) {
        uint64_t tseed = trial_seed(seed, i);
        std::vector<int64_t> site(static_cast<size_t>(d));
        std::vector<double> xi(static_cast<size_t>(d));
        bool empty = true;
        for (size_t k = 0; k < order.size() && empty; ++k) {
            win.site_at(order[k], site);
            SiteRng rng(tseed, site);
            law.sample(rng, xi);
            bool inside = true;
            for (int j = 0; j < d; ++j) {
                double x = static_cast<double>(site[static_cast<size_t>(j)]) +
                           xi[static_cast<size_t>(j)];
                if (x < -r || x > r) {
                    inside = false;
                    break;
                }
            }
            if (inside) empty = false;
        }
        hole[i] = empty ? 1 : 0;
    });

    int64_t holes = 0;
    for (uint8_t h : hole) holes += h;
    double near_fraction = static_cast<double>(holes) / static_cast<double>(trials);
    double q_far = std::exp(far_log_factor);
    HoleMc out;
    out.trials = trials;
    out.estimate = q_far * near_fraction;
    out.stderr_ = q_far * std::sqrt(std::max(near_fraction * (1.0 - near_fraction), 0.0) /
                                    static_cast<double>(trials));
    out.all_misses = holes == 0;
    return out;
}

HoleBoundsReport hole_bounds_check(const PerturbationLaw& law, const std::vector<double>& r_grid,
                                   double ratio_cap) {
    HoleBoundsReport report;
    report.rho_min = std::numeric_limits<double>::infinity();
    report.rho_max = 0.0;
    double rd = static_cast<double>(law.dim());
    for (double r : r_grid) {
        auto h = hole_probability_exact(law, r);
        double log_p = law.log_tail_probability(r);
        if (h.zero || log_p >= 0.0) continue; // degenerate points excluded
        double rho = h.log_h / (std::pow(r, rd) * log_p);
        report.r.push_back(r);
        report.rho.push_back(rho);
        report.rho_min = std::min(report.rho_min, rho);
        report.rho_max = std::max(report.rho_max, rho);
    }
    report.pass = !report.r.empty() && report.rho_min > 0.0 &&
                  std::isfinite(report.rho_max) &&
                  report.rho_max <= ratio_cap * report.rho_min;
    return report;
}

IntCheckReport assumption_int_check(const PerturbationLaw& law,
                                    const std::vector<double>& r_grid) {
    IntCheckReport report;
    if ((law.kind() == LawKind::PolyCoord || law.kind() == LawKind::PolyRadial) &&
        law.alpha() <= 1.0) {
        report.divergent = true;
        report.pass = false;
        return report;
    }
    auto integral_tail = [&](double r) -> double {
        switch (law.kind()) {
        case LawKind::Gaussian: {
            auto f = [&](double t) { return law.tail_probability(t); };
            double hi = r + 60.0 * law.sigma();
            return integrate_adaptive(f, r, hi, 1e-13);
        }
        case LawKind::PolyCoord: {
            double t0 = std::max(r, 1.0);
            double head = r < 1.0 ? (1.0 - r) : 0.0; // p = 1 below the support edge
            double alpha = law.alpha();
            double total = 0.0, binom = 1.0;
            for (int m = 1; m <= law.dim(); ++m) {
                binom = binom * (law.dim() - m + 1) / m;
                double sign = (m % 2 == 1) ? 1.0 : -1.0;
                total += sign * binom * std::pow(t0, 1.0 - m * alpha) / (m * alpha - 1.0);
            }
            return head + total;
        }
        case LawKind::PolyRadial: {
            double alpha = law.alpha();
            if (law.dim() == 1) {
                double t0 = std::max(r, 1.0);
                return (r < 1.0 ? 1.0 - r : 0.0) + std::pow(t0, 1.0 - alpha) / (alpha - 1.0);
            }
            if (law.dim() != 2)
                throw UnsupportedDimension("assumption_int_check: radial d <= 2");
            double t0 = std::max(r, 1.0);
            double head = 0.0;
            if (r < 1.0) {
                auto f = [&](double t) { return law.tail_probability(t); };
                head = integrate_adaptive(f, r, 1.0, 1e-13);
            }
            // p(t) = m_alpha t^-alpha for t >= 1, so the tail integrates to
            // p(t0) t0 / (alpha - 1)
            return head + law.tail_probability(t0) * t0 / (alpha - 1.0);
        }
        case LawKind::PointMass: return 0.0;
        }
        return 0.0;
    };
    for (double r : r_grid) {
        double p = law.tail_probability(r);
        if (p <= 0.0) continue;
        double ratio = integral_tail(r) / (r * p);
        report.r.push_back(r);
        report.ratio.push_back(ratio);
        report.max_ratio = std::max(report.max_ratio, ratio);
    }
    report.pass = !report.r.empty() && std::isfinite(report.max_ratio);
    return report;
}

RegCheckReport assumption_reg_check(const PerturbationLaw& law, const std::vector<double>& k_list,
                                    const std::vector<double>& r_grid) {
    RegCheckReport report;
    auto max_over = [&](double k, const std::vector<double>& grid) {
        double worst = 0.0;
        for (double r : grid) {
            double lp = law.log_tail_probability(r);
            if (!(lp < -1e-12)) continue; // outside the numerical range of p
            double lpk = law.log_tail_probability(k * r);
            worst = std::max(worst, lpk / lp);
        }
        return worst;
    };
    std::vector<double> refined;
    for (size_t i = 0; i < r_grid.size(); ++i) {
        refined.push_back(r_grid[i]);
        if (i + 1 < r_grid.size()) refined.push_back(0.5 * (r_grid[i] + r_grid[i + 1]));
    }
    report.pass = true;
    for (double k : k_list) {
        if (k < 1.0) throw ValidationError("assumption_reg_check: k must be >= 1");
        double a = max_over(k, r_grid);
        double b = max_over(k, refined);
        report.k.push_back(k);
        report.max_ratio.push_back(a);
        report.max_ratio_refined.push_back(b);
        if (!(std::isfinite(a) && std::isfinite(b))) report.pass = false;
    }
    return report;
}

RadiusTailReport radius_tail_vs_hole(const PerturbationLaw& law, int64_t core_half_width,
                                     int64_t trials, uint64_t seed,
                                     const std::vector<double>& r_grid, int threads) {
    RadiusTailReport report;
    const size_t g = r_grid.size();
    std::vector<int64_t> counts(g, 0);
    std::vector<std::vector<uint8_t>> over(static_cast<size_t>(trials),
                                           std::vector<uint8_t>(g, 0));
    std::vector<int32_t> retry_count(static_cast<size_t>(trials), 0);

    parallel_for(static_cast<size_t>(trials), threads, [&](size_t i) {
        CoverWithRetry run(law, core_half_width, trial_seed(seed, i));
        retry_count[i] = run.retries();
        const auto& real = run.realization();
        std::vector<int64_t> origin(static_cast<size_t>(law.dim()), 0);
        int64_t r_center = run.computation().fields().R_of(real.window().index_of(origin));
        for (size_t k = 0; k < g; ++k)
            if (static_cast<double>(r_center) > r_grid[k]) over[i][k] = 1;
    });
    for (size_t i = 0; i < static_cast<size_t>(trials); ++i) {
        report.retries += retry_count[i];
        for (size_t k = 0; k < g; ++k) counts[k] += over[i][k];
    }

    report.curve.law = law.to_string();
    report.curve.d = law.dim();
    report.curve.trials = trials;
    report.curve.seed = seed;
    report.curve.estimator = "monte-carlo";
    report.c_star = std::numeric_limits<double>::infinity();
    bool any_resolvable = false;
    for (size_t k = 0; k < g; ++k) {
        double p = static_cast<double>(counts[k]) / static_cast<double>(trials);
        double se = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(trials));
        report.curve.points.push_back({r_grid[k], p, se});
        auto h = hole_probability_exact(law, r_grid[k]);
        report.log_h.push_back(h.log_h);
        if (p > 0.0 && h.log_h < 0.0) {
            report.c_star = std::min(report.c_star, std::log(p) / h.log_h);
            if (k > 0) any_resolvable = true;
        }
    }
    report.unresolvable = !any_resolvable;
    if (report.unresolvable) {
        report.pass = false;
        return report;
    }
    report.pass = report.c_star > 0.0;
    for (size_t k = 0; k < g && report.pass; ++k) {
        double p = report.curve.points[k].value;
        if (p <= 0.0) continue;
        if (std::log(p) > 0.5 * report.c_star * report.log_h[k] + 1e-12) report.pass = false;
    }
    return report;
}

MatchTailReport match_tail_curve(const PerturbationLaw& law, int64_t core_half_width,
                                 int64_t trials, uint64_t seed,
                                 const std::vector<double>& r_grid, int threads) {
    MatchTailReport report;
    const size_t g = r_grid.size();
    std::vector<double> center(static_cast<size_t>(trials), 0.0);
    std::vector<int32_t> retry_count(static_cast<size_t>(trials), 0);

    parallel_for(static_cast<size_t>(trials), threads, [&](size_t i) {
        CoverWithRetry run(law, core_half_width, trial_seed(seed, i));
        retry_count[i] = run.retries();
        auto match = match_window(run.realization(), run.computation().fields());
        GridWindow core(law.dim(), core_half_width);
        std::vector<int64_t> origin(static_cast<size_t>(law.dim()), 0);
        center[i] = match.distance[core.index_of(origin)];
    });
    for (size_t i = 0; i < static_cast<size_t>(trials); ++i) {
        report.retries += retry_count[i];
        report.max_distance = std::max(report.max_distance, center[i]);
    }

    report.curve.law = law.to_string();
    report.curve.d = law.dim();
    report.curve.trials = trials;
    report.curve.seed = seed;
    report.curve.estimator = "monte-carlo";
    for (size_t k = 0; k < g; ++k) {
        int64_t hits = 0;
        for (double c : center)
            if (c > r_grid[k]) ++hits;
        double p = static_cast<double>(hits) / static_cast<double>(trials);
        double se = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(trials));
        report.curve.points.push_back({r_grid[k], p, se});
    }
    return report;
}

FitResult fit_xy(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 3) throw DegenerateFit("fit needs at least 3 usable points");
    double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw DegenerateFit("fit abscissae are collinear");
    FitResult out;
    out.slope = (n * sxy - sx * sy) / denom;
    out.intercept = (sy - out.slope * sx) / n;
    double ss_tot = syy - sy * sy / n;
    double ss_res = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double e = y[i] - (out.intercept + out.slope * x[i]);
        ss_res += e * e;
    }
    out.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    out.points_used = x.size();
    return out;
}

PowerOffsetFit fit_power_offset(const std::vector<double>& x, const std::vector<double>& y,
                                double s_lo, double s_hi) {
    if (x.size() < 4) throw DegenerateFit("power-offset fit needs at least 4 points");
    auto residual = [&](double s, double* scale, double* offset) {
        double n = static_cast<double>(x.size());
        double su = 0, sy = 0, suu = 0, suy = 0;
        for (size_t i = 0; i < x.size(); ++i) {
            double u = std::pow(x[i], s);
            su += u;
            sy += y[i];
            suu += u * u;
            suy += u * y[i];
        }
        double denom = n * suu - su * su;
        double c = (n * suy - su * sy) / denom;
        double d = (sy - c * su) / n;
        double rss = 0.0;
        for (size_t i = 0; i < x.size(); ++i) {
            double e = y[i] - (c * std::pow(x[i], s) + d);
            rss += e * e;
        }
        if (scale) *scale = c;
        if (offset) *offset = d;
        return rss;
    };
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = s_lo, b = s_hi;
    double c1 = b - phi * (b - a), c2 = a + phi * (b - a);
    double f1 = residual(c1, nullptr, nullptr), f2 = residual(c2, nullptr, nullptr);
    for (int it = 0; it < 200; ++it) {
        if (f1 < f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - phi * (b - a);
            f1 = residual(c1, nullptr, nullptr);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + phi * (b - a);
            f2 = residual(c2, nullptr, nullptr);
        }
    }
    PowerOffsetFit out;
    out.exponent = 0.5 * (a + b);
    double rss = residual(out.exponent, &out.scale, &out.offset);
    out.rms = std::sqrt(rss / static_cast<double>(x.size()));
    return out;
}

FitResult fit_loglog(const TailCurve& curve, FitTransform transform) {
    std::vector<double> x, y;
    for (const auto& p : curve.points) {
        if (!(p.r > 0.0)) continue;
        double v;
        switch (transform) {
        case FitTransform::LogLog:
            if (!(p.value > 0.0)) continue;
            v = std::log(p.value);
            break;
        case FitTransform::LogNegLog:
            if (!(p.value > 0.0 && p.value < 1.0)) continue;
            v = std::log(-std::log(p.value));
            break;
        case FitTransform::LogNeg:
            if (!(p.value < 0.0)) continue;
            v = std::log(-p.value);
            break;
        }
        x.push_back(std::log(p.r));
        y.push_back(v);
    }
    return fit_xy(x, y);
}

} // namespace pertlat
