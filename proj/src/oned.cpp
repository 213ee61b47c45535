#include "pertlat/oned.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "pertlat/errors.hpp"
#include "pertlat/parallel.hpp"
#include "pertlat/rng.hpp"

namespace pertlat {

namespace {

struct Item {
    double pos;
    uint8_t is_point;
    int32_t local_idx; // index into the side's position array
};

struct PairEntry {
    double dist;
    double site_pos;
    double point_pos;
    int32_t site_item;
    int32_t point_item;
    bool operator>(const PairEntry& o) const {
        if (dist != o.dist) return dist > o.dist;
        if (site_pos != o.site_pos) return site_pos > o.site_pos;
        if (point_pos != o.point_pos) return point_pos > o.point_pos;
        if (site_item != o.site_item) return site_item > o.site_item;
        return point_item > o.point_item;
    }
};

using PairQueue = std::priority_queue<PairEntry, std::vector<PairEntry>, std::greater<PairEntry>>;

struct GreedyState {
    std::vector<Item> items;
    std::vector<int32_t> prev, next;
    std::vector<uint8_t> matched;

    int32_t scan(int32_t from, bool want_point, bool leftward) const {
        const auto& link = leftward ? prev : next;
        for (int32_t i = link[static_cast<size_t>(from)]; i >= 0;
             i = link[static_cast<size_t>(i)])
            if (static_cast<bool>(items[static_cast<size_t>(i)].is_point) == want_point) return i;
        return -1;
    }

    // nearest opposite-type item; distance ties prefer the left one
    int32_t best_of(int32_t from) const {
        bool want_point = !items[static_cast<size_t>(from)].is_point;
        double pos = items[static_cast<size_t>(from)].pos;
        int32_t l = scan(from, want_point, true);
        int32_t r = scan(from, want_point, false);
        if (l < 0) return r;
        if (r < 0) return l;
        double dl = std::abs(pos - items[static_cast<size_t>(l)].pos);
        double dr = std::abs(pos - items[static_cast<size_t>(r)].pos);
        return dl <= dr ? l : r;
    }

    void push_pair(PairQueue& queue, int32_t a, int32_t b) const {
        int32_t s = items[static_cast<size_t>(a)].is_point ? b : a;
        int32_t x = items[static_cast<size_t>(a)].is_point ? a : b;
        queue.push({std::abs(items[static_cast<size_t>(s)].pos -
                             items[static_cast<size_t>(x)].pos),
                    items[static_cast<size_t>(s)].pos, items[static_cast<size_t>(x)].pos, s, x});
    }

    void unlink(int32_t i, PairQueue& queue) {
        int32_t p = prev[static_cast<size_t>(i)];
        int32_t n = next[static_cast<size_t>(i)];
        if (p >= 0) next[static_cast<size_t>(p)] = n;
        if (n >= 0) prev[static_cast<size_t>(n)] = p;
        if (p >= 0 && n >= 0 &&
            items[static_cast<size_t>(p)].is_point != items[static_cast<size_t>(n)].is_point)
            push_pair(queue, p, n);
    }
};

} // namespace

ItemsMatch greedy_match_items(std::span<const double> site_pos,
                              std::span<const double> point_pos) {
    GreedyState st;
    st.items.reserve(site_pos.size() + point_pos.size());
    for (size_t i = 0; i < site_pos.size(); ++i)
        st.items.push_back({site_pos[i], 0, static_cast<int32_t>(i)});
    for (size_t i = 0; i < point_pos.size(); ++i)
        st.items.push_back({point_pos[i], 1, static_cast<int32_t>(i)});
    std::sort(st.items.begin(), st.items.end(), [](const Item& a, const Item& b) {
        if (a.pos != b.pos) return a.pos < b.pos;
        if (a.is_point != b.is_point) return a.is_point < b.is_point;
        return a.local_idx < b.local_idx;
    });

    const size_t total = st.items.size();
    st.prev.resize(total);
    st.next.resize(total);
    st.matched.assign(total, 0);
    for (size_t i = 0; i < total; ++i) {
        st.prev[i] = static_cast<int32_t>(i) - 1;
        st.next[i] = (i + 1 < total) ? static_cast<int32_t>(i + 1) : -1;
    }

    PairQueue queue;
    auto seed_pairs = [&] {
        for (size_t i = 0; i < total; ++i) {
            if (st.matched[i]) continue;
            int32_t nx = st.next[i];
            if (nx >= 0 && !st.matched[static_cast<size_t>(nx)] &&
                st.items[i].is_point != st.items[static_cast<size_t>(nx)].is_point)
                st.push_pair(queue, static_cast<int32_t>(i), nx);
        }
    };
    seed_pairs();

    ItemsMatch out;
    out.site_to_point.assign(site_pos.size(), -1);
    out.point_to_site.assign(point_pos.size(), -1);
    out.site_distance.assign(site_pos.size(), std::numeric_limits<double>::infinity());

    size_t sites_left = site_pos.size();
    size_t points_left = point_pos.size();
    size_t pops = 0;
    const size_t pop_cap = 1000 * total + 10000000;
    while (sites_left > 0 && points_left > 0) {
        if (++pops > pop_cap)
            throw ModelError("GreedyStalled", "greedy matching exceeded its work cap");
        if (queue.empty()) {
            seed_pairs(); // degenerate tie fallback; reseeds from the live list
            if (queue.empty()) break;
        }
        PairEntry e = queue.top();
        queue.pop();
        if (st.matched[static_cast<size_t>(e.site_item)] ||
            st.matched[static_cast<size_t>(e.point_item)])
            continue;
        int32_t bp = st.best_of(e.site_item);
        int32_t bs = st.best_of(e.point_item);
        if (bp == e.point_item && bs == e.site_item) {
            st.matched[static_cast<size_t>(e.site_item)] = 1;
            st.matched[static_cast<size_t>(e.point_item)] = 1;
            st.unlink(e.site_item, queue);
            st.unlink(e.point_item, queue);
            int32_t s = st.items[static_cast<size_t>(e.site_item)].local_idx;
            int32_t x = st.items[static_cast<size_t>(e.point_item)].local_idx;
            out.site_to_point[static_cast<size_t>(s)] = x;
            out.point_to_site[static_cast<size_t>(x)] = s;
            out.site_distance[static_cast<size_t>(s)] = e.dist;
            --sites_left;
            --points_left;
        } else {
            // mutual preference violated: reinsert the corrected pairs
            if (bp >= 0 && bp != e.point_item) st.push_pair(queue, e.site_item, bp);
            if (bs >= 0 && bs != e.site_item) st.push_pair(queue, bs, e.point_item);
        }
    }
    return out;
}

size_t count_blocking_pairs_items(std::span<const double> site_pos,
                                  std::span<const double> point_pos, const ItemsMatch& match) {
    // points sorted by position, carrying their own match distance
    std::vector<std::pair<double, double>> pts;
    pts.reserve(point_pos.size());
    for (size_t x = 0; x < point_pos.size(); ++x) {
        int32_t s = match.point_to_site[x];
        double dx = s >= 0 ? std::abs(point_pos[x] - site_pos[static_cast<size_t>(s)])
                           : std::numeric_limits<double>::infinity();
        pts.emplace_back(point_pos[x], dx);
    }
    std::sort(pts.begin(), pts.end());

    size_t blocking = 0;
    for (size_t s = 0; s < site_pos.size(); ++s) {
        double v = site_pos[s];
        double dv = match.site_distance[s];
        if (!(dv > 0.0)) continue;
        double lo = std::isinf(dv) ? -std::numeric_limits<double>::infinity() : v - dv;
        auto it = std::lower_bound(pts.begin(), pts.end(), std::make_pair(lo, -1e300));
        for (; it != pts.end() && it->first < v + dv; ++it) {
            double gap = std::abs(v - it->first);
            if (gap < dv && gap < it->second) ++blocking;
        }
    }
    return blocking;
}

StableMatchInstance greedy_stable_match(const WindowRealization& real) {
    if (real.dim() != 1) throw ValidationError("greedy_stable_match needs d = 1");
    const auto& win = real.window();
    const size_t n = win.size();

    std::vector<double> site_pos(n), point_pos(n);
    std::vector<int64_t> site(1);
    for (size_t idx = 0; idx < n; ++idx) {
        win.site_at(idx, site);
        site_pos[idx] = static_cast<double>(site[0]);
        point_pos[idx] = real.point(idx)[0];
    }
    auto items = greedy_match_items(site_pos, point_pos);

    StableMatchInstance out;
    out.core_half_width = real.core_half_width();
    out.matched_pos.assign(n, 0.0);
    out.matched_label.assign(n, -1);
    out.distance.assign(n, 0.0);
    for (size_t idx = 0; idx < n; ++idx) {
        int32_t x = items.site_to_point[idx];
        out.matched_label[idx] = x; // point label == its site index here
        out.matched_pos[idx] = x >= 0 ? point_pos[static_cast<size_t>(x)] : 0.0;
        out.distance[idx] = items.site_distance[idx];
    }
    std::vector<int64_t> origin = {0};
    out.center_distance = out.distance[win.index_of(origin)];
    return out;
}

size_t count_blocking_pairs(const WindowRealization& real, const StableMatchInstance& match) {
    const auto& win = real.window();
    const size_t n = win.size();
    std::vector<double> site_pos(n), point_pos(n);
    std::vector<int64_t> site(1);
    for (size_t idx = 0; idx < n; ++idx) {
        win.site_at(idx, site);
        site_pos[idx] = static_cast<double>(site[0]);
        point_pos[idx] = real.point(idx)[0];
    }
    ItemsMatch items;
    items.site_to_point.assign(n, -1);
    items.point_to_site.assign(n, -1);
    items.site_distance.assign(n, std::numeric_limits<double>::infinity());
    for (size_t idx = 0; idx < n; ++idx) {
        int64_t x = match.matched_label[idx];
        if (x < 0) continue;
        items.site_to_point[idx] = static_cast<int32_t>(x);
        items.point_to_site[static_cast<size_t>(x)] = static_cast<int32_t>(idx);
        items.site_distance[idx] = match.distance[idx];
    }
    return count_blocking_pairs_items(site_pos, point_pos, items);
}

namespace {

// Partial sums of (m - 1/2)^-alpha, continued past the table by a midpoint
// integral (error far below 1e-10 at these depths).
struct HalfShiftPrefix {
    double alpha;
    int64_t table_n;
    std::vector<double> z;

    HalfShiftPrefix(double a, int64_t n) : alpha(a), table_n(n) {
        z.resize(static_cast<size_t>(n) + 1, 0.0);
        for (int64_t m = 1; m <= n; ++m)
            z[static_cast<size_t>(m)] =
                z[static_cast<size_t>(m) - 1] + std::pow(static_cast<double>(m) - 0.5, -alpha);
    }
    double operator()(int64_t n) const {
        if (n <= 0) return 0.0;
        if (n <= table_n) return z[static_cast<size_t>(n)];
        double a = static_cast<double>(table_n);
        double b = static_cast<double>(n);
        return z[static_cast<size_t>(table_n)] +
               (std::pow(b, 1.0 - alpha) - std::pow(a, 1.0 - alpha)) / (1.0 - alpha);
    }
};

} // namespace

Region1D sample_region_1d(const PerturbationLaw& law, int64_t half_width, uint64_t seed) {
    if (law.dim() != 1) throw ValidationError("sample_region_1d needs d = 1");
    const int64_t W = half_width;
    const double lo = -static_cast<double>(W) - 0.5;
    const double hi = static_cast<double>(W) + 0.5;

    Region1D out;
    out.half_width = W;
    out.points.reserve(static_cast<size_t>(2 * W + 1));

    // window sites, censored to the region
    std::vector<int64_t> site(1);
    std::vector<double> xi(1);
    for (int64_t v = -W; v <= W; ++v) {
        site[0] = v;
        SiteRng rng(seed, site);
        law.sample(rng, xi);
        double pos = static_cast<double>(v) + xi[0];
        if (pos >= lo && pos < hi) out.points.push_back(pos);
    }

    // in-flyers from sites beyond the window; per-site streams keep the
    // construction consistent across region sizes out to the direct range
    auto conditional_position = [&](int64_t v, double p, double u) {
        double flo = law.coord_cdf(lo - static_cast<double>(v));
        double q = law.coord_quantile(std::min(flo + u * p, 1.0));
        double pos = static_cast<double>(v) + q;
        return std::min(std::max(pos, lo), hi - 1e-9);
    };
    int64_t direct_reach;
    switch (law.kind()) {
    case LawKind::PointMass: direct_reach = W + 2 + static_cast<int64_t>(std::abs(law.offset()[0])); break;
    case LawKind::Gaussian: direct_reach = W + 8 + static_cast<int64_t>(12.0 * law.sigma()); break;
    default: direct_reach = 2 * W + 2; break;
    }
    for (int64_t m = W + 1; m <= direct_reach; ++m) {
        for (int64_t v : {m, -m}) {
            site[0] = v;
            double p = law.coord_interval_probability(lo - static_cast<double>(v),
                                                      hi - static_cast<double>(v));
            if (p <= 0.0) continue;
            SiteRng rng(seed, site);
            double u = rng.uniform01();
            if (u > p) continue;
            out.points.push_back(conditional_position(v, p, u / p));
        }
    }
    if (law.kind() != LawKind::PolyCoord && law.kind() != LawKind::PolyRadial) return out;

    // exact far tails for the heavy-tailed law, one side at a time:
    // p_v for |v| = m > V telescopes into half-shifted prefix sums.
    const double alpha = law.alpha();
    const int64_t V = direct_reach;
    const int64_t span = 2 * W + 1;
    HalfShiftPrefix zh(alpha, V + 2 * span + 16);
    // sum over m > V of p_m = (1/2)[(m - W - 1/2)^-a - (m + W + 1/2)^-a]
    //                       = (1/2) [Zh(V+span) over the first index window]
    auto prefix = [&](int64_t k) {
        // sum of the first k far sites on one side (m = V+1 .. V+k)
        return 0.5 * ((zh(V - W + k) - zh(V - W)) - (zh(V + W + 1 + k) - zh(V + W + 1)));
    };
    // limit of prefix(k); the second telescoped sum vanishes at infinity
    const double total = 0.5 * (zh(V + W + 1) - zh(V - W));
    double p_first = law.coord_interval_probability(lo - static_cast<double>(V + 1),
                                                    hi - static_cast<double>(V + 1));
    double p_max = std::max(1e-300, p_first);

    SiteRng far_rng(mix64(seed, 0xFA5FA5u));
    for (int side = 0; side < 2; ++side) {
        double lambda = total / (1.0 - p_max);
        int64_t count = 0;
        double prod = far_rng.uniform01();
        double limit = std::exp(-lambda);
        while (prod > limit) {
            ++count;
            prod *= far_rng.uniform01();
        }
        std::set<int64_t> occupied;
        for (int64_t a = 0; a < count; ++a) {
            double target = far_rng.uniform01() * total;
            int64_t klo = 1, khi = 1;
            while (prefix(khi) < target && khi < (int64_t{1} << 56)) {
                klo = khi;
                khi *= 2;
            }
            while (klo < khi) {
                int64_t mid = klo + (khi - klo) / 2;
                if (prefix(mid) >= target)
                    khi = mid;
                else
                    klo = mid + 1;
            }
            int64_t m = V + klo;
            int64_t v = side == 0 ? m : -m;
            double p = law.coord_interval_probability(lo - static_cast<double>(v),
                                                      hi - static_cast<double>(v));
            if (p <= 0.0) continue;
            double nu = -std::log1p(-p);
            if (far_rng.uniform01() > nu * (1.0 - p_max) / p) continue;
            if (!occupied.insert(v).second) continue; // Bernoulli occupancy per site
            out.points.push_back(conditional_position(v, p, far_rng.uniform01()));
        }
    }
    return out;
}

RegionMatch1D match_region_1d(const PerturbationLaw& law, int64_t half_width, uint64_t seed) {
    RegionMatch1D out;
    out.region = sample_region_1d(law, half_width, seed);
    const int64_t W = half_width;
    std::vector<double> site_pos(static_cast<size_t>(2 * W + 1));
    for (int64_t v = -W; v <= W; ++v)
        site_pos[static_cast<size_t>(v + W)] = static_cast<double>(v);
    out.match = greedy_match_items(site_pos, out.region.points);
    double d = out.match.site_distance[static_cast<size_t>(W)];
    out.center_matched = std::isfinite(d);
    out.center_distance = out.center_matched ? d : std::numeric_limits<double>::infinity();
    return out;
}

double discrepancy_F(const WindowRealization& real, double r, double leak_tolerance) {
    if (real.dim() != 1) throw ValidationError("discrepancy_F needs d = 1");
    if (r < 0.0 || r > static_cast<double>(real.core_half_width()))
        throw ValidationError("discrepancy_F: r must lie in [0, L]");
    if (const auto* law = real.law()) {
        double w = static_cast<double>(real.window().half_width());
        double leak = law->tail_probability(w + 1.0 - r);
        if (leak > leak_tolerance)
            throw MarginExceeded("discrepancy_F: per-site leak " + std::to_string(leak) +
                                 " above tolerance");
    }
    int64_t count = 0;
    for (size_t idx = 0; idx < real.window().size(); ++idx) {
        double x = real.point(idx)[0];
        if (x >= 0.0 && x < r) ++count;
    }
    return r - static_cast<double>(count);
}

namespace {

// sum_{j > J0} (j^-a - (j+t)^-a)^2 via the midpoint integral with a
// binomial expansion in t/x; both truncation errors are far below 1e-8.
double tail_square_integral(double alpha, double t, double x0) {
    const int terms = 12;
    std::vector<double> b(terms + 1, 0.0); // 1 - (1+u)^-a = sum b_m u^m
    double coeff = 1.0;
    for (int m = 1; m <= terms; ++m) {
        coeff *= (-alpha - (m - 1)) / m; // C(-alpha, m)
        b[m] = -coeff;
    }
    std::vector<double> c(terms + 1, 0.0); // square of the series
    for (int i = 1; i <= terms; ++i)
        for (int k = 1; k + i <= terms; ++k) c[i + k] += b[i] * b[k];
    double total = 0.0;
    for (int m = 2; m <= terms; ++m)
        total += c[m] * std::pow(t, m) * std::pow(x0, 1.0 - 2.0 * alpha - m) /
                 (2.0 * alpha + m - 1.0);
    return total;
}

} // namespace

double variance_exact(const PerturbationLaw& law, int64_t t) {
    if (law.dim() != 1) throw ValidationError("variance_exact needs d = 1");
    if (t < 1) throw ValidationError("variance_exact: t must be >= 1");
    switch (law.kind()) {
    case LawKind::PointMass: return 0.0;
    case LawKind::Gaussian: {
        double var = 0.0;
        double reach = 50.0 * law.sigma() + 2.0;
        for (int64_t k = -static_cast<int64_t>(reach); k <= t + static_cast<int64_t>(reach);
             ++k) {
            double p = law.coord_interval_probability(-static_cast<double>(k),
                                                      static_cast<double>(t - k));
            var += p * (1.0 - p);
        }
        return var;
    }
    case LawKind::PolyCoord:
    case LawKind::PolyRadial: break;
    }
    const double alpha = law.alpha();
    const double td = static_cast<double>(t);

    // bulk sites k in [0, t]
    double bulk = 0.0;
    {
        double p0 = 0.5 * (1.0 - std::pow(td, -alpha)); // k = 0 and k = t
        bulk += 2.0 * p0 * (1.0 - p0);
        for (int64_t k = 1; k <= t - 1; ++k) {
            double out = 0.5 * (std::pow(static_cast<double>(k), -alpha) +
                                std::pow(static_cast<double>(t - k), -alpha));
            double p = 1.0 - out;
            bulk += p * (1.0 - p);
        }
    }

    // two symmetric tails: sum p = (1/2) sum_{j<=t} j^-alpha by telescoping
    double harmonic_like = 0.0;
    for (int64_t j = 1; j <= t; ++j) harmonic_like += std::pow(static_cast<double>(j), -alpha);

    int64_t j0 = std::max<int64_t>(256 * t, 4096);
    double sum_sq = 0.0;
    for (int64_t j = 1; j <= j0; ++j) {
        double diff = std::pow(static_cast<double>(j), -alpha) -
                      std::pow(static_cast<double>(j + t), -alpha);
        sum_sq += diff * diff;
    }
    sum_sq += tail_square_integral(alpha, td, static_cast<double>(j0) + 0.5);

    double tail_p = 0.5 * harmonic_like;
    double tail_p2 = 0.25 * sum_sq;
    return bulk + 2.0 * (tail_p - tail_p2);
}

TailCurveM0 tail_curve_M0(const PerturbationLaw& law, int64_t core_half_width, int64_t trials,
                          uint64_t seed, const std::vector<double>& r_grid, int threads,
                          int64_t initial_margin) {
    if (law.dim() != 1) throw ValidationError("tail_curve_M0 needs d = 1");
    if (trials < 1) throw ValidationError("tail_curve_M0: trials must be >= 1");
    const int64_t L = core_half_width;
    const int64_t margin0 = initial_margin > 0 ? initial_margin : std::max<int64_t>(64, L / 10);

    TailCurveM0 out;
    out.samples.assign(static_cast<size_t>(trials), 0.0);
    std::vector<uint8_t> flagged(static_cast<size_t>(trials), 0);

    parallel_for(static_cast<size_t>(trials), threads, [&](size_t i) {
        uint64_t tseed = trial_seed(seed, i);
        int64_t margin = margin0;
        double delta = std::numeric_limits<double>::infinity();
        for (int attempt = 0;; ++attempt) {
            auto rm = match_region_1d(law, L + margin, tseed);
            delta = rm.center_distance;
            if ((rm.center_matched && delta < static_cast<double>(margin)) || attempt >= 3)
                break;
            margin *= 2;
        }
        out.samples[i] = delta;
        if (!(delta <= static_cast<double>(L) / 2.0)) flagged[i] = 1;
    });

    for (uint8_t f : flagged) out.flagged += f;
    if (static_cast<double>(out.flagged) > 0.001 * static_cast<double>(trials))
        throw WindowTooSmall("tail_curve_M0: " + std::to_string(out.flagged) + " of " +
                             std::to_string(trials) + " trials exceeded L/2");

    out.curve.law = law.to_string();
    out.curve.d = 1;
    out.curve.trials = trials;
    out.curve.seed = seed;
    out.curve.estimator = "monte-carlo";
    for (double r : r_grid) {
        int64_t hits = 0;
        for (double s : out.samples)
            if (s > r) ++hits;
        double p = static_cast<double>(hits) / static_cast<double>(trials);
        double se = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(trials));
        out.curve.points.push_back({r, p, se});
    }
    return out;
}

MomentCurve truncated_moment_curve(const std::vector<double>& samples, double alpha,
                                   const std::vector<double>& t_grid, int bootstrap,
                                   uint64_t seed) {
    if (samples.empty()) throw ValidationError("truncated_moment_curve: no samples");
    const size_t n = samples.size();
    const size_t g = t_grid.size();
    MomentCurve out;
    out.t = t_grid;
    out.value.resize(g);
    out.lo.resize(g);
    out.hi.resize(g);

    std::vector<double> norm(g);
    for (size_t k = 0; k < g; ++k) norm[k] = std::pow(t_grid[k], (1.0 - alpha) / 2.0);

    for (size_t k = 0; k < g; ++k) {
        double acc = 0.0;
        for (double s : samples) acc += std::min(s, t_grid[k]);
        out.value[k] = acc / (static_cast<double>(n) * norm[k]);
    }

    // percentile bootstrap of the mean, one index stream reused across t
    std::vector<std::vector<double>> boots(g, std::vector<double>(static_cast<size_t>(bootstrap)));
    SiteRng rng(seed ^ 0xB00757u);
    std::vector<double> acc(g);
    for (int b = 0; b < bootstrap; ++b) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (size_t i = 0; i < n; ++i) {
            double s = samples[rng.next_u64() % n];
            for (size_t k = 0; k < g; ++k) acc[k] += std::min(s, t_grid[k]);
        }
        for (size_t k = 0; k < g; ++k)
            boots[k][static_cast<size_t>(b)] = acc[k] / (static_cast<double>(n) * norm[k]);
    }
    for (size_t k = 0; k < g; ++k) {
        auto& v = boots[k];
        std::sort(v.begin(), v.end());
        out.lo[k] = v[static_cast<size_t>(0.025 * (bootstrap - 1))];
        out.hi[k] = v[static_cast<size_t>(0.975 * (bootstrap - 1))];
    }

    // log-log slope of the curve
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    size_t m = 0;
    for (size_t k = 0; k < g; ++k) {
        if (out.value[k] <= 0.0) continue;
        double x = std::log(t_grid[k]);
        double y = std::log(out.value[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    bool positive = m == g;
    out.slope = m >= 2 ? (static_cast<double>(m) * sxy - sx * sy) /
                             (static_cast<double>(m) * sxx - sx * sx)
                       : -1e300;
    double lo_min = *std::min_element(out.lo.begin(), out.lo.end());
    if (positive && lo_min > 0.0 && out.slope > -(1.0 - alpha) / 4.0)
        out.verdict = "bounded-below";
    else
        out.verdict = "decaying";
    return out;
}

} // namespace pertlat
