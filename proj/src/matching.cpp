#include "pertlat/matching.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_map>

#include "pertlat/errors.hpp"

namespace pertlat {

namespace {

template <typename Fn>
void for_each_in_range(std::span<const int64_t> lo, std::span<const int64_t> hi, Fn&& fn) {
    int d = static_cast<int>(lo.size());
    for (int j = 0; j < d; ++j)
        if (hi[j] < lo[j]) return;
    std::vector<int64_t> c(lo.begin(), lo.end());
    while (true) {
        fn(std::span<const int64_t>(c));
        int j = d - 1;
        while (j >= 0) {
            if (++c[j] <= hi[j]) break;
            c[j] = lo[j];
            --j;
        }
        if (j < 0) return;
    }
}

// Candidate points for one site: labels of points inside any box of N_v,
// sorted by (distance, label). Points are bucketed by their nearest site
// cell; a one-cell halo catches boundary points bucketed just outside.
struct PointBuckets {
    const WindowRealization* real;
    std::unordered_map<uint64_t, std::vector<int64_t>> cells;

    explicit PointBuckets(const WindowRealization& r) : real(&r) {
        const int d = r.dim();
        cells.reserve(r.window().size());
        for (size_t idx = 0; idx < r.window().size(); ++idx) {
            auto p = r.point(idx);
            uint64_t key = 0;
            for (int j = 0; j < d; ++j) {
                int64_t c = static_cast<int64_t>(std::floor(p[j] + 0.5));
                key = key * 0x100000001B3ULL ^ static_cast<uint64_t>(c + (1LL << 30));
            }
            cells[key].push_back(static_cast<int64_t>(idx));
        }
    }

    uint64_t key_of(std::span<const int64_t> c) const {
        uint64_t key = 0;
        for (size_t j = 0; j < c.size(); ++j)
            key = key * 0x100000001B3ULL ^ static_cast<uint64_t>(c[j] + (1LL << 30));
        return key;
    }
};

struct Candidate {
    double distance;
    int64_t label;
    bool operator<(const Candidate& o) const {
        if (distance != o.distance) return distance < o.distance;
        return label < o.label;
    }
};

std::vector<Candidate> candidates_for_site(const WindowRealization& real,
                                           const CoverFields& fields,
                                           const PointBuckets& buckets,
                                           std::span<const int64_t> v) {
    const int d = real.dim();
    auto boxes = neighborhood(fields, real.window(), v);
    std::vector<int64_t> labels;
    std::vector<int64_t> lo(d), hi(d);
    for (const auto& box : boxes) {
        for (int j = 0; j < d; ++j) {
            lo[j] = box.corner[j] - 1;
            hi[j] = box.corner[j] + box.side();
        }
        for_each_in_range(lo, hi, [&](std::span<const int64_t> c) {
            auto it = buckets.cells.find(buckets.key_of(c));
            if (it == buckets.cells.end()) return;
            for (int64_t label : it->second)
                if (box.contains_point(real.point(static_cast<size_t>(label))))
                    labels.push_back(label);
        });
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());

    std::vector<double> vpos(d);
    for (int j = 0; j < d; ++j) vpos[j] = static_cast<double>(v[j]);
    std::vector<Candidate> out;
    out.reserve(labels.size());
    for (int64_t label : labels) {
        double dist = linf_distance(vpos, real.point(static_cast<size_t>(label)));
        out.push_back({dist, label});
    }
    std::sort(out.begin(), out.end());
    return out;
}

class HopcroftKarp {
public:
    HopcroftKarp(size_t n_left, size_t n_right, const std::vector<std::vector<int32_t>>& adj)
        : nl_(n_left), nr_(n_right), adj_(adj) {}

    std::vector<int32_t> solve() {
        pair_u_.assign(nl_, -1);
        pair_v_.assign(nr_, -1);
        dist_.assign(nl_, 0);
        while (bfs())
            for (size_t u = 0; u < nl_; ++u)
                if (pair_u_[u] < 0) dfs(static_cast<int32_t>(u));
        return pair_u_;
    }

private:
    static constexpr int32_t kInf = std::numeric_limits<int32_t>::max();

    bool bfs() {
        std::queue<int32_t> q;
        for (size_t u = 0; u < nl_; ++u) {
            if (pair_u_[u] < 0) {
                dist_[u] = 0;
                q.push(static_cast<int32_t>(u));
            } else {
                dist_[u] = kInf;
            }
        }
        bool reachable = false;
        while (!q.empty()) {
            int32_t u = q.front();
            q.pop();
            for (int32_t v : adj_[static_cast<size_t>(u)]) {
                int32_t w = pair_v_[static_cast<size_t>(v)];
                if (w < 0) {
                    reachable = true;
                } else if (dist_[static_cast<size_t>(w)] == kInf) {
                    dist_[static_cast<size_t>(w)] = dist_[static_cast<size_t>(u)] + 1;
                    q.push(w);
                }
            }
        }
        return reachable;
    }

    bool dfs(int32_t u) {
        for (int32_t v : adj_[static_cast<size_t>(u)]) {
            int32_t w = pair_v_[static_cast<size_t>(v)];
            if (w < 0 || (dist_[static_cast<size_t>(w)] == dist_[static_cast<size_t>(u)] + 1 &&
                          dfs(w))) {
                pair_u_[static_cast<size_t>(u)] = v;
                pair_v_[static_cast<size_t>(v)] = u;
                return true;
            }
        }
        dist_[static_cast<size_t>(u)] = kInf;
        return false;
    }

    size_t nl_, nr_;
    const std::vector<std::vector<int32_t>>& adj_;
    std::vector<int32_t> pair_u_, pair_v_;
    std::vector<int32_t> dist_;
};

} // namespace

std::vector<DyadicBox> neighborhood(const CoverFields& fields, const GridWindow& window,
                                    std::span<const int64_t> v) {
    int32_t own = fields.box_of_site[window.index_of(v)];
    std::vector<DyadicBox> out;
    for (int32_t b : touching_boxes(fields, window, fields.boxes[static_cast<size_t>(own)]))
        out.push_back(fields.boxes[static_cast<size_t>(b)]);
    return out; // includes D_v itself (a box touches itself)
}

std::vector<DyadicBox> neighborhood(const CoverComputation& comp, std::span<const int64_t> v) {
    return neighborhood(comp.fields(), comp.realization().window(), v);
}

MatchResult match_region(const WindowRealization& real, const CoverFields& fields,
                         const std::vector<std::vector<int64_t>>& region) {
    const int d = real.dim();
    PointBuckets buckets(real);

    const size_t n = region.size();
    std::vector<std::vector<Candidate>> cands(n);
    std::vector<int32_t> right_of_label(real.window().size(), -1);
    std::vector<int64_t> label_of_right;
    std::vector<std::vector<int32_t>> adj(n);
    for (size_t k = 0; k < n; ++k) {
        cands[k] = candidates_for_site(real, fields, buckets, region[k]);
        adj[k].reserve(cands[k].size());
        for (const auto& c : cands[k]) {
            auto& r = right_of_label[static_cast<size_t>(c.label)];
            if (r < 0) {
                r = static_cast<int32_t>(label_of_right.size());
                label_of_right.push_back(c.label);
            }
            adj[k].push_back(r);
        }
    }

    HopcroftKarp hk(n, label_of_right.size(), adj);
    auto pair_u = hk.solve();

    MatchResult result;
    result.method = "cover-neighborhood";
    result.dim = d;
    result.sites.resize(n * static_cast<size_t>(d));
    result.matched_label.assign(n, -1);
    result.matched_point.assign(n * static_cast<size_t>(d),
                                std::numeric_limits<double>::quiet_NaN());
    result.distance.assign(n, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> vpos(d);
    for (size_t k = 0; k < n; ++k) {
        for (int j = 0; j < d; ++j) result.sites[k * d + j] = region[k][j];
        if (pair_u[k] < 0) {
            result.unmatched.push_back(k);
            continue;
        }
        int64_t label = label_of_right[static_cast<size_t>(pair_u[k])];
        result.matched_label[k] = label;
        auto p = real.point(static_cast<size_t>(label));
        for (int j = 0; j < d; ++j) {
            result.matched_point[k * d + j] = p[j];
            vpos[j] = static_cast<double>(region[k][j]);
        }
        result.distance[k] = linf_distance(vpos, p);
    }
    return result;
}

MatchResult match_window(const WindowRealization& real, const CoverFields& fields) {
    const int d = real.dim();
    const int64_t L = real.core_half_width();

    GridWindow core(d, L);
    std::vector<std::vector<int64_t>> region(core.size(), std::vector<int64_t>(d));
    for (size_t k = 0; k < core.size(); ++k) core.site_at(k, region[k]);

    MatchResult result = match_region(real, fields, region);

    // 3 R_v distance bound per matched site, plus deep-interior saturation.
    int64_t max_r = 1;
    for (size_t k = 0; k < core.size(); ++k) {
        size_t ext = real.window().index_of(region[k]);
        max_r = std::max(max_r, fields.R_of(ext));
    }
    for (size_t k = 0; k < core.size(); ++k) {
        if (result.matched_label[k] < 0) continue;
        size_t ext = real.window().index_of(region[k]);
        double bound = 3.0 * static_cast<double>(fields.R_of(ext));
        if (result.distance[k] > bound + 1e-9)
            throw ModelError("DistanceBoundViolated",
                             "matched distance " + std::to_string(result.distance[k]) +
                                 " exceeds 3 R_v = " + std::to_string(bound));
    }
    for (size_t k : result.unmatched) {
        int64_t norm = 0;
        for (int j = 0; j < d; ++j) norm = std::max(norm, std::abs(result.sites[k * d + j]));
        int64_t depth = L - norm;
        if (depth > 3 * max_r)
            throw InteriorUnsaturated("unmatched site at interior depth " +
                                      std::to_string(depth) + " with 3 max R = " +
                                      std::to_string(3 * max_r));
    }
    return result;
}

bool hall_check_bruteforce(const WindowRealization& real, const CoverFields& fields,
                           const std::vector<std::vector<int64_t>>& region) {
    if (region.size() > 20)
        throw RegionTooLarge("hall_check_bruteforce: region has " +
                             std::to_string(region.size()) + " sites (cap 20)");
    PointBuckets buckets(real);

    // Per-site label sets as bitmasks over the compacted point labels.
    std::vector<int32_t> right_of_label(real.window().size(), -1);
    int32_t n_right = 0;
    std::vector<std::vector<int32_t>> rights(region.size());
    for (size_t k = 0; k < region.size(); ++k) {
        for (const auto& c : candidates_for_site(real, fields, buckets, region[k])) {
            auto& r = right_of_label[static_cast<size_t>(c.label)];
            if (r < 0) r = n_right++;
            rights[k].push_back(r);
        }
    }
    size_t words = (static_cast<size_t>(n_right) + 63) / 64;
    std::vector<std::vector<uint64_t>> masks(region.size(), std::vector<uint64_t>(words, 0));
    for (size_t k = 0; k < region.size(); ++k)
        for (int32_t r : rights[k]) masks[k][static_cast<size_t>(r) / 64] |= uint64_t{1} << (r % 64);

    std::vector<uint64_t> acc(words);
    for (uint64_t subset = 1; subset < (uint64_t{1} << region.size()); ++subset) {
        std::fill(acc.begin(), acc.end(), 0);
        int size_a = 0;
        for (size_t k = 0; k < region.size(); ++k)
            if (subset & (uint64_t{1} << k)) {
                ++size_a;
                for (size_t w = 0; w < words; ++w) acc[w] |= masks[k][w];
            }
        int neighbors = 0;
        for (uint64_t w : acc) neighbors += std::popcount(w);
        if (neighbors < size_a) return false;
    }
    return true;
}

} // namespace pertlat
