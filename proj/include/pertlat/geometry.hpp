#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pertlat {

inline int64_t floor_div(int64_t a, int64_t b) {
    int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline double linf_distance(std::span<const double> x, std::span<const double> y) {
    double m = 0.0;
    for (size_t j = 0; j < x.size(); ++j) {
        double d = x[j] - y[j];
        m = std::max(m, d < 0 ? -d : d);
    }
    return m;
}

inline int64_t linf_distance_int(std::span<const int64_t> x, std::span<const int64_t> y) {
    int64_t m = 0;
    for (size_t j = 0; j < x.size(); ++j) {
        int64_t d = x[j] - y[j];
        m = std::max(m, d < 0 ? -d : d);
    }
    return m;
}

// Shifted dyadic box k + [-1/2, 2^i - 1/2]^d with k in 2^i Z^d. A box at
// scale i contains exactly the lattice sites k_j .. k_j + 2^i - 1 per axis,
// hence 2^{i d} of them. Boxes of one scale tile space; across scales they
// nest or have disjoint interiors.
struct DyadicBox {
    int scale = 0;
    std::vector<int64_t> corner;

    int dim() const { return static_cast<int>(corner.size()); }
    int64_t side() const { return int64_t{1} << scale; }
    double lo(int j) const { return static_cast<double>(corner[j]) - 0.5; }
    double hi(int j) const { return static_cast<double>(corner[j] + side()) - 0.5; }

    bool contains_site(std::span<const int64_t> v) const {
        for (int j = 0; j < dim(); ++j)
            if (v[j] < corner[j] || v[j] >= corner[j] + side()) return false;
        return true;
    }
    // Closed-box membership; boundary counts.
    bool contains_point(std::span<const double> x) const {
        for (int j = 0; j < dim(); ++j)
            if (x[j] < lo(j) || x[j] > hi(j)) return false;
        return true;
    }
    uint64_t lattice_count() const {
        uint64_t n = 1;
        for (int j = 0; j < dim(); ++j) n *= static_cast<uint64_t>(side());
        return n;
    }
    bool touches(const DyadicBox& other) const {
        for (int j = 0; j < dim(); ++j)
            if (hi(j) < other.lo(j) || other.hi(j) < lo(j)) return false;
        return true;
    }
    bool operator==(const DyadicBox& other) const {
        return scale == other.scale && corner == other.corner;
    }
};

// The unique scale-i box containing lattice site v.
DyadicBox enclosing_box(std::span<const int64_t> v, int scale);

// Closed segment [a,b] against the closed box, by parametric slab clipping
// on t in [0,1]. Boundary contact counts as intersection; a degenerate
// segment reduces to point membership.
bool segment_intersects_box(std::span<const double> a, std::span<const double> b,
                            const DyadicBox& box);

// Same test against a plain axis-aligned box given by per-axis bounds.
bool segment_intersects_aabb(std::span<const double> a, std::span<const double> b,
                             std::span<const double> lo, std::span<const double> hi);

} // namespace pertlat
