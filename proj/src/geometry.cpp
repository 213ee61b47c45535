#include "pertlat/geometry.hpp"

#include <cmath>

namespace pertlat {

DyadicBox enclosing_box(std::span<const int64_t> v, int scale) {
    DyadicBox box;
    box.scale = scale;
    box.corner.resize(v.size());
    int64_t side = int64_t{1} << scale;
    for (size_t j = 0; j < v.size(); ++j) box.corner[j] = side * floor_div(v[j], side);
    return box;
}

bool segment_intersects_aabb(std::span<const double> a, std::span<const double> b,
                             std::span<const double> lo, std::span<const double> hi) {
    double t_lo = 0.0, t_hi = 1.0;
    for (size_t j = 0; j < a.size(); ++j) {
        double dir = b[j] - a[j];
        if (dir == 0.0) {
            if (a[j] < lo[j] || a[j] > hi[j]) return false;
            continue;
        }
        double t0 = (lo[j] - a[j]) / dir;
        double t1 = (hi[j] - a[j]) / dir;
        if (t0 > t1) std::swap(t0, t1);
        if (t0 > t_lo) t_lo = t0;
        if (t1 < t_hi) t_hi = t1;
        if (t_lo > t_hi) return false;
    }
    return true;
}

bool segment_intersects_box(std::span<const double> a, std::span<const double> b,
                            const DyadicBox& box) {
    double t_lo = 0.0, t_hi = 1.0;
    for (int j = 0; j < box.dim(); ++j) {
        double dir = b[j] - a[j];
        double lo = box.lo(j);
        double hi = box.hi(j);
        if (dir == 0.0) {
            if (a[j] < lo || a[j] > hi) return false;
            continue;
        }
        double t0 = (lo - a[j]) / dir;
        double t1 = (hi - a[j]) / dir;
        if (t0 > t1) std::swap(t0, t1);
        if (t0 > t_lo) t_lo = t0;
        if (t1 < t_hi) t_hi = t1;
        if (t_lo > t_hi) return false;
    }
    return true;
}

} // namespace pertlat
