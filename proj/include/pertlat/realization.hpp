#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "pertlat/law.hpp"

namespace pertlat {

// Lexicographic indexing of the lattice cube [-hw, hw]^d.
class GridWindow {
public:
    GridWindow(int dim, int64_t half_width) : dim_(dim), hw_(half_width) {
        side_ = 2 * hw_ + 1;
        size_ = 1;
        for (int j = 0; j < dim_; ++j) size_ *= static_cast<size_t>(side_);
    }

    int dim() const { return dim_; }
    int64_t half_width() const { return hw_; }
    int64_t side() const { return side_; }
    size_t size() const { return size_; }

    bool contains(std::span<const int64_t> v) const {
        for (int j = 0; j < dim_; ++j)
            if (v[j] < -hw_ || v[j] > hw_) return false;
        return true;
    }

    size_t index_of(std::span<const int64_t> v) const {
        size_t idx = 0;
        for (int j = 0; j < dim_; ++j) idx = idx * side_ + static_cast<size_t>(v[j] + hw_);
        return idx;
    }

    void site_at(size_t idx, std::span<int64_t> out) const {
        for (int j = dim_ - 1; j >= 0; --j) {
            out[j] = static_cast<int64_t>(idx % side_) - hw_;
            idx /= side_;
        }
    }

private:
    int dim_;
    int64_t hw_;
    int64_t side_;
    size_t size_;
};

// One sampled window {(v, Pi_v = v + xi_v)} over the extended cube
// [-(L+M), L+M]^d. Exactly one labeled point per site; coincident
// locations stay distinct by label. Regeneration from (law, L, M, seed)
// is bit-exact, and windows of different sizes agree on shared sites.
class WindowRealization {
public:
    WindowRealization(const PerturbationLaw& law, int64_t core_half_width, int64_t margin,
                      uint64_t seed);

    // Test fixture: identity points except for explicit overrides.
    static WindowRealization from_points(int dim, int64_t core_half_width, int64_t margin,
                                         const std::map<std::vector<int64_t>, std::vector<double>>& overrides);

    const GridWindow& window() const { return window_; }
    int dim() const { return window_.dim(); }
    int64_t core_half_width() const { return core_hw_; }
    int64_t margin() const { return margin_; }
    uint64_t seed() const { return seed_; }
    const PerturbationLaw* law() const { return has_law_ ? &law_ : nullptr; }

    std::span<const double> point(size_t site_idx) const {
        return {points_.data() + site_idx * window_.dim(), static_cast<size_t>(window_.dim())};
    }

    // Largest ||Pi_v - v||_inf over the window.
    double max_displacement() const { return max_disp_; }

    bool in_core(std::span<const int64_t> v) const {
        for (int j = 0; j < dim(); ++j)
            if (v[j] < -core_hw_ || v[j] > core_hw_) return false;
        return true;
    }

private:
    WindowRealization(int dim, int64_t core_half_width, int64_t margin);

    GridWindow window_;
    int64_t core_hw_;
    int64_t margin_;
    uint64_t seed_ = 0;
    PerturbationLaw law_ = PerturbationLaw::point_mass({0.0});
    bool has_law_ = false;
    std::vector<double> points_;
    double max_disp_ = 0.0;
};

WindowRealization sample_realization(const PerturbationLaw& law, int64_t core_half_width,
                                     int64_t margin, uint64_t seed);

// Default margin: wide enough that a displacement beyond it is unlikely
// anywhere in the window (per-site quantile at 1/(2n)), floored at 8.
int64_t default_margin(const PerturbationLaw& law, int64_t core_half_width);

} // namespace pertlat
