#include "pertlat/realization.hpp"

#include <cmath>

#include "pertlat/errors.hpp"
#include "pertlat/geometry.hpp"

namespace pertlat {

WindowRealization::WindowRealization(int dim, int64_t core_half_width, int64_t margin)
    : window_(dim, core_half_width + margin), core_hw_(core_half_width), margin_(margin) {}

WindowRealization::WindowRealization(const PerturbationLaw& law, int64_t core_half_width,
                                     int64_t margin, uint64_t seed)
    : window_(law.dim(), core_half_width + margin),
      core_hw_(core_half_width),
      margin_(margin),
      seed_(seed),
      law_(law),
      has_law_(true) {
    if (core_half_width < 1) throw ValidationError("core half-width L must be >= 1");
    if (margin < 0) throw ValidationError("margin M must be >= 0");
    const int d = window_.dim();
    points_.resize(window_.size() * static_cast<size_t>(d));
    std::vector<int64_t> site(d);
    std::vector<double> xi(d);
    for (size_t idx = 0; idx < window_.size(); ++idx) {
        window_.site_at(idx, site);
        SiteRng rng(seed, site);
        law.sample(rng, xi);
        double disp = 0.0;
        for (int j = 0; j < d; ++j) {
            points_[idx * d + j] = static_cast<double>(site[j]) + xi[j];
            disp = std::max(disp, std::abs(xi[j]));
        }
        max_disp_ = std::max(max_disp_, disp);
    }
}

WindowRealization WindowRealization::from_points(
    int dim, int64_t core_half_width, int64_t margin,
    const std::map<std::vector<int64_t>, std::vector<double>>& overrides) {
    WindowRealization r(dim, core_half_width, margin);
    r.points_.resize(r.window_.size() * static_cast<size_t>(dim));
    std::vector<int64_t> site(dim);
    for (size_t idx = 0; idx < r.window_.size(); ++idx) {
        r.window_.site_at(idx, site);
        for (int j = 0; j < dim; ++j) r.points_[idx * dim + j] = static_cast<double>(site[j]);
    }
    for (const auto& [v, p] : overrides) {
        if (!r.window_.contains(v))
            throw ValidationError("from_points: override site outside the window");
        size_t idx = r.window_.index_of(v);
        for (int j = 0; j < dim; ++j) r.points_[idx * dim + j] = p[j];
    }
    for (size_t idx = 0; idx < r.window_.size(); ++idx) {
        r.window_.site_at(idx, site);
        for (int j = 0; j < dim; ++j) {
            double disp = std::abs(r.points_[idx * dim + j] - static_cast<double>(site[j]));
            r.max_disp_ = std::max(r.max_disp_, disp);
        }
    }
    return r;
}

WindowRealization sample_realization(const PerturbationLaw& law, int64_t core_half_width,
                                     int64_t margin, uint64_t seed) {
    return WindowRealization(law, core_half_width, margin, seed);
}

int64_t default_margin(const PerturbationLaw& law, int64_t core_half_width) {
    GridWindow core(law.dim(), core_half_width);
    double n = static_cast<double>(core.size());
    double q = law.tail_inverse(1.0 / (2.0 * n));
    int64_t m = static_cast<int64_t>(std::ceil(2.0 * q));
    return std::max<int64_t>(8, m);
}

} // namespace pertlat
