#include "pertlat/cover.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "pertlat/errors.hpp"

namespace pertlat {

namespace {

int ceil_log2_quarters(int64_t r_quarters) {
    // smallest i >= 0 with 4 * 2^i >= r_quarters
    int i = 0;
    while ((int64_t{4} << i) < r_quarters) ++i;
    return i;
}

// Odometer over a d-dimensional integer range [lo_j, hi_j].
template <typename Fn>
void for_each_cell(std::span<const int64_t> lo, std::span<const int64_t> hi, Fn&& fn) {
    int d = static_cast<int>(lo.size());
    std::vector<int64_t> c(lo.begin(), lo.end());
    for (int j = 0; j < d; ++j)
        if (hi[j] < lo[j]) return;
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

} // namespace

int default_i_max(int64_t core_half_width) {
    int i = 0;
    while ((int64_t{2} << i) <= core_half_width) ++i; // floor(log2 L)
    return std::max(0, i - 1);
}

std::vector<size_t> crossing_set(const WindowRealization& real, const DyadicBox& box) {
    const auto& win = real.window();
    const int d = win.dim();
    // Plausibility audit: displacements observed in this window reach from
    // beyond the window edge to the box, so unseen sites could cross too.
    double edge_gap = std::numeric_limits<double>::infinity();
    for (int j = 0; j < d; ++j) {
        edge_gap = std::min(edge_gap, box.lo(j) - (-static_cast<double>(win.half_width()) - 0.5));
        edge_gap = std::min(edge_gap, static_cast<double>(win.half_width()) + 0.5 - box.hi(j));
    }
    if (real.max_displacement() > 0.0 && real.max_displacement() >= edge_gap)
        throw MarginExceeded("crossing_set: observed displacement " +
                             std::to_string(real.max_displacement()) +
                             " reaches the box from outside the window");

    std::vector<size_t> crossers;
    std::vector<int64_t> site(d);
    std::vector<double> a(d);
    for (size_t idx = 0; idx < win.size(); ++idx) {
        auto p = real.point(idx);
        if (box.contains_point(p)) continue;
        win.site_at(idx, site);
        for (int j = 0; j < d; ++j) a[j] = static_cast<double>(site[j]);
        if (segment_intersects_box(a, p, box)) crossers.push_back(idx);
    }
    return crossers;
}

std::pair<int, bool> compute_I0_site(const WindowRealization& real, std::span<const int64_t> v,
                                     int i_max) {
    for (int i = 0; i <= i_max; ++i) {
        auto box = enclosing_box(v, i);
        int64_t q = static_cast<int64_t>(box.lattice_count());
        if (static_cast<int64_t>(crossing_set(real, box).size()) <= q) return {i, false};
    }
    return {i_max, true};
}

SmoothedField smooth_field(const GridWindow& window, const std::vector<int>& I0) {
    const int d = window.dim();
    const size_t n = window.size();
    SmoothedField out;
    out.R1q.resize(n);
    for (size_t i = 0; i < n; ++i) out.R1q[i] = int64_t{4} << I0[i];

    // Two-pass Chebyshev chamfer for the cone maximum
    // R1q_v = max_u (R0q_u - ||u-v||_inf), one quarter per unit step.
    std::vector<int64_t> strides(d);
    int64_t side = window.side();
    strides[d - 1] = 1;
    for (int j = d - 2; j >= 0; --j) strides[j] = strides[j + 1] * side;

    // neighbor offsets in {-1,0,1}^d \ {0}, split by scan order
    std::vector<std::vector<int>> offsets;
    std::vector<int> off(d, -1);
    while (true) {
        bool all_zero = std::all_of(off.begin(), off.end(), [](int o) { return o == 0; });
        if (!all_zero) offsets.push_back(off);
        int j = d - 1;
        while (j >= 0) {
            if (++off[j] <= 1) break;
            off[j] = -1;
            --j;
        }
        if (j < 0) break;
    }
    auto lex_negative = [](const std::vector<int>& o) {
        for (int x : o) {
            if (x < 0) return true;
            if (x > 0) return false;
        }
        return false;
    };

    std::vector<int64_t> site(d);
    auto pass = [&](bool forward) {
        for (size_t step = 0; step < n; ++step) {
            size_t idx = forward ? step : n - 1 - step;
            window.site_at(idx, site);
            int64_t best = out.R1q[idx];
            for (const auto& o : offsets) {
                if (lex_negative(o) != forward) continue;
                bool ok = true;
                size_t nidx = idx;
                for (int j = 0; j < d; ++j) {
                    int64_t c = site[j] + o[j];
                    if (c < -window.half_width() || c > window.half_width()) {
                        ok = false;
                        break;
                    }
                    nidx += static_cast<size_t>(o[j] * strides[j]);
                }
                if (!ok) continue;
                best = std::max(best, out.R1q[nidx] - 1);
            }
            out.R1q[idx] = best;
        }
    };
    pass(true);
    pass(false);

    out.I1.resize(n);
    for (size_t i = 0; i < n; ++i) out.I1[i] = ceil_log2_quarters(out.R1q[i]);
    return out;
}

std::vector<int> scatter_field(const GridWindow& window, const std::vector<int>& I1) {
    const int d = window.dim();
    const size_t n = window.size();
    const int64_t hw = window.half_width();
    int max_scale = 0;
    for (int s : I1) max_scale = std::max(max_scale, s);

    std::vector<int> I(I1);
    std::vector<int64_t> site(d);
    for (int s = 1; s <= max_scale; ++s) {
        // mark scale-s cells owning a site with I1 == s
        int64_t cell_lo = floor_div(-hw, int64_t{1} << s);
        int64_t cell_hi = floor_div(hw, int64_t{1} << s);
        int64_t cells = cell_hi - cell_lo + 1;
        size_t table = 1;
        for (int j = 0; j < d; ++j) table *= static_cast<size_t>(cells);
        std::vector<uint8_t> mark(table, 0);
        auto cell_index = [&](std::span<const int64_t> v) {
            size_t idx = 0;
            for (int j = 0; j < d; ++j)
                idx = idx * static_cast<size_t>(cells) +
                      static_cast<size_t>(floor_div(v[j], int64_t{1} << s) - cell_lo);
            return idx;
        };
        bool any = false;
        for (size_t i = 0; i < n; ++i)
            if (I1[i] == s) {
                window.site_at(i, site);
                mark[cell_index(site)] = 1;
                any = true;
            }
        if (!any) continue;
        for (size_t i = 0; i < n; ++i)
            if (I[i] < s) {
                window.site_at(i, site);
                if (mark[cell_index(site)]) I[i] = s;
            }
    }
    return I;
}

CoverComputation::CoverComputation(const WindowRealization& real, int i_max) : real_(&real) {
    const auto& win = real.window();
    fields_.dim = win.dim();
    fields_.core_half_width = real.core_half_width();
    fields_.margin = real.margin();
    fields_.i_max = i_max >= 0 ? i_max : default_i_max(real.core_half_width());

    count_crossings();

    // I0 from the per-scale tables
    const size_t n = win.size();
    fields_.I0.assign(n, fields_.i_max);
    fields_.saturated.assign(n, 1);
    std::vector<int64_t> site(fields_.dim);
    for (size_t idx = 0; idx < n; ++idx) {
        win.site_at(idx, site);
        for (int i = 0; i <= fields_.i_max; ++i) {
            int64_t q = int64_t{1} << (i * fields_.dim);
            if (crossing_count(site, i) <= q) {
                fields_.I0[idx] = i;
                fields_.saturated[idx] = 0;
                break;
            }
        }
    }

    auto smoothed = smooth_field(win, fields_.I0);
    fields_.R1q = std::move(smoothed.R1q);
    fields_.I1 = std::move(smoothed.I1);
    fields_.I = scatter_field(win, fields_.I1);

    assemble();
    audit_margins();
}

void CoverComputation::count_crossings() {
    const auto& win = real_->window();
    const int d = fields_.dim;
    const int64_t hw = win.half_width();
    const int scales = fields_.i_max + 1;
    counts_.resize(scales);
    cell_lo_.resize(static_cast<size_t>(scales) * d);
    cell_n_.resize(static_cast<size_t>(scales) * d);
    for (int i = 0; i < scales; ++i) {
        int64_t s = int64_t{1} << i;
        size_t table = 1;
        for (int j = 0; j < d; ++j) {
            cell_lo_[static_cast<size_t>(i) * d + j] = floor_div(-hw, s);
            cell_n_[static_cast<size_t>(i) * d + j] = floor_div(hw, s) - floor_div(-hw, s) + 1;
            table *= static_cast<size_t>(cell_n_[static_cast<size_t>(i) * d + j]);
        }
        counts_[i].assign(table, 0);
    }

    std::vector<int64_t> site(d), clo(d), chi(d), cell(d);
    std::vector<double> a(d);
    DyadicBox box;
    box.corner.resize(d);
    for (size_t idx = 0; idx < win.size(); ++idx) {
        win.site_at(idx, site);
        auto p = real_->point(idx);
        for (int j = 0; j < d; ++j) a[j] = static_cast<double>(site[j]);
        for (int i = 0; i < scales; ++i) {
            int64_t s = int64_t{1} << i;
            box.scale = i;
            bool empty = false;
            for (int j = 0; j < d; ++j) {
                double lo = std::min(a[j], p[j]);
                double hi = std::max(a[j], p[j]);
                // candidate cells with one-cell cushion; the exact test decides
                int64_t cmin = static_cast<int64_t>(std::floor((lo + 0.5) / s)) - 1;
                int64_t cmax = static_cast<int64_t>(std::floor((hi + 0.5) / s)) + 1;
                clo[j] = std::max(cmin, cell_lo_[static_cast<size_t>(i) * d + j]);
                chi[j] = std::min(cmax, cell_lo_[static_cast<size_t>(i) * d + j] +
                                            cell_n_[static_cast<size_t>(i) * d + j] - 1);
                if (clo[j] > chi[j]) empty = true;
            }
            if (empty) continue;
            for_each_cell(clo, chi, [&](std::span<const int64_t> c) {
                for (int j = 0; j < d; ++j) box.corner[j] = c[j] * s;
                if (box.contains_point(p)) return;
                if (segment_intersects_box(a, p, box)) ++counts_[i][count_index(i, c)];
            });
        }
    }
}

size_t CoverComputation::count_index(int scale, std::span<const int64_t> cell) const {
    const int d = fields_.dim;
    size_t idx = 0;
    for (int j = 0; j < d; ++j) {
        size_t off = static_cast<size_t>(cell[j] - cell_lo_[static_cast<size_t>(scale) * d + j]);
        idx = idx * static_cast<size_t>(cell_n_[static_cast<size_t>(scale) * d + j]) + off;
    }
    return idx;
}

int64_t CoverComputation::crossing_count(std::span<const int64_t> v, int scale) const {
    const int d = fields_.dim;
    std::vector<int64_t> cell(d);
    for (int j = 0; j < d; ++j) cell[j] = floor_div(v[j], int64_t{1} << scale);
    return counts_[scale][count_index(scale, cell)];
}

int64_t CoverComputation::crossing_count_box(const DyadicBox& box) const {
    std::vector<int64_t> cell(box.dim());
    for (int j = 0; j < box.dim(); ++j) cell[j] = box.corner[j] >> box.scale;
    return counts_[box.scale][count_index(box.scale, cell)];
}

namespace {

void dedupe_cover_boxes(const GridWindow& win, const std::vector<int>& I,
                        std::vector<DyadicBox>& boxes, std::vector<int32_t>& box_of_site) {
    const int d = win.dim();
    const size_t n = win.size();
    box_of_site.assign(n, -1);
    std::unordered_map<uint64_t, int32_t> index;
    index.reserve(n);
    std::vector<int64_t> site(d);
    for (size_t idx = 0; idx < n; ++idx) {
        win.site_at(idx, site);
        int s = I[idx];
        uint64_t key = static_cast<uint64_t>(s);
        for (int j = 0; j < d; ++j) {
            uint64_t c = static_cast<uint64_t>(floor_div(site[j], int64_t{1} << s) + (1 << 30));
            key = key * 0x100000001B3ULL ^ c;
        }
        auto [it, inserted] = index.try_emplace(key, static_cast<int32_t>(boxes.size()));
        if (inserted) boxes.push_back(enclosing_box(site, s));
        box_of_site[idx] = it->second;
    }
}

} // namespace

AssembledCover assemble_cover(const GridWindow& window, const std::vector<int>& I1) {
    AssembledCover out;
    out.I = scatter_field(window, I1);
    dedupe_cover_boxes(window, out.I, out.boxes, out.box_of_site);
    return out;
}

void CoverComputation::assemble() {
    dedupe_cover_boxes(real_->window(), fields_.I, fields_.boxes, fields_.box_of_site);
}

void CoverComputation::audit_margins() {
    const auto& win = real_->window();
    const int d = fields_.dim;
    const int64_t hw = win.half_width();
    const int64_t L = fields_.core_half_width;
    const int64_t M = fields_.margin;

    // A: observed displacements as long as the margin imply unseen sites
    // beyond the window could cross core boxes.
    if (real_->max_displacement() > 0.0 && real_->max_displacement() >= static_cast<double>(M))
        throw MarginExceeded("cover: max displacement " +
                             std::to_string(real_->max_displacement()) + " >= margin " +
                             std::to_string(M));

    std::vector<int64_t> site(d);
    const size_t n = win.size();
    for (size_t idx = 0; idx < n; ++idx) {
        if (fields_.saturated[idx]) {
            win.site_at(idx, site);
            throw MarginInsufficient("cover: I0 saturated at scale cap " +
                                     std::to_string(fields_.i_max));
        }
    }

    // C: the outermost layer must not influence the core through the
    // smoothing cone beyond the baseline R = 1.
    for (size_t idx = 0; idx < n; ++idx) {
        win.site_at(idx, site);
        bool outermost = false;
        for (int j = 0; j < d; ++j)
            if (site[j] == -hw || site[j] == hw) outermost = true;
        if (outermost && fields_.R0_quarters(idx) - M > 4)
            throw MarginInsufficient("cover: boundary R0 can influence the core (R0q=" +
                                     std::to_string(fields_.R0_quarters(idx)) + ", M=" +
                                     std::to_string(M) + ")");
    }

    // D: scatter from deep-margin sites must not reach the core.
    for (size_t idx = 0; idx < n; ++idx) {
        win.site_at(idx, site);
        int64_t core_dist = 0;
        for (int j = 0; j < d; ++j)
            core_dist = std::max(core_dist, std::max<int64_t>(0, std::abs(site[j]) - L));
        if (core_dist <= M / 2) continue;
        auto box = enclosing_box(site, fields_.I1[idx]);
        bool touches_core = true;
        for (int j = 0; j < d; ++j)
            if (box.corner[j] > L || box.corner[j] + box.side() - 1 < -L) touches_core = false;
        if (touches_core)
            throw MarginInsufficient("cover: deep-margin site scatters onto the core");
    }

    // E: cover boxes touching the core need their full neighborhoods
    // (ring sites and twice-the-side extents) inside the window.
    for (const auto& box : fields_.boxes) {
        bool touches_core = true;
        for (int j = 0; j < d; ++j)
            if (box.lo(j) > static_cast<double>(L) + 0.5 ||
                box.hi(j) < -static_cast<double>(L) - 0.5)
                touches_core = false;
        if (!touches_core) continue;
        int64_t reach = 2 * box.side() + 1;
        for (int j = 0; j < d; ++j) {
            if (box.corner[j] - reach < -hw || box.corner[j] + box.side() - 1 + reach > hw)
                throw MarginInsufficient("cover: core box at scale " + std::to_string(box.scale) +
                                         " has its neighborhood outside the window");
        }
    }
}

std::vector<int32_t> touching_boxes(const CoverFields& fields, const GridWindow& window,
                                    const DyadicBox& box) {
    const int d = box.dim();
    std::vector<int64_t> lo(d), hi(d);
    for (int j = 0; j < d; ++j) {
        lo[j] = std::max(box.corner[j] - 1, -window.half_width());
        hi[j] = std::min(box.corner[j] + box.side(), window.half_width());
    }
    std::vector<int32_t> out;
    for_each_cell(lo, hi, [&](std::span<const int64_t> v) {
        int32_t b = fields.box_of_site[window.index_of(v)];
        if (b >= 0 && fields.boxes[b].touches(box)) out.push_back(b);
    });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<int32_t> CoverComputation::touching_boxes(const DyadicBox& box) const {
    return pertlat::touching_boxes(fields_, real_->window(), box);
}

CoverReport CoverComputation::verify() const {
    CoverReport report;
    const int d = fields_.dim;
    const int64_t L = fields_.core_half_width;

    // Unique-membership over the core: count cover boxes containing each site.
    std::unordered_map<uint64_t, char> in_cover;
    in_cover.reserve(fields_.boxes.size() * 2);
    auto box_key = [&](int s, std::span<const int64_t> cell) {
        uint64_t key = static_cast<uint64_t>(s);
        for (int j = 0; j < d; ++j)
            key = key * 0x100000001B3ULL ^ static_cast<uint64_t>(cell[j] + (1 << 30));
        return key;
    };
    std::vector<int64_t> cell(d);
    for (const auto& box : fields_.boxes) {
        for (int j = 0; j < d; ++j) cell[j] = box.corner[j] >> box.scale;
        in_cover[box_key(box.scale, cell)] = 1;
    }
    report.partition_ok = true;
    std::vector<int64_t> site(d);
    GridWindow core(d, L);
    for (size_t idx = 0; idx < core.size(); ++idx) {
        core.site_at(idx, site);
        int members = 0;
        for (int s = 0; s <= fields_.i_max; ++s) {
            for (int j = 0; j < d; ++j) cell[j] = floor_div(site[j], int64_t{1} << s);
            if (in_cover.count(box_key(s, cell))) ++members;
        }
        if (members != 1) {
            report.partition_ok = false;
            report.violations.push_back("site in " + std::to_string(members) + " cover boxes");
        }
    }

    // Crossing bound (2.1) and diameter ratio (2.2) for core-relevant boxes.
    report.crossing_ok = true;
    report.diameter_ok = true;
    for (const auto& box : fields_.boxes) {
        bool touches_core = true;
        for (int j = 0; j < d; ++j)
            if (box.lo(j) > static_cast<double>(L) + 0.5 ||
                box.hi(j) < -static_cast<double>(L) - 0.5)
                touches_core = false;
        if (!touches_core) continue;
        int64_t crossings = crossing_count_box(box);
        if (crossings > static_cast<int64_t>(box.lattice_count())) {
            report.crossing_ok = false;
            report.violations.push_back("crossing bound violated at scale " +
                                        std::to_string(box.scale) + ": " +
                                        std::to_string(crossings) + " > " +
                                        std::to_string(box.lattice_count()));
        }
        for (int32_t nb : touching_boxes(box)) {
            if (std::abs(fields_.boxes[nb].scale - box.scale) > 1) {
                report.diameter_ok = false;
                report.violations.push_back("diameter ratio violated: scales " +
                                            std::to_string(box.scale) + " and " +
                                            std::to_string(fields_.boxes[nb].scale) + " touch");
            }
        }
    }
    return report;
}

CoverWithRetry::CoverWithRetry(const PerturbationLaw& law, int64_t core_half_width, uint64_t seed,
                               int64_t initial_margin, int max_retries) {
    int64_t margin = initial_margin > 0 ? initial_margin : default_margin(law, core_half_width);
    for (int attempt = 0;; ++attempt) {
        try {
            real_ = std::make_unique<WindowRealization>(law, core_half_width, margin, seed);
            comp_ = std::make_unique<CoverComputation>(*real_);
            retries_ = attempt;
            return;
        } catch (const ModelError&) {
            if (attempt >= max_retries) throw;
            margin *= 2;
        }
    }
}

} // namespace pertlat
