#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pertlat/geometry.hpp"
#include "pertlat/realization.hpp"

namespace pertlat {

// Scale fields and the assembled regular cover for one realization.
// R-values are kept in quarter units (4 * 2^I) so the smoothing cone
// max { R0_u - ||u-v||/4 } stays in integer arithmetic.
struct CoverFields {
    int dim = 1;
    int64_t core_half_width = 0;
    int64_t margin = 0;
    int i_max = 0;

    std::vector<int> I0;          // per extended-window site
    std::vector<uint8_t> saturated;
    std::vector<int64_t> R1q;     // R^1 in quarters
    std::vector<int> I1;
    std::vector<int> I;

    std::vector<DyadicBox> boxes;      // deduplicated cover
    std::vector<int32_t> box_of_site;  // extended site -> index into boxes

    int64_t R0_quarters(size_t idx) const { return int64_t{4} << I0[idx]; }
    int64_t R_of(size_t idx) const { return int64_t{1} << I[idx]; }
};

struct CoverReport {
    bool partition_ok = false;
    bool crossing_ok = false;
    bool diameter_ok = false;
    std::vector<std::string> violations;
    bool all_ok() const { return partition_ok && crossing_ok && diameter_ok; }
};

// Default scale cap: boxes stay inside the core window.
int default_i_max(int64_t core_half_width);

// Cover boxes touching the given box, found by mapping the box's one-site
// ring through box_of_site. Includes the box itself when it is in the cover.
std::vector<int32_t> touching_boxes(const CoverFields& fields, const GridWindow& window,
                                    const DyadicBox& box);

// C(box) = { u in the window : [u, Pi_u] meets the box, Pi_u outside it }.
// Raises MarginExceeded when an unseen site beyond the window could
// plausibly cross too (observed displacements reach from the window edge
// to the box).
std::vector<size_t> crossing_set(const WindowRealization& real, const DyadicBox& box);

// I0_v = min { i <= i_max : |C(Q_i(v))| <= 2^{i d} }; saturated at the cap.
std::pair<int, bool> compute_I0_site(const WindowRealization& real, std::span<const int64_t> v,
                                     int i_max);

struct SmoothedField {
    std::vector<int64_t> R1q;
    std::vector<int> I1;
};

// R1_v = max_u (R0_u - ||u-v||_inf / 4) over the window, exact via a
// two-pass Chebyshev chamfer scan; I1 = ceil(log2 R1).
SmoothedField smooth_field(const GridWindow& window, const std::vector<int>& I0);

// I_v = max { I1_u : v in Q_{I1_u}(u) }, by scattering per-scale cells.
std::vector<int> scatter_field(const GridWindow& window, const std::vector<int>& I1);

struct AssembledCover {
    std::vector<int> I;
    std::vector<DyadicBox> boxes;      // deduplicated { Q_{I_v}(v) }
    std::vector<int32_t> box_of_site;
};
// Scatter I1 into I and collect the cover boxes without repetition.
AssembledCover assemble_cover(const GridWindow& window, const std::vector<int>& I1);

// Full pipeline with margin audits, and per-scale crossing-count tables
// retained for verification. Throws MarginExceeded / MarginInsufficient.
class CoverComputation {
public:
    CoverComputation(const WindowRealization& real, int i_max = -1);

    const CoverFields& fields() const { return fields_; }
    const WindowRealization& realization() const { return *real_; }

    // Crossing count of the scale-i dyadic box containing site v.
    int64_t crossing_count(std::span<const int64_t> v, int scale) const;
    int64_t crossing_count_box(const DyadicBox& box) const;

    // Indices into fields().boxes of the cover boxes touching the given box.
    std::vector<int32_t> touching_boxes(const DyadicBox& box) const;

    CoverReport verify() const;

private:
    void count_crossings();
    void assemble();
    void audit_margins();

    const WindowRealization* real_;
    CoverFields fields_;
    // counts_[i] is a dense table over scale-i cells covering the window
    std::vector<std::vector<int64_t>> counts_;
    std::vector<int64_t> cell_lo_;   // per scale*dim: first cell index
    std::vector<int64_t> cell_n_;    // per scale*dim: cell count
    size_t count_index(int scale, std::span<const int64_t> cell) const;
};

// Sample + cover with margin doubling on audit failures (up to max_retries).
struct CoverRun {
    WindowRealization realization;
    CoverFields fields;
    CoverComputation* computation = nullptr; // owned by holder below
    int retries = 0;
};

class CoverWithRetry {
public:
    CoverWithRetry(const PerturbationLaw& law, int64_t core_half_width, uint64_t seed,
                   int64_t initial_margin = -1, int max_retries = 3);
    const WindowRealization& realization() const { return *real_; }
    const CoverComputation& computation() const { return *comp_; }
    int retries() const { return retries_; }

private:
    std::unique_ptr<WindowRealization> real_;
    std::unique_ptr<CoverComputation> comp_;
    int retries_ = 0;
};

} // namespace pertlat
