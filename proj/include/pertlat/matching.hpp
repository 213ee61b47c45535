#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pertlat/cover.hpp"

namespace pertlat {

// A partial or perfect matching v -> Pi_u on a site region. Labels are
// extended-window site indices, so coincident point locations stay
// distinct. matched_label[k] == -1 marks an unmatched site.
struct MatchResult {
    std::string method;                 // cover-neighborhood | stable-1d
    int dim = 1;
    std::vector<int64_t> sites;         // region sites, flattened (n * dim)
    std::vector<int64_t> matched_label; // extended site index or -1
    std::vector<double> matched_point;  // flattened positions (NaN when unmatched)
    std::vector<double> distance;       // ||M(v) - v||_inf (NaN when unmatched)
    std::vector<size_t> unmatched;      // indices into the region

    size_t size() const { return matched_label.size(); }
    size_t matched_count() const { return matched_label.size() - unmatched.size(); }
    std::span<const int64_t> site(size_t k) const {
        return {sites.data() + k * dim, static_cast<size_t>(dim)};
    }
    std::span<const double> point(size_t k) const {
        return {matched_point.data() + k * dim, static_cast<size_t>(dim)};
    }
};

// N_v: the cover box of v together with every cover box touching it.
std::vector<DyadicBox> neighborhood(const CoverFields& fields, const GridWindow& window,
                                    std::span<const int64_t> v);
std::vector<DyadicBox> neighborhood(const CoverComputation& comp, std::span<const int64_t> v);

// Maximum bipartite matching (Hopcroft-Karp) between the given sites and
// the points lying in their cover neighborhoods. Deterministic: sites in
// lexicographic order, candidates per site sorted by (distance, label).
MatchResult match_region(const WindowRealization& real, const CoverFields& fields,
                         const std::vector<std::vector<int64_t>>& region);

// Cover matching of the full core window. Postconditions: matched
// distances <= 3 R_v, and every deep-interior site
// (further than 3 max R from the core boundary) matched, else
// InteriorUnsaturated.
MatchResult match_window(const WindowRealization& real, const CoverFields& fields);

// Exhaustive Hall condition on a small region (<= 20 sites): every subset
// A has |N(A)| >= |A|, points counted with multiplicity.
bool hall_check_bruteforce(const WindowRealization& real, const CoverFields& fields,
                           const std::vector<std::vector<int64_t>>& region);

} // namespace pertlat
