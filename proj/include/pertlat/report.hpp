#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pertlat/curve.hpp"

namespace pertlat {

struct CoverFields;
struct MatchResult;

// CSV schema: r,value,stderr,estimator,law,d,trials,seed with one leading
// "# config_hash=<hex>" comment. Numbers print at 17 significant digits so
// curves round-trip bit-exactly.
void write_tail_curve_csv(const std::string& path, const TailCurve& curve,
                          const std::string& config_hash);
TailCurve read_tail_curve_csv(const std::string& path);

std::string format_g17(double v);

// FNV-1a over the canonical (key-sorted) serialization; 16 hex digits.
uint64_t fnv1a64(const std::string& text);
std::string hash_hex(const std::string& text);

// Cover export: per-site records {v, I0, I1, I, saturated} plus box list.
class GridWindow;
std::string cover_to_json(const GridWindow& window, const CoverFields& fields);

// MatchResult export: v coordinates, matched point coordinates, distance.
void write_match_csv(const std::string& path, const MatchResult& match,
                     const std::string& config_hash);

void write_text_file(const std::string& path, const std::string& content);

} // namespace pertlat
