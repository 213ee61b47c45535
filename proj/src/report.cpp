#include "pertlat/report.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "pertlat/cover.hpp"
#include "pertlat/errors.hpp"
#include "pertlat/matching.hpp"

namespace pertlat {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

uint64_t fnv1a64(const std::string& text) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hash_hex(const std::string& text) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    out << content;
}

void write_tail_curve_csv(const std::string& path, const TailCurve& curve,
                          const std::string& config_hash) {
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& p : curve.points) {
        if (!(p.r > prev)) throw ValidationError("tail curve: r must be strictly increasing");
        prev = p.r;
    }
    std::ostringstream out;
    out << "# config_hash=" << config_hash << "\n";
    out << "r,value,stderr,estimator,law,d,trials,seed\n";
    for (const auto& p : curve.points) {
        out << format_g17(p.r) << ',' << format_g17(p.value) << ',' << format_g17(p.stderr_)
            << ',' << curve.estimator << ',' << curve.law << ',' << curve.d << ','
            << curve.trials << ',' << curve.seed << "\n";
    }
    write_text_file(path, out.str());
}

TailCurve read_tail_curve_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open: " + path);
    TailCurve curve;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 8) throw ValidationError("bad tail curve row: " + line);
        CurvePoint p;
        p.r = std::strtod(cells[0].c_str(), nullptr);
        p.value = std::strtod(cells[1].c_str(), nullptr);
        p.stderr_ = std::strtod(cells[2].c_str(), nullptr);
        curve.estimator = cells[3];
        curve.law = cells[4];
        curve.d = std::atoi(cells[5].c_str());
        curve.trials = std::atoll(cells[6].c_str());
        curve.seed = std::strtoull(cells[7].c_str(), nullptr, 10);
        curve.points.push_back(p);
    }
    return curve;
}

std::string cover_to_json(const GridWindow& window, const CoverFields& fields) {
    nlohmann::json doc;
    auto& sites = doc["sites"];
    sites = nlohmann::json::array();
    std::vector<int64_t> v(static_cast<size_t>(fields.dim));
    for (size_t idx = 0; idx < window.size(); ++idx) {
        window.site_at(idx, v);
        nlohmann::json rec;
        rec["v"] = v;
        rec["I0"] = fields.I0[idx];
        rec["I1"] = fields.I1[idx];
        rec["I"] = fields.I[idx];
        rec["saturated"] = static_cast<bool>(fields.saturated[idx]);
        sites.push_back(std::move(rec));
    }
    auto& boxes = doc["boxes"];
    boxes = nlohmann::json::array();
    for (const auto& box : fields.boxes) {
        nlohmann::json rec;
        rec["scale"] = box.scale;
        rec["corner"] = box.corner;
        boxes.push_back(std::move(rec));
    }
    return doc.dump(2) + "\n";
}

void write_match_csv(const std::string& path, const MatchResult& match,
                     const std::string& config_hash) {
    std::ostringstream out;
    out << "# config_hash=" << config_hash << "\n";
    for (int j = 0; j < match.dim; ++j) out << "v" << j << ',';
    for (int j = 0; j < match.dim; ++j) out << "m" << j << ',';
    out << "distance\n";
    for (size_t k = 0; k < match.size(); ++k) {
        for (int j = 0; j < match.dim; ++j)
            out << match.site(k)[static_cast<size_t>(j)] << ',';
        for (int j = 0; j < match.dim; ++j)
            out << format_g17(match.point(k)[static_cast<size_t>(j)]) << ',';
        out << format_g17(match.distance[k]) << "\n";
    }
    write_text_file(path, out.str());
}

} // namespace pertlat
