#include "pertlat/law.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>

#include "pertlat/errors.hpp"
#include "pertlat/quadrature.hpp"

namespace pertlat {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

double linf_norm(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_number(std::string_view s, const char* what) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ValidationError(std::string("bad numeric value for ") + what + ": '" +
                              std::string(s) + "'");
    return v;
}

// E[||u||_inf^beta] for u uniform on the unit circle: (4/pi) int_0^{pi/4} cos^beta.
double circle_linf_moment(double beta) {
    auto f = [beta](double th) { return std::pow(std::cos(th), beta); };
    return 4.0 / M_PI * integrate_adaptive(f, 0.0, M_PI / 4.0, 1e-15);
}

} // namespace

double logaddexp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

// std::erfc is accurate to ~1 ulp but underflows near z = 26.6; beyond that
// we switch to the asymptotic series erfc(z) ~ exp(-z^2)/(z sqrt(pi)) *
// (1 - 1/(2z^2) + 3/(4z^4) - ...), whose truncation error at z > 25 is
// far below 1e-15 relative.
double log_erfc(double z) {
    if (z < 25.0) return std::log(std::erfc(z));
    double iz2 = 1.0 / (z * z);
    double series = 1.0 - 0.5 * iz2 * (1.0 - 1.5 * iz2 * (1.0 - 2.5 * iz2));
    return -z * z - std::log(z * std::sqrt(M_PI)) + std::log(series);
}

PerturbationLaw PerturbationLaw::gaussian(double sigma, int dim) {
    if (!(sigma > 0.0)) throw ValidationError("gaussian: sigma must be positive");
    if (dim < 1) throw ValidationError("dimension must be >= 1");
    PerturbationLaw law;
    law.kind_ = LawKind::Gaussian;
    law.dim_ = dim;
    law.sigma_ = sigma;
    return law;
}

PerturbationLaw PerturbationLaw::poly_radial(double alpha, int dim) {
    if (!(alpha > 0.0)) throw ValidationError("poly-radial: alpha must be positive");
    if (dim < 1) throw ValidationError("dimension must be >= 1");
    PerturbationLaw law;
    law.kind_ = LawKind::PolyRadial;
    law.dim_ = dim;
    law.alpha_ = alpha;
    if (dim == 2) law.minf_moment_alpha_ = circle_linf_moment(alpha);
    return law;
}

PerturbationLaw PerturbationLaw::poly_coord(double alpha, int dim) {
    if (!(alpha > 0.0)) throw ValidationError("poly-coord: alpha must be positive");
    if (dim < 1) throw ValidationError("dimension must be >= 1");
    PerturbationLaw law;
    law.kind_ = LawKind::PolyCoord;
    law.dim_ = dim;
    law.alpha_ = alpha;
    return law;
}

PerturbationLaw PerturbationLaw::point_mass(std::vector<double> offset) {
    if (offset.empty()) throw ValidationError("pointmass: offset must be nonempty");
    PerturbationLaw law;
    law.kind_ = LawKind::PointMass;
    law.dim_ = static_cast<int>(offset.size());
    law.offset_ = std::move(offset);
    return law;
}

PerturbationLaw PerturbationLaw::parse(std::string_view spec, int dim) {
    auto colon = spec.find(':');
    std::string_view name = spec.substr(0, colon);
    std::string_view args = colon == std::string_view::npos ? std::string_view{}
                                                            : spec.substr(colon + 1);
    auto keyed = [&](std::string_view key) {
        auto eq = args.find('=');
        if (eq == std::string_view::npos || args.substr(0, eq) != key)
            throw ValidationError("law '" + std::string(name) + "' expects " + std::string(key) +
                                  "=<value>");
        return parse_number(args.substr(eq + 1), key.data());
    };
    if (name == "gaussian") return gaussian(keyed("sigma"), dim);
    if (name == "poly-radial") return poly_radial(keyed("alpha"), dim);
    if (name == "poly-coord") return poly_coord(keyed("alpha"), dim);
    if (name == "pointmass") {
        std::vector<double> off;
        size_t pos = 0;
        while (pos <= args.size()) {
            auto comma = args.find(',', pos);
            auto part = args.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                                         : comma - pos);
            off.push_back(parse_number(part, "offset"));
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        if (static_cast<int>(off.size()) == 1 && dim > 1) off.assign(dim, off[0]);
        if (static_cast<int>(off.size()) != dim)
            throw ValidationError("pointmass: offset has " + std::to_string(off.size()) +
                                  " components but d=" + std::to_string(dim));
        return point_mass(std::move(off));
    }
    throw ValidationError("unknown law '" + std::string(name) + "'");
}

std::string PerturbationLaw::to_string() const {
    switch (kind_) {
    case LawKind::Gaussian: return "gaussian:sigma=" + format_double(sigma_);
    case LawKind::PolyRadial: return "poly-radial:alpha=" + format_double(alpha_);
    case LawKind::PolyCoord: return "poly-coord:alpha=" + format_double(alpha_);
    case LawKind::PointMass: {
        std::string s = "pointmass:";
        for (size_t j = 0; j < offset_.size(); ++j) {
            if (j) s += ',';
            s += format_double(offset_[j]);
        }
        return s;
    }
    }
    return {};
}

void PerturbationLaw::sample(SiteRng& rng, std::span<double> out) const {
    assert(static_cast<int>(out.size()) == dim_);
    switch (kind_) {
    case LawKind::Gaussian:
        for (int j = 0; j < dim_; ++j) out[j] = sigma_ * rng.normal();
        return;
    case LawKind::PolyCoord:
        for (int j = 0; j < dim_; ++j) {
            double radius = std::pow(rng.uniform01(), -1.0 / alpha_);
            double sign = rng.uniform01() <= 0.5 ? -1.0 : 1.0;
            out[j] = sign * radius;
        }
        return;
    case LawKind::PolyRadial: {
        double radius = std::pow(rng.uniform01(), -1.0 / alpha_);
        if (dim_ == 1) {
            out[0] = (rng.uniform01() <= 0.5 ? -1.0 : 1.0) * radius;
            return;
        }
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (int j = 0; j < dim_; ++j) {
                out[j] = rng.normal();
                norm2 += out[j] * out[j];
            }
        } while (norm2 < 1e-290);
        double scale = radius / std::sqrt(norm2);
        for (int j = 0; j < dim_; ++j) out[j] *= scale;
        return;
    }
    case LawKind::PointMass:
        std::copy(offset_.begin(), offset_.end(), out.begin());
        return;
    }
}

bool PerturbationLaw::per_coordinate() const {
    switch (kind_) {
    case LawKind::Gaussian:
    case LawKind::PolyCoord:
    case LawKind::PointMass: return true;
    case LawKind::PolyRadial: return dim_ == 1;
    }
    return false;
}

double PerturbationLaw::coord_cdf(double x) const {
    switch (kind_) {
    case LawKind::Gaussian: return 0.5 * std::erfc(-x / (sigma_ * kSqrt2));
    case LawKind::PolyCoord:
    case LawKind::PolyRadial:
        if (x <= -1.0) return 0.5 * std::pow(-x, -alpha_);
        if (x < 1.0) return 0.5;
        return 1.0 - 0.5 * std::pow(x, -alpha_);
    case LawKind::PointMass: return offset_[0] <= x ? 1.0 : 0.0;
    }
    return 0.0;
}

double PerturbationLaw::coord_quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("quantile level outside [0,1]");
    switch (kind_) {
    case LawKind::PolyCoord:
    case LawKind::PolyRadial:
        if (p < 0.5) return -std::pow(2.0 * p, -1.0 / alpha_);
        if (p > 0.5) return std::pow(2.0 * (1.0 - p), -1.0 / alpha_);
        return -1.0;
    case LawKind::PointMass: return offset_[0];
    case LawKind::Gaussian: break;
    }
    // Acklam's rational approximation for the normal quantile, polished by
    // one Halley step against erfc; absolute error well below 1e-14.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    double q, x;
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return std::numeric_limits<double>::infinity();
    if (p < 0.02425) {
        q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
    } else if (p <= 0.97575) {
        q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
    }
    double e = 0.5 * std::erfc(-x / kSqrt2) - p;
    double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return sigma_ * x;
}

double PerturbationLaw::coord_interval_probability(double lo, double hi) const {
    if (!(hi >= lo)) return 0.0;
    if (kind_ == LawKind::PointMass) return (offset_[0] >= lo && offset_[0] <= hi) ? 1.0 : 0.0;
    return std::max(0.0, coord_cdf(hi) - coord_cdf(lo));
}

double PerturbationLaw::coord_exclusion_probability(double lo, double hi) const {
    if (!(hi >= lo)) return 1.0;
    if (kind_ == LawKind::PointMass) return (offset_[0] >= lo && offset_[0] <= hi) ? 0.0 : 1.0;
    // Two one-sided tails; each is accurate even when tiny.
    double below, above;
    switch (kind_) {
    case LawKind::Gaussian:
        below = 0.5 * std::erfc(-lo / (sigma_ * kSqrt2));
        above = 0.5 * std::erfc(hi / (sigma_ * kSqrt2));
        break;
    default: { // polynomial marginal
        below = lo <= -1.0 ? 0.5 * std::pow(-lo, -alpha_) : (lo <= 1.0 ? 0.5 : coord_cdf(lo));
        above = hi >= 1.0 ? 0.5 * std::pow(hi, -alpha_) : (hi >= -1.0 ? 0.5 : 1.0 - coord_cdf(hi));
        break;
    }
    }
    return std::min(1.0, below + above);
}

double PerturbationLaw::coord_log_tail_below(double x) const {
    switch (kind_) {
    case LawKind::Gaussian: return std::log(0.5) + log_erfc(-x / (sigma_ * kSqrt2));
    case LawKind::PolyCoord:
    case LawKind::PolyRadial:
        if (x <= -1.0) return std::log(0.5) - alpha_ * std::log(-x);
        return std::log(coord_cdf(x));
    case LawKind::PointMass:
        return offset_[0] <= x ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

double PerturbationLaw::coord_log_tail_above(double x) const {
    switch (kind_) {
    case LawKind::Gaussian: return std::log(0.5) + log_erfc(x / (sigma_ * kSqrt2));
    case LawKind::PolyCoord:
    case LawKind::PolyRadial:
        if (x >= 1.0) return std::log(0.5) - alpha_ * std::log(x);
        return std::log1p(-coord_cdf(x));
    case LawKind::PointMass:
        return offset_[0] >= x ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

double PerturbationLaw::coord_abs_tail(double r) const {
    if (r <= 0.0) return 1.0;
    switch (kind_) {
    case LawKind::Gaussian: return std::erfc(r / (sigma_ * kSqrt2));
    case LawKind::PolyCoord:
    case LawKind::PolyRadial: return std::min(1.0, std::pow(r, -alpha_));
    case LawKind::PointMass: return std::abs(offset_[0]) >= r ? 1.0 : 0.0;
    }
    return 0.0;
}

double PerturbationLaw::radial_tail_d2(double r) const {
    // ||xi||_inf = R * ||u||_inf with ||u||_inf = cos(theta) on the
    // fundamental octant theta in [0, pi/4].
    if (r <= M_SQRT1_2) return 1.0;
    if (r >= 1.0) return minf_moment_alpha_ * std::pow(r, -alpha_);
    double split = std::acos(r);
    auto f = [&](double th) { return std::pow(std::cos(th) / r, alpha_); };
    double part = integrate_adaptive(f, split, M_PI / 4.0, 1e-15);
    return 4.0 / M_PI * (split + part);
}

double PerturbationLaw::tail_probability(double r) const {
    if (r <= 0.0) return 1.0;
    switch (kind_) {
    case LawKind::PointMass: return linf_norm(offset_) >= r ? 1.0 : 0.0;
    case LawKind::Gaussian:
    case LawKind::PolyCoord: {
        double e = coord_abs_tail(r);
        if (e >= 1.0) return 1.0;
        return -std::expm1(static_cast<double>(dim_) * std::log1p(-e));
    }
    case LawKind::PolyRadial:
        if (dim_ == 1) return std::min(1.0, std::pow(r, -alpha_));
        if (dim_ == 2) return radial_tail_d2(r);
        throw UnsupportedDimension("poly-radial exact tail implemented for d <= 2");
    }
    return 0.0;
}

double PerturbationLaw::log_tail_probability(double r) const {
    if (r <= 0.0) return 0.0;
    switch (kind_) {
    case LawKind::PointMass:
        return linf_norm(offset_) >= r ? 0.0 : -std::numeric_limits<double>::infinity();
    case LawKind::Gaussian: {
        double z = r / (sigma_ * kSqrt2);
        double log_e = log_erfc(z);
        if (log_e > std::log(1e-8)) {
            double e = std::exp(log_e);
            return std::log(-std::expm1(dim_ * std::log1p(-e)));
        }
        // p(r) = d*e*(1 + O(e)); the dropped terms are below 1e-8 relative.
        return std::log(static_cast<double>(dim_)) + log_e;
    }
    case LawKind::PolyCoord: {
        if (r <= 1.0) return 0.0;
        double log_e = -alpha_ * std::log(r);
        if (log_e > std::log(1e-8)) {
            double e = std::exp(log_e);
            return std::log(-std::expm1(dim_ * std::log1p(-e)));
        }
        return std::log(static_cast<double>(dim_)) + log_e;
    }
    case LawKind::PolyRadial:
        if (dim_ == 1) return r <= 1.0 ? 0.0 : -alpha_ * std::log(r);
        if (dim_ == 2) {
            if (r >= 1.0) return std::log(minf_moment_alpha_) - alpha_ * std::log(r);
            return std::log(radial_tail_d2(r));
        }
        throw UnsupportedDimension("poly-radial exact tail implemented for d <= 2");
    }
    return 0.0;
}

double PerturbationLaw::radial_box_mass_d2(std::span<const double> lo,
                                           std::span<const double> hi) const {
    // P(R u in box) by integrating the radial interval mass along each ray.
    // The integrand is smooth between the polar angles of the box corners,
    // so we split there and run adaptive Simpson on each piece.
    auto ray_mass = [&](double th) {
        double dir[2] = {std::cos(th), std::sin(th)};
        double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
        for (int j = 0; j < 2; ++j) {
            if (std::abs(dir[j]) < 1e-300) {
                if (lo[j] > 0.0 || hi[j] < 0.0) return 0.0;
                continue;
            }
            double ta = lo[j] / dir[j];
            double tb = hi[j] / dir[j];
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
        }
        double lo_clip = std::max(t0, 1.0);
        if (!(t1 >= lo_clip)) return 0.0;
        return std::pow(lo_clip, -alpha_) - std::pow(t1, -alpha_);
    };
    std::vector<double> cuts;
    for (int cx = 0; cx < 2; ++cx)
        for (int cy = 0; cy < 2; ++cy) {
            double x = cx ? hi[0] : lo[0];
            double y = cy ? hi[1] : lo[1];
            double ang = std::atan2(y, x);
            if (ang < 0.0) ang += 2.0 * M_PI;
            cuts.push_back(ang);
        }
    cuts.push_back(0.0);
    cuts.push_back(2.0 * M_PI);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] - cuts[i] < 1e-15) continue;
        total += integrate_adaptive(ray_mass, cuts[i], cuts[i + 1], 2e-14);
    }
    return total / (2.0 * M_PI);
}

double PerturbationLaw::box_avoidance_probability(std::span<const double> v, double r) const {
    if (!(r > 0.0)) throw ValidationError("box_avoidance_probability: r must be positive");
    if (static_cast<int>(v.size()) != dim_)
        throw ValidationError("box_avoidance_probability: v has wrong dimension");
    if (kind_ == LawKind::PointMass) {
        for (int j = 0; j < dim_; ++j) {
            double x = v[j] + offset_[j];
            if (x < -r || x > r) return 1.0;
        }
        return 0.0;
    }
    if (per_coordinate()) {
        double log_inside = 0.0;
        for (int j = 0; j < dim_; ++j) {
            double eps = coord_exclusion_probability(-r - v[j], r - v[j]);
            if (eps >= 1.0) return 1.0;
            log_inside += std::log1p(-eps);
        }
        return -std::expm1(log_inside);
    }
    if (kind_ == LawKind::PolyRadial && dim_ == 2) {
        double lo[2] = {-r - v[0], -r - v[1]};
        double hi[2] = {r - v[0], r - v[1]};
        return 1.0 - radial_box_mass_d2(lo, hi);
    }
    throw UnsupportedDimension("box avoidance for poly-radial implemented for d <= 2");
}

double PerturbationLaw::truncated_mean(double r) const {
    if (r < 0.0) throw ValidationError("truncated_mean: r must be >= 0");
    switch (kind_) {
    case LawKind::PointMass: {
        double a = linf_norm(offset_);
        return a >= r ? a : 0.0;
    }
    case LawKind::Gaussian: {
        // E[Z 1{Z>=r}] = r p(r) + int_r^inf p(t) dt; the integrand is
        // negligible beyond r + 50 sigma. Quadrature error < 1e-10.
        double hi = r + 50.0 * sigma_ * std::sqrt(static_cast<double>(dim_) > 4 ? 2.0 : 1.0);
        auto f = [&](double t) { return tail_probability(t); };
        return r * tail_probability(r) + integrate_adaptive(f, r, hi, 1e-12);
    }
    case LawKind::PolyCoord: {
        if (alpha_ <= 1.0) throw DivergentMean("poly-coord with alpha <= 1 has no mean");
        double t0 = std::max(r, 1.0);
        double integral = 0.0;
        double binom = 1.0;
        for (int m = 1; m <= dim_; ++m) {
            binom = binom * (dim_ - m + 1) / m;
            double sign = (m % 2 == 1) ? 1.0 : -1.0;
            integral += sign * binom * std::pow(t0, 1.0 - m * alpha_) / (m * alpha_ - 1.0);
        }
        return t0 * tail_probability(t0) + integral;
    }
    case LawKind::PolyRadial: {
        if (alpha_ <= 1.0) throw DivergentMean("poly-radial with alpha <= 1 has no mean");
        if (dim_ == 1) {
            double t0 = std::max(r, 1.0);
            return t0 * std::pow(t0, -alpha_) + std::pow(t0, 1.0 - alpha_) / (alpha_ - 1.0);
        }
        if (dim_ != 2)
            throw UnsupportedDimension("poly-radial truncated mean implemented for d <= 2");
        double mean_factor = alpha_ / (alpha_ - 1.0);
        if (r >= 1.0) return minf_moment_alpha_ * mean_factor * std::pow(r, 1.0 - alpha_);
        // Z = R cos(theta) on the octant; condition on the direction.
        auto f = [&](double th) {
            double c = std::cos(th);
            if (c >= r) return c * mean_factor;
            return c * mean_factor * std::pow(r / c, 1.0 - alpha_);
        };
        return 4.0 / M_PI * integrate_adaptive(f, 0.0, M_PI / 4.0, 1e-13);
    }
    }
    return 0.0;
}

double PerturbationLaw::tail_inverse(double q) const {
    if (!(q > 0.0)) throw ValidationError("tail_inverse: q must be positive");
    if (q >= 1.0) return 0.0;
    if (kind_ == LawKind::PointMass) return linf_norm(offset_);
    double hi = 1.0;
    while (tail_probability(hi) > q) {
        hi *= 2.0;
        if (hi > 1e18) return hi;
    }
    double lo = 0.0;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        if (tail_probability(mid) > q)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

} // namespace pertlat
