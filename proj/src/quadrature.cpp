#include "pertlat/quadrature.hpp"

#include <cmath>

namespace pertlat {

namespace {

double simpson(double fa, double fm, double fb, double h) {
    return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double b, double fa,
                     double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m);
    double rm = 0.5 * (m + b);
    double flm = f(lm);
    double frm = f(rm);
    double left = simpson(fa, flm, fm, m - a);
    double right = simpson(fm, frm, fb, b - m);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                          int max_depth) {
    if (!(b > a)) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a);
    double fm = f(m);
    double fb = f(b);
    double whole = simpson(fa, fm, fb, b - a);
    return adaptive_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

double integrate_to_infinity(const std::function<double(double)>& f, double a, double tol) {
    auto g = [&](double u) {
        double one_minus = 1.0 - u;
        double x = a + u / one_minus;
        double jac = 1.0 / (one_minus * one_minus);
        return f(x) * jac;
    };
    // The endpoint u=1 maps to infinity; the integrand must vanish there.
    return integrate_adaptive(g, 0.0, 1.0 - 1e-12, tol);
}

} // namespace pertlat
