#pragma once
#include <algorithm>
#include <cmath>
#include <functional>

namespace ledlink {

inline double normal_pdf(double x, double mu, double sd) {
    double z = (x - mu) / sd;
    return std::exp(-0.5 * z * z) / (sd * 2.5066282746310005024157652848110);
}

namespace detail {
inline double simpson(const std::function<double(double)>& f,
                      double a, double b, double fa, double fm, double fb,
                      double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left  = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    // Never demand accuracy below the local floating-point noise; without this
    // floor an underestimated scale sends the recursion into exponential blowup.
    double eff = std::max(tol, 1e-16 * (std::abs(left) + std::abs(right)));
    if (depth <= 0 || std::abs(delta) <= 15.0 * eff)
        return left + right + delta / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, 0.5 * eff, depth - 1)
         + simpson(f, m, b, fm, frm, fb, right, 0.5 * eff, depth - 1);
}
} // namespace detail

// Adaptive Simpson. The tolerance is relative to a 9-point composite estimate
// of the integral's scale; a plain 3-point estimate can miss boundary-layer
// mass (e.g. Gaussian tails) by many orders of magnitude and either stall the
// refinement or blow it up.
inline double integrate(const std::function<double(double)>& f,
                        double a, double b, double rel_tol = 1e-9) {
    if (a == b) return 0.0;
    constexpr int kPanels = 8;   // 4 Simpson triples
    double xs[kPanels + 1], fs[kPanels + 1];
    double h = (b - a) / kPanels;
    double max_f = 0.0;
    for (int i = 0; i <= kPanels; ++i) {
        xs[i] = (i == kPanels) ? b : a + h * i;
        fs[i] = f(xs[i]);
        max_f = std::max(max_f, std::abs(fs[i]));
    }
    double triples[kPanels / 2];
    double s0 = 0.0;
    for (int k = 0; k < kPanels / 2; ++k) {
        triples[k] = (xs[2 * k + 2] - xs[2 * k]) / 6.0
                   * (fs[2 * k] + 4.0 * fs[2 * k + 1] + fs[2 * k + 2]);
        s0 += triples[k];
    }
    double scale = std::max(std::abs(s0), 0.05 * max_f * std::abs(b - a));
    double tol = std::max(scale * rel_tol, 1e-300);
    double total = 0.0;
    for (int k = 0; k < kPanels / 2; ++k)
        total += detail::simpson(f, xs[2 * k], xs[2 * k + 2], fs[2 * k],
                                 fs[2 * k + 1], fs[2 * k + 2], triples[k],
                                 0.25 * tol, 45);
    return total;
}

} // namespace ledlink
