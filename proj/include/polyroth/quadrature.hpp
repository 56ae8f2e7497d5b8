#ifndef POLYROTH_QUADRATURE_HPP
#define POLYROTH_QUADRATURE_HPP

// Adaptive panel quadrature for complex oscillatory integrands. Panels start
// at an oscillation-aware width (a few periods of the fastest local phase
// rotation per panel), then bisect wherever the embedded GL16-vs-two-halves
// error estimate exceeds the budgeted share of the tolerance.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "polyroth/common.hpp"
#include "polyroth/grid.hpp"

namespace polyroth {

struct GL16 {
    std::array<double, 16> x{};
    std::array<double, 16> w{};
};

// Nodes and weights from Newton iteration on the Legendre recurrence.
inline const GL16& gl16() {
    static const GL16 rule = [] {
        GL16 r;
        const int n = 16;
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            r.x[i] = -x;
            r.x[n - 1 - i] = x;
            const double wi = 2.0 / ((1.0 - x * x) * dp * dp);
            r.w[i] = wi;
            r.w[n - 1 - i] = wi;
        }
        return r;
    }();
    return rule;
}

template <typename F>
cplx gl16_panel(const F& f, double a, double b) {
    const GL16& r = gl16();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    cplx s(0.0, 0.0);
    for (int i = 0; i < 16; ++i) s += r.w[i] * f(mid + half * r.x[i]);
    return s * half;
}

struct QuadratureResult {
    cplx value{0.0, 0.0};
    double error_estimate = 0.0;
    std::size_t panels = 0;
};

// Integrate f over [lo, hi] to absolute tolerance abs_tol. `initial_panels`
// should already resolve the oscillation (callers derive it from the phase
// slope); adaptivity then handles stationary regions.
template <typename F>
QuadratureResult adaptive_complex_integral(const F& f, double lo, double hi, double abs_tol,
                                           std::size_t initial_panels,
                                           std::size_t panel_budget = (1u << 22),
                                           double noise_per_unit = 0.0) {
    initial_panels = std::max<std::size_t>(initial_panels, 4);
    struct Seg {
        double a, b;
        int depth;
    };
    std::vector<Seg> stack;
    stack.reserve(initial_panels + 64);
    const double w0 = (hi - lo) / static_cast<double>(initial_panels);
    for (std::size_t i = initial_panels; i-- > 0;)
        stack.push_back({lo + w0 * static_cast<double>(i), lo + w0 * static_cast<double>(i + 1), 0});
    stack.front().b = hi;  // guard against rounding on the last edge

    QuadratureResult out;
    while (!stack.empty()) {
        const Seg s = stack.back();
        stack.pop_back();
        if (++out.panels > panel_budget)
            throw unresolved_error("quadrature panel budget exhausted; achieved estimate " +
                                   std::to_string(std::abs(out.value)) + " with error " +
                                   std::to_string(out.error_estimate));
        const double m = 0.5 * (s.a + s.b);
        const cplx whole = gl16_panel(f, s.a, s.b);
        const cplx halves = gl16_panel(f, s.a, m) + gl16_panel(f, m, s.b);
        const double err = std::abs(whole - halves);
        // Roundoff floor: panels must not split on evaluation noise (for
        // oscillatory integrands the phase rounding alone contributes
        // eps * lambda * |Phi| at every node).
        const double share =
            abs_tol * (s.b - s.a) / (hi - lo) +
            (noise_per_unit + 64.0 * std::numeric_limits<double>::epsilon()) * (s.b - s.a);
        if (err <= share || s.depth >= 48) {
            out.value += halves;
            out.error_estimate += err;
        } else {
            stack.push_back({s.a, m, s.depth + 1});
            stack.push_back({m, s.b, s.depth + 1});
        }
    }
    return out;
}

}  // namespace polyroth

#endif  // POLYROTH_QUADRATURE_HPP
