#ifndef POLYROTH_BUMP_HPP
#define POLYROTH_BUMP_HPP

// The two frozen mollifiers.
//
//   tau:      supported in [1/2, 2], tau(x) = c exp(-1/((x-1/2)(2-x))),
//             c fixed once by integral 1.
//   vartheta: even, supported in [-2, 2], equal to a plateau on [-1, 1],
//             smoothstep down on [1, 2], integral 1. With the smoothstep
//             S(u) = A(u)/(A(u)+A(1-u)), A(u) = exp(-1/u), the raw shape has
//             integral exactly 3, so the plateau value is exactly 1/3.
//
// Dilates: tau_l(x) = 2^l tau(2^l x), vartheta_l likewise.

#include <cmath>
#include <vector>

#include "polyroth/common.hpp"
#include "polyroth/grid.hpp"

namespace polyroth {

namespace detail {

inline double raw_tau(double x) {
    if (x <= 0.5 || x >= 2.0) return 0.0;
    return std::exp(-1.0 / ((x - 0.5) * (2.0 - x)));
}

inline double smooth_rise(double u) {  // 0 at u<=0, 1 at u>=1, C^inf monotone
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / u);
    const double b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
}

// Composite 32-panel Gauss-Legendre-8 integral of raw_tau over [1/2, 2];
// computed once, accurate far below 1e-12 for this smooth integrand.
inline double raw_tau_mass() {
    static const double mass = [] {
        static constexpr double node[4] = {0.1834346424956498, 0.5255324099163290,
                                           0.7966664774136267, 0.9602898564975363};
        static constexpr double weight[4] = {0.3626837833783620, 0.3137066458778873,
                                             0.2223810344533745, 0.1012285362903763};
        const int panels = 32;
        const double lo = 0.5, hi = 2.0;
        const double h = (hi - lo) / panels;
        double s = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double c = lo + (p + 0.5) * h;
            for (int q = 0; q < 4; ++q) {
                s += weight[q] * (raw_tau(c + 0.5 * h * node[q]) + raw_tau(c - 0.5 * h * node[q]));
            }
        }
        return s * 0.5 * h;
    }();
    return mass;
}

}  // namespace detail

enum class BumpKind { tau, vartheta };

// Pointwise-evaluable dilated bump 2^l b(2^l x).
struct Bump {
    BumpKind kind = BumpKind::tau;
    int level = 0;

    double base(double x) const {
        if (kind == BumpKind::tau) return detail::raw_tau(x) / detail::raw_tau_mass();
        const double ax = std::abs(x);
        if (ax >= 2.0) return 0.0;
        if (ax <= 1.0) return 1.0 / 3.0;
        return detail::smooth_rise(2.0 - ax) / 3.0;
    }
    double operator()(double x) const { return std::ldexp(base(std::ldexp(x, level)), level); }

    // Support of the dilate, [lo, hi].
    double support_lo() const {
        return std::ldexp(kind == BumpKind::tau ? 0.5 : -2.0, -level);
    }
    double support_hi() const { return std::ldexp(2.0, -level); }

    // Plateau value of the normalized vartheta (constant on [-1,1]).
    static double vartheta_plateau() { return 1.0 / 3.0; }

    // Discrete kernel on a 2^n periodic grid, sampled at the integer cell
    // offsets (i - j) 2^-n that occur in grid convolution and renormalized to
    // sum 1. Requires the dilate to be resolvable: 2^level <= 2^n.
    std::vector<double> sampled_kernel(int n) const {
        if (level > n)
            throw precondition_error("bump not resolvable: need grid resolution >= " +
                                     std::to_string(level));
        const std::size_t size = static_cast<std::size_t>(1) << n;
        const double h = std::ldexp(1.0, -n);
        std::vector<double> w(size, 0.0);
        double mass = 0.0;
        for (std::size_t i = 0; i < size; ++i) {
            // Signed offset of cell i from cell 0 on the periodic circle.
            double x = static_cast<double>(i) * h;
            if (x > 0.5) x -= 1.0;
            w[i] = (*this)(x);
            mass += w[i];
        }
        if (mass <= 0.0) throw precondition_error("bump kernel vanished on grid");
        for (auto& v : w) v /= mass;
        return w;
    }
};

inline Bump tau_bump(int level = 0) { return {BumpKind::tau, level}; }
inline Bump vartheta_bump(int level = 0) { return {BumpKind::vartheta, level}; }

}  // namespace polyroth

#endif  // POLYROTH_BUMP_HPP
