#ifndef POLYROTH_MOLLIFY_HPP
#define POLYROTH_MOLLIFY_HPP

// Dyadic martingale averages E_k, periodic mollification against the frozen
// bumps, sharp Littlewood-Paley projections, and the two grid constants that
// the lower-bound lemma needs:
//
//   C_dom: E_k f <= C_dom (f * vartheta_k) pointwise for every f >= 0 and
//          k <= n-2, computed from the worst block offset of the sampled
//          kernel (the bound is exact for the discrete operators, not
//          a measured estimate);
//   C_0:   sum_k ||f*vartheta_{l_k} - f*vartheta_{l_{k+1}}||_2^2 <= C_0 ||f||_2^2
//          for every increasing sequence l_0 < ... <= n-2, from the worst
//          per-frequency total variation of the kernel symbols.

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "polyroth/bump.hpp"
#include "polyroth/common.hpp"
#include "polyroth/fft.hpp"
#include "polyroth/grid.hpp"

namespace polyroth {

// E_k f: piecewise-constant on dyadic intervals of length 2^-k. Block sums
// use the power-of-two aligned pairwise tree, so integral(E_k f) equals
// integral(f) bit for bit.
inline GridFunction martingale_average(const GridFunction& f, int k) {
    const int n = f.resolution();
    if (k < 0 || k > n) throw precondition_error("martingale_average: need 0 <= k <= n");
    GridFunction out(n, f.periodic());
    const std::size_t block = static_cast<std::size_t>(1) << (n - k);
    for (std::size_t b = 0; b < f.size(); b += block) {
        const cplx avg = pairwise_sum(f.values().data() + b, block) / static_cast<double>(block);
        for (std::size_t i = 0; i < block; ++i) out[b + i] = avg;
    }
    return out;
}

// Periodic grid convolution with the sampled, mass-normalized dilated bump.
inline GridFunction mollify_convolve(const GridFunction& f, const Bump& b) {
    const int n = f.resolution();
    const std::vector<double> kernel = b.sampled_kernel(n);
    std::vector<cplx> fk = f.values();
    std::vector<cplx> wk(kernel.begin(), kernel.end());
    fft_inplace(fk, false);
    fft_inplace(wk, false);
    for (std::size_t i = 0; i < fk.size(); ++i) fk[i] *= wk[i];
    fft_inplace(fk, true);
    GridFunction out(n, f.periodic());
    out.values() = std::move(fk);
    return out;
}

// Sharp frequency projection onto integer frequencies |xi| in [lo, hi).
inline GridFunction band_project(const GridFunction& f, long lo, long hi) {
    const std::size_t N = f.size();
    std::vector<cplx> fk = f.values();
    fft_inplace(fk, false);
    for (std::size_t i = 0; i < N; ++i) {
        long freq = static_cast<long>(i);
        if (freq > static_cast<long>(N / 2)) freq -= static_cast<long>(N);
        long a = std::labs(freq);
        if (a < lo || a >= hi) fk[i] = 0.0;
    }
    fft_inplace(fk, true);
    GridFunction out(f.resolution(), f.periodic());
    out.values() = std::move(fk);
    return out;
}

// Littlewood-Paley piece: |xi| in [2^m, 2^{m+1}). Real input stays real
// because the band is symmetric in +-xi.
inline GridFunction lp_project(const GridFunction& f, int m) {
    const int n = f.resolution();
    if (m < 0) throw precondition_error("lp_project: m >= 0 required");
    if (n < 2 || (2L << m) > (1L << (n - 1)))
        throw precondition_error("lp_project: band above Nyquist, need 2^{m+1} <= 2^{n-1}");
    return band_project(f, 1L << m, 2L << m);
}

// Exact pointwise domination constant of the grid: the smallest C with
// E_k f <= C (f * vartheta_k) for all f >= 0 and all 0 <= k <= n-2.
// For nonnegative kernels this is the worst ratio of the two kernels over
// in-block offsets, no sampling involved.
inline double domination_constant(int n) {
    static std::map<int, double> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    double c = 0.0;
    for (int k = 0; k <= n - 2; ++k) {
        const std::vector<double> w = vartheta_bump(k).sampled_kernel(n);
        const std::size_t block = static_cast<std::size_t>(1) << (n - k);
        const double ek_weight = 1.0 / static_cast<double>(block);
        // Offsets between two cells of one dyadic block: 0 .. block-1 (both
        // signs; kernel is even on the circle).
        double wmin = w[0];
        for (std::size_t d = 1; d < block; ++d)
            wmin = std::min({wmin, w[d], w[w.size() - d]});
        if (wmin <= 0.0) throw check_error("domination_constant: kernel vanished inside block");
        c = std::max(c, ek_weight / wmin);
    }
    cache[n] = c;
    return c;
}

// Smooth lower-bound constant c_0 = C_dom^{-2}.
inline double bourgain_c0(int n) {
    const double c = domination_constant(n);
    return 1.0 / (c * c);
}

enum class BourgainMode { dyadic, smooth };

// Left and right side of the lower-bound inequality:
//   dyadic:  ( integral f (E_k f)(E_l f),            (integral f)^3 )
//   smooth:  ( integral f (f*vartheta_k)(f*vartheta_l), c_0 (integral f)^3 )
inline std::pair<double, double> bourgain_lower_bound(const GridFunction& f, int k, int ell,
                                                      BourgainMode mode, double* c0_out = nullptr) {
    if (!f.is_nonnegative(0.0))
        throw precondition_error("bourgain_lower_bound: f must be nonnegative");
    if (k > ell) throw precondition_error("bourgain_lower_bound: need k <= ell");
    const int n = f.resolution();
    const double mass = f.integral().real();

    GridFunction a(n), b(n);
    double rhs = mass * mass * mass;
    if (mode == BourgainMode::dyadic) {
        if (ell > n) throw precondition_error("bourgain_lower_bound: ell > resolution");
        a = martingale_average(f, k);
        b = martingale_average(f, ell);
    } else {
        if (ell > n - 2) throw precondition_error("bourgain_lower_bound: smooth mode needs ell <= n-2");
        a = mollify_convolve(f, vartheta_bump(k));
        b = mollify_convolve(f, vartheta_bump(ell));
        const double c0 = bourgain_c0(n);
        rhs *= c0;
        if (c0_out) *c0_out = c0;
    }
    std::vector<cplx> prod(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) prod[i] = f[i] * a[i] * b[i];
    const double lhs = (pairwise_sum(prod.data(), prod.size()) * f.cell_width()).real();
    return {lhs, rhs};
}

// Provable almost-orthogonality constant for increasing scale sequences
// bounded by n-2: the worst squared total variation of the kernel symbols
// along consecutive scales, maximized over frequencies.
inline double orthogonality_constant(int n) {
    static std::map<int, double> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    const std::size_t N = static_cast<std::size_t>(1) << n;
    std::vector<std::vector<cplx>> symbols;
    for (int l = 0; l <= n - 2; ++l) {
        const std::vector<double> w = vartheta_bump(l).sampled_kernel(n);
        std::vector<cplx> s(w.begin(), w.end());
        fft_inplace(s, false);
        symbols.push_back(std::move(s));
    }
    double c0 = 0.0;
    for (std::size_t xi = 0; xi < N; ++xi) {
        double tv = 0.0;
        for (std::size_t l = 0; l + 1 < symbols.size(); ++l)
            tv += std::abs(symbols[l][xi] - symbols[l + 1][xi]);
        c0 = std::max(c0, tv * tv);
    }
    cache[n] = c0;
    return c0;
}

}  // namespace polyroth

#endif  // POLYROTH_MOLLIFY_HPP
