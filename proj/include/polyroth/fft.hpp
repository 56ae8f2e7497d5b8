#ifndef POLYROTH_FFT_HPP
#define POLYROTH_FFT_HPP

// Iterative radix-2 complex FFT. Grid sizes in this project are always powers
// of two, so nothing fancier is needed; the inverse carries the 1/N factor.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "polyroth/common.hpp"

namespace polyroth {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (!is_pow2(n)) throw precondition_error("fft: length must be a power of two");
    if (n == 1) return;

    // Bit reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                std::complex<double> u = a[i + j];
                std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= inv_n;
    }
}

inline std::vector<std::complex<double>> fft(std::vector<std::complex<double>> a) {
    fft_inplace(a, false);
    return a;
}

inline std::vector<std::complex<double>> ifft(std::vector<std::complex<double>> a) {
    fft_inplace(a, true);
    return a;
}

}  // namespace polyroth

#endif  // POLYROTH_FFT_HPP
