#ifndef POLYROTH_GRID_HPP
#define POLYROTH_GRID_HPP

// Functions sampled on a uniform dyadic grid of [0,1] with the cell-midpoint
// convention: cell i covers [i 2^-n, (i+1) 2^-n) and carries the sample at
// its midpoint. Values may be complex; most callers stay real.

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "polyroth/common.hpp"

namespace polyroth {

using cplx = std::complex<double>;

// Power-of-two aligned pairwise sum. Dyadic block sums combine in the same
// association as the full sum, which keeps martingale averaging exactly
// mass-preserving in floating point.
inline cplx pairwise_sum(const cplx* data, std::size_t count) {
    if (count == 1) return data[0];
    if (count == 2) return data[0] + data[1];
    const std::size_t half = count / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, count - half);
}

class GridFunction {
  public:
    GridFunction(int n, bool periodic = true)
        : n_(n), periodic_(periodic), v_(static_cast<std::size_t>(1) << n, cplx(0.0, 0.0)) {
        if (n < 0 || n > 26) throw precondition_error("grid resolution out of range");
    }

    static GridFunction constant(int n, double c, bool periodic = true) {
        GridFunction g(n, periodic);
        for (auto& x : g.v_) x = c;
        return g;
    }

    // Indicator of a union of closed intervals, sampled at cell midpoints.
    static GridFunction indicator(const std::vector<std::pair<double, double>>& intervals, int n,
                                  bool periodic = true) {
        GridFunction g(n, periodic);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = g.midpoint(i);
            for (const auto& [a, b] : intervals) {
                if (x >= a && x <= b) {
                    g.v_[i] = 1.0;
                    break;
                }
            }
        }
        return g;
    }

    template <typename F>
    static GridFunction sample(int n, const F& f, bool periodic = true) {
        GridFunction g(n, periodic);
        for (std::size_t i = 0; i < g.size(); ++i) g.v_[i] = f(g.midpoint(i));
        return g;
    }

    int resolution() const { return n_; }
    bool periodic() const { return periodic_; }
    std::size_t size() const { return v_.size(); }
    double cell_width() const { return std::ldexp(1.0, -n_); }
    double midpoint(std::size_t i) const { return (static_cast<double>(i) + 0.5) * cell_width(); }

    cplx& operator[](std::size_t i) { return v_[i]; }
    const cplx& operator[](std::size_t i) const { return v_[i]; }
    std::vector<cplx>& values() { return v_; }
    const std::vector<cplx>& values() const { return v_; }

    // Piecewise-constant read at an arbitrary point; periodic wrap or zero
    // extension outside [0,1).
    cplx value_at(double x) const {
        if (periodic_) {
            x -= std::floor(x);
        } else if (x < 0.0 || x >= 1.0) {
            return 0.0;
        }
        std::size_t i = static_cast<std::size_t>(x * static_cast<double>(size()));
        if (i >= size()) i = size() - 1;
        return v_[i];
    }
    double real_at(double x) const { return value_at(x).real(); }

    cplx integral() const { return pairwise_sum(v_.data(), v_.size()) * cell_width(); }

    double norm1() const {
        double s = 0.0;
        for (const auto& x : v_) s += std::abs(x);
        return s * cell_width();
    }
    double norm2() const {
        double s = 0.0;
        for (const auto& x : v_) s += std::norm(x);
        return std::sqrt(s * cell_width());
    }
    double norm_inf() const {
        double m = 0.0;
        for (const auto& x : v_) m = std::max(m, std::abs(x));
        return m;
    }
    bool is_real(double tol = 0.0) const {
        for (const auto& x : v_)
            if (std::abs(x.imag()) > tol) return false;
        return true;
    }
    bool is_nonnegative(double tol = 0.0) const {
        for (const auto& x : v_)
            if (x.real() < -tol || std::abs(x.imag()) > tol) return false;
        return true;
    }

  private:
    int n_;
    bool periodic_;
    std::vector<cplx> v_;
};

}  // namespace polyroth

#endif  // POLYROTH_GRID_HPP
