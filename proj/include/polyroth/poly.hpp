#ifndef POLYROTH_POLY_HPP
#define POLYROTH_POLY_HPP

// Monic real polynomials without constant term, their dyadic rescales, exact
// power-of-two coefficient scaling, derivative evaluation, and monotone
// inversion. Everything downstream (scale classification, phase analysis)
// sits on top of this file.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "polyroth/common.hpp"

namespace polyroth {

// P(t) = a_1 t + a_2 t^2 + ... + a_d t^d with a_d = 1 and d >= 2.
// coeffs()[r] holds a_r; index 0 exists but is always zero (no constant term).
class Polynomial {
  public:
    Polynomial(std::vector<double> coeffs_by_power, int degree)
        : coeffs_(std::move(coeffs_by_power)), degree_(degree) {
        if (degree_ < 2) throw precondition_error("polynomial degree must be >= 2");
        if (static_cast<int>(coeffs_.size()) != degree_ + 1)
            throw precondition_error("coefficient list must have degree+1 entries");
        if (coeffs_[0] != 0.0) throw precondition_error("constant term must be absent (zero)");
        if (coeffs_[degree_] != 1.0) throw precondition_error("polynomial must be monic (a_d = 1)");
        for (double a : coeffs_) {
            if (!std::isfinite(a)) throw precondition_error("non-finite coefficient");
        }
    }

    // Convenience: coefficients a_1..a_d (a_d must equal 1).
    static Polynomial from_low_order(std::vector<double> a1_to_ad) {
        std::vector<double> c(a1_to_ad.size() + 1, 0.0);
        for (std::size_t i = 0; i < a1_to_ad.size(); ++i) c[i + 1] = a1_to_ad[i];
        return Polynomial(std::move(c), static_cast<int>(a1_to_ad.size()));
    }

    int degree() const { return degree_; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    double coeff(int r) const { return (r >= 0 && r <= degree_) ? coeffs_[r] : 0.0; }

    // l1 norm of the coefficients; always >= 1 because a_d = 1.
    double l1_norm() const {
        double m = 0.0;
        for (double a : coeffs_) m += std::abs(a);
        return m;
    }

    // Value of the deriv_order-th derivative at t, by Horner evaluation of the
    // analytically differentiated coefficient list. Orders above d are zero.
    double eval(double t, int deriv_order = 0) const {
        if (deriv_order < 0) throw precondition_error("derivative order must be >= 0");
        if (deriv_order > degree_) return 0.0;
        double acc = 0.0;
        for (int r = degree_; r >= deriv_order; --r) {
            double c = coeffs_[r];
            for (int i = 0; i < deriv_order; ++i) c *= static_cast<double>(r - i);
            acc = acc * t + c;
        }
        return acc;
    }

  private:
    std::vector<double> coeffs_;
    int degree_;
};

// t -> 2^{-d s} P(2^s t): the dyadic rescale that maps the horizon [0, 2^{sd}]
// problem back to [0,1]. Coefficientwise this multiplies a_r by 2^{s(r-d)},
// which is exact in floating point (exponent arithmetic only).
class RescaledPolynomial {
  public:
    RescaledPolynomial(Polynomial base, int shift) : base_(std::move(base)), shift_(shift) {}

    const Polynomial& base() const { return base_; }
    int shift() const { return shift_; }

    // Coefficients of the rescale as a plain monic polynomial.
    Polynomial materialize() const {
        const int d = base_.degree();
        std::vector<double> c(d + 1, 0.0);
        for (int r = 1; r <= d; ++r) {
            if (base_.coeff(r) == 0.0) continue;
            c[r] = std::ldexp(base_.coeff(r), shift_ * (r - d));
            if (base_.coeff(r) != 0.0 && c[r] == 0.0)
                throw unresolved_error("rescale underflowed coefficient a_" + std::to_string(r));
            if (!std::isfinite(c[r]))
                throw unresolved_error("rescale overflowed coefficient a_" + std::to_string(r));
        }
        return Polynomial(std::move(c), d);
    }

    double eval(double t, int deriv_order = 0) const { return materialize().eval(t, deriv_order); }

  private:
    Polynomial base_;
    int shift_;
};

// General dense polynomial with real coefficients (no monic/no-constant
// restriction). Used for Q = normalize_Q(P) and for the symbolic expansions
// of the phase analysis; coeffs[r] holds the t^r coefficient.
struct DensePoly {
    std::vector<double> c;

    int degree() const {
        for (int r = static_cast<int>(c.size()) - 1; r >= 0; --r)
            if (c[static_cast<std::size_t>(r)] != 0.0) return r;
        return 0;
    }
    double coeff(int r) const {
        return (r >= 0 && r < static_cast<int>(c.size())) ? c[static_cast<std::size_t>(r)] : 0.0;
    }
    double eval(double t, int deriv_order = 0) const {
        if (deriv_order >= static_cast<int>(c.size())) return 0.0;
        double acc = 0.0;
        for (int r = static_cast<int>(c.size()) - 1; r >= deriv_order; --r) {
            double k = c[static_cast<std::size_t>(r)];
            for (int i = 0; i < deriv_order; ++i) k *= static_cast<double>(r - i);
            acc = acc * t + k;
        }
        return acc;
    }
    DensePoly derivative() const {
        DensePoly out;
        if (c.size() <= 1) { out.c = {0.0}; return out; }
        out.c.resize(c.size() - 1);
        for (std::size_t r = 1; r < c.size(); ++r) out.c[r - 1] = c[r] * static_cast<double>(r);
        return out;
    }
    // l-infinity coefficient norm; a cheap stand-in for the C^d([1/2,2]) size.
    double coeff_norm() const {
        double m = 0.0;
        for (double a : c) m = std::max(m, std::abs(a));
        return m;
    }
};

inline DensePoly poly_add(const DensePoly& a, const DensePoly& b) {
    DensePoly out;
    out.c.resize(std::max(a.c.size(), b.c.size()), 0.0);
    for (std::size_t i = 0; i < out.c.size(); ++i) out.c[i] = a.coeff(static_cast<int>(i)) + b.coeff(static_cast<int>(i));
    return out;
}

inline DensePoly poly_scale(const DensePoly& a, double s) {
    DensePoly out = a;
    for (double& v : out.c) v *= s;
    return out;
}

inline DensePoly poly_mul(const DensePoly& a, const DensePoly& b) {
    DensePoly out;
    if (a.c.empty() || b.c.empty()) { out.c = {0.0}; return out; }
    out.c.assign(a.c.size() + b.c.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c.size(); ++i) {
        if (a.c[i] == 0.0) continue;
        for (std::size_t j = 0; j < b.c.size(); ++j) out.c[i + j] += a.c[i] * b.c[j];
    }
    return out;
}

// Q(t) = 2^{-m0+ell-j} P(2^{j-ell} t). The two powers of two are applied
// coefficientwise with ldexp so the scale tests stay exact: the t^r
// coefficient of Q is a_r * 2^{-m0 + (r-1)(j-ell)}.
inline DensePoly normalize_Q(const Polynomial& p, int j, int ell, int m0) {
    DensePoly q;
    q.c.assign(static_cast<std::size_t>(p.degree()) + 1, 0.0);
    for (int r = 1; r <= p.degree(); ++r) {
        double a = p.coeff(r);
        if (a == 0.0) continue;
        long e = static_cast<long>(-m0) + static_cast<long>(r - 1) * (j - ell);
        if (e > 1000 || e < -1000)
            throw unresolved_error("normalize_Q exponent out of floating range: 2^" + std::to_string(e) +
                                   " on a_" + std::to_string(r));
        double v = std::ldexp(a, static_cast<int>(e));
        if (!std::isfinite(v) || (v == 0.0 && a != 0.0))
            throw unresolved_error("normalize_Q coefficient left floating range at a_" + std::to_string(r) +
                                   " (exponent " + std::to_string(e) + ")");
        q.c[static_cast<std::size_t>(r)] = v;
    }
    return q;
}

// Bracketed roots of f on [lo, hi] from a sign-change scan with `scan` panels,
// refined by bisection. Tangential roots without a sign change are not found;
// callers that care flag near-zero minima separately.
template <typename F>
std::vector<double> isolate_roots(const F& f, double lo, double hi, int scan = 1024,
                                  double tol = 1e-13) {
    std::vector<double> roots;
    double prev_x = lo, prev_v = f(lo);
    for (int i = 1; i <= scan; ++i) {
        double x = lo + (hi - lo) * static_cast<double>(i) / scan;
        double v = f(x);
        if (prev_v == 0.0) {
            roots.push_back(prev_x);
        } else if (v != 0.0 && ((prev_v < 0) != (v < 0))) {
            double a = prev_x, b = x, fa = prev_v;
            for (int it = 0; it < 200 && (b - a) > tol * std::max(1.0, std::abs(a)); ++it) {
                double m = 0.5 * (a + b), fm = f(m);
                if (fm == 0.0) { a = b = m; break; }
                if ((fa < 0) != (fm < 0)) b = m; else { a = m; fa = fm; }
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_x = x;
        prev_v = v;
    }
    if (prev_v == 0.0) roots.push_back(prev_x);
    return roots;
}

// Solve q(t*) = y on a bracket where q' keeps one sign. Bisection-seeded
// Newton with a plain-bisection fallback after 60 Newton steps.
inline double invert_monotone(const DensePoly& q, double y, double lo, double hi) {
    if (!(lo < hi)) throw precondition_error("invert_monotone: empty bracket");
    const DensePoly dq = q.derivative();
    int sign = 0;
    for (int i = 0; i <= 64; ++i) {
        double t = lo + (hi - lo) * static_cast<double>(i) / 64.0;
        double v = dq.eval(t);
        if (v == 0.0) continue;
        int s = v > 0 ? 1 : -1;
        if (sign == 0) sign = s;
        else if (sign != s) throw precondition_error("invert_monotone: derivative changes sign on bracket");
    }
    double qlo = q.eval(lo), qhi = q.eval(hi);
    double ymin = std::min(qlo, qhi), ymax = std::max(qlo, qhi);
    const double slack = 1e-12 * std::max({1.0, std::abs(ymin), std::abs(ymax)});
    if (y < ymin - slack || y > ymax + slack)
        throw precondition_error("invert_monotone: target outside q(bracket)");

    const double tol = 1e-12 * std::max(1.0, std::abs(y));
    // Bisection seed.
    double a = lo, b = hi;
    bool increasing = qhi >= qlo;
    for (int i = 0; i < 20; ++i) {
        double m = 0.5 * (a + b);
        if ((q.eval(m) < y) == increasing) a = m; else b = m;
    }
    double t = 0.5 * (a + b);
    for (int it = 0; it < 60; ++it) {
        double r = q.eval(t) - y;
        if (std::abs(r) <= tol) return t;
        double d = dq.eval(t);
        if (d == 0.0) break;
        double step = r / d;
        double next = t - step;
        if (next < lo || next > hi) break;
        t = next;
    }
    // Fallback: pure bisection to convergence.
    for (int i = 0; i < 200; ++i) {
        double m = 0.5 * (a + b);
        if (std::abs(q.eval(m) - y) <= tol) return m;
        if ((q.eval(m) < y) == increasing) a = m; else b = m;
    }
    double m = 0.5 * (a + b);
    if (std::abs(q.eval(m) - y) <= tol) return m;
    throw unresolved_error("invert_monotone: did not reach tolerance");
}

}  // namespace polyroth

#endif  // POLYROTH_POLY_HPP
