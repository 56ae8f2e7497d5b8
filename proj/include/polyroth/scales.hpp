#ifndef POLYROTH_SCALES_HPP
#define POLYROTH_SCALES_HPP

// Dominating-monomial classification of dyadic scales and construction of the
// admissible sets E and Lambda. All magnitude comparisons |a_r 2^{kr}| vs
// Gamma_0 |a_r' 2^{kr'}| are done on (mantissa, exponent) pairs so that strict
// inequalities never flip from rounding.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "polyroth/common.hpp"
#include "polyroth/poly.hpp"

namespace polyroth {

// b with |a| in [2^b, 2^{b+1}).
inline int dyadic_exponent(double a) {
    if (a == 0.0 || !std::isfinite(a)) throw precondition_error("no dyadic exponent for zero");
    int e = 0;
    std::frexp(std::abs(a), &e);  // |a| = m 2^e, m in [1/2, 1)
    return e - 1;
}

struct ScaleParams {
    int gamma0_exp = 10;  // Gamma_0 = 2^{gamma0_exp}
    int theta = 30;       // largeness threshold standing in for 10^{10d}

    ScaleParams() = default;
    ScaleParams(int g0, int th) : gamma0_exp(g0), theta(th) {
        if (gamma0_exp < 1) throw precondition_error("gamma0 exponent must be >= 1");
        if (theta < 1) throw precondition_error("theta must be >= 1");
    }

    // Gamma_d = 4 d^2 Gamma_0, the bad-scale cardinality bound.
    long gamma_d(int degree) const { return 4L * degree * degree * (1L << gamma0_exp); }

    // The admissibility constant of the definition ("to be determined later"
    // in the admissible-set definition): first elements and consecutive gaps
    // of E and Lambda stay below this bound because the ell-search never
    // sweeps past Theta+d lattice blocks of width 2 Gamma_d.
    long admissibility_bound(int degree) const {
        return 2L * gamma_d(degree) * (theta + degree + 1);
    }
};

// Exact comparison of ma 2^{ea} vs mb 2^{eb} with ma, mb in [1, 2).
// Returns -1, 0, +1.
inline int compare_dyadic(double ma, long ea, double mb, long eb) {
    if (ea != eb) return ea > eb ? 1 : -1;
    if (ma == mb) return 0;
    return ma > mb ? 1 : -1;
}

// |a| split as mantissa in [1,2) times 2^exp, exactly.
struct MantExp {
    double mant = 0.0;
    long exp = 0;
    static MantExp of(double a) {
        int e = 0;
        double m = std::frexp(std::abs(a), &e);  // m in [1/2, 1)
        return {m * 2.0, static_cast<long>(e) - 1};
    }
};

struct ScaleRecord {
    long k = 0;
    int dominating_r = 0;  // r with k in J_r, 0 if none
    int secondary_r = 0;   // r with k in J_{1,r} (requires dominating_r == 1), 0 if none
    bool good = false;
};

struct ScaleClassification {
    IntRange window;
    std::vector<ScaleRecord> records;      // one per k in window
    std::map<int, std::vector<int>> j_r;   // r -> sorted scales in J_r
    std::map<int, std::vector<int>> j_1r;  // r -> sorted scales in J_{1,r}
    std::vector<int> j_good;
    std::vector<int> j_bad;

    const ScaleRecord& at(int k) const { return records[static_cast<std::size_t>(k - window.lo)]; }
};

namespace detail {

struct DyadicCoeffs {
    int d = 0;
    std::vector<MantExp> me;
    std::vector<bool> nonzero;
    explicit DyadicCoeffs(const Polynomial& p) : d(p.degree()) {
        me.resize(static_cast<std::size_t>(d) + 1);
        nonzero.resize(static_cast<std::size_t>(d) + 1, false);
        for (int r = 1; r <= d; ++r) {
            nonzero[static_cast<std::size_t>(r)] = p.coeff(r) != 0.0;
            if (nonzero[static_cast<std::size_t>(r)])
                me[static_cast<std::size_t>(r)] = MantExp::of(p.coeff(r));
        }
    }

    // Does monomial r dominate every other nonzero monomial r' (r' != exempt)
    // at scale k by factor Gamma_0 = 2^{g0}? Strict inequality, exact.
    bool dominates(int r, long k, int g0, int exempt = -1) const {
        if (!nonzero[static_cast<std::size_t>(r)]) return false;
        const MantExp& a = me[static_cast<std::size_t>(r)];
        const long lhs_exp = a.exp + k * r;
        for (int rp = 1; rp <= d; ++rp) {
            if (rp == r || rp == exempt || !nonzero[static_cast<std::size_t>(rp)]) continue;
            const MantExp& b = me[static_cast<std::size_t>(rp)];
            if (compare_dyadic(a.mant, lhs_exp, b.mant, b.exp + k * rp + g0) <= 0) return false;
        }
        return true;
    }

    ScaleRecord classify(long k, int g0) const {
        ScaleRecord rec;
        rec.k = k;
        for (int r = 1; r <= d; ++r) {
            if (dominates(r, k, g0)) {
                rec.dominating_r = r;
                break;  // J_r are pairwise disjoint
            }
        }
        if (rec.dominating_r == 1) {
            for (int r = 2; r <= d; ++r) {
                if (dominates(r, k, g0, /*exempt=*/1)) {
                    rec.secondary_r = r;
                    break;
                }
            }
        }
        rec.good = (rec.dominating_r >= 2) || (rec.secondary_r >= 2);
        return rec;
    }
};

}  // namespace detail

// Classification of a single scale; valid for any k (exponent arithmetic).
inline ScaleRecord classify_scale(const Polynomial& p, const ScaleParams& params, long k) {
    return detail::DyadicCoeffs(p).classify(k, params.gamma0_exp);
}

inline ScaleClassification classify_scales(const Polynomial& p, const ScaleParams& params,
                                           IntRange window) {
    if (window.length() <= 0) throw precondition_error("classify_scales: empty window");
    const detail::DyadicCoeffs dc(p);

    ScaleClassification out;
    out.window = window;
    out.records.resize(static_cast<std::size_t>(window.length()));
    for (int k = window.lo; k <= window.hi; ++k) {
        ScaleRecord rec = dc.classify(k, params.gamma0_exp);
        out.records[static_cast<std::size_t>(k - window.lo)] = rec;
        if (rec.dominating_r > 0) out.j_r[rec.dominating_r].push_back(k);
        if (rec.secondary_r > 0) out.j_1r[rec.secondary_r].push_back(k);
        if (rec.good) out.j_good.push_back(k);
        else out.j_bad.push_back(k);
    }
    return out;
}

// Scales where monomials r1 and r2 are within factor Gamma_0 of each other:
// |a_r1| 2^{r1 k} Gamma_0 >= |a_r2| 2^{r2 k} >= |a_r1| 2^{r1 k} / Gamma_0.
// Returns the intersection with the window. `warned` is set when a
// coefficient is zero (vacuous comparison, empty result).
inline std::vector<int> pair_sets(int r1, int r2, const Polynomial& p, const ScaleParams& params,
                                  IntRange window, bool* warned = nullptr) {
    if (r1 == r2) throw precondition_error("pair_sets: need two distinct powers");
    if (warned) *warned = false;
    if (p.coeff(r1) == 0.0 || p.coeff(r2) == 0.0) {
        if (warned) *warned = true;
        return {};
    }
    const MantExp m1 = MantExp::of(p.coeff(r1));
    const MantExp m2 = MantExp::of(p.coeff(r2));
    std::vector<int> out;
    for (int k = window.lo; k <= window.hi; ++k) {
        const long e1 = m1.exp + static_cast<long>(k) * r1;
        const long e2 = m2.exp + static_cast<long>(k) * r2;
        const bool upper = compare_dyadic(m1.mant, e1 + params.gamma0_exp, m2.mant, e2) >= 0;
        const bool lower = compare_dyadic(m2.mant, e2 + params.gamma0_exp, m1.mant, e1) >= 0;
        if (upper && lower) out.push_back(k);
    }
    return out;
}

// Default enumeration window: two nonzero monomials can be within factor
// Gamma_0 of each other only for |k| <= g0 + 2 max_r |b_r| + 1; pad by the
// degree for slack. Every bad scale lies inside.
inline IntRange default_window(const Polynomial& p, const ScaleParams& params) {
    long bmax = 0;
    for (int r = 1; r <= p.degree(); ++r)
        if (p.coeff(r) != 0.0) bmax = std::max<long>(bmax, std::abs(dyadic_exponent(p.coeff(r))));
    int w = static_cast<int>(params.gamma0_exp + 2 * bmax + p.degree() + 1);
    return {-w, w};
}

// One retained pair (j_i, ell_i) with the scale data used by the phase
// analysis. All derived integers refer to the scale k = j - ell.
struct AdmissiblePair {
    long j = 0;
    long ell = 0;
    int d0 = 0;   // dominating degree at scale j - ell
    long m0 = 0;  // b_{d0} + (d0 - 1)(j - ell)
    int d1 = 0;   // secondary dominating degree (d0 == 1 only)
    long b1 = 0;  // dyadic exponent of a_1 (d0 == 1 only)
    long q0 = 0;  // b_{d1} + (d1 - 1)(j - ell) - b_1 (d0 == 1 only)

    // lambda = 2^{m + m0 - (d-1)j - ell}: exponent as a function of m.
    long lambda_exponent(int m, int degree) const {
        return static_cast<long>(m) + m0 - static_cast<long>(degree - 1) * j - ell;
    }
};

struct AdmissibleSets {
    std::vector<long> E;
    std::vector<long> Lambda;
    std::vector<AdmissiblePair> pairs;
    long gamma_d = 0;
    long admissibility_bound = 0;
};

namespace detail {

// Constraint |b_r + (r-1)(j-ell)| >= theta for every 2 <= r <= d with a_r != 0.
inline bool largeness_ok(const Polynomial& p, const ScaleParams& params, long j, long ell) {
    for (int r = 2; r <= p.degree(); ++r) {
        if (p.coeff(r) == 0.0) continue;
        long b = dyadic_exponent(p.coeff(r));
        if (std::abs(b + static_cast<long>(r - 1) * (j - ell)) < params.theta) return false;
    }
    return true;
}

}  // namespace detail

// Interlaced construction 0 = j_0 < ell_0 < j_1 < ell_1 < ... with j_i in
// E_0 = {2 Gamma_d i}, ell_i in Lambda_0 = Z>=0 minus the shifted bad scales,
// and the largeness constraint on every retained pair.
inline AdmissibleSets build_admissible(const Polynomial& p, const ScaleParams& params, int count) {
    if (count < 1) throw precondition_error("build_admissible: count >= 1 required");
    const int d = p.degree();
    const long gd = params.gamma_d(d);
    const IntRange window = default_window(p, params);
    const detail::DyadicCoeffs dc(p);
    const ScaleClassification cls = classify_scales(p, params, window);

    const std::vector<int>& bad = cls.j_bad;  // sorted; all bad scales are in here
    auto is_bad = [&bad](long k) {
        if (k < std::numeric_limits<int>::min() || k > std::numeric_limits<int>::max()) return false;
        return std::binary_search(bad.begin(), bad.end(), static_cast<int>(k));
    };
    // ell belongs to Lambda_0 iff j - ell is good for every j in E_0. Only
    // lattice points with j - ell inside the window can fail.
    auto in_lambda0 = [&](long ell) {
        long i_lo = std::max(0L, (ell + window.lo) / (2 * gd) - 1);
        long i_hi = std::max(0L, (ell + window.hi) / (2 * gd) + 1);
        for (long i = i_lo; i <= i_hi; ++i) {
            if (is_bad(2 * gd * i - ell)) return false;
        }
        return true;
    };

    AdmissibleSets out;
    out.gamma_d = gd;
    out.admissibility_bound = params.admissibility_bound(d);

    long j = 0;  // j_0 = 0 always
    const long sweep = 2 * gd * (params.theta + d);
    for (int i = 0; i < count; ++i) {
        std::optional<long> ell;
        for (long cand = j + 1; cand <= j + sweep; ++cand) {
            if (!in_lambda0(cand)) continue;
            if (!detail::largeness_ok(p, params, j, cand)) continue;
            ell = cand;
            break;
        }
        if (!ell) {
            throw check_error("build_admissible: construction exhausted after sweep of length " +
                              std::to_string(sweep) + " past j = " + std::to_string(j) +
                              " (bug signal; report polynomial and parameters)");
        }

        AdmissiblePair pr;
        pr.j = j;
        pr.ell = *ell;
        const long k = j - *ell;
        const ScaleRecord rec = dc.classify(k, params.gamma0_exp);
        if (!rec.good)
            throw check_error("build_admissible: retained scale is not good (internal error)");
        pr.d0 = rec.dominating_r >= 2 ? rec.dominating_r : 1;
        pr.m0 = dyadic_exponent(p.coeff(pr.d0)) + static_cast<long>(pr.d0 - 1) * k;
        if (pr.d0 == 1) {
            pr.d1 = rec.secondary_r;
            pr.b1 = dyadic_exponent(p.coeff(1));
            pr.q0 = dyadic_exponent(p.coeff(pr.d1)) + static_cast<long>(pr.d1 - 1) * k - pr.b1;
        }
        out.pairs.push_back(pr);
        out.E.push_back(j);
        out.Lambda.push_back(*ell);

        // Next j: first E_0 lattice point strictly beyond ell_i.
        j = 2 * gd * ((*ell) / (2 * gd) + 1);
    }
    return out;
}

}  // namespace polyroth

#endif  // POLYROTH_SCALES_HPP
