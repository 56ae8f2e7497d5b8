#ifndef POLYROTH_TRILINEAR_HPP
#define POLYROTH_TRILINEAR_HPP

// The trilinear density functional, its localized variant, the I_1..I_4
// decomposition with the mean-value and Cauchy-Schwarz bounds, the bilinear
// decay probe, and the pigeonhole run that certifies a lower bound on I.
//
// All double integrals are midpoint sums. Reads of translated grid functions
// reduce to constant integer cell offsets per t (every x-midpoint shares the
// fractional part 1/2), which keeps the inner loops in plain indexed
// arithmetic.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "polyroth/bump.hpp"
#include "polyroth/common.hpp"
#include "polyroth/fft.hpp"
#include "polyroth/fit.hpp"
#include "polyroth/grid.hpp"
#include "polyroth/mollify.hpp"
#include "polyroth/poly.hpp"
#include "polyroth/scales.hpp"

namespace polyroth {

namespace detail {

// Resample f to resolution n as a plain value array (piecewise-constant
// reads; exact when f.resolution() <= n).
inline std::vector<double> resample_real(const GridFunction& f, int n) {
    const std::size_t size = static_cast<std::size_t>(1) << n;
    std::vector<double> v(size);
    const double h = std::ldexp(1.0, -n);
    for (std::size_t i = 0; i < size; ++i) v[i] = f.value_at((static_cast<double>(i) + 0.5) * h).real();
    return v;
}

inline double read_shifted(const std::vector<double>& v, long idx, bool periodic) {
    const long n = static_cast<long>(v.size());
    if (periodic) {
        idx %= n;
        if (idx < 0) idx += n;
        return v[static_cast<std::size_t>(idx)];
    }
    if (idx < 0 || idx >= n) return 0.0;
    return v[static_cast<std::size_t>(idx)];
}

// Integer cell offset of a real shift s at resolution n: reading cell i of a
// function translated by s lands in cell i + offset(s).
inline long shift_offset(double s, int n) {
    return static_cast<long>(std::floor(0.5 + s * std::ldexp(1.0, n))) ;
}

}  // namespace detail

struct TrilinearResult {
    double value = 0.0;          // at resolution n
    double value_refined = 0.0;  // at resolution n+1
    double richardson_gap = 0.0;
    int resolution = 0;
    int j = 0;
    bool unresolved = false;  // gap > 1e-3 max(value, 1e-6)
};

namespace detail {

inline double trilinear_once(const std::vector<double>& v, const Polynomial& p, int j, int n) {
    const int d = p.degree();
    const std::size_t size = static_cast<std::size_t>(1) << n;
    const double h = std::ldexp(1.0, -n);
    const double shift1_scale = std::ldexp(1.0, -(d - 1) * j);
    const Polynomial pj_mat = RescaledPolynomial(p, j).materialize();

    // Zero extension: only the x-range where both shifted reads stay inside
    // [0, size) contributes, and there the three reads are contiguous.
    std::vector<double> partial(size, 0.0);
    parallel_for(size, [&](std::size_t it) {
        const double t = (static_cast<double>(it) + 0.5) * h;
        const long o1 = shift_offset(shift1_scale * t, n);
        const long o2 = shift_offset(pj_mat.eval(t), n);
        const long lo = std::max({0L, -o1, -o2});
        const long hi = static_cast<long>(size) - 1 - std::max({0L, o1, o2});
        if (lo > hi) return;
        const double* a = v.data() + lo;
        const double* b = v.data() + lo + o1;
        const double* c = v.data() + lo + o2;
        double row = 0.0;
        const std::size_t len = static_cast<std::size_t>(hi - lo + 1);
        for (std::size_t k = 0; k < len; ++k) row += a[k] * b[k] * c[k];
        partial[it] = row;
    });
    double total = 0.0;
    for (double r : partial) total += r;  // fixed order keeps determinism
    return total * h * h;
}

}  // namespace detail

// integral over [0,1]^2 of f(x) f(x + 2^{-(d-1)j} t) f(x + 2^{-dj} P(2^j t)),
// with f read as zero outside [0,1].
inline TrilinearResult trilinear_form(const GridFunction& f, const Polynomial& p, int j, int n) {
    if (j < 0) throw precondition_error("trilinear_form: j >= 0 required");
    for (const auto& x : f.values())
        if (x.real() < -1e-12 || x.real() > 1.0 + 1e-12 || std::abs(x.imag()) > 0.0)
            throw precondition_error("trilinear_form: need 0 <= f <= 1 real");
    TrilinearResult out;
    out.j = j;
    out.resolution = n;
    out.value = detail::trilinear_once(detail::resample_real(f, n), p, j, n);
    out.value_refined = detail::trilinear_once(detail::resample_real(f, n + 1), p, j, n + 1);
    out.richardson_gap = std::abs(out.value_refined - out.value);
    out.unresolved = out.richardson_gap > 1e-3 * std::max(out.value, 1e-6);
    return out;
}

// integral of f(x) g(x + 2^{-(d-1)j} t) h(x + 2^{-dj} P(2^j t)) tau_ell(t),
// t refined to 2^{max(n, ell+8)} cells per unit on the support of tau_ell.
// Each function is read with its own periodic/zero-extension convention.
inline double localized_form(const GridFunction& f, const GridFunction& g, const GridFunction& h,
                             const Polynomial& p, int j, int ell) {
    const int n = f.resolution();
    const int d = p.degree();
    const Bump tl = tau_bump(ell);
    const int tgrid = std::max(n, ell + 8);
    const double dt = std::ldexp(1.0, -tgrid);
    const double shift1_scale = std::ldexp(1.0, -(d - 1) * j);
    const Polynomial pj = RescaledPolynomial(p, j).materialize();

    const std::vector<double> fv = detail::resample_real(f, n);
    const std::vector<double> gv = detail::resample_real(g, n);
    const std::vector<double> hv = detail::resample_real(h, n);

    const long it_lo = static_cast<long>(std::floor(tl.support_lo() / dt));
    const long it_hi = static_cast<long>(std::ceil(tl.support_hi() / dt));
    const double hx = std::ldexp(1.0, -n);

    double total = 0.0;
    for (long it = it_lo; it <= it_hi; ++it) {
        const double t = (static_cast<double>(it) + 0.5) * dt;
        const double w = tl(t) * dt;
        if (w == 0.0) continue;
        const long o1 = detail::shift_offset(shift1_scale * t, n);
        const long o2 = detail::shift_offset(pj.eval(t), n);
        double row = 0.0;
        for (std::size_t ix = 0; ix < fv.size(); ++ix) {
            const double fx = fv[ix];
            if (fx == 0.0) continue;
            row += fx * detail::read_shifted(gv, static_cast<long>(ix) + o1, g.periodic()) *
                   detail::read_shifted(hv, static_cast<long>(ix) + o2, h.periodic());
        }
        total += w * row;
    }
    return total * hx;
}

struct DecomposeResult {
    double I = 0.0;            // plain trilinear value at f's resolution
    double localized = 0.0;    // the tau_ell localized trilinear form
    double I1 = 0.0, I2 = 0.0, I3 = 0.0, I4 = 0.0;
    double identity_gap = 0.0;     // |I1 + I2 + I3 - localized|
    double i2_bound = 0.0;         // ||f*vt_{l''} - f*vt_{l'}||_2
    double mvt_bound = 0.0;        // d M 2^{l' - l + 1}
    double i4_minus_i1 = 0.0;
};

inline DecomposeResult decompose_I(const GridFunction& f, const Polynomial& p, int j, int ell_p,
                                   int ell, int ell_pp) {
    if (!(1 <= ell_p && ell_p <= ell && ell <= ell_pp))
        throw precondition_error("decompose_I: need 1 <= ell' <= ell <= ell''");
    const int n = f.resolution();
    const int d = p.degree();
    if (ell_pp > n || ell + (d - 1) * j > n)
        throw precondition_error("decompose_I: kernels not resolvable at this resolution");

    DecomposeResult out;
    out.I = detail::trilinear_once(detail::resample_real(f, n), p, j, n);

    const GridFunction f_lp = mollify_convolve(f, vartheta_bump(ell_p));
    const GridFunction f_lpp = mollify_convolve(f, vartheta_bump(ell_pp));
    GridFunction diff(n, f.periodic()), tail(n, f.periodic());
    for (std::size_t i = 0; i < f.size(); ++i) {
        diff[i] = f_lpp[i] - f_lp[i];
        tail[i] = f[i] - f_lpp[i];
    }

    out.localized = localized_form(f, f, f, p, j, ell);
    out.I1 = localized_form(f, f, f_lp, p, j, ell);
    out.I2 = localized_form(f, f, diff, p, j, ell);
    out.I3 = localized_form(f, f, tail, p, j, ell);
    out.identity_gap = std::abs(out.I1 + out.I2 + out.I3 - out.localized);
    out.i2_bound = diff.norm2();
    out.mvt_bound = d * p.l1_norm() * std::ldexp(2.0, ell_p - ell);

    // I4 = integral f (f*vt_{l'}) (f*tau_{l+(d-1)j}).
    const GridFunction f_tau = mollify_convolve(f, tau_bump(ell + (d - 1) * j));
    double i4 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        i4 += f[i].real() * f_lp[i].real() * f_tau[i].real();
    out.I4 = i4 * f.cell_width();
    out.i4_minus_i1 = std::abs(out.I4 - out.I1);
    return out;
}

struct DecayProbeRow {
    int m = 0;
    double norm_max = 0.0;  // max over trials of ||B||_1 / (||f||_2 ||g||_2)
    std::size_t trials = 0;
};

struct DecayProbeResult {
    std::vector<DecayProbeRow> rows;
    DecayFit fit;          // log2 norm_max against m; gamma_hat = -slope
    int f_band_offset = 0; // f drawn on the band 2^{m + m0} per the reduction
};

namespace detail {

// Real random function with unit L2 norm and spectrum on +-[2^lo, 2^hi).
inline std::vector<double> random_band_limited(int n, long lo, long hi, std::mt19937_64& rng) {
    const std::size_t size = static_cast<std::size_t>(1) << n;
    std::vector<cplx> spec(size, cplx(0, 0));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (long freq = lo; freq < hi; ++freq) {
        if (freq <= 0 || freq >= static_cast<long>(size / 2)) continue;
        const cplx c(gauss(rng), gauss(rng));
        spec[static_cast<std::size_t>(freq)] = c;
        spec[size - static_cast<std::size_t>(freq)] = std::conj(c);
    }
    fft_inplace(spec, true);
    std::vector<double> v(size);
    double nrm = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
        v[i] = spec[i].real();
        nrm += v[i] * v[i];
    }
    nrm = std::sqrt(nrm * std::ldexp(1.0, -n));
    if (nrm == 0.0) throw check_error("random_band_limited: empty band");
    for (auto& x : v) x /= nrm;
    return v;
}

}  // namespace detail

namespace detail {

struct OffsetRun {
    std::size_t s1 = 0, s2 = 0;  // reduced cell offsets
    double w = 0.0;              // integral of tau_ell over the run
};

// The grid reads f(x + c1(t)), g(x + c2(t)) are piecewise constant in t:
// they only change where c1(t) 2^n or c2(t) 2^n crosses a half-integer.
// Enumerating those breakpoints evaluates the t-integral of the discretized
// integrand exactly (up to the smooth tau weight per run), with a run count
// independent of the spectral parameter m.
inline std::vector<OffsetRun> offset_runs(const Polynomial& pj, double shift1_scale, int ell,
                                          int n) {
    const Bump tl = tau_bump(ell);
    const double lo = tl.support_lo(), hi = tl.support_hi();
    const double cell = std::ldexp(1.0, -n);
    const std::size_t size = static_cast<std::size_t>(1) << n;

    std::vector<double> cuts = {lo, hi};
    // c1(t) = shift1_scale * t crossings: t = (k + 1/2) 2^-n / shift1_scale.
    {
        const double step = cell / shift1_scale;
        for (double t = (std::floor(lo / step - 0.5) + 0.5) * step; t < hi; t += step)
            if (t > lo) cuts.push_back(t);
    }
    // c2(t) = pj(t) crossings, per monotone segment of pj.
    {
        std::vector<double> seg = {lo, hi};
        for (double r : isolate_roots([&](double t) { return pj.eval(t, 1); }, lo, hi, 256))
            seg.push_back(r);
        std::sort(seg.begin(), seg.end());
        for (std::size_t si = 0; si + 1 < seg.size(); ++si) {
            const double a = seg[si], b = seg[si + 1];
            if (b - a < 1e-15) continue;
            double va = pj.eval(a), vb = pj.eval(b);
            const bool up = vb >= va;
            const double vlo = std::min(va, vb), vhi = std::max(va, vb);
            if ((vhi - vlo) / cell > 1e7)
                throw unresolved_error("offset_runs: polynomial variation too large for grid");
            for (double lvl = (std::floor(vlo / cell - 0.5) + 0.5) * cell; lvl < vhi; lvl += cell) {
                if (lvl <= vlo) continue;
                // pj is monotone on [a,b]; bisect for pj(t) = lvl.
                double ta = a, tb = b;
                for (int it = 0; it < 60; ++it) {
                    const double tm = 0.5 * (ta + tb);
                    if ((pj.eval(tm) < lvl) == up) ta = tm;
                    else tb = tm;
                }
                cuts.push_back(0.5 * (ta + tb));
            }
        }
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<OffsetRun> runs;
    const std::size_t mask = size - 1;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        if (b - a <= 0.0) continue;
        const double t = 0.5 * (a + b);
        const double w = tl(t) * (b - a);
        if (w == 0.0) continue;
        OffsetRun run;
        run.s1 = static_cast<std::size_t>(
                     (shift_offset(shift1_scale * t, n) % static_cast<long>(size) + size)) & mask;
        run.s2 = static_cast<std::size_t>(
                     (shift_offset(pj.eval(t), n) % static_cast<long>(size) + size)) & mask;
        run.w = w;
        runs.push_back(run);
    }
    return runs;
}

}  // namespace detail

// Lower estimates of the bilinear norm: for each m, the max over trials of
//   || integral f(x + 2^{-(d-1)j} t) g(x + 2^{-dj} P(2^j t)) tau_ell(t) dt ||_{L1([0,1])}
// over random real g with spectrum on +-[2^m, 2^{m+1}) and random real f with
// spectrum on the matching band +-[2^{m+m0}, 2^{m+m0+1}) singled out by the
// frequency analysis; both unit L2.
inline DecayProbeResult bilinear_decay_probe(const Polynomial& p, const AdmissiblePair& pair,
                                             const std::vector<int>& m_list, std::size_t trials,
                                             std::uint64_t seed, int n) {
    if (trials < 16) throw precondition_error("bilinear_decay_probe: trials >= 16 required");
    const int d = p.degree();
    if (pair.j < 0 || pair.ell < 0 || pair.ell > n)
        throw precondition_error("bilinear_decay_probe: pair not resolvable at this resolution");
    const int j = static_cast<int>(pair.j);
    const int ell = static_cast<int>(pair.ell);
    const std::size_t size = static_cast<std::size_t>(1) << n;
    const double hx = std::ldexp(1.0, -n);
    const Polynomial pj = RescaledPolynomial(p, j).materialize();
    const double shift1_scale = std::ldexp(1.0, -(d - 1) * j);
    const std::vector<detail::OffsetRun> runs = detail::offset_runs(pj, shift1_scale, ell, n);

    DecayProbeResult out;
    out.f_band_offset = static_cast<int>(pair.m0);
    std::vector<double> fit_x, fit_y;
    for (int m : m_list) {
        if ((2L << m) > static_cast<long>(size / 2))
            throw precondition_error("bilinear_decay_probe: m above Nyquist");
        const long f_lo = 1L << std::max<long>(0, m + pair.m0);
        const long f_hi = 2 * f_lo;

        std::vector<double> trial_values(trials, 0.0);
        parallel_for(trials, [&](std::size_t tr) {
            auto rng = rng_stream(seed, static_cast<std::uint64_t>(m), tr);
            const std::vector<double> g = detail::random_band_limited(n, 1L << m, 2L << m, rng);
            const std::vector<double> f = detail::random_band_limited(n, f_lo, f_hi, rng);
            std::vector<double> B(size, 0.0);
            const std::size_t mask = size - 1;
            for (const detail::OffsetRun& run : runs) {
                const double w = run.w;
                // Split [0, size) at the two wrap points so every segment
                // reads f and g contiguously.
                std::size_t br[3] = {std::min(size - run.s1, size - run.s2),
                                     std::max(size - run.s1, size - run.s2), size};
                std::size_t a = 0;
                for (std::size_t seg = 0; seg < 3; ++seg) {
                    const std::size_t b = br[seg];
                    if (b <= a) continue;
                    const double* fp = f.data() + ((a + run.s1) & mask);
                    const double* gp = g.data() + ((a + run.s2) & mask);
                    double* bp = B.data() + a;
                    const std::size_t len = b - a;
                    for (std::size_t k = 0; k < len; ++k) bp[k] += w * fp[k] * gp[k];
                    a = b;
                }
            }
            double l1 = 0.0;
            for (double b : B) l1 += std::abs(b);
            trial_values[tr] = l1 * hx;  // f, g unit L2
        });
        DecayProbeRow row;
        row.m = m;
        row.trials = trials;
        row.norm_max = *std::max_element(trial_values.begin(), trial_values.end());
        out.rows.push_back(row);
        fit_x.push_back(static_cast<double>(m));
        fit_y.push_back(row.norm_max);
    }
    if (out.rows.size() < 3) throw precondition_error("bilinear_decay_probe: need >= 3 usable m");
    out.fit = fit_log2(fit_x, fit_y);
    return out;
}

struct PigeonholeStep {
    int k = 0;
    int ell_k = 0, ell_k1 = 0;
    double i_threshold = 0.0;   // 2^{-ell_{k+1} - 10} c0 eps^3
    double increment = 0.0;     // the L2 alternative value
    double increment_threshold = 0.0;  // 2^{-10} c0 eps^3
    bool i_fires = false;
};

struct PigeonholeReport {
    double epsilon = 0.0;
    double c0 = 0.0;
    double I = 0.0;
    std::vector<PigeonholeStep> steps;
    int fired_k = -1;                 // first k with I > threshold
    double certified_lower_bound = 0.0;
    double energy = 0.0;              // accumulated squared increments
    double energy_bound = 0.0;        // 2 C_0
    bool energy_ok = false;
};

// Runs the scale pigeonhole on an increasing sequence of resolvable scales
// (consecutive integers standing in for the Lambda elements, whose true
// spacing 2 Gamma_d is far beyond any grid) and reports the first scale at
// which the lower-bound alternative fires, plus the increment energy ledger.
inline PigeonholeReport pigeonhole_demo(const GridFunction& f, const Polynomial& p, int j, int K,
                                        int ell_base = 1) {
    if (!f.is_nonnegative(0.0) || f.norm_inf() > 1.0 + 1e-12)
        throw precondition_error("pigeonhole_demo: need 0 <= f <= 1");
    const int n = f.resolution();
    const int d = p.degree();
    PigeonholeReport rep;
    rep.epsilon = f.integral().real();
    rep.c0 = bourgain_c0(n);
    rep.energy_bound = 2.0 * orthogonality_constant(n);
    rep.I = detail::trilinear_once(detail::resample_real(f, n), p, j, n);

    const double eps3 = rep.epsilon * rep.epsilon * rep.epsilon;
    const int max_ell = n - 2 - (d - 1) * j;
    for (int k = 0; k < K; ++k) {
        const int lk = ell_base + k, lk1 = ell_base + k + 1;
        if (lk1 + (d - 1) * j > std::min(max_ell + (d - 1) * j, n - 2)) break;
        PigeonholeStep step;
        step.k = k;
        step.ell_k = lk;
        step.ell_k1 = lk1;
        step.i_threshold = std::ldexp(rep.c0 * eps3, -lk1 - 10);
        step.increment_threshold = std::ldexp(rep.c0 * eps3, -10);
        GridFunction a = mollify_convolve(f, vartheta_bump(lk));
        GridFunction b = mollify_convolve(f, vartheta_bump(lk1));
        GridFunction aj = mollify_convolve(f, vartheta_bump(lk + (d - 1) * j));
        GridFunction bj = mollify_convolve(f, vartheta_bump(lk1 + (d - 1) * j));
        double d1 = 0.0, d2 = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            d1 += std::norm(a[i] - b[i]);
            d2 += std::norm(aj[i] - bj[i]);
        }
        d1 *= f.cell_width();
        d2 *= f.cell_width();
        step.increment = std::sqrt(d1) + std::sqrt(d2);
        step.i_fires = rep.I > step.i_threshold;
        rep.energy += d1 + d2;
        rep.steps.push_back(step);
        if (step.i_fires && rep.fired_k < 0) {
            rep.fired_k = k;
            rep.certified_lower_bound = step.i_threshold;
        }
    }
    rep.energy_ok = rep.energy <= rep.energy_bound * (1.0 + 1e-9);
    return rep;
}

}  // namespace polyroth

#endif  // POLYROTH_TRILINEAR_HPP
