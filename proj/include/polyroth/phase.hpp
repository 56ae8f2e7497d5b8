#ifndef POLYROTH_PHASE_HPP
#define POLYROTH_PHASE_HPP

// Phase analysis for the bilinear oscillatory estimates: the phase
// Phi_{xi,eta}(t) = t xi + eta Q(t) on the bump support [1/2, 2], its dual
// phase Psi(xi,eta) = Phi(t_c) with closed-form derivatives, stationary-phase
// versus quadrature comparisons, the mixed-derivative and Hormander-type
// decay probes, and the linear-dominant-case structure check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "polyroth/bump.hpp"
#include "polyroth/common.hpp"
#include "polyroth/fit.hpp"
#include "polyroth/poly.hpp"
#include "polyroth/quadrature.hpp"
#include "polyroth/scales.hpp"

namespace polyroth {

struct CriticalPoint {
    double t = 0.0;
    double phi2 = 0.0;  // Phi''(t) = eta Q''(t)
    bool degenerate = false;
};

namespace detail {

inline double phase_value(const DensePoly& q, double xi, double eta, double t) {
    return t * xi + eta * q.eval(t);
}
inline double phase_deriv(const DensePoly& q, double xi, double eta, double t, int order) {
    if (order == 0) return phase_value(q, xi, eta, t);
    if (order == 1) return xi + eta * q.eval(t, 1);
    return eta * q.eval(t, order);
}

}  // namespace detail

// All critical points of Phi_{xi,eta} on [1/2, 2]: bracketed roots of
// xi + eta Q'(t) from a 1024-point sign scan, bisection refined, then
// Newton-polished. Points with |Phi''| below tolerance are flagged.
inline std::vector<CriticalPoint> critical_points(const DensePoly& q, double xi, double eta,
                                                  int scan = 1024) {
    if (eta == 0.0) throw precondition_error("critical_points: eta must be nonzero");
    const DensePoly dq = q.derivative();
    auto f = [&](double t) { return xi + eta * dq.eval(t); };
    std::vector<double> roots = isolate_roots(f, 0.5, 2.0, scan);

    // The scale of Phi' over the interval, for the residual tolerance.
    double qnorm = 0.0;
    for (double c : q.c) qnorm += std::abs(c);
    const double scale = std::abs(xi) + std::abs(eta) * qnorm;

    std::vector<CriticalPoint> out;
    for (double t : roots) {
        for (int it = 0; it < 8; ++it) {  // Newton polish
            const double g = f(t);
            const double dg = eta * q.eval(t, 2);
            if (dg == 0.0) break;
            const double step = g / dg;
            const double next = t - step;
            if (next < 0.5 || next > 2.0 || std::abs(step) > 0.1) break;
            t = next;
            if (std::abs(step) < 1e-15) break;
        }
        if (std::abs(f(t)) > 1e-10 * scale) continue;  // scan artifact, not a root
        CriticalPoint cp;
        cp.t = t;
        cp.phi2 = eta * q.eval(t, 2);
        cp.degenerate = std::abs(cp.phi2) <= 1e-8 * (1.0 + std::abs(eta) * qnorm);
        // Deduplicate near-identical roots from adjacent scan cells.
        if (!out.empty() && std::abs(out.back().t - cp.t) < 1e-9) continue;
        out.push_back(cp);
    }
    return out;
}

struct DualPhase {
    bool has_critical = false;  // false: no stationary point, treat a(xi,eta) = 0
    double t_c = 0.0;
    double psi = 0.0;       // Psi = t_c xi + eta Q(t_c)
    double dpsi_dxi = 0.0;  // equals t_c
    double H = 0.0;         // d_eta d_xi Psi = -Q'(t_c) / (eta Q''(t_c))
};

// Closed-form dual phase. Requires a unique nondegenerate critical point;
// raises on multiple or degenerate ones, returns has_critical=false on none.
inline DualPhase dual_phase(const DensePoly& q, double xi, double eta) {
    const std::vector<CriticalPoint> cps = critical_points(q, xi, eta);
    DualPhase out;
    if (cps.empty()) return out;
    if (cps.size() > 1)
        throw precondition_error("dual_phase: multiple critical points; isolate with a cutoff first");
    if (cps.front().degenerate)
        throw precondition_error("dual_phase: degenerate critical point (Phi'' ~ 0)");
    const double t = cps.front().t;
    out.has_critical = true;
    out.t_c = t;
    out.psi = t * xi + eta * q.eval(t);
    out.dpsi_dxi = t;
    out.H = -q.eval(t, 1) / (eta * q.eval(t, 2));
    return out;
}

// Local Psi evaluation for finite-difference stencils: the critical point is
// tracked by Newton from a caller-supplied warm start instead of a global
// scan. Returns nullopt if the iteration leaves [0.4, 2.1] or stalls.
inline std::optional<double> psi_local(const DensePoly& q, double xi, double eta, double* t_guess) {
    double t = *t_guess;
    for (int it = 0; it < 60; ++it) {
        const double g = xi + eta * q.eval(t, 1);
        const double dg = eta * q.eval(t, 2);
        if (dg == 0.0) return std::nullopt;
        const double next = t - g / dg;
        if (next < 0.4 || next > 2.1) return std::nullopt;
        const bool done = std::abs(next - t) < 1e-14 * std::max(1.0, std::abs(t));
        t = next;
        if (done) {
            *t_guess = t;
            return t * xi + eta * q.eval(t);
        }
    }
    return std::nullopt;
}

// integral of e^{i lambda Phi(t)} tau(t) dt over the bump support, to
// absolute tolerance 1e-8 / max(1, sqrt(lambda)).
inline QuadratureResult oscillatory_integral(const DensePoly& q, double xi, double eta,
                                             double lambda, const Bump& tau) {
    if (lambda < 0.0) throw precondition_error("oscillatory_integral: lambda >= 0 required");
    const double lo = tau.support_lo(), hi = tau.support_hi();
    double max_slope = 0.0, max_phase = 0.0, max_tau = 0.0;
    for (int i = 0; i <= 256; ++i) {
        const double t = lo + (hi - lo) * i / 256.0;
        max_slope = std::max(max_slope, std::abs(detail::phase_deriv(q, xi, eta, t, 1)));
        max_phase = std::max(max_phase, std::abs(detail::phase_value(q, xi, eta, t)));
        max_tau = std::max(max_tau, tau(t));
    }
    const double cycles = lambda * max_slope * (hi - lo) / (2.0 * std::numbers::pi);
    const std::size_t panels = static_cast<std::size_t>(std::min(1e6, std::max(4.0, cycles / 4.0)));
    const double tol = 1e-8 / std::max(1.0, std::sqrt(lambda));
    const double noise = 8.0 * std::numeric_limits<double>::epsilon() *
                         (1.0 + lambda * max_phase) * std::max(1.0, max_tau);
    auto f = [&](double t) {
        const double ph = lambda * detail::phase_value(q, xi, eta, t);
        return cplx(std::cos(ph), std::sin(ph)) * tau(t);
    };
    return adaptive_complex_integral(f, lo, hi, tol, panels, 1u << 22, noise);
}

// Leading stationary-phase term lambda^{-1/2} e^{i lambda Psi} c
// |Phi''(t_c)|^{-1/2} tau(t_c), c = sqrt(2 pi) e^{i sign(Phi'') pi/4},
// summed over the nondegenerate critical points.
inline cplx stationary_main_term(const DensePoly& q, double xi, double eta, double lambda,
                                 const Bump& tau) {
    cplx main(0.0, 0.0);
    for (const CriticalPoint& cp : critical_points(q, xi, eta)) {
        if (cp.degenerate)
            throw precondition_error("stationary_main_term: degenerate critical point");
        const double psi = detail::phase_value(q, xi, eta, cp.t);
        const double mag = std::sqrt(2.0 * std::numbers::pi / std::abs(cp.phi2)) * tau(cp.t);
        const double arg = lambda * psi + (cp.phi2 > 0 ? 1.0 : -1.0) * std::numbers::pi / 4.0;
        main += mag * cplx(std::cos(arg), std::sin(arg));
    }
    return main / std::sqrt(lambda);
}

struct StationaryComparison {
    double lambda = 0.0;
    cplx quadrature{0.0, 0.0};
    cplx main_term{0.0, 0.0};
    cplx remainder{0.0, 0.0};          // quadrature - main term
    double remainder_over_lambda_inv = 0.0;  // |remainder| * lambda
    double normalized_remainder = 0.0;       // |remainder| * sqrt(lambda), the R(lambda) scale
    double quad_error = 0.0;
};

struct StationarySweep {
    std::vector<StationaryComparison> rows;
    DecayFit remainder_fit;   // log2 normalized remainder vs log2 lambda
    double remainder_cap = 0.0;  // max over the sweep of |remainder| * lambda
};

// Quadrature against the closed-form main term across a lambda sweep. The
// fitted decay is on the normalized remainder sqrt(lambda) |quad - main|,
// the scale on which the stationary-phase remainder lives.
inline StationarySweep stationary_compare(const DensePoly& q, double xi, double eta,
                                          const std::vector<double>& lambdas, const Bump& tau) {
    StationarySweep sweep;
    std::vector<double> xs, ys;
    for (double lambda : lambdas) {
        StationaryComparison row;
        row.lambda = lambda;
        const QuadratureResult qr = oscillatory_integral(q, xi, eta, lambda, tau);
        row.quadrature = qr.value;
        row.quad_error = qr.error_estimate;
        row.main_term = stationary_main_term(q, xi, eta, lambda, tau);
        row.remainder = row.quadrature - row.main_term;
        row.remainder_over_lambda_inv = std::abs(row.remainder) * lambda;
        row.normalized_remainder = std::abs(row.remainder) * std::sqrt(lambda);
        sweep.remainder_cap = std::max(sweep.remainder_cap, row.remainder_over_lambda_inv);
        sweep.rows.push_back(row);
        xs.push_back(std::log2(lambda));
        ys.push_back(row.normalized_remainder);
    }
    sweep.remainder_fit = fit_log2(xs, ys);
    return sweep;
}

struct HBoundReport {
    std::size_t samples_used = 0;
    std::size_t skipped_no_critical = 0;
    double min_abs_dxi_H = std::numeric_limits<double>::infinity();
    double max_abs_dxi_H = 0.0;
    double min_abs_deta_H = std::numeric_limits<double>::infinity();
    double max_abs_deta_H = 0.0;
    double min_ratio = std::numeric_limits<double>::infinity();  // 1 - Q'Q'''/(Q'')^2
    double threshold = 0.0;                                      // (99/100) / (d0 - 1)
    bool pass = false;
};

// Closed-form bounds on the gradient of H = d_eta d_xi Psi over random
// samples of the annuli |xi|, |eta| in [1,2]:
//   d_xi H  = (1/(eta^2 Q'')) (1 - Q''' Q' / (Q'')^2)
//   d_eta H = (Q'/(eta^2 Q'')) (2 - Q' Q''' / (Q'')^2)
// The ratio 1 - Q'Q'''/(Q'')^2 must clear half of (99/100)/(d0-1).
inline HBoundReport hbound_check(const DensePoly& q, int d0, std::size_t sample_count,
                                 std::uint64_t seed, double slack = 0.0) {
    if (d0 < 2) throw precondition_error("hbound_check: requires a pair with d0 >= 2");
    HBoundReport rep;
    rep.threshold = (99.0 / 100.0) / static_cast<double>(d0 - 1) * (1.0 - slack);
    auto rng = rng_stream(seed, 0xb0);
    std::uniform_real_distribution<double> mag(1.0, 2.0);
    std::uniform_int_distribution<int> sgn(0, 1);
    for (std::size_t s = 0; s < sample_count; ++s) {
        const double xi = (sgn(rng) ? 1.0 : -1.0) * mag(rng);
        const double eta = (sgn(rng) ? 1.0 : -1.0) * mag(rng);
        std::vector<CriticalPoint> cps = critical_points(q, xi, eta);
        if (cps.size() != 1 || cps.front().degenerate) {
            ++rep.skipped_no_critical;
            continue;
        }
        const double t = cps.front().t;
        const double q1 = q.eval(t, 1), q2 = q.eval(t, 2), q3 = q.eval(t, 3);
        const double ratio = 1.0 - q3 * q1 / (q2 * q2);
        const double dxi_h = ratio / (eta * eta * q2);
        const double deta_h = q1 / (eta * eta * q2) * (1.0 + ratio);
        ++rep.samples_used;
        rep.min_ratio = std::min(rep.min_ratio, ratio);
        rep.min_abs_dxi_H = std::min(rep.min_abs_dxi_H, std::abs(dxi_h));
        rep.max_abs_dxi_H = std::max(rep.max_abs_dxi_H, std::abs(dxi_h));
        rep.min_abs_deta_H = std::min(rep.min_abs_deta_H, std::abs(deta_h));
        rep.max_abs_deta_H = std::max(rep.max_abs_deta_H, std::abs(deta_h));
    }
    rep.pass = rep.samples_used > 0 && rep.min_ratio > 0.5 * rep.threshold;
    return rep;
}

struct MixedDerivativeReport {
    std::vector<double> alphas;
    std::vector<double> floors;          // min over samples of |dxi deta Xi_alpha|
    std::vector<std::size_t> used, skipped;
    double c_probe = 0.0;                // min over alphas of floor / alpha
    DecayFit trend;                      // log2 floor vs log2 alpha
};

// |d_xi d_eta (Psi(xi,eta) - Psi(xi+dxi, eta+deta))| over random annulus
// samples, by the 4-point cross difference applied to both Psi terms. The
// shift puts alpha on whichever component the largeness of |m0| makes
// dominant: (2^{-m0} alpha, -alpha) for m0 > 0, (alpha, -2^{m0} alpha)
// otherwise, so both evaluation points stay inside the annuli.
inline MixedDerivativeReport mixed_derivative_probe(const DensePoly& q, const AdmissiblePair& pair,
                                                    const std::vector<double>& alphas,
                                                    std::size_t samples, std::uint64_t seed) {
    if (pair.d0 < 2) throw precondition_error("mixed_derivative_probe: requires d0 >= 2");
    MixedDerivativeReport rep;
    auto psi_at = [&](double xi, double eta, double t0) -> std::optional<double> {
        double t = t0;
        return psi_local(q, xi, eta, &t);
    };
    const double h = 1e-4;
    std::vector<double> fit_x, fit_y;
    for (double alpha : alphas) {
        double dxi, deta;
        if (pair.m0 >= 0) {
            dxi = std::ldexp(alpha, static_cast<int>(std::min<long>(60, pair.m0) * -1));
            deta = -alpha;
        } else {
            dxi = alpha;
            deta = -std::ldexp(alpha, static_cast<int>(std::max<long>(-60, pair.m0)));
        }
        auto rng = rng_stream(seed, 0x3d, static_cast<std::uint64_t>(alpha * 1e9));
        std::uniform_real_distribution<double> mag(1.05, 1.9);
        double floor = std::numeric_limits<double>::infinity();
        std::size_t used = 0, skipped = 0;
        for (std::size_t s = 0; s < samples; ++s) {
            const double xi = -mag(rng);  // sign pattern with guaranteed criticals for monic-type Q
            const double eta = mag(rng);
            const std::vector<CriticalPoint> cps = critical_points(q, xi, eta);
            if (cps.size() != 1 || cps.front().degenerate) {
                ++skipped;
                continue;
            }
            const double t0 = cps.front().t;
            // Mixed 2nd difference of Xi(xi,eta) = Psi(xi,eta) - Psi(xi+dxi,eta+deta).
            bool ok = true;
            auto xi_term = [&](double x, double e) -> double {
                auto p1 = psi_at(x, e, t0);
                auto p2 = psi_at(x + dxi, e + deta, t0);
                if (!p1 || !p2) { ok = false; return 0.0; }
                return *p1 - *p2;
            };
            const double hx = h * std::abs(xi), he = h * std::abs(eta);
            const double num = xi_term(xi + hx, eta + he) - xi_term(xi + hx, eta - he) -
                               xi_term(xi - hx, eta + he) + xi_term(xi - hx, eta - he);
            if (!ok) {
                ++skipped;
                continue;
            }
            const double mixed = num / (4.0 * hx * he);
            floor = std::min(floor, std::abs(mixed));
            ++used;
        }
        rep.alphas.push_back(alpha);
        rep.floors.push_back(floor);
        rep.used.push_back(used);
        rep.skipped.push_back(skipped);
        if (used > 0 && alpha > 0.0) {
            fit_x.push_back(std::log2(alpha));
            fit_y.push_back(floor);
        }
    }
    rep.c_probe = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rep.alphas.size(); ++i)
        if (rep.alphas[i] > 0 && std::isfinite(rep.floors[i]))
            rep.c_probe = std::min(rep.c_probe, rep.floors[i] / rep.alphas[i]);
    if (fit_x.size() >= 3) rep.trend = fit_log2(fit_x, fit_y);
    return rep;
}

struct Rect {
    double xi_lo = 1.0, xi_hi = 2.0;
    double eta_lo = 1.0, eta_hi = 2.0;
};

struct HormanderReport {
    std::vector<double> lambdas;
    std::vector<double> norm_estimates;  // max over trials of ||T_lambda f|| / ||f||
    DecayFit fit;                        // log2 estimate vs log2 lambda
};

// Lower estimates of the oscillatory bilinear norm sup |<T_lambda f, g>| on a
// rectangle where the mixed derivative of the phase is bounded away from
// zero. Per trial, f is random on an eta-grid of size ~lambda and the g
// supremum is taken exactly (g* parallel to T_lambda f), which makes the
// trial value ||T_lambda f||_2 / ||f||_2; optional power steps sharpen the
// estimate toward the top singular value.
inline HormanderReport hormander_decay_probe(const std::function<double(double, double)>& phase,
                                             const Rect& rect, const std::vector<double>& lambdas,
                                             std::size_t trials, std::uint64_t seed,
                                             int power_steps = 1) {
    if (trials < 1) throw precondition_error("hormander_decay_probe: trials >= 1");
    HormanderReport rep;
    std::vector<double> fit_x, fit_y;
    for (double lambda : lambdas) {
        // Grid size tracks lambda so per-cell phase increments stay below pi
        // (no aliasing) and the white-noise Rayleigh quotient stays
        // proportional to the top singular value.
        std::size_t g = 64;
        while (static_cast<double>(g) < lambda) g <<= 1;
        g = std::min<std::size_t>(g, 1u << 14);
        const double dxi = (rect.xi_hi - rect.xi_lo) / static_cast<double>(g);
        const double deta = (rect.eta_hi - rect.eta_lo) / static_cast<double>(g);

        // Batch of random unit-norm f vectors.
        std::vector<std::vector<cplx>> f(trials, std::vector<cplx>(g));
        for (std::size_t tr = 0; tr < trials; ++tr) {
            auto rng = rng_stream(seed, static_cast<std::uint64_t>(std::log2(lambda) * 16), tr);
            std::normal_distribution<double> gauss(0.0, 1.0);
            double nrm = 0.0;
            for (auto& v : f[tr]) {
                v = cplx(gauss(rng), gauss(rng));
                nrm += std::norm(v);
            }
            nrm = std::sqrt(nrm * deta);
            for (auto& v : f[tr]) v /= nrm;
        }

        // Row-streamed application of T (and T* for power steps): rows of the
        // kernel are never stored.
        auto apply_T = [&](const std::vector<std::vector<cplx>>& in,
                           std::vector<std::vector<cplx>>& out) {
            for (auto& o : out) std::fill(o.begin(), o.end(), cplx(0, 0));
            std::vector<cplx> row(g);
            for (std::size_t i = 0; i < g; ++i) {
                const double xi = rect.xi_lo + (static_cast<double>(i) + 0.5) * dxi;
                for (std::size_t jj = 0; jj < g; ++jj) {
                    const double eta = rect.eta_lo + (static_cast<double>(jj) + 0.5) * deta;
                    const double ph = lambda * phase(xi, eta);
                    row[jj] = cplx(std::cos(ph), std::sin(ph));
                }
                for (std::size_t tr = 0; tr < in.size(); ++tr) {
                    cplx acc(0, 0);
                    const auto& v = in[tr];
                    for (std::size_t jj = 0; jj < g; ++jj) acc += row[jj] * v[jj];
                    out[tr][i] = acc * deta;
                }
            }
        };
        auto apply_Tstar = [&](const std::vector<std::vector<cplx>>& in,
                               std::vector<std::vector<cplx>>& out) {
            for (auto& o : out) std::fill(o.begin(), o.end(), cplx(0, 0));
            std::vector<cplx> row(g);
            for (std::size_t i = 0; i < g; ++i) {
                const double xi = rect.xi_lo + (static_cast<double>(i) + 0.5) * dxi;
                for (std::size_t jj = 0; jj < g; ++jj) {
                    const double eta = rect.eta_lo + (static_cast<double>(jj) + 0.5) * deta;
                    const double ph = lambda * phase(xi, eta);
                    row[jj] = cplx(std::cos(ph), -std::sin(ph));
                }
                for (std::size_t tr = 0; tr < in.size(); ++tr) {
                    const cplx gi = in[tr][i] * dxi;
                    auto& o = out[tr];
                    for (std::size_t jj = 0; jj < g; ++jj) o[jj] += row[jj] * gi;
                }
            }
        };
        auto l2 = [&](const std::vector<cplx>& v, double meas) {
            double s = 0.0;
            for (const auto& x : v) s += std::norm(x);
            return std::sqrt(s * meas);
        };

        std::vector<std::vector<cplx>> cur = f, img(trials, std::vector<cplx>(g));
        double best = 0.0;
        std::vector<double> prev_norm(trials, 1.0);  // ||f|| = 1 by construction
        for (int step = 0; step < power_steps; ++step) {
            apply_T(cur, img);
            for (std::size_t tr = 0; tr < trials; ++tr) {
                const double nn = l2(img[tr], dxi);
                if (prev_norm[tr] > 0.0) best = std::max(best, nn / prev_norm[tr]);
                prev_norm[tr] = nn;
            }
            if (step + 1 >= power_steps) break;
            apply_Tstar(img, cur);
            for (std::size_t tr = 0; tr < trials; ++tr) {
                const double nn = l2(cur[tr], deta);
                if (prev_norm[tr] > 0.0) best = std::max(best, nn / prev_norm[tr]);
                prev_norm[tr] = nn;
            }
        }
        rep.lambdas.push_back(lambda);
        rep.norm_estimates.push_back(best);
        fit_x.push_back(std::log2(lambda));
        fit_y.push_back(best);
    }
    rep.fit = fit_log2(fit_x, fit_y);
    return rep;
}

// Dual phase as a pointwise-evaluable function for the probe above, with a
// per-thread warm start: Psi(xi, eta) for the given Q. Throws if a grid
// point loses its critical point (the rectangle must be chosen inside the
// stationary region, certified by hbound_check).
inline std::function<double(double, double)> dual_phase_function(DensePoly q) {
    return [q = std::move(q)](double xi, double eta) -> double {
        thread_local double warm = 1.0;
        double t = warm;
        auto v = psi_local(q, xi, eta, &t);
        if (!v) {
            // Re-seed from a global scan once, then give up.
            const auto cps = critical_points(q, xi, eta);
            if (cps.size() != 1 || cps.front().degenerate)
                throw precondition_error("dual_phase_function: no unique critical point in rectangle");
            t = cps.front().t;
            v = psi_local(q, xi, eta, &t);
            if (!v) throw precondition_error("dual_phase_function: Newton stalled");
        }
        warm = t;
        return *v;
    };
}

}  // namespace polyroth

#endif  // POLYROTH_PHASE_HPP
