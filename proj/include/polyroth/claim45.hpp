#ifndef POLYROTH_CLAIM45_HPP
#define POLYROTH_CLAIM45_HPP

// Structure check for the linear-dominant case (d0 = 1). Write
// Q(t) = c1 t + R(t) with c1 the unit-mantissa linear coefficient. The
// quantity controlling the twisted mixed derivative is
//
//   D = 2^{-b1} d_xi^2 d_eta Psi - d_xi d_eta^2 Psi,
//
// which up to the positive factor 1/(eta^4 R''(t_c)^3) equals
//
//   expr(t_c) = -2 (rho + (1 - 2^{-b1-1})) R''(t_c)^2
//             + (rho + 1)(rho + 1 - 2^{-b1}) R'''(t_c),   rho = R'(t_c).
//
// As a polynomial in t_c this has degree 3d - 5 with leading coefficient
// -d^4 (d-1) c_d^3 (c_d the leading coefficient of R). The checks are
//   (a) symbolic: expand expr exactly and compare degree and leading
//       coefficient with the prediction;
//   (b) numeric: evaluate D by third-order finite differences of Psi along
//       the one-parameter family of critical points t in (1/2, 2), count the
//       sign-change neighborhoods (at most 3d - 5), and report the magnitude
//       floor away from them.
// The identity and the expansion assume the unit normalization |c1| = 1
// (Q built with a_1 = +-2^{b1}); the numeric part only needs Q itself.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polyroth/common.hpp"
#include "polyroth/phase.hpp"
#include "polyroth/poly.hpp"
#include "polyroth/scales.hpp"

namespace polyroth {

struct Claim45Report {
    // Symbolic part.
    DensePoly expr;
    int expected_degree = 0;       // 3d - 5
    int symbolic_degree = 0;
    double leading_coefficient = 0.0;
    double predicted_leading = 0.0;  // -d^4 (d-1) c_d^3
    bool degree_ok = false;
    bool leading_ok = false;         // ratio within [2^-4, 2^4]
    // Numeric part.
    int grid_used = 0;
    std::size_t samples_used = 0;
    std::size_t samples_skipped = 0;
    std::vector<std::pair<double, double>> exceptional_brackets;  // in t_c
    double off_neighborhood_floor = 0.0;
    bool count_ok = false;           // #sign changes <= 3d - 5
    double max_rel_mismatch = 0.0;   // numeric D vs symbolic prediction
};

namespace detail {

// expr as an exact polynomial in t (rho substituted by R').
inline DensePoly claim45_expression(const DensePoly& R, long b1) {
    const double B = std::ldexp(1.0, static_cast<int>(std::clamp<long>(-b1, -900, 900)));
    const DensePoly r1 = R.derivative();
    const DensePoly r2 = r1.derivative();
    const DensePoly r3 = r2.derivative();
    DensePoly lin1;  // rho + (1 - B/2)
    lin1.c = r1.c;
    lin1.c[0] += 1.0 - 0.5 * B;
    DensePoly lin2 = r1;  // rho + 1
    lin2.c[0] += 1.0;
    DensePoly lin3 = r1;  // rho + 1 - B
    lin3.c[0] += 1.0 - B;
    const DensePoly term1 = poly_scale(poly_mul(lin1, poly_mul(r2, r2)), -2.0);
    const DensePoly term2 = poly_mul(poly_mul(lin2, lin3), r3);
    return poly_add(term1, term2);
}

}  // namespace detail

// Third-order mixed finite differences of Psi with Richardson refinement.
// D = B d_xi^2 d_eta Psi - d_xi d_eta^2 Psi at (xi, eta), warm-started at t0.
inline std::optional<double> claim45_numeric_D(const DensePoly& q, double B, double xi, double eta,
                                               double t0, double h) {
    auto psi = [&](double x, double e) -> std::optional<double> {
        double t = t0;
        return psi_local(q, x, e, &t);
    };
    auto D_at = [&](double hx, double he) -> std::optional<double> {
        // 3x3 stencil of Psi values around (xi, eta).
        double v[3][3];
        for (int a = -1; a <= 1; ++a)
            for (int b = -1; b <= 1; ++b) {
                auto p = psi(xi + a * hx, eta + b * he);
                if (!p) return std::nullopt;
                v[a + 1][b + 1] = *p;
            }
        // d_xi^2 d_eta: second difference in xi of the eta-central difference.
        const double dxx_de = ((v[2][2] - 2 * v[1][2] + v[0][2]) - (v[2][0] - 2 * v[1][0] + v[0][0])) /
                              (hx * hx * 2 * he);
        // d_xi d_eta^2: second difference in eta of the xi-central difference.
        const double de2_dx = ((v[2][2] - 2 * v[2][1] + v[2][0]) - (v[0][2] - 2 * v[0][1] + v[0][0])) /
                              (he * he * 2 * hx);
        return B * dxx_de - de2_dx;
    };
    const double hx = h * std::max(1.0, std::abs(xi)), he = h * std::max(1.0, std::abs(eta));
    auto coarse = D_at(hx, he);
    auto fine = D_at(0.5 * hx, 0.5 * he);
    if (!coarse || !fine) return std::nullopt;
    return (4.0 * *fine - *coarse) / 3.0;  // Richardson for O(h^2) stencils
}

// Full structure check; Q and the pair data come from normalize_Q and
// build_admissible for a d0 = 1 pair.
inline Claim45Report claim45_check(const DensePoly& q, const AdmissiblePair& pair, int grid,
                                   double eta = 1.25) {
    if (pair.d0 != 1) throw precondition_error("claim45_check: requires a d0 = 1 pair");
    if (grid < 16) throw precondition_error("claim45_check: grid too coarse");
    const int d = q.degree();
    Claim45Report rep;

    // Split off the linear part.
    DensePoly R = q;
    if (R.c.size() > 1) R.c[1] = 0.0;
    const double c1 = q.coeff(1);
    const double B = std::ldexp(1.0, static_cast<int>(std::clamp<long>(-pair.b1, -900, 900)));

    // (a) Symbolic expansion.
    rep.expr = detail::claim45_expression(R, pair.b1);
    rep.expected_degree = 3 * d - 5;
    rep.symbolic_degree = rep.expr.degree();
    rep.leading_coefficient = rep.expr.coeff(rep.symbolic_degree);
    const double cd = R.coeff(d);
    rep.predicted_leading = -std::pow(static_cast<double>(d), 4) * (d - 1) * cd * cd * cd;
    rep.degree_ok = rep.symbolic_degree == rep.expected_degree;
    const double ratio = std::abs(rep.leading_coefficient / rep.predicted_leading);
    rep.leading_ok = ratio >= 0.0625 && ratio <= 16.0;

    // (b) Numeric sign-change count along the critical family. The family is
    // parameterized by t in (1/2, 2): xi = -eta (c1 + R'(t)) puts the
    // stationary point at t, and |xi + eta| ~ 2^{q0} |eta| automatically.
    // Degenerate-critical-point floor: where R''(t) ~ 0 the stationary phase
    // collapses and D has a pole, not a zero; those samples are excluded and
    // sign flips across them are not exceptional intervals.
    double r2max = 0.0;
    for (int i = 0; i <= 64; ++i)
        r2max = std::max(r2max, std::abs(R.eval(0.55 + (1.95 - 0.55) * i / 64.0, 2)));

    int g = grid;
    for (int attempt = 0; attempt < 5; ++attempt) {
        std::vector<double> ts, Ds;
        std::vector<int> idx;  // grid index of each usable sample
        rep.samples_used = rep.samples_skipped = 0;
        rep.max_rel_mismatch = 0.0;
        bool adjacent_sign_changes = false;
        for (int i = 0; i <= g; ++i) {
            const double t = 0.55 + (1.95 - 0.55) * static_cast<double>(i) / g;
            const double xi = -eta * (c1 + R.eval(t, 1));
            if (std::abs(xi) < std::ldexp(1.0, -10) || std::abs(xi) > std::ldexp(1.0, 10) ||
                std::abs(R.eval(t, 2)) < 1e-2 * r2max) {
                ++rep.samples_skipped;
                continue;
            }
            auto D = claim45_numeric_D(q, B, xi, eta, t, 2e-4);
            if (!D) {
                ++rep.samples_skipped;
                continue;
            }
            // Cross-check against the exact expression when |c1| = 1:
            // D = expr(t_c) / (eta^2 R''(t_c)^3).
            if (std::abs(std::abs(c1) - 1.0) < 1e-15) {
                const double r2 = R.eval(t, 2);
                const double pred = rep.expr.eval(t) / (eta * eta * r2 * r2 * r2);
                const double denom = std::max({std::abs(pred), std::abs(*D), 1e-9});
                rep.max_rel_mismatch =
                    std::max(rep.max_rel_mismatch, std::abs(*D - pred) / denom);
            }
            ts.push_back(t);
            Ds.push_back(*D);
            idx.push_back(i);
            ++rep.samples_used;
        }
        // Sign-change brackets between adjacent usable grid samples.
        rep.exceptional_brackets.clear();
        std::vector<bool> near_change(Ds.size(), false);
        for (std::size_t i = 0; i + 1 < Ds.size(); ++i) {
            if (idx[i + 1] != idx[i] + 1) continue;  // skipped band between them
            if (Ds[i] == 0.0 || (Ds[i] < 0) != (Ds[i + 1] < 0)) {
                rep.exceptional_brackets.emplace_back(ts[i], ts[i + 1]);
                near_change[i] = near_change[i + 1] = true;
                if (i + 2 < Ds.size() && idx[i + 2] == idx[i + 1] + 1 &&
                    ((Ds[i + 1] < 0) != (Ds[i + 2] < 0)))
                    adjacent_sign_changes = true;
            }
        }
        if (adjacent_sign_changes) {
            if (attempt == 4)
                throw unresolved_error("claim45_check: sign changes unresolved after 4 refinements");
            g *= 2;
            continue;  // refine-and-retry
        }
        double floor = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < Ds.size(); ++i)
            if (!near_change[i]) floor = std::min(floor, std::abs(Ds[i]));
        rep.off_neighborhood_floor = std::isfinite(floor) ? floor : 0.0;
        rep.grid_used = g;
        rep.count_ok =
            static_cast<int>(rep.exceptional_brackets.size()) <= std::max(0, 3 * d - 5);
        return rep;
    }
    throw unresolved_error("claim45_check: unreachable");
}

}  // namespace polyroth

#endif  // POLYROTH_CLAIM45_HPP
