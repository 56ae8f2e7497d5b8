#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "polyroth/bump.hpp"
#include "polyroth/claim45.hpp"
#include "polyroth/common.hpp"
#include "polyroth/phase.hpp"
#include "polyroth/poly.hpp"
#include "polyroth/quadrature.hpp"
#include "polyroth/scales.hpp"

using namespace polyroth;

namespace {

DensePoly t_squared() {
    DensePoly q;
    q.c = {0.0, 0.0, 1.0};
    return q;
}

// Random Q with unit leading coefficient and moderate lower terms; shaped
// like the output of the dyadic normalization.
DensePoly random_Q(std::mt19937_64& rng, int dmax = 5) {
    std::uniform_int_distribution<int> deg(2, dmax);
    std::uniform_real_distribution<double> coef(-0.5, 0.5);
    DensePoly q;
    q.c.assign(static_cast<std::size_t>(deg(rng)) + 1, 0.0);
    for (std::size_t r = 1; r + 1 < q.c.size(); ++r) q.c[r] = coef(rng);
    q.c.back() = 1.0;
    return q;
}

}  // namespace

TEST_CASE("critical points of the phase") {
    const DensePoly q = t_squared();
    auto cps = critical_points(q, -2.0, 1.0);
    REQUIRE(cps.size() == 1);
    CHECK(cps[0].t == Catch::Approx(1.0).margin(1e-11));
    CHECK(cps[0].phi2 == Catch::Approx(2.0));
    CHECK(!cps[0].degenerate);

    CHECK(critical_points(q, 1.0, 1.0).empty());  // Phi' = 1 + 2t > 0

    // Q = t^3 + 2^-3 t, xi = -4: root of 3t^2 + 1/8 = 4.
    DensePoly q3;
    q3.c = {0.0, 0.125, 0.0, 1.0};
    auto cps3 = critical_points(q3, -4.0, 1.0);
    REQUIRE(cps3.size() == 1);
    double lo = 0.5, hi = 2.0;  // bisection oracle for 3t^2 = 31/8
    for (int i = 0; i < 100; ++i) {
        const double m = 0.5 * (lo + hi);
        (3 * m * m + 0.125 < 4.0 ? lo : hi) = m;
    }
    CHECK(cps3[0].t == Catch::Approx(0.5 * (lo + hi)).margin(1e-10));
    CHECK(cps3[0].t == Catch::Approx(1.1365).margin(1e-4));

    CHECK_THROWS_AS(critical_points(q, -2.0, 0.0), precondition_error);
}

TEST_CASE("dual phase closed forms") {
    const DensePoly q = t_squared();
    const DualPhase dp = dual_phase(q, -2.0, 1.0);
    REQUIRE(dp.has_critical);
    CHECK(dp.t_c == Catch::Approx(1.0).margin(1e-11));
    CHECK(dp.psi == Catch::Approx(-1.0).margin(1e-10));       // -xi^2/(4 eta)
    CHECK(dp.dpsi_dxi == Catch::Approx(1.0).margin(1e-11));
    CHECK(dp.H == Catch::Approx(-1.0).margin(1e-10));         // xi/(2 eta^2)

    const DualPhase dp2 = dual_phase(q, -2.0, 2.0);
    REQUIRE(dp2.has_critical);
    CHECK(dp2.t_c == Catch::Approx(0.5).margin(1e-11));
    CHECK(dp2.psi == Catch::Approx(-0.5).margin(1e-10));
    CHECK(dp2.H == Catch::Approx(-0.25).margin(1e-10));

    CHECK(!dual_phase(q, 1.0, 1.0).has_critical);

    // Two critical points: Q' = 3(t - 0.7)(t - 1.5).
    DensePoly two;
    two.c = {0.0, 3.0 * 0.7 * 1.5, -1.5 * (0.7 + 1.5), 1.0};
    REQUIRE(critical_points(two, 0.0, 1.0).size() == 2);
    CHECK_THROWS_AS(dual_phase(two, 0.0, 1.0), precondition_error);
}

TEST_CASE("dual phase derivatives match finite differences") {
    auto rng = rng_stream(271828);
    std::uniform_real_distribution<double> mag(1.0, 2.0);
    int used = 0;
    while (used < 200) {
        const DensePoly q = random_Q(rng);
        const double xi = -mag(rng) * 2.0;  // negative xi against positive leading term
        const double eta = mag(rng);
        std::vector<CriticalPoint> cps = critical_points(q, xi, eta);
        if (cps.size() != 1 || cps.front().degenerate) continue;
        if (std::abs(cps.front().phi2) < 1e-3) continue;
        const double t0 = cps.front().t;
        if (t0 < 0.55 || t0 > 1.95) continue;
        const DualPhase dp = dual_phase(q, xi, eta);

        const double h = 1e-4 * std::max({1.0, std::abs(xi), std::abs(eta)});
        auto psi = [&](double x, double e) {
            double t = t0;
            auto v = psi_local(q, x, e, &t);
            REQUIRE(v.has_value());
            return *v;
        };
        const double fd_xi = (psi(xi + h, eta) - psi(xi - h, eta)) / (2 * h);
        const double fd_H = (psi(xi + h, eta + h) - psi(xi + h, eta - h) - psi(xi - h, eta + h) +
                             psi(xi - h, eta - h)) /
                            (4 * h * h);
        REQUIRE(std::abs(fd_xi - dp.dpsi_dxi) <= 1e-6 * std::max(1.0, std::abs(dp.dpsi_dxi)));
        REQUIRE(std::abs(fd_H - dp.H) <= 1e-6 * std::max(1.0, std::abs(dp.H)));
        ++used;
    }
}

TEST_CASE("psi is stable under recomputed critical points") {
    const DensePoly q = t_squared();
    for (double xi : {-3.0, -2.0, -1.5}) {
        const DualPhase a = dual_phase(q, xi, 1.0);
        // Perturbed bracket: recompute from a coarse scan and a shifted warm start.
        const auto cps = critical_points(q, xi, 1.0, 64);
        REQUIRE(cps.size() == 1);
        double t = cps.front().t + 1e-5;
        const auto v = psi_local(q, xi, 1.0, &t);
        REQUIRE(v.has_value());
        REQUIRE(std::abs(*v - a.psi) <= 1e-9);
    }
}

TEST_CASE("oscillatory integral basics") {
    const DensePoly q = t_squared();
    const Bump tau = tau_bump(0);

    // lambda = 0: the bump mass.
    const QuadratureResult mass = oscillatory_integral(q, -2.0, 1.0, 0.0, tau);
    CHECK(std::abs(mass.value - cplx(1.0, 0.0)) < 1e-10);

    // No critical point: super-algebraic smallness.
    const QuadratureResult none = oscillatory_integral(q, 0.0, 1.0, 1e4, tau);
    CHECK(std::abs(none.value) <= 1e-6);

    // Against the closed-form main term at lambda = 1e4: within 5 percent.
    const QuadratureResult at = oscillatory_integral(q, -2.0, 1.0, 1e4, tau);
    const cplx main = stationary_main_term(q, -2.0, 1.0, 1e4, tau);
    CHECK(std::abs(at.value - main) <= 0.05 * std::abs(main));
}

TEST_CASE("main term formula instantiation at lambda = 2^16") {
    const DensePoly q = t_squared();
    const Bump tau = tau_bump(0);
    const double lambda = std::ldexp(1.0, 16);
    const cplx main = stationary_main_term(q, -2.0, 1.0, lambda, tau);
    const double expect = std::sqrt(2.0 * std::numbers::pi / 2.0) * tau(1.0) / std::sqrt(lambda);
    CHECK(std::abs(main) == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("stationary phase law across a lambda sweep") {
    const DensePoly q = t_squared();
    const Bump tau = tau_bump(0);
    std::vector<double> lambdas;
    for (int e = 8; e <= 18; ++e) lambdas.push_back(std::ldexp(1.0, e));

    const StationarySweep sweep = stationary_compare(q, -2.0, 1.0, lambdas, tau);
    CHECK(sweep.remainder_fit.slope >= -1.3);
    CHECK(sweep.remainder_fit.slope <= -0.9);
    // |quad - main| <= cap / lambda across the sweep, by construction of cap;
    // the cap itself stays order-one.
    CHECK(sweep.remainder_cap < 1.0);
    // |quad| sqrt(lambda) converges to the stationary-phase constant:
    // deviation fit slope <= -0.4.
    std::vector<double> xs, ys;
    const double limit = std::sqrt(2.0 * std::numbers::pi / 2.0) * tau(1.0);
    for (const auto& r : sweep.rows) {
        xs.push_back(std::log2(r.lambda));
        ys.push_back(std::abs(std::abs(r.quadrature) * std::sqrt(r.lambda) - limit));
    }
    CHECK(fit_log2(xs, ys).slope <= -0.4);

    // Non-stationary case: fit over the window where the value exceeds the
    // quadrature error floor; super-algebraic decay shows as slope <= -2.
    std::vector<double> xs2, ys2;
    for (int e = 2; e <= 18; ++e) {
        const double L = std::ldexp(1.0, e);
        const QuadratureResult qr = oscillatory_integral(q, 1.0, 1.0, L, tau);
        if (std::abs(qr.value) > 10.0 * std::max(qr.error_estimate, 1e-14)) {
            xs2.push_back(std::log2(L));
            ys2.push_back(std::abs(qr.value));
        } else {
            REQUIRE(std::abs(qr.value) <= 1e-10);  // decayed beyond measurability
        }
    }
    REQUIRE(xs2.size() >= 3);
    CHECK(fit_log2(xs2, ys2).slope <= -2.0);
}

TEST_CASE("quadrature self-consistency under tolerance halving") {
    auto rng = rng_stream(1123);
    std::uniform_real_distribution<double> mag(1.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const DensePoly q = random_Q(rng);
        const double xi = -2.0 * mag(rng), eta = mag(rng);
        const double lambda = std::ldexp(1.0, 6 + static_cast<int>(rng() % 6));
        const Bump tau = tau_bump(0);
        auto f = [&](double t) {
            const double ph = lambda * (t * xi + eta * q.eval(t));
            return cplx(std::cos(ph), std::sin(ph)) * tau(t);
        };
        const double tol = 1e-7;
        const QuadratureResult a = adaptive_complex_integral(f, 0.5, 2.0, tol, 64);
        const QuadratureResult b = adaptive_complex_integral(f, 0.5, 2.0, tol / 2, 64);
        REQUIRE(std::abs(a.value - b.value) <= std::max(a.error_estimate, tol));
    }
}

TEST_CASE("gradient-of-H bounds") {
    // Q = t^2: third derivative vanishes, ratio is exactly 1 >= 99/100.
    const HBoundReport r2 = hbound_check(t_squared(), 2, 4000, 5);
    CHECK(r2.samples_used > 100);
    CHECK(r2.min_ratio == Catch::Approx(1.0));
    CHECK(r2.pass);

    // Q = t^3: ratio = 1 - (3t^2)(6)/(6t)^2 = 1/2 exactly, above (99/100)/2.
    DensePoly q3;
    q3.c = {0.0, 0.0, 0.0, 1.0};
    const HBoundReport r3 = hbound_check(q3, 3, 4000, 5);
    CHECK(r3.samples_used > 100);
    CHECK(r3.min_ratio == Catch::Approx(0.5));
    CHECK(r3.threshold == Catch::Approx(0.99 / 2.0));
    CHECK(r3.pass);

    // Q = t^2 + 2^-9 t: d_eta H stays bounded away from zero on the samples.
    DensePoly qp;
    qp.c = {0.0, std::ldexp(1.0, -9), 1.0};
    const HBoundReport rp = hbound_check(qp, 2, 10000, 5);
    CHECK(rp.min_abs_deta_H > 0.0);
    CHECK(rp.pass);

    CHECK_THROWS_AS(hbound_check(t_squared(), 1, 10, 5), precondition_error);
}

TEST_CASE("mixed derivative probe scales linearly in alpha") {
    // Pair with m0 = -31: the xi-shift dominates.
    const Polynomial p = Polynomial::from_low_order({0.0, 1.0});
    const AdmissibleSets sets = build_admissible(p, ScaleParams(10, 31), 1);
    const AdmissiblePair& pair = sets.pairs[0];
    REQUIRE(pair.m0 == -31);
    const DensePoly q = normalize_Q(p, pair.j, pair.ell, pair.m0);

    const std::vector<double> alphas = {0.05, 0.1, 0.2, 0.4};
    const MixedDerivativeReport rep = mixed_derivative_probe(q, pair, alphas, 200, 11);
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        REQUIRE(rep.used[i] > 20);
        // Closed-form cross-check: |dxi H| = 1/(2 eta^2) in [1/8, 1/2] on the
        // annulus, so the floor sits near alpha * min |dxi H|.
        REQUIRE(rep.floors[i] >= 0.12 * alphas[i]);
        REQUIRE(rep.floors[i] <= 0.55 * alphas[i]);
    }
    CHECK(rep.c_probe > 0.0);
    CHECK(rep.trend.slope >= 0.8);
    CHECK(rep.trend.slope <= 1.2);

    // alpha = 0: Xi vanishes identically.
    const MixedDerivativeReport zero = mixed_derivative_probe(q, pair, {0.0, 0.1, 0.2}, 50, 11);
    CHECK(zero.floors[0] == Catch::Approx(0.0).margin(1e-7));
}

TEST_CASE("hormander probe: canonical and dual phases") {
    Rect rect;  // [1,2]^2
    std::vector<double> lambdas;
    for (int e = 6; e <= 12; ++e) lambdas.push_back(std::ldexp(1.0, e));
    auto xy = [](double x, double y) { return x * y; };
    const HormanderReport canon = hormander_decay_probe(xy, rect, lambdas, 4, 7, 1);
    CHECK(canon.fit.slope >= -0.6);
    CHECK(canon.fit.slope <= -0.4);

    // lambda = 1: normalized pairing stays below the Cauchy-Schwarz ceiling.
    const HormanderReport unit = hormander_decay_probe(xy, rect, {1.0, 2.0, 4.0}, 4, 7, 1);
    for (double v : unit.norm_estimates) CHECK(v <= 1.0 + 1e-9);

    // Dual phase of Q = t^2 on a rectangle inside the stationary region
    // (positive-leading Q puts it at xi < 0), certified by hbound_check.
    const DensePoly q = t_squared();
    const HBoundReport hb = hbound_check(q, 2, 2000, 5);
    REQUIRE(hb.pass);
    const Rect rect2{-3.8, -2.2, 1.0, 2.0};
    const HormanderReport dual =
        hormander_decay_probe(dual_phase_function(q), rect2, lambdas, 4, 7, 1);
    CHECK(dual.fit.slope <= -0.4);
    CHECK(dual.fit.slope >= -0.7);
}

TEST_CASE("linear-dominant structure check") {
    for (int d = 2; d <= 5; ++d) {
        std::vector<double> a(static_cast<std::size_t>(d), 0.0);
        a[0] = 1.0;
        a.back() = 1.0;
        const Polynomial p = Polynomial::from_low_order(a);  // t^d + t
        const AdmissibleSets sets = build_admissible(p, ScaleParams(2, 2), 1);
        const AdmissiblePair& pair = sets.pairs[0];
        REQUIRE(pair.d0 == 1);
        REQUIRE(pair.d1 == d);
        REQUIRE(pair.q0 < 0);
        const DensePoly q = normalize_Q(p, pair.j, pair.ell, pair.m0);

        const Claim45Report rep = claim45_check(q, pair, 64);
        REQUIRE(rep.degree_ok);
        REQUIRE(rep.symbolic_degree == 3 * d - 5);
        REQUIRE(rep.leading_ok);
        REQUIRE(rep.count_ok);
        REQUIRE(rep.max_rel_mismatch <= 1e-2);  // numeric D vs symbolic identity
        REQUIRE(rep.off_neighborhood_floor > 0.0);
    }
}

TEST_CASE("structure check detects exceptional neighborhoods") {
    // Hand-built case III data with sign changes in range: Q = t + R,
    // R = 0.3 t^2 - 0.12 t^3.
    DensePoly q;
    q.c = {0.0, 1.0, 0.3, -0.12};
    AdmissiblePair pair;
    pair.d0 = 1;
    pair.d1 = 2;
    pair.b1 = 0;
    pair.q0 = -2;
    const Claim45Report rep = claim45_check(q, pair, 128);
    CHECK(rep.symbolic_degree == 4);
    // Every detected bracket must contain a root of the symbolic expression.
    for (const auto& [lo, hi] : rep.exceptional_brackets) {
        const double va = rep.expr.eval(lo), vb = rep.expr.eval(hi);
        CHECK(((va <= 0 && vb >= 0) || (va >= 0 && vb <= 0)));
    }
    CHECK(rep.count_ok);

    // d = 2 dropout: with R''' = 0 the expression is -2(rho + 1 - 2^{-b1-1}) R''^2.
    DensePoly q2;
    q2.c = {0.0, 1.0, -0.4};
    AdmissiblePair pair2;
    pair2.d0 = 1;
    pair2.d1 = 2;
    pair2.b1 = 0;
    pair2.q0 = -1;
    const Claim45Report rep2 = claim45_check(q2, pair2, 128);
    DensePoly R2;  // -0.4 t^2
    R2.c = {0.0, 0.0, -0.4};
    const DensePoly r2dd = R2.derivative().derivative();
    // Hand expansion: -2 (R' + 1/2) (R'')^2.
    DensePoly lin = R2.derivative();
    lin.c[0] += 0.5;
    const DensePoly hand = poly_scale(poly_mul(lin, poly_mul(r2dd, r2dd)), -2.0);
    REQUIRE(rep2.expr.degree() == hand.degree());
    for (int r = 0; r <= hand.degree(); ++r)
        CHECK(rep2.expr.coeff(r) == Catch::Approx(hand.coeff(r)).margin(1e-14));
    // Vanishing point only where rho = -(1 - 2^{-b1-1}): R' = -0.8 t = -0.5.
    REQUIRE(rep2.exceptional_brackets.size() == 1);
    CHECK(rep2.exceptional_brackets[0].first <= 0.625);
    CHECK(rep2.exceptional_brackets[0].second >= 0.625);
}
