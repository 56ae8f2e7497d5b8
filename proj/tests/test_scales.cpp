#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "polyroth/common.hpp"
#include "polyroth/poly.hpp"
#include "polyroth/scales.hpp"

using namespace polyroth;

namespace {

// Brute-force oracle for the defining inequalities: products |a_r| 2^{kr}
// evaluated with ldexp (a power-of-two scaling is exact in floating point as
// long as it stays in range, which the test windows guarantee).
bool dominates_oracle(const Polynomial& p, int r, int k, int g0, int exempt = -1) {
    if (p.coeff(r) == 0.0) return false;
    const double lhs = std::ldexp(std::abs(p.coeff(r)), k * r);
    for (int rp = 1; rp <= p.degree(); ++rp) {
        if (rp == r || rp == exempt || p.coeff(rp) == 0.0) continue;
        const double rhs = std::ldexp(std::abs(p.coeff(rp)), k * rp + g0);
        if (!(lhs > rhs)) return false;
    }
    return true;
}

bool good_oracle(const Polynomial& p, int k, int g0) {
    for (int r = 2; r <= p.degree(); ++r)
        if (dominates_oracle(p, r, k, g0)) return true;
    if (dominates_oracle(p, 1, k, g0)) {
        for (int r = 2; r <= p.degree(); ++r)
            if (dominates_oracle(p, r, k, g0, /*exempt=*/1)) return true;
    }
    return false;
}

Polynomial random_poly(std::mt19937_64& rng, int dmax = 6) {
    std::uniform_int_distribution<int> deg(2, dmax);
    std::uniform_real_distribution<double> coef(-8.0, 8.0);
    std::uniform_int_distribution<int> zero(0, 3);
    const int d = deg(rng);
    std::vector<double> a(static_cast<std::size_t>(d), 0.0);
    for (int r = 0; r < d - 1; ++r) a[static_cast<std::size_t>(r)] = zero(rng) == 0 ? 0.0 : coef(rng);
    a.back() = 1.0;
    return Polynomial::from_low_order(a);
}

}  // namespace

TEST_CASE("dyadic exponent") {
    CHECK(dyadic_exponent(5.0) == 2);
    CHECK(dyadic_exponent(1.0) == 0);
    CHECK(dyadic_exponent(-0.3) == -2);
    CHECK(dyadic_exponent(2.0) == 1);
    CHECK(dyadic_exponent(std::ldexp(1.0, -31)) == -31);
    CHECK_THROWS_AS(dyadic_exponent(0.0), precondition_error);
}

TEST_CASE("monomial: the single power dominates every scale") {
    const Polynomial cubic = Polynomial::from_low_order({0.0, 0.0, 1.0});  // t^3
    const ScaleClassification c = classify_scales(cubic, ScaleParams(10, 30), {-50, 50});
    CHECK(c.j_bad.empty());
    CHECK(c.j_r.at(3).size() == 101);
}

TEST_CASE("t^2 + t: exact bad window") {
    const Polynomial p = Polynomial::from_low_order({1.0, 1.0});
    const ScaleParams params(10, 30);
    const ScaleClassification c = classify_scales(p, params, {-50, 50});

    std::vector<int> expect_bad;
    for (int k = -10; k <= 10; ++k) expect_bad.push_back(k);
    CHECK(c.j_bad == expect_bad);
    CHECK(c.j_bad.size() == 21);

    // J_2 = {k >= 11}, J_1 = {k <= -11} = J_{1,2}.
    for (int k = 11; k <= 50; ++k) CHECK(c.at(k).dominating_r == 2);
    for (int k = -50; k <= -11; ++k) {
        CHECK(c.at(k).dominating_r == 1);
        CHECK(c.at(k).secondary_r == 2);
    }

    // Brute-force re-evaluation of the defining inequalities.
    for (int k = -50; k <= 50; ++k) CHECK(c.at(k).good == good_oracle(p, k, 10));

    CHECK(static_cast<long>(c.j_bad.size()) <= params.gamma_d(2));
}

TEST_CASE("classification matches the ldexp oracle on random polynomials") {
    auto rng = rng_stream(424242);
    for (int trial = 0; trial < 60; ++trial) {
        const Polynomial p = random_poly(rng);
        const ScaleParams params(6, 5);
        const IntRange w = default_window(p, params);
        const ScaleClassification c = classify_scales(p, params, w);
        for (int k = w.lo; k <= w.hi; ++k) {
            REQUIRE(c.at(k).good == good_oracle(p, k, params.gamma0_exp));
        }
    }
}

TEST_CASE("bad-set cardinality bound: |J_bad| <= 4 d^2 Gamma_0") {
    auto rng = rng_stream(31337);
    for (int trial = 0; trial < 200; ++trial) {
        const Polynomial p = random_poly(rng);
        const ScaleParams params(4, 5);
        const ScaleClassification c = classify_scales(p, params, default_window(p, params));
        REQUIRE(static_cast<long>(c.j_bad.size()) <= params.gamma_d(p.degree()));
    }
}

TEST_CASE("pair comparability sets") {
    const Polynomial p = Polynomial::from_low_order({1.0, 1.0});
    const ScaleParams params(10, 30);
    bool warned = false;

    const std::vector<int> j12 = pair_sets(1, 2, p, params, {-50, 50}, &warned);
    CHECK(!warned);
    std::vector<int> expect;
    for (int k = -10; k <= 10; ++k) expect.push_back(k);
    CHECK(j12 == expect);
    CHECK(static_cast<long>(j12.size()) <= 4L * (1L << params.gamma0_exp));

    const Polynomial p3 = Polynomial::from_low_order({1.0, 0.0, 1.0});  // t^3 + t
    const std::vector<int> j13 = pair_sets(1, 3, p3, params, {-50, 50});
    std::vector<int> expect13;
    for (int k = -5; k <= 5; ++k) expect13.push_back(k);
    CHECK(j13 == expect13);

    const std::vector<int> empty = pair_sets(1, 2, p3, params, {-50, 50}, &warned);
    CHECK(warned);
    CHECK(empty.empty());
}

TEST_CASE("cover: bad scales lie in some pairwise comparability set") {
    auto rng = rng_stream(808);
    for (int trial = 0; trial < 50; ++trial) {
        const Polynomial p = random_poly(rng);
        const ScaleParams params(5, 5);
        const IntRange w = default_window(p, params);
        const ScaleClassification c = classify_scales(p, params, w);
        std::set<int> cover;
        for (int r1 = 1; r1 <= p.degree(); ++r1)
            for (int r2 = r1 + 1; r2 <= p.degree(); ++r2)
                for (int k : pair_sets(r1, r2, p, params, w)) cover.insert(k);
        for (int k : c.j_bad) REQUIRE(cover.count(k) == 1);
    }
}

TEST_CASE("shift covariance of the classification") {
    auto rng = rng_stream(990);
    for (int trial = 0; trial < 50; ++trial) {
        const Polynomial p = random_poly(rng);
        const ScaleParams params(5, 5);
        for (int s = -3; s <= 3; ++s) {
            const Polynomial ps = RescaledPolynomial(p, s).materialize();
            for (int k = -20; k <= 20; ++k) {
                const ScaleRecord a = classify_scale(ps, params, k);
                const ScaleRecord b = classify_scale(p, params, k + s);
                REQUIRE(a.dominating_r == b.dominating_r);
                REQUIRE(a.secondary_r == b.secondary_r);
            }
        }
    }
}

TEST_CASE("domination propagates to derivatives") {
    auto rng = rng_stream(112233);
    for (int trial = 0; trial < 30; ++trial) {
        const Polynomial p = random_poly(rng);
        const int d = p.degree();
        const ScaleParams params(6, 5);
        const IntRange w = default_window(p, params);
        const ScaleClassification c = classify_scales(p, params, w);
        const double relax = std::ldexp(1.0, params.gamma0_exp) / std::pow(2.0, d * d);
        for (int k = w.lo; k <= w.hi; ++k) {
            const int r = c.at(k).dominating_r;
            if (r == 0) continue;
            const double x = std::ldexp(1.0, k);
            for (int i = 0; i < r; ++i) {
                // i-th derivative of a_r t^r at 2^k vs each competitor's.
                double lead = std::abs(p.coeff(r));
                for (int q = 0; q < i; ++q) lead *= static_cast<double>(r - q);
                lead *= std::pow(x, r - i);
                for (int rp = 1; rp <= d; ++rp) {
                    if (rp == r || p.coeff(rp) == 0.0 || rp < i) continue;
                    double comp = std::abs(p.coeff(rp));
                    for (int q = 0; q < i; ++q) comp *= static_cast<double>(rp - q);
                    comp *= std::pow(x, rp - i);
                    REQUIRE(lead > relax * comp);
                }
            }
        }
    }
}

TEST_CASE("admissible sets: monomial case") {
    const Polynomial sq = Polynomial::from_low_order({0.0, 1.0});
    const ScaleParams params(10, 30);
    const AdmissibleSets sets = build_admissible(sq, params, 5);
    const long gd = params.gamma_d(2);
    CHECK(sets.E[0] == 0);
    for (const AdmissiblePair& pr : sets.pairs) CHECK(pr.d0 == 2);
    // E consists of consecutive lattice points 2 Gamma_d apart here.
    for (std::size_t i = 0; i + 1 < sets.E.size(); ++i) CHECK(sets.E[i + 1] - sets.E[i] == 2 * gd);
}

TEST_CASE("admissible sets: t^2 + t walkthrough") {
    const Polynomial p = Polynomial::from_low_order({1.0, 1.0});
    const ScaleParams params(10, 30);
    const AdmissibleSets sets = build_admissible(p, params, 4);

    // First pair: j=0, smallest ell >= 30 clearing the bad residues.
    CHECK(sets.E[0] == 0);
    CHECK(sets.Lambda[0] == 30);
    const AdmissiblePair& p0 = sets.pairs[0];
    CHECK(p0.d0 == 1);
    CHECK(p0.d1 == 2);
    CHECK(p0.b1 == 0);
    CHECK(p0.q0 == -30);

    // Interlacing and admissibility bounds.
    for (std::size_t i = 0; i < sets.pairs.size(); ++i) {
        CHECK(sets.E[i] < sets.Lambda[i]);
        if (i + 1 < sets.pairs.size()) CHECK(sets.Lambda[i] < sets.E[i + 1]);
    }
    CHECK(sets.E[0] <= sets.admissibility_bound);
    CHECK(sets.Lambda[0] <= sets.admissibility_bound);
    for (std::size_t i = 0; i + 1 < sets.E.size(); ++i) {
        CHECK(sets.E[i + 1] - sets.E[i] <= sets.admissibility_bound);
        CHECK(sets.Lambda[i + 1] - sets.Lambda[i] <= sets.admissibility_bound);
    }
}

TEST_CASE("admissible sets: contract on random polynomials") {
    auto rng = rng_stream(160914);
    for (int trial = 0; trial < 50; ++trial) {
        const Polynomial p = random_poly(rng);
        const int d = p.degree();
        const ScaleParams params(5, 8);
        const AdmissibleSets sets = build_admissible(p, params, 4);

        REQUIRE(sets.E[0] == 0);
        REQUIRE(sets.E.front() <= sets.admissibility_bound);
        REQUIRE(sets.Lambda.front() <= sets.admissibility_bound);
        for (std::size_t i = 0; i < sets.pairs.size(); ++i) {
            const AdmissiblePair& pr = sets.pairs[i];
            REQUIRE(pr.j < pr.ell);
            if (i + 1 < sets.pairs.size()) REQUIRE(pr.ell < sets.pairs[i + 1].j);
            // (j - ell) is a good scale.
            const ScaleRecord rec = classify_scale(p, params, pr.j - pr.ell);
            REQUIRE(rec.good);
            // Largeness constraint.
            for (int r = 2; r <= d; ++r) {
                if (p.coeff(r) == 0.0) continue;
                REQUIRE(std::abs(dyadic_exponent(p.coeff(r)) +
                                 static_cast<long>(r - 1) * (pr.j - pr.ell)) >= params.theta);
            }
            // m0 >= (d-1)(j-ell) whenever the dominating power is nonlinear.
            if (pr.d0 >= 2) REQUIRE(pr.m0 >= static_cast<long>(d - 1) * (pr.j - pr.ell));
            if (pr.d0 == 1) {
                REQUIRE(pr.d1 >= 2);
                REQUIRE(pr.q0 < 0);
            }
        }
        for (std::size_t i = 0; i + 1 < sets.E.size(); ++i) {
            REQUIRE(sets.E[i + 1] - sets.E[i] <= sets.admissibility_bound);
            REQUIRE(sets.Lambda[i + 1] - sets.Lambda[i] <= sets.admissibility_bound);
        }
    }
}
