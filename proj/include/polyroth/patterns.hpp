#ifndef POLYROTH_PATTERNS_HPP
#define POLYROTH_PATTERNS_HPP

// Interval-set model over [0, N], exhaustive pattern search for triples
// (x, x+t, x+P(t)) with the largest-gap-first sweep, the rescaling reduction
// to [0,1], and the adversarial set generators.
//
// Membership tests are exact on interval endpoints: candidate t values are
// quantized to a grid (plus all endpoint-difference candidates, where
// patterns concentrate), but the triple intersection S & (S-t) & (S-P(t))
// shifts endpoints by the same floating values that the final membership
// check uses, so every reported instance re-verifies with zero tolerance.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polyroth/common.hpp"
#include "polyroth/poly.hpp"

namespace polyroth {

struct Interval {
    double a = 0.0, b = 0.0;
    double length() const { return b - a; }
};

class IntervalSet {
  public:
    IntervalSet(std::vector<Interval> intervals, double horizon) : n_(horizon) {
        if (!(n_ >= 1.0)) throw precondition_error("IntervalSet: horizon N >= 1 required");
        std::sort(intervals.begin(), intervals.end(),
                  [](const Interval& u, const Interval& v) { return u.a < v.a; });
        for (const Interval& iv : intervals) {
            if (!(iv.a <= iv.b)) throw precondition_error("IntervalSet: empty interval");
            if (iv.a < 0.0 || iv.b > n_)
                throw precondition_error("IntervalSet: interval outside [0, N]");
            if (!iv_.empty() && iv.a <= iv_.back().b) {
                if (iv.a < iv_.back().b)
                    throw precondition_error("IntervalSet: overlapping intervals");
                iv_.back().b = iv.b;  // merge touching
            } else {
                iv_.push_back(iv);
            }
        }
    }

    const std::vector<Interval>& intervals() const { return iv_; }
    double horizon() const { return n_; }
    bool empty() const { return iv_.empty(); }

    double measure() const {
        double m = 0.0;
        for (const Interval& iv : iv_) m += iv.length();
        return m;
    }
    double density() const { return measure() / n_; }

    // Exact closed-interval membership.
    bool contains(double x) const {
        auto it = std::upper_bound(iv_.begin(), iv_.end(), x,
                                   [](double v, const Interval& iv) { return v < iv.a; });
        if (it == iv_.begin()) return false;
        --it;
        return x >= it->a && x <= it->b;
    }

    IntervalSet shifted(double delta) const {  // S - delta, clipped to nothing (no clip)
        std::vector<Interval> out;
        out.reserve(iv_.size());
        for (const Interval& iv : iv_) out.push_back({iv.a - delta, iv.b - delta});
        IntervalSet s(1.0);
        s.iv_ = std::move(out);
        s.n_ = n_;
        return s;
    }

    // Intersection of two sorted disjoint interval lists.
    static std::vector<Interval> intersect(const std::vector<Interval>& u,
                                           const std::vector<Interval>& v) {
        std::vector<Interval> out;
        std::size_t i = 0, j = 0;
        while (i < u.size() && j < v.size()) {
            const double lo = std::max(u[i].a, v[j].a);
            const double hi = std::min(u[i].b, v[j].b);
            if (lo <= hi) out.push_back({lo, hi});
            if (u[i].b < v[j].b) ++i;
            else ++j;
        }
        return out;
    }

  private:
    explicit IntervalSet(double n) : n_(n) {}
    std::vector<Interval> iv_;
    double n_;
};

struct PatternInstance {
    double x = 0.0;
    double t = 0.0;
    double points[3] = {0, 0, 0};  // x, x+t, x+P(t)
    double gap_ratio = 0.0;        // t / N^{1/d}
};

// Exact re-verification, independent of the search path.
inline bool verify_instance(const IntervalSet& s, const Polynomial& p, const PatternInstance& in) {
    if (!(in.t > 0.0)) return false;
    const double pt = p.eval(in.t);
    return s.contains(in.x) && s.contains(in.x + in.t) && s.contains(in.x + pt) &&
           in.points[1] == in.x + in.t && in.points[2] == in.x + pt;
}

struct PatternSearchResult {
    std::optional<PatternInstance> instance;
    // When no instance exists above delta: the largest admissible t found
    // below the threshold, as a diagnostic (0 if none anywhere).
    double diagnostic_best_t = 0.0;
};

namespace detail {

// Candidate gaps in (t_min, t_max], sorted descending: the quantized grid
// plus endpoint differences e - e' and solutions of P(t) = e - e'.
inline std::vector<double> candidate_gaps(const IntervalSet& s, const Polynomial& p, double t_min,
                                          double t_max, double grid_per_unit) {
    std::vector<double> cand;
    const double step = 1.0 / grid_per_unit;
    for (double t = std::floor(t_max / step) * step; t > t_min; t -= step)
        if (t <= t_max) cand.push_back(t);

    std::vector<double> endpoints;
    for (const Interval& iv : s.intervals()) {
        endpoints.push_back(iv.a);
        endpoints.push_back(iv.b);
    }
    if (endpoints.size() <= 2 * 80) {  // quadratic candidate generation cap
        const bool with_roots = endpoints.size() <= 24;  // P-inverse candidates are costly
        for (double e1 : endpoints)
            for (double e2 : endpoints) {
                const double diff = e1 - e2;
                if (diff > t_min && diff <= t_max) cand.push_back(diff);
                if (with_roots) {  // t with P(t) = e1 - e2
                    auto roots = isolate_roots([&](double t) { return p.eval(t) - diff; },
                                               std::max(t_min, 1e-12), t_max, 256);
                    for (double r : roots)
                        if (r > t_min && r <= t_max) cand.push_back(r);
                }
            }
    }
    std::sort(cand.begin(), cand.end(), std::greater<double>());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    return cand;
}

inline std::optional<PatternInstance> try_gap(const IntervalSet& s, const Polynomial& p, double t,
                                              double n_root) {
    const double pt = p.eval(t);
    const std::vector<Interval> both =
        IntervalSet::intersect(s.intervals(), s.shifted(t).intervals());
    if (both.empty()) return std::nullopt;
    const std::vector<Interval> all = IntervalSet::intersect(both, s.shifted(pt).intervals());
    if (all.empty()) return std::nullopt;
    PatternInstance in;
    in.x = all.front().a;
    in.t = t;
    in.points[0] = in.x;
    in.points[1] = in.x + t;
    in.points[2] = in.x + pt;
    in.gap_ratio = t / n_root;
    if (!verify_instance(s, p, in)) return std::nullopt;  // fp edge: reject, keep scanning
    return in;
}

}  // namespace detail

// Largest-gap-first scan over t in (delta N^{1/d}, N^{1/d}]. Returns the
// first instance found; on failure, keeps scanning below the threshold for
// the diagnostic.
inline PatternSearchResult find_pattern(const IntervalSet& s, const Polynomial& p, double delta,
                                        double grid_per_unit = 1 << 20) {
    if (delta < 0.0) throw precondition_error("find_pattern: delta >= 0 required");
    if (grid_per_unit < (1 << 10)) throw precondition_error("find_pattern: grid >= 2^10 per unit");
    PatternSearchResult res;
    if (s.empty()) return res;
    const double n_root = std::pow(s.horizon(), 1.0 / p.degree());
    for (double t : detail::candidate_gaps(s, p, delta * n_root, n_root, grid_per_unit)) {
        if (auto in = detail::try_gap(s, p, t, n_root)) {
            res.instance = in;
            return res;
        }
    }
    // Diagnostic sweep below the threshold.
    for (double t : detail::candidate_gaps(s, p, 0.0, delta * n_root, grid_per_unit)) {
        if (detail::try_gap(s, p, t, n_root)) {
            res.diagnostic_best_t = t;
            break;
        }
    }
    return res;
}

// Supremum over the candidate grid of admissible gaps; 0 when no triple
// exists at any candidate t.
inline double max_gap(const IntervalSet& s, const Polynomial& p, double grid_per_unit = 1 << 20) {
    PatternSearchResult r = find_pattern(s, p, 0.0, grid_per_unit);
    return r.instance ? r.instance->t : 0.0;
}

struct RescaledInstance {
    IntervalSet unit_set;    // S / 2^{jd} on [0, 1]
    int j = 0;
    Polynomial rescaled;     // t -> 2^{-dj} P(2^j t)
    double density_prime = 0.0;  // eps N / 2^{jd}
};

// Pads N up to the next 2^{jd} and rescales to the unit horizon.
inline RescaledInstance rescale_instance(const IntervalSet& s, const Polynomial& p) {
    const int d = p.degree();
    int j = 0;
    while (std::ldexp(1.0, j * d) < s.horizon()) ++j;
    const double pad = std::ldexp(1.0, j * d);
    std::vector<Interval> scaled;
    for (const Interval& iv : s.intervals()) scaled.push_back({iv.a / pad, iv.b / pad});
    return {IntervalSet(std::move(scaled), 1.0), j, RescaledPolynomial(p, j).materialize(),
            s.measure() / pad};
}

enum class AdversarialKind { random, cantor, shifted_blocks };

// Deterministic set generators with density within 1e-6 of eps (by exact
// length normalization the error is at the rounding level).
inline IntervalSet adversarial_set(AdversarialKind kind, double eps, double n,
                                   std::uint64_t seed) {
    if (!(eps > 0.0 && eps <= 1.0)) throw precondition_error("adversarial_set: 0 < eps <= 1");
    if (eps == 1.0) return IntervalSet({{0.0, n}}, n);
    auto rng = rng_stream(seed, static_cast<std::uint64_t>(kind));
    std::vector<Interval> iv;

    if (kind == AdversarialKind::random) {
        const int blocks = 40;
        std::uniform_real_distribution<double> u(0.2, 1.0);
        // Alternating gap/block weights; blocks normalized to eps n in total,
        // gaps to (1 - eps) n.
        std::vector<double> gap_w(blocks + 1), blk_w(blocks);
        double gs = 0.0, bs = 0.0;
        for (auto& w : gap_w) { w = u(rng); gs += w; }
        for (auto& w : blk_w) { w = u(rng); bs += w; }
        double x = 0.0;
        for (int i = 0; i < blocks; ++i) {
            x += gap_w[static_cast<std::size_t>(i)] / gs * (1.0 - eps) * n;
            const double len = blk_w[static_cast<std::size_t>(i)] / bs * eps * n;
            iv.push_back({x, std::min(x + len, n)});
            x += len;
        }
    } else if (kind == AdversarialKind::cantor) {
        const int levels = std::max(1, static_cast<int>(std::ceil(std::log2(1.0 / eps))));
        const double r = 0.5 * std::pow(eps, 1.0 / levels);
        if (!(r > 0.0 && r < 0.5))
            throw precondition_error("adversarial_set: cantor ratio degenerate; adjust level count");
        std::vector<Interval> cur = {{0.0, n}};
        for (int l = 0; l < levels; ++l) {
            std::vector<Interval> next;
            for (const Interval& c : cur) {
                const double len = c.length() * r;
                next.push_back({c.a, c.a + len});
                next.push_back({c.b - len, c.b});
            }
            cur = std::move(next);
        }
        iv = std::move(cur);
    } else {
        const int blocks = 32;
        const double cell = n / blocks;
        const double len = eps * cell;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double shift = u(rng) * (cell - len);
        for (int i = 0; i < blocks; ++i) {
            const double a = i * cell + shift;
            iv.push_back({a, a + len});
        }
    }

    // Exact density normalization: trim every length by the common factor.
    double total = 0.0;
    for (const Interval& i : iv) total += i.length();
    const double c = eps * n / total;
    if (c > 1.0 + 1e-9)
        throw precondition_error("adversarial_set: construction under-filled; raise level count");
    for (Interval& i : iv) i.b = i.a + i.length() * c;
    IntervalSet out(iv, n);
    if (std::abs(out.density() - eps) > 1e-6)
        throw check_error("adversarial_set: density normalization failed");
    return out;
}

}  // namespace polyroth

#endif  // POLYROTH_PATTERNS_HPP
