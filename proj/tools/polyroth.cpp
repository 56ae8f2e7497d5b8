// Command-line driver: dyadic scale analysis, admissible sets, martingale
// bounds, trilinear forms and decompositions, decay probes, pattern search,
// and the oscillatory-phase checks, with CSV/JSON outputs written atomically.
//
// Exit codes: 0 success, 2 precondition violations, 3 unresolved quadrature
// or refinement, 4 failed internal checks.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "polyroth/claim45.hpp"
#include "polyroth/common.hpp"
#include "polyroth/fit.hpp"
#include "polyroth/io.hpp"
#include "polyroth/mollify.hpp"
#include "polyroth/patterns.hpp"
#include "polyroth/phase.hpp"
#include "polyroth/poly.hpp"
#include "polyroth/quadrature.hpp"
#include "polyroth/scales.hpp"
#include "polyroth/trilinear.hpp"

using namespace polyroth;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw precondition_error("cannot open " + path);
    json js;
    in >> js;
    return js;
}

Polynomial load_poly(const std::string& path) { return polynomial_from_json(load_json(path)); }

// "pairs.json#2" -> third pair of the file.
AdmissiblePair load_pair(const std::string& ref) {
    const auto hash = ref.find('#');
    const std::string path = hash == std::string::npos ? ref : ref.substr(0, hash);
    const std::size_t idx = hash == std::string::npos ? 0 : std::stoul(ref.substr(hash + 1));
    const json js = load_json(path);
    const auto& pairs = js.at("pairs");
    if (idx >= pairs.size()) throw precondition_error("pair index out of range in " + ref);
    return pair_from_json(pairs.at(idx));
}

IntRange parse_window(const std::string& s) {
    const auto colon = s.find(':', 1);  // allow a leading minus sign
    if (colon == std::string::npos) throw precondition_error("window must be lo:hi");
    return {std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
}

// "6:14" -> {6,...,14}; "2^8:2^18" -> dyadic values.
std::vector<double> parse_sweep(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw precondition_error("sweep must be lo:hi");
    std::string lo = s.substr(0, colon), hi = s.substr(colon + 1);
    std::vector<double> out;
    if (lo.rfind("2^", 0) == 0 && hi.rfind("2^", 0) == 0) {
        for (int e = std::stoi(lo.substr(2)); e <= std::stoi(hi.substr(2)); ++e)
            out.push_back(std::ldexp(1.0, e));
    } else {
        for (int v = std::stoi(lo); v <= std::stoi(hi); ++v) out.push_back(v);
    }
    return out;
}

void emit(const std::string& out_path, const std::string& content, const std::string& summary) {
    if (out_path.empty()) {
        std::cout << content;
        if (!summary.empty()) std::cerr << summary << "\n";
    } else {
        atomic_write(out_path, content);
        std::cout << summary << " -> " << out_path << "\n";
    }
}

struct Cmd {
    std::string poly_path, out_path, set_path, f_path, pair_ref, window, format = "csv";
    std::string sweep, kind = "random";
    int gamma0 = 10, theta = 30, count = 8, n = 12, j = 0, ell = 2, k = 2, ell_p = 1, ell_pp = 6;
    int m_grid = 256, trials = 64, power_steps = 1;
    double xi = -2.0, eta = 1.0, lambda = 1e4, delta = 0.0, horizon = 1.0;
    double grid_per_unit = 1 << 20;
    std::uint64_t seed = 7;
    std::string mode = "dyadic";
    std::vector<double> alphas = {0.05, 0.1, 0.2, 0.4};
};

int run_scales(const Cmd& c) {
    const Polynomial p = load_poly(c.poly_path);
    const ScaleParams params(c.gamma0, c.theta);
    const IntRange w = c.window.empty() ? default_window(p, params) : parse_window(c.window);
    const ScaleClassification cls = classify_scales(p, params, w);
    CsvWriter csv({"k", "dominating_r", "in_J1r", "good"});
    for (const ScaleRecord& r : cls.records)
        csv.row({std::to_string(r.k), std::to_string(r.dominating_r), std::to_string(r.secondary_r),
                 r.good ? "1" : "0"});
    emit(c.out_path, csv.str(),
         "scales: window [" + std::to_string(w.lo) + "," + std::to_string(w.hi) + "], |J_bad| = " +
             std::to_string(cls.j_bad.size()) + " (bound " +
             std::to_string(params.gamma_d(p.degree())) + ")");
    return 0;
}

int run_admissible(const Cmd& c) {
    const Polynomial p = load_poly(c.poly_path);
    const ScaleParams params(c.gamma0, c.theta);
    const AdmissibleSets sets = build_admissible(p, params, c.count);
    emit(c.out_path, pairs_to_json(sets).dump(2) + "\n",
         "admissible: " + std::to_string(sets.pairs.size()) + " pairs, first (j,ell) = (" +
             std::to_string(sets.pairs[0].j) + "," + std::to_string(sets.pairs[0].ell) + ")");
    return 0;
}

int run_martingale(const Cmd& c) {
    const GridFunction f = grid_from_json(load_json(c.f_path));
    const BourgainMode mode = c.mode == "smooth" ? BourgainMode::smooth : BourgainMode::dyadic;
    double c0 = 0.0;
    const auto [lhs, rhs] = bourgain_lower_bound(f, c.k, c.ell, mode, &c0);
    const bool holds = lhs >= rhs - 5e-16 * std::max(1.0, rhs);
    json out{{"version", kVersion}, {"k", c.k},   {"ell", c.ell}, {"mode", c.mode},
             {"lhs", lhs},          {"rhs", rhs}, {"holds", holds}};
    if (mode == BourgainMode::smooth) out["c0"] = c0;
    emit(c.out_path, out.dump(2) + "\n",
         "martingale: lhs = " + std::to_string(lhs) + ", rhs = " + std::to_string(rhs));
    return holds ? 0 : 4;
}

int run_trilinear(const Cmd& c) {
    const GridFunction f = grid_from_json(load_json(c.f_path));
    const Polynomial p = load_poly(c.poly_path);
    const TrilinearResult r = trilinear_form(f, p, c.j, c.n);
    json out{{"version", kVersion},
             {"I", r.value},
             {"I_refined", r.value_refined},
             {"richardson_gap", r.richardson_gap},
             {"n", r.resolution},
             {"j", r.j},
             {"unresolved", r.unresolved}};
    emit(c.out_path, out.dump(2) + "\n",
         "trilinear: I = " + std::to_string(r.value) + (r.unresolved ? " (unresolved)" : ""));
    return r.unresolved ? 3 : 0;
}

int run_decompose(const Cmd& c) {
    const GridFunction f = grid_from_json(load_json(c.f_path));
    const Polynomial p = load_poly(c.poly_path);
    const DecomposeResult r = decompose_I(f, p, c.j, c.ell_p, c.ell, c.ell_pp);
    json out{{"version", kVersion},
             {"I", r.I},
             {"localized", r.localized},
             {"I1", r.I1},
             {"I2", r.I2},
             {"I3", r.I3},
             {"I4", r.I4},
             {"identity_gap", r.identity_gap},
             {"i2_bound", r.i2_bound},
             {"mvt_bound", r.mvt_bound},
             {"i4_minus_i1", r.i4_minus_i1}};
    emit(c.out_path, out.dump(2) + "\n",
         "decompose: I1+I2+I3 matches localized to " + std::to_string(r.identity_gap));
    return 0;
}

int run_decay(const Cmd& c) {
    const Polynomial p = load_poly(c.poly_path);
    const AdmissiblePair pair = load_pair(c.pair_ref);
    std::vector<int> ms;
    for (double v : parse_sweep(c.sweep.empty() ? "6:12" : c.sweep))
        ms.push_back(static_cast<int>(v));
    const DecayProbeResult r =
        bilinear_decay_probe(p, pair, ms, static_cast<std::size_t>(c.trials), c.seed, c.n);
    CsvWriter csv({"m", "log2_norm_max", "trials"});
    for (const DecayProbeRow& row : r.rows)
        csv.row({std::to_string(row.m), CsvWriter::num(std::log2(row.norm_max)),
                 std::to_string(row.trials)});
    std::ostringstream sum;
    sum << "decay: gamma_hat = " << r.fit.gamma_hat() << ", max residual = " << r.fit.max_residual
        << ", seed = " << c.seed;
    emit(c.out_path, csv.str(), sum.str());
    return 0;
}

int run_patterns_find(const Cmd& c, bool maxgap) {
    const IntervalSet s = interval_set_from_json(load_json(c.set_path));
    const Polynomial p = load_poly(c.poly_path);
    if (maxgap) {
        const double g = max_gap(s, p, c.grid_per_unit);
        json out{{"version", kVersion},
                 {"max_gap", g},
                 {"gap_ratio", g / std::pow(s.horizon(), 1.0 / p.degree())}};
        emit(c.out_path, out.dump(2) + "\n", "maxgap: " + std::to_string(g));
        return 0;
    }
    const PatternSearchResult r = find_pattern(s, p, c.delta, c.grid_per_unit);
    json out{{"version", kVersion}};
    if (r.instance) {
        out["x"] = r.instance->x;
        out["t"] = r.instance->t;
        out["points"] = {r.instance->points[0], r.instance->points[1], r.instance->points[2]};
        out["gap_ratio"] = r.instance->gap_ratio;
    } else {
        out["not_found"] = true;
        out["diagnostic_best_t"] = r.diagnostic_best_t;
    }
    emit(c.out_path, out.dump(2) + "\n",
         r.instance ? "pattern at t = " + std::to_string(r.instance->t)
                    : "no pattern above delta; best below = " + std::to_string(r.diagnostic_best_t));
    return 0;
}

int run_patterns_sweep(const Cmd& c) {
    const Polynomial p = load_poly(c.poly_path);
    CsvWriter csv({"eps", "seed", "kind", "max_gap", "gap_ratio"});
    const AdversarialKind kind = c.kind == "cantor"           ? AdversarialKind::cantor
                                 : c.kind == "shifted-blocks" ? AdversarialKind::shifted_blocks
                                                              : AdversarialKind::random;
    for (double eps : {0.1, 0.2, 0.4, 0.8}) {
        for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(c.trials); ++s) {
            const IntervalSet set = adversarial_set(kind, eps, c.horizon, c.seed + s);
            const double g = max_gap(set, p, c.grid_per_unit);
            csv.row({CsvWriter::num(eps), std::to_string(c.seed + s), c.kind, CsvWriter::num(g),
                     CsvWriter::num(g / std::pow(c.horizon, 1.0 / p.degree()))});
        }
    }
    emit(c.out_path, csv.str(), "sweep complete");
    return 0;
}

int run_oscillate(const Cmd& c) {
    const Polynomial p = load_poly(c.poly_path);
    const AdmissiblePair pair = load_pair(c.pair_ref);
    const DensePoly q = normalize_Q(p, pair.j, pair.ell, pair.m0);
    const QuadratureResult qr = oscillatory_integral(q, c.xi, c.eta, c.lambda, tau_bump(0));
    json out{{"version", kVersion},
             {"xi", c.xi},
             {"eta", c.eta},
             {"lambda", c.lambda},
             {"value_re", qr.value.real()},
             {"value_im", qr.value.imag()},
             {"abs", std::abs(qr.value)},
             {"error_estimate", qr.error_estimate},
             {"panels", qr.panels}};
    const auto cps = critical_points(q, c.xi, c.eta);
    json jcps = json::array();
    for (const CriticalPoint& cp : cps)
        jcps.push_back(json{{"t", cp.t}, {"phi2", cp.phi2}, {"degenerate", cp.degenerate}});
    out["critical_points"] = jcps;
    if (cps.size() == 1 && !cps.front().degenerate) {
        const DualPhase dp = dual_phase(q, c.xi, c.eta);
        out["psi"] = dp.psi;
        out["dpsi_dxi"] = dp.dpsi_dxi;
        out["H"] = dp.H;
    }
    emit(c.out_path, out.dump(2) + "\n", "oscillate: |I| = " + std::to_string(std::abs(qr.value)));
    return 0;
}

int run_stationary(const Cmd& c) {
    const Polynomial p = load_poly(c.poly_path);
    const AdmissiblePair pair = load_pair(c.pair_ref);
    const DensePoly q = normalize_Q(p, pair.j, pair.ell, pair.m0);
    const std::vector<double> lambdas = parse_sweep(c.sweep.empty() ? "2^8:2^18" : c.sweep);
    const StationarySweep sweep = stationary_compare(q, c.xi, c.eta, lambdas, tau_bump(0));
    CsvWriter csv({"log2_lambda", "quad_re", "quad_im", "main_re", "main_im", "abs_remainder",
                   "normalized_remainder", "remainder_times_lambda"});
    for (const StationaryComparison& r : sweep.rows)
        csv.row({CsvWriter::num(std::log2(r.lambda)), CsvWriter::num(r.quadrature.real()),
                 CsvWriter::num(r.quadrature.imag()), CsvWriter::num(r.main_term.real()),
                 CsvWriter::num(r.main_term.imag()), CsvWriter::num(std::abs(r.remainder)),
                 CsvWriter::num(r.normalized_remainder),
                 CsvWriter::num(r.remainder_over_lambda_inv)});
    std::ostringstream sum;
    sum << "stationary-compare: remainder slope = " << sweep.remainder_fit.slope
        << " (cap on |R| lambda = " << sweep.remainder_cap << ")";
    emit(c.out_path, csv.str(), sum.str());
    return 0;
}

int run_hbound(const Cmd& c) {
    const Polynomial p = load_poly(c.poly_path);
    const AdmissiblePair pair = load_pair(c.pair_ref);
    const DensePoly q = normalize_Q(p, pair.j, pair.ell, pair.m0);
    const HBoundReport r =
        hbound_check(q, pair.d0, static_cast<std::size_t>(c.trials) * 100, c.seed);
    json out{{"version", kVersion},
             {"samples_used", r.samples_used},
             {"skipped_no_critical", r.skipped_no_critical},
             {"min_ratio", r.min_ratio},
             {"threshold", r.threshold},
             {"min_abs_dxi_H", r.min_abs_dxi_H},
             {"max_abs_dxi_H", r.max_abs_dxi_H},
             {"min_abs_deta_H", r.min_abs_deta_H},
             {"max_abs_deta_H", r.max_abs_deta_H},
             {"pass", r.pass}};
    emit(c.out_path, out.dump(2) + "\n",
         "hbound: min ratio = " + std::to_string(r.min_ratio) + (r.pass ? " (pass)" : " (FAIL)"));
    return r.pass ? 0 : 4;
}

int run_mixed(const Cmd& c) {
    const Polynomial p = load_poly(c.poly_path);
    const AdmissiblePair pair = load_pair(c.pair_ref);
    const DensePoly q = normalize_Q(p, pair.j, pair.ell, pair.m0);
    const MixedDerivativeReport r =
        mixed_derivative_probe(q, pair, c.alphas, static_cast<std::size_t>(c.trials), c.seed);
    CsvWriter csv({"alpha", "floor", "used", "skipped"});
    for (std::size_t i = 0; i < r.alphas.size(); ++i)
        csv.row({CsvWriter::num(r.alphas[i]), CsvWriter::num(r.floors[i]),
                 std::to_string(r.used[i]), std::to_string(r.skipped[i])});
    std::ostringstream sum;
    sum << "mixed-derivative: c_probe = " << r.c_probe << ", log-log slope = " << r.trend.slope;
    emit(c.out_path, csv.str(), sum.str());
    return 0;
}

int run_hormander(const Cmd& c) {
    std::function<double(double, double)> phase;
    Rect rect;
    std::string label;
    if (c.poly_path.empty()) {
        phase = [](double x, double y) { return x * y; };
        label = "canonical xy";
    } else {
        const Polynomial p = load_poly(c.poly_path);
        const AdmissiblePair pair = load_pair(c.pair_ref);
        const DensePoly q = normalize_Q(p, pair.j, pair.ell, pair.m0);
        phase = dual_phase_function(q);
        // Reflected box: the stationary set of monic-type Q sits at xi < 0
        // for eta > 0.
        rect = Rect{-3.8, -2.2, 1.0, 2.0};
        label = "dual phase";
    }
    const std::vector<double> lambdas = parse_sweep(c.sweep.empty() ? "2^6:2^12" : c.sweep);
    const HormanderReport r = hormander_decay_probe(
        phase, rect, lambdas, static_cast<std::size_t>(c.trials), c.seed, c.power_steps);
    CsvWriter csv({"log2_lambda", "norm_estimate"});
    for (std::size_t i = 0; i < r.lambdas.size(); ++i)
        csv.row({CsvWriter::num(std::log2(r.lambdas[i])), CsvWriter::num(r.norm_estimates[i])});
    std::ostringstream sum;
    sum << "hormander (" << label << "): slope = " << r.fit.slope;
    emit(c.out_path, csv.str(), sum.str());
    return 0;
}

int run_claim45(const Cmd& c) {
    const Polynomial p = load_poly(c.poly_path);
    const AdmissiblePair pair = load_pair(c.pair_ref);
    const DensePoly q = normalize_Q(p, pair.j, pair.ell, pair.m0);
    const Claim45Report r = claim45_check(q, pair, c.m_grid);
    json out{{"version", kVersion},
             {"expected_degree", r.expected_degree},
             {"symbolic_degree", r.symbolic_degree},
             {"leading_coefficient", r.leading_coefficient},
             {"predicted_leading", r.predicted_leading},
             {"degree_ok", r.degree_ok},
             {"leading_ok", r.leading_ok},
             {"grid_used", r.grid_used},
             {"sign_changes", r.exceptional_brackets.size()},
             {"off_neighborhood_floor", r.off_neighborhood_floor},
             {"max_rel_mismatch", r.max_rel_mismatch},
             {"count_ok", r.count_ok}};
    emit(c.out_path, out.dump(2) + "\n",
         "claim45: degree " + std::to_string(r.symbolic_degree) + "/" +
             std::to_string(r.expected_degree) + ", sign changes " +
             std::to_string(r.exceptional_brackets.size()));
    return (r.degree_ok && r.leading_ok && r.count_ok) ? 0 : 4;
}

// Aggregates result files (decay CSVs, JSON reports) into one summary.
int run_report(const std::vector<std::string>& files, const std::string& out_path) {
    json summary{{"version", kVersion},
                 {"warnings", json::array()},
                 {"decay_fits", json::array()},
                 {"results", json::array()}};
    for (const std::string& f : files) {
        std::ifstream in(f);
        if (!in) {
            summary["warnings"].push_back("missing file: " + f);
            continue;
        }
        std::string first;
        std::getline(in, first);
        if (first.rfind("# ", 0) == 0) {  // CSV with version header
            if (first.find(kVersion) == std::string::npos)
                summary["warnings"].push_back("version mismatch: " + f);
            std::string header;
            std::getline(in, header);
            if (header.rfind("m,", 0) == 0) {  // decay table
                std::vector<double> xs, ys;
                std::string line;
                while (std::getline(in, line)) {
                    std::istringstream ls(line);
                    std::string m, v;
                    std::getline(ls, m, ',');
                    std::getline(ls, v, ',');
                    xs.push_back(std::stod(m));
                    ys.push_back(std::exp2(std::stod(v)));
                }
                if (xs.size() >= 3) {
                    const DecayFit fit = fit_log2(xs, ys);
                    summary["decay_fits"].push_back(json{{"file", f},
                                                         {"gamma_hat", fit.gamma_hat()},
                                                         {"max_residual", fit.max_residual}});
                }
            } else {
                summary["results"].push_back(json{{"file", f}, {"csv_header", header}});
            }
        } else {
            in.seekg(0);
            try {
                json js;
                in >> js;
                if (!js.contains("version") || js["version"] != kVersion)
                    summary["warnings"].push_back("version mismatch: " + f);
                summary["results"].push_back(json{{"file", f}, {"data", js}});
            } catch (...) {
                summary["warnings"].push_back("unparseable file: " + f);
            }
        }
    }
    emit(out_path, summary.dump(2) + "\n",
         "report: " + std::to_string(files.size()) + " file(s), " +
             std::to_string(summary["warnings"].size()) + " warning(s)");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"polynomial pattern and oscillatory-decay toolkit"};
    app.require_subcommand(0, 1);
    Cmd c;
    std::vector<std::string> report_files;
    std::string config_path;
    app.add_option("--config", config_path, "run a stored experiment config (json)");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", c.out_path, "output path (atomic write; stdout if empty)");
        sub->add_option("--seed", c.seed, "rng seed");
        sub->add_option("--format", c.format, "csv|json");
    };

    auto* scales = app.add_subcommand("scales", "dominating-monomial scale classification");
    scales->add_option("--poly", c.poly_path)->required();
    scales->add_option("--gamma0", c.gamma0, "log2 of Gamma_0");
    scales->add_option("--theta", c.theta);
    scales->add_option("--window", c.window, "lo:hi (default: provable envelope)");
    add_common(scales);

    auto* adm = app.add_subcommand("admissible", "build admissible sets E, Lambda");
    adm->add_option("--poly", c.poly_path)->required();
    adm->add_option("--gamma0", c.gamma0);
    adm->add_option("--theta", c.theta);
    adm->add_option("--count", c.count);
    add_common(adm);

    auto* mart = app.add_subcommand("martingale", "lower-bound inequality sides");
    mart->add_option("--f", c.f_path)->required();
    mart->add_option("--k", c.k);
    mart->add_option("--ell", c.ell);
    mart->add_option("--mode", c.mode, "dyadic|smooth");
    add_common(mart);

    auto* tri = app.add_subcommand("trilinear", "trilinear density functional");
    tri->add_option("--f", c.f_path)->required();
    tri->add_option("--poly", c.poly_path)->required();
    tri->add_option("--j", c.j);
    tri->add_option("--n", c.n);
    add_common(tri);

    auto* dec = app.add_subcommand("decompose", "I1..I4 decomposition");
    dec->add_option("--f", c.f_path)->required();
    dec->add_option("--poly", c.poly_path)->required();
    dec->add_option("--j", c.j);
    dec->add_option("--ellp", c.ell_p);
    dec->add_option("--ell", c.ell);
    dec->add_option("--ellpp", c.ell_pp);
    add_common(dec);

    auto* decay = app.add_subcommand("decay", "bilinear decay probe");
    decay->add_option("--poly", c.poly_path)->required();
    decay->add_option("--pair", c.pair_ref, "pairs.json#k")->required();
    decay->add_option("--m", c.sweep, "lo:hi");
    decay->add_option("--trials", c.trials);
    decay->add_option("--n", c.n);
    add_common(decay);

    auto* pat = app.add_subcommand("patterns", "pattern search");
    auto* pfind = pat->add_subcommand("find", "largest-gap-first search");
    pfind->add_option("--set", c.set_path)->required();
    pfind->add_option("--poly", c.poly_path)->required();
    pfind->add_option("--delta", c.delta);
    pfind->add_option("--grid", c.grid_per_unit);
    add_common(pfind);
    auto* pmax = pat->add_subcommand("maxgap", "supremum of admissible gaps");
    pmax->add_option("--set", c.set_path)->required();
    pmax->add_option("--poly", c.poly_path)->required();
    pmax->add_option("--grid", c.grid_per_unit);
    add_common(pmax);
    auto* psweep = pat->add_subcommand("sweep", "adversarial-set gap sweep");
    psweep->add_option("--poly", c.poly_path)->required();
    psweep->add_option("--kind", c.kind, "random|cantor|shifted-blocks");
    psweep->add_option("--N", c.horizon);
    psweep->add_option("--trials", c.trials);
    psweep->add_option("--grid", c.grid_per_unit);
    add_common(psweep);

    auto* osc = app.add_subcommand("oscillate", "oscillatory integral at one (xi, eta, lambda)");
    osc->add_option("--poly", c.poly_path)->required();
    osc->add_option("--pair", c.pair_ref)->required();
    osc->add_option("--xi", c.xi);
    osc->add_option("--eta", c.eta);
    osc->add_option("--lambda", c.lambda);
    add_common(osc);

    auto* stat = app.add_subcommand("stationary-compare", "quadrature vs main term sweep");
    stat->add_option("--poly", c.poly_path)->required();
    stat->add_option("--pair", c.pair_ref)->required();
    stat->add_option("--xi", c.xi);
    stat->add_option("--eta", c.eta);
    stat->add_option("--lambda", c.sweep, "2^a:2^b");
    add_common(stat);

    auto* hb = app.add_subcommand("hbound", "gradient-of-H bounds");
    hb->add_option("--poly", c.poly_path)->required();
    hb->add_option("--pair", c.pair_ref)->required();
    hb->add_option("--trials", c.trials);
    add_common(hb);

    auto* mx = app.add_subcommand("mixed-derivative", "twisted mixed-derivative probe");
    mx->add_option("--poly", c.poly_path)->required();
    mx->add_option("--pair", c.pair_ref)->required();
    mx->add_option("--alpha", c.alphas, "alpha list");
    mx->add_option("--samples", c.trials);
    add_common(mx);

    auto* hor = app.add_subcommand("hormander", "oscillatory bilinear norm decay");
    hor->add_option("--poly", c.poly_path, "empty = canonical phase xy");
    hor->add_option("--pair", c.pair_ref);
    hor->add_option("--lambda", c.sweep, "2^a:2^b");
    hor->add_option("--trials", c.trials);
    hor->add_option("--steps", c.power_steps);
    add_common(hor);

    auto* cl = app.add_subcommand("claim45", "linear-dominant structure check");
    cl->add_option("--poly", c.poly_path)->required();
    cl->add_option("--pair", c.pair_ref)->required();
    cl->add_option("--grid", c.m_grid);
    add_common(cl);

    auto* rep = app.add_subcommand("report", "aggregate result files");
    rep->add_option("files", report_files, "result files");
    rep->add_option("--out", c.out_path);

    try {
        app.parse(argc, argv);

        if (!config_path.empty()) {
            // Re-dispatch a stored config: {"command": "...", "args": {...}}.
            const json cfg = load_json(config_path);
            std::vector<std::string> args = {argv[0], cfg.at("command").get<std::string>()};
            if (cfg.at("command") == "patterns")
                args.push_back(cfg.at("subcommand").get<std::string>());
            for (const auto& [key, val] : cfg.at("args").items()) {
                args.push_back("--" + key);
                args.push_back(val.is_string() ? val.get<std::string>() : val.dump());
            }
            std::vector<char*> cargv;
            for (auto& s : args) cargv.push_back(s.data());
            return main(static_cast<int>(cargv.size()), cargv.data());
        }

        if (scales->parsed()) return run_scales(c);
        if (adm->parsed()) return run_admissible(c);
        if (mart->parsed()) return run_martingale(c);
        if (tri->parsed()) return run_trilinear(c);
        if (dec->parsed()) return run_decompose(c);
        if (decay->parsed()) return run_decay(c);
        if (pat->parsed()) {
            if (pfind->parsed()) return run_patterns_find(c, false);
            if (pmax->parsed()) return run_patterns_find(c, true);
            if (psweep->parsed()) return run_patterns_sweep(c);
            std::cerr << "patterns: need find|maxgap|sweep\n";
            return 2;
        }
        if (osc->parsed()) return run_oscillate(c);
        if (stat->parsed()) return run_stationary(c);
        if (hb->parsed()) return run_hbound(c);
        if (mx->parsed()) return run_mixed(c);
        if (hor->parsed()) return run_hormander(c);
        if (cl->parsed()) return run_claim45(c);
        if (rep->parsed()) return run_report(report_files, c.out_path);
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const precondition_error& e) {
        std::cerr << "precondition: " << e.what() << "\n";
        return 2;
    } catch (const unresolved_error& e) {
        std::cerr << "unresolved: " << e.what() << "\n";
        return 3;
    } catch (const check_error& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
