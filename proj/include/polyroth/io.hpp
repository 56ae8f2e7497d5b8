#ifndef POLYROTH_IO_HPP
#define POLYROTH_IO_HPP

// File formats and atomic output. JSON schemas:
//   polynomial:   {"degree": d, "coeffs": {"1": a1, ..., "<d>": 1}}
//   grid:         {"n": 12, "values": [...]} or {"n": 12, "indicator": [[a,b], ...]}
//   interval set: {"N": 16, "intervals": [[0, 3.2], [9.6, 16]]}
//   pairs:        {"pairs": [{"j":..., "ell":..., "d0":..., "m0":..., ...}], ...}
// Outputs are written to a temp file in the target directory and renamed, so
// a crash never leaves a partial file at the destination.

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyroth/common.hpp"
#include "polyroth/grid.hpp"
#include "polyroth/patterns.hpp"
#include "polyroth/poly.hpp"
#include "polyroth/scales.hpp"

namespace polyroth {

using json = nlohmann::json;

inline Polynomial polynomial_from_json(const json& js) {
    if (!js.contains("degree") || !js.contains("coeffs"))
        throw precondition_error("polynomial json: need degree and coeffs");
    const int d = js.at("degree").get<int>();
    if (d < 2) throw precondition_error("polynomial json: degree >= 2 required");
    std::vector<double> c(static_cast<std::size_t>(d) + 1, 0.0);
    for (const auto& [key, val] : js.at("coeffs").items()) {
        int r = 0;
        try {
            r = std::stoi(key);
        } catch (...) {
            throw precondition_error("polynomial json: bad coefficient key '" + key + "'");
        }
        if (r == 0) throw precondition_error("polynomial json: constant terms are rejected");
        if (r < 1 || r > d) throw precondition_error("polynomial json: power out of range");
        c[static_cast<std::size_t>(r)] = val.get<double>();
    }
    if (c[static_cast<std::size_t>(d)] != 1.0)
        throw precondition_error("polynomial json: leading coefficient must be 1 (monic)");
    return Polynomial(std::move(c), d);
}

inline json polynomial_to_json(const Polynomial& p) {
    json coeffs = json::object();
    for (int r = 1; r <= p.degree(); ++r)
        if (p.coeff(r) != 0.0) coeffs[std::to_string(r)] = p.coeff(r);
    return json{{"degree", p.degree()}, {"coeffs", coeffs}};
}

inline GridFunction grid_from_json(const json& js) {
    if (!js.contains("n")) throw precondition_error("grid json: need resolution n");
    const int n = js.at("n").get<int>();
    if (js.contains("indicator")) {
        std::vector<std::pair<double, double>> iv;
        for (const auto& e : js.at("indicator"))
            iv.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
        return GridFunction::indicator(iv, n);
    }
    if (!js.contains("values")) throw precondition_error("grid json: need values or indicator");
    GridFunction g(n);
    const auto& vals = js.at("values");
    if (vals.size() != g.size()) throw precondition_error("grid json: values length must be 2^n");
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = vals.at(i).get<double>();
    return g;
}

inline IntervalSet interval_set_from_json(const json& js) {
    if (!js.contains("N") || !js.contains("intervals"))
        throw precondition_error("set json: need N and intervals");
    std::vector<Interval> iv;
    for (const auto& e : js.at("intervals"))
        iv.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
    return IntervalSet(std::move(iv), js.at("N").get<double>());
}

inline json interval_set_to_json(const IntervalSet& s) {
    json iv = json::array();
    for (const Interval& i : s.intervals()) iv.push_back(json::array({i.a, i.b}));
    return json{{"N", s.horizon()}, {"intervals", iv}};
}

inline json pairs_to_json(const AdmissibleSets& sets) {
    json pairs = json::array();
    for (const AdmissiblePair& p : sets.pairs) {
        json e{{"j", p.j}, {"ell", p.ell}, {"d0", p.d0}, {"m0", p.m0}};
        if (p.d0 == 1) {
            e["d1"] = p.d1;
            e["b1"] = p.b1;
            e["q0"] = p.q0;
        }
        pairs.push_back(e);
    }
    return json{{"version", kVersion},
                {"gamma_d", sets.gamma_d},
                {"admissibility_bound", sets.admissibility_bound},
                {"E", sets.E},
                {"Lambda", sets.Lambda},
                {"pairs", pairs}};
}

inline AdmissiblePair pair_from_json(const json& js) {
    AdmissiblePair p;
    p.j = js.at("j").get<long>();
    p.ell = js.at("ell").get<long>();
    p.d0 = js.at("d0").get<int>();
    p.m0 = js.at("m0").get<long>();
    if (js.contains("d1")) p.d1 = js.at("d1").get<int>();
    if (js.contains("b1")) p.b1 = js.at("b1").get<long>();
    if (js.contains("q0")) p.q0 = js.at("q0").get<long>();
    return p;
}

// Temp-file-plus-rename write; the destination never holds a partial file.
inline void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw unresolved_error("cannot open " + tmp + " for writing");
        out << content;
        out.flush();
        if (!out.good()) {
            std::remove(tmp.c_str());
            throw unresolved_error("write failed for " + tmp);
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw unresolved_error("rename failed for " + path);
    }
}

// FNV-1a over the canonical serialization; keys experiment outputs.
inline std::uint64_t config_hash(const json& config) {
    const std::string s = config.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// CSV with a version header line; dyadic values may be rendered as 2^k.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> columns, std::uint64_t cfg_hash = 0)
        : columns_(std::move(columns)) {
        os_ << "# " << kVersion;
        if (cfg_hash) os_ << " config=" << std::hex << cfg_hash << std::dec;
        os_ << "\n";
        for (std::size_t i = 0; i < columns_.size(); ++i)
            os_ << columns_[i] << (i + 1 < columns_.size() ? "," : "\n");
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            os_ << cells[i] << (i + 1 < cells.size() ? "," : "\n");
    }
    std::string str() const { return os_.str(); }

    static std::string num(double v) {
        std::ostringstream o;
        o.precision(17);
        o << v;
        return o.str();
    }
    static std::string dyadic(long exponent) { return "2^" + std::to_string(exponent); }

  private:
    std::vector<std::string> columns_;
    std::ostringstream os_;
};

}  // namespace polyroth

#endif  // POLYROTH_IO_HPP
