#ifndef POLYROTH_FIT_HPP
#define POLYROTH_FIT_HPP

#include <cmath>
#include <vector>

#include "polyroth/common.hpp"

namespace polyroth {

// Least-squares line through (abscissa_i, log2 ordinate_i). The fitted decay
// exponent gamma_hat = -slope when the abscissa is m or log2(lambda).
struct DecayFit {
    std::vector<double> abscissa;
    std::vector<double> log2_ordinate;
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
    double gamma_hat() const { return -slope; }
};

inline DecayFit fit_log2(const std::vector<double>& abscissa, const std::vector<double>& values) {
    if (abscissa.size() != values.size())
        throw precondition_error("fit_log2: mismatched lengths");
    DecayFit fit;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i])) continue;
        fit.abscissa.push_back(abscissa[i]);
        fit.log2_ordinate.push_back(std::log2(values[i]));
    }
    const std::size_t n = fit.abscissa.size();
    if (n < 3) throw precondition_error("fit_log2: fewer than 3 usable points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += fit.abscissa[i];
        sy += fit.log2_ordinate[i];
        sxx += fit.abscissa[i] * fit.abscissa[i];
        sxy += fit.abscissa[i] * fit.log2_ordinate[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw precondition_error("fit_log2: degenerate abscissa");
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    for (std::size_t i = 0; i < n; ++i) {
        double r = std::abs(fit.log2_ordinate[i] - (fit.slope * fit.abscissa[i] + fit.intercept));
        fit.max_residual = std::max(fit.max_residual, r);
    }
    return fit;
}

}  // namespace polyroth

#endif  // POLYROTH_FIT_HPP
