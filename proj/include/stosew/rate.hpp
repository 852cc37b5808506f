#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace stosew {

/// Least-squares slope/intercept of log(value) against log(scale).
struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0; // log of the prefactor
    double slope_stderr = 0.0;
    std::size_t n_used = 0;
};

inline LogLogFit fit_loglog(const std::vector<double>& scales, const std::vector<double>& values) {
    if (scales.size() != values.size()) throw std::invalid_argument("fit_loglog: size mismatch");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (scales[i] > 0.0 && values[i] > 0.0) {
            xs.push_back(std::log(scales[i]));
            ys.push_back(std::log(values[i]));
        }
    }
    std::size_t n = xs.size();
    if (n < 2) throw std::invalid_argument("fit_loglog: fewer than 2 usable points");
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) { sx += xs[i]; sy += ys[i]; }
    double mx = sx / double(n), my = sy / double(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    LogLogFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss_res += r * r;
    }
    fit.slope_stderr = n > 2 ? std::sqrt(ss_res / double(n - 2) / sxx) : 0.0;
    fit.n_used = n;
    return fit;
}

/// Monte Carlo L_m norms across scales plus the fitted power-law exponent.
struct RateReport {
    std::vector<double> scales;    // strictly decreasing
    std::vector<double> lm_values; // >= 0, one per scale
    double m = 2.0;
    double fitted_exponent = 0.0;
    double stderr = 0.0;
    bool converged = true; // false when lm fails to decrease over the last 3 scales
    std::string label;

    /// Fits over all positive (scale, value) pairs. Needs >= 4 scales.
    void fit() {
        if (scales.size() < 4) throw std::invalid_argument("RateReport: fit needs >= 4 scales");
        auto f = fit_loglog(scales, lm_values);
        fitted_exponent = f.slope;
        stderr = f.slope_stderr;
        std::size_t n = lm_values.size();
        converged = true;
        if (n >= 3) {
            // scales are decreasing; values should too, at least at the tail
            for (std::size_t i = n - 3; i + 1 < n; ++i)
                if (lm_values[i + 1] > lm_values[i]) converged = false;
        }
    }

    std::string to_csv() const {
        std::ostringstream os;
        os << "scale,lm_value,m\n";
        os.precision(17);
        for (std::size_t i = 0; i < scales.size(); ++i)
            os << scales[i] << "," << lm_values[i] << "," << m << "\n";
        return os.str();
    }

    std::string to_json(const std::string& config_echo = "") const {
        std::ostringstream os;
        os.precision(17);
        os << "{\n  \"m\": " << m << ",\n  \"fitted_exponent\": " << fitted_exponent
           << ",\n  \"stderr\": " << stderr << ",\n  \"converged\": " << (converged ? "true" : "false")
           << ",\n  \"scales\": [";
        for (std::size_t i = 0; i < scales.size(); ++i)
            os << (i ? ", " : "") << scales[i];
        os << "],\n  \"lm_values\": [";
        for (std::size_t i = 0; i < lm_values.size(); ++i)
            os << (i ? ", " : "") << lm_values[i];
        os << "]";
        if (!config_echo.empty()) os << ",\n  \"config\": \"" << config_echo << "\"";
        os << "\n}\n";
        return os.str();
    }
};

} // namespace stosew
