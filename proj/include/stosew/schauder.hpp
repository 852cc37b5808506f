#pragma once

#include <string>
#include <vector>

#include "stosew/heat.hpp"
#include "stosew/rate.hpp"

namespace stosew {

struct SchauderFit {
    std::string field_label;
    double sup_exponent = 0.0;      // slope of log ||P_sigma f||_inf vs log sigma
    double grad_exponent = 0.0;     // slope for ||grad P_sigma f||_inf
    RateReport sup_report;
    RateReport grad_report;
};

/// Log-log fit of smoothing norms against sigma for one test field.
inline SchauderFit schauder_check(const GridField& f, const std::vector<double>& sigma_levels,
                                  const std::string& label = "") {
    if (sigma_levels.size() < 4) throw std::invalid_argument("schauder_check: need >= 4 sigmas");
    SchauderFit out;
    out.field_label = label;
    out.sup_report.label = label + "_sup";
    out.grad_report.label = label + "_grad";
    for (double s : sigma_levels) {
        GridField smoothed = heat_apply(s, f);
        double sup = smoothed.max_abs();
        double grad = heat_gradient(s, f, 0).max_abs();
        if (f.dim == 2) grad = std::max(grad, heat_gradient(s, f, 1).max_abs());
        out.sup_report.scales.push_back(s);
        out.sup_report.lm_values.push_back(sup);
        out.grad_report.scales.push_back(s);
        out.grad_report.lm_values.push_back(grad);
    }
    auto fs = fit_loglog(out.sup_report.scales, out.sup_report.lm_values);
    auto fg = fit_loglog(out.grad_report.scales, out.grad_report.lm_values);
    out.sup_exponent = fs.slope;
    out.grad_exponent = fg.slope;
    out.sup_report.fitted_exponent = fs.slope;
    out.sup_report.stderr = fs.slope_stderr;
    out.grad_report.fitted_exponent = fg.slope;
    out.grad_report.stderr = fg.slope_stderr;
    return out;
}

} // namespace stosew
