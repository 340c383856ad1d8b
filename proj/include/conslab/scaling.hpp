#pragma once

// Log-log scaling fits across mollification ladders, plus the CSV report
// schema shared by the command-line tools.

#include <optional>
#include <string>
#include <vector>

#include "conslab/grid.hpp"

namespace conslab {

struct ScalingReport {
    std::vector<double> eps;
    std::vector<double> value;          // same length as eps; zeros are kept here
    double fitted_exponent = 0.0;       // least-squares slope of log(value) vs log(eps)
    double fit_quality = 0.0;           // R^2 of that fit
    std::optional<double> predicted_exponent;
    int zeros_dropped = 0;              // rungs excluded from the fit (value <= 0)
};

// Fits value ~ C * eps^exponent over the rungs with value > 0. Requires at
// least four usable rungs; throws otherwise ("degenerate ladder" when every
// rung is zero to machine precision).
ScalingReport fit_scaling(const std::vector<double>& eps, const std::vector<double>& value,
                          std::optional<double> predicted = std::nullopt);

// CSV with header: epsilon,value,fitted_exponent,fit_quality,predicted_exponent.
std::string scaling_report_csv(const ScalingReport& r);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace conslab
