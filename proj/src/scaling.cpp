#include "conslab/scaling.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace conslab {

ScalingReport fit_scaling(const std::vector<double>& eps, const std::vector<double>& value,
                          std::optional<double> predicted) {
    if (eps.size() != value.size())
        throw std::invalid_argument("fit_scaling: eps/value length mismatch");

    ScalingReport r;
    r.eps = eps;
    r.value = value;
    r.predicted_exponent = predicted;

    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0)) throw std::invalid_argument("fit_scaling: eps must be positive");
        if (value[i] > 0.0) {
            lx.push_back(std::log(eps[i]));
            ly.push_back(std::log(value[i]));
        } else {
            ++r.zeros_dropped;
        }
    }
    if (lx.size() < 4) {
        if (lx.empty())
            throw std::runtime_error("fit_scaling: degenerate ladder (all rungs are zero)");
        throw std::runtime_error("fit_scaling: only " + std::to_string(lx.size()) +
                                 " usable rungs after dropping zeros; need at least 4");
    }

    const std::size_t m = lx.size();
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < m; ++i) { sx += lx[i]; sy += ly[i]; }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0.0) throw std::runtime_error("fit_scaling: all rungs share one eps");

    r.fitted_exponent = sxy / sxx;
    if (syy == 0.0) {
        r.fit_quality = 1.0;  // exactly constant values: perfect (flat) fit
    } else {
        double ssres = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double pred = my + r.fitted_exponent * (lx[i] - mx);
            ssres += (ly[i] - pred) * (ly[i] - pred);
        }
        r.fit_quality = 1.0 - ssres / syy;
    }
    return r;
}

std::string scaling_report_csv(const ScalingReport& r) {
    std::string out = "epsilon,value,fitted_exponent,fit_quality,predicted_exponent\n";
    char buf[256];
    for (std::size_t i = 0; i < r.eps.size(); ++i) {
        if (r.predicted_exponent)
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.eps[i], r.value[i],
                          r.fitted_exponent, r.fit_quality, *r.predicted_exponent);
        else
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,\n", r.eps[i], r.value[i],
                          r.fitted_exponent, r.fit_quality);
        out += buf;
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << content;
    if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace conslab
