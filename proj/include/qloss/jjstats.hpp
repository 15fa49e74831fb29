#pragma once

#include <string>
#include <vector>

// Josephson-junction resistance variability: per-array relative standard
// deviation and the RSD^2 = a/A^gamma + b area-scaling model.

namespace qloss {

struct JJArray {
    double area_um2 = 0;
    std::vector<double> resistances_ohm;
    std::string label;

    void validate() const;  // positive area, >= 2 positive resistances
};

// Sample SD (n-1) over sample mean.
double relative_std(const std::vector<double>& resistances_ohm);

struct RSDPoint {
    double area_um2 = 0;
    double rsd = 0;
};

struct RSDFit {
    double a = 0;
    double gamma = 0;
    double b = 0;
    double a_sd = 0;
    double gamma_sd = 0;
    double b_sd = 0;
    bool gamma_determined = true;  // false for an all-identical-RSD b-only fit
    double residual_norm = 0;      // in RSD^2 space

    double value(double area_um2) const;
};

// Least squares on RSD^2 = a/A^gamma + b: linear in (a, b) >= 0 for fixed
// gamma, nested inside a 1D search over gamma in [0.5, 3].
RSDFit fit_rsd_model(const std::vector<RSDPoint>& points);

std::vector<RSDPoint> rsd_points(const std::vector<JJArray>& arrays);

}  // namespace qloss
