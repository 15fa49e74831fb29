#pragma once

#include <optional>
#include <string>
#include <vector>

// Quality-factor loss budgeting: 1/Q regressed against the metal-air
// participation ratio across designs, and the junction-limited T1 implied
// by the residual loss at zero participation.

namespace qloss {

enum class DesignKind { TM, XM1, XM2, RES };

DesignKind design_from_string(const std::string& s);
std::string to_string(DesignKind d);

struct QubitDevice {
    std::string name;
    DesignKind design = DesignKind::TM;
    std::string etch;         // "wet" or "dry"
    std::string resistivity;  // "3k" or "20k"
    std::vector<double> t1_samples_us;
    double t1_mean_us = 0;
    double t1_sd_us = 0;
    double frequency_ghz = 0;
    std::optional<double> junction_area_um2;
    int measurement_count = 0;

    bool is_resonator() const { return design == DesignKind::RES; }
    void validate() const;  // throws on inconsistent records
};

double q_factor(double t1_us, double frequency_ghz);

struct LossPoint {
    double p_ma = 0;
    double inverse_q = 0;
    double weight = 1.0;
    std::string label;
};

struct LossFit {
    double slope = 0;       // alpha, loss per unit participation
    double intercept = 0;   // residual 1/Q
    double slope_se = 0;
    double intercept_se = 0;
    double slope_ci95 = 0;      // 95% half-widths (Student-t, n-2 dof)
    double intercept_ci95 = 0;
    double t_quantile = 0;
    double s2 = 0;  // residual variance
    double cov_slope_intercept = 0;
    int n = 0;
    std::vector<LossPoint> points;
    std::vector<double> residuals;

    // Half-width of the 95% confidence band for the mean response at p.
    double band_half_width(double p) const;
    double value(double p) const { return slope * p + intercept; }
};

struct LossFitOptions {
    bool weighted = false;  // use 1/weight^2 (weight = sd of 1/Q) if set
};

LossFit fit_loss_line(const std::vector<LossPoint>& points,
                      const LossFitOptions& opts = {});

struct JunctionLimit {
    bool resolved = false;  // false when the intercept is <= 0
    double t1_us = 0;
    double ci_low_us = 0;   // from the intercept's upper 95% bound
    double ci_high_us = 0;  // may be +inf when the lower bound crosses 0
    double f_ref_ghz = 0;
};

JunctionLimit junction_limited_t1(const LossFit& fit, double f_ref_ghz);

}  // namespace qloss
