#include "qloss/lossbudget.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qloss {

DesignKind design_from_string(const std::string& s) {
    if (s == "TM") return DesignKind::TM;
    if (s == "XM1") return DesignKind::XM1;
    if (s == "XM2") return DesignKind::XM2;
    if (s == "RES") return DesignKind::RES;
    throw std::invalid_argument("unknown design tag: " + s);
}

std::string to_string(DesignKind d) {
    switch (d) {
        case DesignKind::TM: return "TM";
        case DesignKind::XM1: return "XM1";
        case DesignKind::XM2: return "XM2";
        case DesignKind::RES: return "RES";
    }
    return "?";
}

void QubitDevice::validate() const {
    if (t1_mean_us <= 0) {
        throw std::invalid_argument(name + ": mean T1 must be positive");
    }
    if (frequency_ghz <= 0) {
        throw std::invalid_argument(name + ": frequency must be positive");
    }
    if (t1_samples_us.size() >= 2) {
        double mean = 0;
        for (double v : t1_samples_us) mean += v;
        mean /= static_cast<double>(t1_samples_us.size());
        double ss = 0;
        for (double v : t1_samples_us) ss += (v - mean) * (v - mean);
        const double sd =
            std::sqrt(ss / (static_cast<double>(t1_samples_us.size()) - 1));
        if (std::abs(mean - t1_mean_us) > 0.01 * t1_mean_us ||
            (t1_sd_us > 0 && std::abs(sd - t1_sd_us) > 0.01 * t1_sd_us)) {
            throw std::invalid_argument(
                name + ": stored T1 mean/SD disagree with samples by > 1%");
        }
    }
}

double q_factor(double t1_us, double frequency_ghz) {
    if (t1_us <= 0 || frequency_ghz <= 0) {
        throw std::invalid_argument("q_factor requires positive T1 and frequency");
    }
    // Q = 2 pi T1 f; us * GHz leaves a factor 1e3.
    return 2.0 * std::numbers::pi * t1_us * frequency_ghz * 1e3;
}

LossFit fit_loss_line(const std::vector<LossPoint>& points,
                      const LossFitOptions& opts) {
    const int n = static_cast<int>(points.size());
    if (n < 3) {
        throw std::invalid_argument("loss fit needs >= 3 points for 2 parameters");
    }
    for (const auto& pt : points) {
        if (pt.p_ma < 0) {
            throw std::invalid_argument("participation ratios must be non-negative");
        }
        if (opts.weighted && pt.weight <= 0) {
            throw std::invalid_argument("weighted fit requires positive weights");
        }
    }

    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& pt : points) {
        const double w = opts.weighted ? 1.0 / (pt.weight * pt.weight) : 1.0;
        sw += w;
        sx += w * pt.p_ma;
        sy += w * pt.inverse_q;
        sxx += w * pt.p_ma * pt.p_ma;
        sxy += w * pt.p_ma * pt.inverse_q;
    }
    const double delta = sw * sxx - sx * sx;
    if (!(delta > 0) || delta < 1e-12 * sw * sxx) {
        throw std::invalid_argument(
            "degenerate design matrix: no variance in participation values");
    }

    LossFit fit;
    fit.n = n;
    fit.points = points;
    fit.slope = (sw * sxy - sx * sy) / delta;
    fit.intercept = (sxx * sy - sx * sxy) / delta;

    double wss = 0;
    fit.residuals.reserve(points.size());
    for (const auto& pt : points) {
        const double r = pt.inverse_q - fit.value(pt.p_ma);
        fit.residuals.push_back(r);
        const double w = opts.weighted ? 1.0 / (pt.weight * pt.weight) : 1.0;
        wss += w * r * r;
    }
    const int dof = n - 2;
    fit.s2 = wss / dof;
    const double var_slope = fit.s2 * sw / delta;
    const double var_int = fit.s2 * sxx / delta;
    fit.slope_se = std::sqrt(var_slope);
    fit.intercept_se = std::sqrt(var_int);
    boost::math::students_t dist(dof);
    fit.t_quantile = boost::math::quantile(dist, 0.975);
    fit.slope_ci95 = fit.t_quantile * fit.slope_se;
    fit.intercept_ci95 = fit.t_quantile * fit.intercept_se;
    fit.cov_slope_intercept = -fit.s2 * sx / delta;
    return fit;
}

double LossFit::band_half_width(double p) const {
    const double var = intercept_se * intercept_se +
                       2.0 * p * cov_slope_intercept +
                       p * p * slope_se * slope_se;
    return t_quantile * std::sqrt(std::max(0.0, var));
}

JunctionLimit junction_limited_t1(const LossFit& fit, double f_ref_ghz) {
    if (f_ref_ghz <= 0) {
        throw std::invalid_argument("reference frequency must be positive");
    }
    JunctionLimit jl;
    jl.f_ref_ghz = f_ref_ghz;
    if (fit.intercept <= 0) {
        jl.resolved = false;
        return jl;
    }
    auto invert = [f_ref_ghz](double c) {
        // 1/Q = c at f_ref -> T1 = 1/(2 pi f c), reported in us.
        return 1e-3 / (2.0 * std::numbers::pi * f_ref_ghz * c);
    };
    jl.resolved = true;
    jl.t1_us = invert(fit.intercept);
    jl.ci_low_us = invert(fit.intercept + fit.intercept_ci95);
    const double c_low = fit.intercept - fit.intercept_ci95;
    jl.ci_high_us = c_low > 0 ? invert(c_low)
                              : std::numeric_limits<double>::infinity();
    return jl;
}

}  // namespace qloss
