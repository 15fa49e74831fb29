#include "qloss/jjstats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qloss {

void JJArray::validate() const {
    if (area_um2 <= 0) throw std::invalid_argument("junction area must be > 0");
    if (resistances_ohm.size() < 2) {
        throw std::invalid_argument("array needs >= 2 resistance values");
    }
    for (double r : resistances_ohm) {
        if (r <= 0) throw std::invalid_argument("resistances must be > 0");
    }
}

double relative_std(const std::vector<double>& r) {
    if (r.size() < 2) {
        throw std::invalid_argument("relative SD needs >= 2 values");
    }
    double mean = 0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(r.size());
    if (mean <= 0) throw std::invalid_argument("mean resistance must be > 0");
    double ss = 0;
    for (double v : r) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (static_cast<double>(r.size()) - 1)) / mean;
}

std::vector<RSDPoint> rsd_points(const std::vector<JJArray>& arrays) {
    std::vector<RSDPoint> pts;
    pts.reserve(arrays.size());
    for (const auto& a : arrays) {
        a.validate();
        pts.push_back({a.area_um2, relative_std(a.resistances_ohm)});
    }
    return pts;
}

double RSDFit::value(double area_um2) const {
    return std::sqrt(a / std::pow(area_um2, gamma) + b);
}

namespace {

struct LinearSolution {
    double a = 0, b = 0, cost = 0;
};

// Constrained (a, b >= 0) least squares of y = a x + b.
LinearSolution solve_ab(const std::vector<double>& x,
                        const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < n; ++k) {
        sx += x[k];
        sy += y[k];
        sxx += x[k] * x[k];
        sxy += x[k] * y[k];
    }
    const double delta = n * sxx - sx * sx;
    LinearSolution s;
    if (delta > 0) {
        s.a = (n * sxy - sx * sy) / delta;
        s.b = (sxx * sy - sx * sxy) / delta;
    }
    if (s.a < 0) {
        s.a = 0;
        s.b = std::max(0.0, sy / n);
    } else if (s.b < 0) {
        s.b = 0;
        s.a = sxx > 0 ? std::max(0.0, sxy / sxx) : 0.0;
    }
    for (int k = 0; k < n; ++k) {
        const double r = y[k] - (s.a * x[k] + s.b);
        s.cost += r * r;
    }
    return s;
}

double cost_at_gamma(const std::vector<RSDPoint>& pts, double gamma,
                     LinearSolution* out) {
    std::vector<double> x, y;
    x.reserve(pts.size());
    y.reserve(pts.size());
    for (const auto& p : pts) {
        x.push_back(std::pow(p.area_um2, -gamma));
        y.push_back(p.rsd * p.rsd);
    }
    const LinearSolution s = solve_ab(x, y);
    if (out) *out = s;
    return s.cost;
}

}  // namespace

RSDFit fit_rsd_model(const std::vector<RSDPoint>& points) {
    if (points.size() < 4) {
        throw std::invalid_argument("RSD fit needs >= 4 points");
    }
    double amin = points.front().area_um2, amax = amin;
    double rmin = points.front().rsd, rmax = rmin;
    for (const auto& p : points) {
        if (p.area_um2 <= 0) throw std::invalid_argument("areas must be > 0");
        if (p.rsd < 0) throw std::invalid_argument("RSD must be >= 0");
        amin = std::min(amin, p.area_um2);
        amax = std::max(amax, p.area_um2);
        rmin = std::min(rmin, p.rsd);
        rmax = std::max(rmax, p.rsd);
    }
    if (amax < 2.0 * amin) {
        throw std::invalid_argument("areas must span at least a factor 2");
    }

    RSDFit fit;
    if (rmax - rmin <= 1e-12 * std::max(1.0, rmax)) {
        // No area dependence resolvable: pure barrier term.
        fit.b = rmax * rmax;
        fit.gamma_determined = false;
        return fit;
    }

    // Coarse scan then golden-section refinement over gamma.
    const double glo = 0.5, ghi = 3.0;
    const int coarse = 101;
    double best_g = glo, best_cost = cost_at_gamma(points, glo, nullptr);
    for (int k = 1; k < coarse; ++k) {
        const double g = glo + (ghi - glo) * k / (coarse - 1);
        const double c = cost_at_gamma(points, g, nullptr);
        if (c < best_cost) {
            best_cost = c;
            best_g = g;
        }
    }
    const double step = (ghi - glo) / (coarse - 1);
    double lo = std::max(glo, best_g - step), hi = std::min(ghi, best_g + step);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = cost_at_gamma(points, x1, nullptr);
    double f2 = cost_at_gamma(points, x2, nullptr);
    for (int it = 0; it < 80 && hi - lo > 1e-10; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = cost_at_gamma(points, x1, nullptr);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = cost_at_gamma(points, x2, nullptr);
        }
    }
    const double gamma = 0.5 * (lo + hi);
    LinearSolution sol;
    const double cost = cost_at_gamma(points, gamma, &sol);

    fit.a = sol.a;
    fit.gamma = gamma;
    fit.b = sol.b;
    fit.residual_norm = std::sqrt(cost);

    // Parameter SDs from the 3-parameter Jacobian in RSD^2 space.
    const int n = static_cast<int>(points.size());
    const int dof = n - 3;
    if (dof > 0 && fit.a > 0) {
        Eigen::MatrixXd jac(n, 3);
        for (int k = 0; k < n; ++k) {
            const double ag = std::pow(points[k].area_um2, -gamma);
            jac(k, 0) = ag;
            jac(k, 1) = -fit.a * std::log(points[k].area_um2) * ag;
            jac(k, 2) = 1.0;
        }
        const double s2 = cost / dof;
        const Eigen::MatrixXd cov =
            s2 * (jac.transpose() * jac)
                     .completeOrthogonalDecomposition()
                     .pseudoInverse();
        fit.a_sd = std::sqrt(std::max(0.0, cov(0, 0)));
        fit.gamma_sd = std::sqrt(std::max(0.0, cov(1, 1)));
        fit.b_sd = std::sqrt(std::max(0.0, cov(2, 2)));
    }
    return fit;
}

}  // namespace qloss
