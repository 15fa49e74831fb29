#include "qloss/coherence.hpp"

#include "qloss/nlls.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

namespace qloss {

void DecaySeries::validate() const {
    if (times_us.size() != populations.size()) {
        throw std::invalid_argument("time and population columns differ in length");
    }
    if (times_us.size() < 4) {
        throw std::invalid_argument("decay series needs >= 4 samples");
    }
    for (size_t k = 0; k + 1 < times_us.size(); ++k) {
        if (!(times_us[k + 1] > times_us[k])) {
            throw std::invalid_argument("times must be strictly increasing");
        }
    }
    for (double p : populations) {
        if (p < -0.1 || p > 1.1) {
            throw std::invalid_argument(
                "population outside [-0.1, 1.1] readout margin");
        }
    }
}

namespace {

// Noise scale from first differences; insensitive to the decay trend.
double noise_floor(const std::vector<double>& y) {
    if (y.size() < 2) return 0;
    std::vector<double> d;
    d.reserve(y.size() - 1);
    for (size_t k = 0; k + 1 < y.size(); ++k) d.push_back(std::abs(y[k + 1] - y[k]));
    std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
    return d[d.size() / 2] / std::numbers::sqrt2;
}

struct ExpInit {
    double a, t, b;
};

ExpInit init_exponential(const DecaySeries& s) {
    const auto& t = s.times_us;
    const auto& y = s.populations;
    const size_t n = t.size();
    // Offset from the trailing samples, then log-linear slope.
    const size_t tail = std::max<size_t>(1, n / 10);
    double b = 0;
    for (size_t k = n - tail; k < n; ++k) b += y[k];
    b /= static_cast<double>(tail);
    double a = y.front() - b;
    if (a == 0) a = 1e-3;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (size_t k = 0; k < n; ++k) {
        const double z = (y[k] - b) / a;  // normalized decay, target exp(-t/T)
        if (z < 0.05) continue;
        const double ly = std::log(z);
        sx += t[k]; sy += ly; sxx += t[k] * t[k]; sxy += t[k] * ly;
        ++m;
    }
    double tau = (t.back() - t.front()) / 2;
    if (m >= 2) {
        const double denom = m * sxx - sx * sx;
        if (denom > 0) {
            const double slope = (m * sxy - sx * sy) / denom;
            if (slope < -1e-12) tau = -1.0 / slope;
        }
    }
    return {a, tau, b};
}

}  // namespace

DecayFit fit_exponential_decay(const DecaySeries& series, DecayModel model) {
    series.validate();
    const auto& t = series.times_us;
    const auto& y = series.populations;
    const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
    const double floor = noise_floor(y);
    if (*ymax - *ymin <= std::max(3.0 * floor, 1e-9)) {
        throw NoDecayResolvable("series is flat: no decay resolvable");
    }

    const ExpInit init = init_exponential(series);
    const int n = static_cast<int>(t.size());
    auto fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r,
                  Eigen::MatrixXd* jac) {
        const double a = p[0], tau = p[1], b = p[2];
        for (int k = 0; k < n; ++k) {
            const double e = std::exp(-t[k] / tau);
            r[k] = y[k] - (a * e + b);
            if (jac) {
                (*jac)(k, 0) = -e;
                (*jac)(k, 1) = -a * e * t[k] / (tau * tau);
                (*jac)(k, 2) = -1.0;
            }
        }
    };
    Eigen::VectorXd x0(3);
    x0 << init.a, std::max(init.t, 1e-6), init.b;
    const NllsResult res = levenberg_marquardt(fn, n, x0);

    DecayFit fit;
    fit.model = model;
    fit.amplitude = res.params[0];
    fit.t_us = res.params[1];
    fit.offset = res.params[2];
    fit.amplitude_sd = res.param_sd[0];
    fit.t_sd = res.param_sd[1];
    fit.offset_sd = res.param_sd[2];
    fit.residual_norm = res.residual_norm;
    if (fit.t_us <= 0) {
        throw NoDecayResolvable("fitted time constant is non-positive");
    }
    return fit;
}

namespace {

struct FringeSeed {
    double freq_mhz;
    double amplitude;
    double phase;
    bool found;
};

// Dominant discrete-Fourier component of the offset-subtracted series on a
// frequency grid from one cycle per span up to the mean Nyquist rate.
FringeSeed detect_fringe(const DecaySeries& s) {
    const auto& t = s.times_us;
    const auto& y = s.populations;
    const size_t n = t.size();
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    const double span = t.back() - t.front();
    const double dt = span / static_cast<double>(n - 1);
    const double fmin = 1.0 / span;
    const double fmax = 0.5 / dt;
    auto spectrum = [&](double f) {
        std::complex<double> acc = 0;
        for (size_t k = 0; k < n; ++k) {
            acc += (y[k] - mean) *
                   std::exp(std::complex<double>(
                       0, -2 * std::numbers::pi * f * t[k]));
        }
        return acc;
    };
    // Monotone trends (bare decays) pile their spectral weight at the grid
    // floor; a real fringe must beat that low-frequency content as well as
    // the overall spectral level, and complete >= 1.5 cycles in the span.
    const double mag0 = std::abs(spectrum(fmin)) * 2.0 / n;
    FringeSeed best{0, 0, 0, false};
    double rms = 0;
    int count = 0;
    const int ngrid = static_cast<int>(8 * n);
    for (int g = 0; g < ngrid; ++g) {
        const double f = 1.5 * fmin + (fmax - 1.5 * fmin) * g / (ngrid - 1);
        const std::complex<double> acc = spectrum(f);
        const double mag = std::abs(acc);
        rms += mag * mag;
        ++count;
        if (mag > best.amplitude * n / 2) {
            best.freq_mhz = f;  // times in us -> frequency in MHz
            best.amplitude = 2.0 * mag / n;
            best.phase = std::arg(acc);
        }
    }
    rms = std::sqrt(rms / count) * 2.0 / n;
    best.found = best.amplitude > 2.0 * rms && best.amplitude > 1.5 * mag0;
    return best;
}

}  // namespace

DecayFit fit_ramsey(const DecaySeries& series) {
    series.validate();
    if (series.size() < 8) {
        throw std::invalid_argument("Ramsey fit needs >= 8 samples");
    }
    const FringeSeed seed = detect_fringe(series);
    if (!seed.found) {
        DecayFit fit = fit_exponential_decay(series, DecayModel::Ramsey);
        fit.fell_back_to_exponential = true;
        return fit;
    }

    const auto& t = series.times_us;
    const auto& y = series.populations;
    const int n = static_cast<int>(t.size());
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    auto fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r,
                  Eigen::MatrixXd* jac) {
        const double a = p[0], tau = p[1], b = p[2], f = p[3], ph = p[4];
        for (int k = 0; k < n; ++k) {
            const double w = 2 * std::numbers::pi * f * t[k] + ph;
            const double e = std::exp(-t[k] / tau);
            const double c = std::cos(w);
            r[k] = y[k] - (a * e * c + b);
            if (jac) {
                const double s = std::sin(w);
                (*jac)(k, 0) = -e * c;
                (*jac)(k, 1) = -a * e * c * t[k] / (tau * tau);
                (*jac)(k, 2) = -1.0;
                (*jac)(k, 3) = a * e * s * 2 * std::numbers::pi * t[k];
                (*jac)(k, 4) = a * e * s;
            }
        }
    };
    Eigen::VectorXd x0(5);
    x0 << seed.amplitude, (t.back() - t.front()) / 2.0, mean, seed.freq_mhz,
        seed.phase;
    const NllsResult res = levenberg_marquardt(fn, n, x0);

    DecayFit fit;
    fit.model = DecayModel::Ramsey;
    fit.amplitude = res.params[0];
    fit.t_us = res.params[1];
    fit.offset = res.params[2];
    fit.detuning_mhz = res.params[3];
    fit.phase = res.params[4];
    fit.amplitude_sd = res.param_sd[0];
    fit.t_sd = res.param_sd[1];
    fit.offset_sd = res.param_sd[2];
    fit.detuning_sd = res.param_sd[3];
    fit.phase_sd = res.param_sd[4];
    fit.residual_norm = res.residual_norm;
    if (fit.t_us <= 0) {
        throw NoDecayResolvable("fitted time constant is non-positive");
    }
    return fit;
}

SampleStats sample_stats(const std::vector<double>& samples) {
    if (samples.empty()) {
        throw std::invalid_argument("sample statistics need >= 1 value");
    }
    SampleStats st;
    st.n = static_cast<int>(samples.size());
    st.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / st.n;
    if (st.n >= 2) {
        double ss = 0;
        for (double v : samples) ss += (v - st.mean) * (v - st.mean);
        st.sd = std::sqrt(ss / (st.n - 1));
    }
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double p) {
        const double h = (st.n - 1) * p;
        const size_t lo = static_cast<size_t>(std::floor(h));
        const size_t hi = std::min(lo + 1, sorted.size() - 1);
        return sorted[lo] + (h - std::floor(h)) * (sorted[hi] - sorted[lo]);
    };
    st.q1 = quantile(0.25);
    st.q3 = quantile(0.75);
    return st;
}

KdeCurve kde(const std::vector<double>& samples, double bandwidth_us,
             int grid_points) {
    if (samples.empty()) throw std::invalid_argument("kde needs samples");
    double h = bandwidth_us;
    if (h <= 0) {
        if (samples.size() < 2) {
            throw std::invalid_argument("automatic bandwidth needs >= 2 samples");
        }
        const SampleStats st = sample_stats(samples);
        const double iqr = st.q3 - st.q1;
        double spread = st.sd;
        if (iqr > 0) spread = std::min(spread, iqr / 1.34);
        h = 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
        if (h <= 0) {
            throw std::invalid_argument(
                "Silverman bandwidth is zero (no spread in samples)");
        }
    }
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *mn - 4 * h, hi = *mx + 4 * h;
    KdeCurve curve;
    curve.bandwidth = h;
    curve.x.resize(grid_points);
    curve.density.resize(grid_points);
    const double norm =
        1.0 / (samples.size() * h * std::sqrt(2 * std::numbers::pi));
    for (int g = 0; g < grid_points; ++g) {
        const double x = lo + (hi - lo) * g / (grid_points - 1);
        double d = 0;
        for (double s : samples) {
            const double z = (x - s) / h;
            d += std::exp(-0.5 * z * z);
        }
        curve.x[g] = x;
        curve.density[g] = norm * d;
    }
    return curve;
}

}  // namespace qloss
