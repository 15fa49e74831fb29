#pragma once

#include <stdexcept>
#include <string>
#include <vector>

// Time-domain coherence analysis: exponential relaxation, Ramsey damped
// cosine and spin-echo fits, repeated-T1 sample statistics and kernel
// density summaries.

namespace qloss {

struct DecaySeries {
    std::vector<double> times_us;     // strictly increasing
    std::vector<double> populations;  // within [-0.1, 1.1]

    void validate() const;
    size_t size() const { return times_us.size(); }
};

enum class DecayModel { T1, Ramsey, Echo };

struct DecayFit {
    DecayModel model = DecayModel::T1;
    double t_us = 0;        // T1, T2* or T2e
    double amplitude = 0;
    double offset = 0;
    double detuning_mhz = 0;  // Ramsey only
    double phase = 0;         // Ramsey only
    double t_sd = 0;
    double amplitude_sd = 0;
    double offset_sd = 0;
    double detuning_sd = 0;
    double phase_sd = 0;
    double residual_norm = 0;
    bool fell_back_to_exponential = false;  // Ramsey with no visible fringe
};

// Raised when a series has no resolvable decay (flat within noise).
struct NoDecayResolvable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A exp(-t/T) + B; also used for spin-echo data.
DecayFit fit_exponential_decay(const DecaySeries& series,
                               DecayModel model = DecayModel::T1);

// A exp(-t/T2*) cos(2 pi delta t + phi) + B; detuning seeded from the
// dominant discrete-Fourier component. Falls back to the exponential model
// when no oscillation is detected.
DecayFit fit_ramsey(const DecaySeries& series);

struct SampleStats {
    double mean = 0;
    double sd = 0;  // n-1 convention
    double q1 = 0;
    double q3 = 0;
    int n = 0;
};

SampleStats sample_stats(const std::vector<double>& samples);

struct KdeCurve {
    std::vector<double> x;
    std::vector<double> density;
    double bandwidth = 0;
};

// Gaussian kernel density on a regular grid; bandwidth <= 0 selects
// Silverman's rule.
KdeCurve kde(const std::vector<double>& samples, double bandwidth_us = 0,
             int grid_points = 256);

// Physicality advisory (not an error): echo/Ramsey T2 beyond 2*T1.
inline bool t2_exceeds_physical_bound(double t2_us, double t1_us) {
    return t2_us > 2.0 * t1_us;
}

}  // namespace qloss
