#include <algorithm>
#include <doctest.h>

#include "qloss/coherence.hpp"

#include <cmath>
#include <stdexcept>
#include <numbers>
#include <random>

using namespace qloss;

namespace {

DecaySeries make_exp(double a, double tau, double b, int n, double tmax,
                     double noise_sd = 0.0, uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sd);
    DecaySeries s;
    for (int k = 0; k < n; ++k) {
        const double t = tmax * k / (n - 1);
        s.times_us.push_back(t);
        s.populations.push_back(
            std::clamp(a * std::exp(-t / tau) + b + noise(rng), -0.1, 1.1));
    }
    return s;
}

}  // namespace

TEST_SUITE("coherence") {

TEST_CASE("series validation") {
    DecaySeries s;
    s.times_us = {0, 1, 2, 3};
    s.populations = {1, 0.9, 0.8};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.populations = {1, 0.9, 0.8, 0.7};
    CHECK_NOTHROW(s.validate());
    s.times_us = {0, 2, 1, 3};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.times_us = {0, 1, 2, 3};
    s.populations[2] = 1.5;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("noiseless exponential is recovered exactly") {
    const DecaySeries s = make_exp(0.92, 48.0, 0.05, 50, 200.0);
    const DecayFit fit = fit_exponential_decay(s);
    CHECK(fit.t_us == doctest::Approx(48.0).epsilon(1e-6));
    CHECK(fit.amplitude == doctest::Approx(0.92).epsilon(1e-6));
    CHECK(fit.offset == doctest::Approx(0.05).epsilon(1e-5));
    CHECK_FALSE(fit.fell_back_to_exponential);
}

TEST_CASE("noisy exponential stays within tolerance") {
    const DecaySeries s = make_exp(0.9, 60.0, 0.05, 60, 240.0, 0.02, 42);
    const DecayFit fit = fit_exponential_decay(s);
    CHECK(fit.t_us == doctest::Approx(60.0).epsilon(0.05));
    CHECK(fit.t_sd > 0);
}

TEST_CASE("flat series raises NoDecayResolvable") {
    DecaySeries s;
    for (int k = 0; k < 20; ++k) {
        s.times_us.push_back(k);
        s.populations.push_back(0.5);
    }
    CHECK_THROWS_AS(fit_exponential_decay(s), NoDecayResolvable);
}

TEST_CASE("Ramsey fringes: detuning, phase and T2* recovered") {
    DecaySeries s;
    const double t2 = 18.0, delta = 0.45, phi = 0.4;
    for (int k = 0; k < 120; ++k) {
        const double t = 60.0 * k / 119.0;
        s.times_us.push_back(t);
        s.populations.push_back(
            0.5 +
            0.45 * std::exp(-t / t2) *
                std::cos(2 * std::numbers::pi * delta * t + phi));
    }
    const DecayFit fit = fit_ramsey(s);
    CHECK_FALSE(fit.fell_back_to_exponential);
    CHECK(fit.t_us == doctest::Approx(t2).epsilon(1e-4));
    CHECK(fit.detuning_mhz == doctest::Approx(delta).epsilon(1e-5));
    CHECK(std::abs(std::remainder(fit.phase - phi, 2 * std::numbers::pi)) <
          1e-3);
}

TEST_CASE("zero-detuning Ramsey falls back to the exponential model") {
    const DecaySeries s = make_exp(0.45, 20.0, 0.5, 60, 80.0);
    const DecayFit fit = fit_ramsey(s);
    CHECK(fit.fell_back_to_exponential);
    CHECK(fit.model == DecayModel::Ramsey);
    CHECK(fit.t_us == doctest::Approx(20.0).epsilon(1e-4));
}

TEST_CASE("echo uses the exponential path with its own label") {
    const DecaySeries s = make_exp(0.45, 35.0, 0.5, 40, 150.0);
    const DecayFit fit = fit_exponential_decay(s, DecayModel::Echo);
    CHECK(fit.model == DecayModel::Echo);
    CHECK(fit.t_us == doctest::Approx(35.0).epsilon(1e-5));
}

TEST_CASE("t2 physical bound helper") {
    CHECK(t2_exceeds_physical_bound(101.0, 50.0));
    CHECK_FALSE(t2_exceeds_physical_bound(99.0, 50.0));
}

TEST_CASE("sample statistics use the n-1 convention and interpolation") {
    const std::vector<double> v{1, 2, 3, 4};
    const SampleStats st = sample_stats(v);
    CHECK(st.mean == doctest::Approx(2.5));
    CHECK(st.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(st.q1 == doctest::Approx(1.75));
    CHECK(st.q3 == doctest::Approx(3.25));
    CHECK(st.n == 4);
    CHECK_THROWS_AS(sample_stats({}), std::invalid_argument);
    const SampleStats one = sample_stats({7.0});
    CHECK(one.mean == 7.0);
    CHECK(one.sd == 0.0);
}

TEST_CASE("kde integrates to one and respects the bandwidth") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(50.0, 5.0);
    std::vector<double> samples;
    for (int k = 0; k < 200; ++k) samples.push_back(n(rng));
    const KdeCurve curve = kde(samples);
    CHECK(curve.bandwidth > 0);
    double integral = 0;
    for (size_t k = 0; k + 1 < curve.x.size(); ++k) {
        integral += 0.5 * (curve.density[k] + curve.density[k + 1]) *
                    (curve.x[k + 1] - curve.x[k]);
    }
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
    // Peak near the true mean.
    size_t peak = 0;
    for (size_t k = 0; k < curve.density.size(); ++k) {
        if (curve.density[k] > curve.density[peak]) peak = k;
    }
    CHECK(curve.x[peak] == doctest::Approx(50.0).epsilon(0.05));

    const KdeCurve manual = kde(samples, 2.0, 64);
    CHECK(manual.bandwidth == 2.0);
    CHECK(manual.x.size() == 64);
    CHECK_THROWS_AS(kde({}), std::invalid_argument);
    CHECK_THROWS_AS(kde({1.0, 1.0, 1.0}), std::invalid_argument);
}

}  // TEST_SUITE
