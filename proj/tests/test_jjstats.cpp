#include <doctest.h>

#include "qloss/jjstats.hpp"

#include <cmath>
#include <stdexcept>
#include <random>

using namespace qloss;

namespace {

std::vector<RSDPoint> model_points(double a, double gamma, double b,
                                   const std::vector<double>& areas) {
    std::vector<RSDPoint> pts;
    for (double area : areas) {
        pts.push_back({area, std::sqrt(a / std::pow(area, gamma) + b)});
    }
    return pts;
}

}  // namespace

TEST_SUITE("jjstats") {

TEST_CASE("relative SD basics") {
    CHECK(relative_std({1, 1, 1}) == doctest::Approx(0.0));
    CHECK(relative_std({90, 100, 110}) == doctest::Approx(0.10));
    CHECK_THROWS_AS(relative_std({5.0}), std::invalid_argument);

    // Invariant under uniform resistance scaling.
    const std::vector<double> r{120, 131, 118, 125, 129};
    std::vector<double> scaled;
    for (double v : r) scaled.push_back(3.7 * v);
    CHECK(relative_std(scaled) == doctest::Approx(relative_std(r)).epsilon(1e-12));
}

TEST_CASE("lognormal samples land in the reported RSD band") {
    std::mt19937_64 rng(17);
    std::lognormal_distribution<double> ln(std::log(8000.0), 0.03);
    std::vector<double> r;
    for (int k = 0; k < 60; ++k) r.push_back(ln(rng));
    const double rsd = relative_std(r);
    CHECK(rsd > 0.02);
    CHECK(rsd < 0.05);
}

TEST_CASE("noiseless gamma=1 model is recovered to high precision") {
    const auto pts = model_points(1e-3, 1.0, 0.0, {0.03, 0.06, 0.09, 0.125});
    const RSDFit fit = fit_rsd_model(pts);
    CHECK(fit.gamma_determined);
    CHECK(fit.a == doctest::Approx(1e-3).epsilon(1e-8));
    CHECK(fit.gamma == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(fit.b == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("noiseless gamma=1.3 with barrier term is recovered") {
    const auto pts = model_points(
        1e-3, 1.3, 1e-5, {0.03, 0.045, 0.06, 0.08, 0.1, 0.125});
    const RSDFit fit = fit_rsd_model(pts);
    CHECK(fit.gamma == doctest::Approx(1.3).epsilon(1e-6));
    CHECK(fit.a == doctest::Approx(1e-3).epsilon(1e-6));
    CHECK(fit.b == doctest::Approx(1e-5).epsilon(1e-4));
}

TEST_CASE("b stays near zero when the truth has no barrier term") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> noise(0.0, 0.05);
    auto pts = model_points(1e-3, 1.3, 0.0,
                            {0.03, 0.04, 0.05, 0.065, 0.08, 0.1, 0.125});
    for (auto& p : pts) p.rsd *= 1.0 + noise(rng);
    const RSDFit fit = fit_rsd_model(pts);
    CHECK(fit.b >= 0.0);
    CHECK(fit.b <= 2.0 * std::max(fit.b_sd, 1e-12) + 1e-12);
}

TEST_CASE("area rescaling leaves gamma and b invariant") {
    const std::vector<double> areas{0.03, 0.045, 0.06, 0.08, 0.1, 0.125};
    const auto pts = model_points(1e-3, 1.3, 1e-5, areas);
    const double k = 2.5;
    std::vector<RSDPoint> scaled = pts;
    for (auto& p : scaled) p.area_um2 *= k;
    const RSDFit fit = fit_rsd_model(pts);
    const RSDFit sfit = fit_rsd_model(scaled);
    CHECK(sfit.gamma == doctest::Approx(fit.gamma).epsilon(1e-6));
    CHECK(sfit.b == doctest::Approx(fit.b).epsilon(1e-4));
    CHECK(sfit.a == doctest::Approx(fit.a * std::pow(k, fit.gamma)).epsilon(1e-5));
}

TEST_CASE("degenerate inputs") {
    // All-identical RSD: barrier-only fit, gamma undetermined.
    std::vector<RSDPoint> flat;
    for (double a : {0.03, 0.06, 0.09, 0.125}) flat.push_back({a, 0.03});
    const RSDFit fit = fit_rsd_model(flat);
    CHECK_FALSE(fit.gamma_determined);
    CHECK(fit.b == doctest::Approx(0.03 * 0.03));
    CHECK(fit.a == 0.0);

    std::vector<RSDPoint> few = {{0.03, 0.02}, {0.06, 0.03}, {0.12, 0.04}};
    CHECK_THROWS_AS(fit_rsd_model(few), std::invalid_argument);

    std::vector<RSDPoint> narrow = {
        {0.030, 0.02}, {0.032, 0.03}, {0.034, 0.04}, {0.036, 0.05}};
    CHECK_THROWS_AS(fit_rsd_model(narrow), std::invalid_argument);
}

TEST_CASE("array ingestion helpers validate and summarize") {
    JJArray arr;
    arr.area_um2 = 0.05;
    arr.label = "d1";
    arr.resistances_ohm = {8000, 8100, 7900, 8050};
    CHECK_NOTHROW(arr.validate());
    const auto pts = rsd_points({arr});
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].area_um2 == 0.05);
    CHECK(pts[0].rsd == doctest::Approx(relative_std(arr.resistances_ohm)));

    arr.resistances_ohm = {8000};
    CHECK_THROWS_AS(arr.validate(), std::invalid_argument);
    arr.resistances_ohm = {8000, -2};
    CHECK_THROWS_AS(arr.validate(), std::invalid_argument);
    arr.resistances_ohm = {8000, 8100};
    arr.area_um2 = 0;
    CHECK_THROWS_AS(arr.validate(), std::invalid_argument);
}

}  // TEST_SUITE
