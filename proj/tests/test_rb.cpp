#include <doctest.h>

#include "qloss/rb.hpp"

#include <cmath>
#include <stdexcept>

using namespace qloss;

namespace {

bool equal_phase(const Matrix2c& a, const Matrix2c& b) {
    const std::complex<double> tr = (a.adjoint() * b).trace();
    return std::abs(std::abs(tr) - 2.0) < 1e-9;
}

}  // namespace

TEST_SUITE("rb") {

TEST_CASE("clifford table: 24 elements, closure, inverses, 1.875 gates") {
    const CliffordTable table = build_clifford_table();
    REQUIRE(table.elements.size() == 24);

    // Pairwise distinct up to phase.
    for (int a = 0; a < 24; ++a) {
        for (int b = a + 1; b < 24; ++b) {
            CHECK_FALSE(equal_phase(table.elements[a], table.elements[b]));
        }
    }
    // Closed under composition.
    for (int a = 0; a < 24; ++a) {
        for (int b = 0; b < 24; ++b) {
            CHECK(table.find(table.elements[a] * table.elements[b]) >= 0);
        }
    }
    // Inverses compose to identity.
    const int id = table.identity_index();
    REQUIRE(id >= 0);
    for (int a = 0; a < 24; ++a) {
        const Matrix2c prod =
            table.elements[a] * table.elements[table.inverse[a]];
        CHECK(equal_phase(prod, Matrix2c::Identity()));
    }
    // Decompositions recompose to their element.
    for (int a = 0; a < 24; ++a) {
        Matrix2c m = Matrix2c::Identity();
        for (int g : table.decomposition[a]) {
            m = table.generators[g].unitary * m;
        }
        CHECK(equal_phase(m, table.elements[a]));
    }
    CHECK(table.decomposition[id].empty());
    CHECK(table.average_generator_count() == doctest::Approx(1.875));
}

TEST_CASE("sequences invert to the identity and are seed-deterministic") {
    const CliffordTable table = build_clifford_table();
    const RBSequence empty = generate_rb_sequence(table, 0, 9);
    CHECK(empty.recovery_id == table.identity_index());

    const RBSequence seq = generate_rb_sequence(table, 20, 1234);
    Matrix2c m = Matrix2c::Identity();
    for (int id : seq.clifford_ids) m = table.elements[id] * m;
    m = table.elements[seq.recovery_id] * m;
    CHECK(equal_phase(m, Matrix2c::Identity()));

    const RBSequence again = generate_rb_sequence(table, 20, 1234);
    CHECK(again.clifford_ids == seq.clifford_ids);
    const RBSequence other = generate_rb_sequence(table, 20, 1235);
    CHECK(other.clifford_ids != seq.clifford_ids);
}

TEST_CASE("noiseless simulation returns the qubit to ground") {
    const CliffordTable table = build_clifford_table();
    NoiseParams quiet;
    quiet.t1_us = 1e12;
    quiet.t2_us = 1e12;
    const RBSequence seq = generate_rb_sequence(table, 50, 7);
    CHECK(simulate_sequence(table, seq, quiet) ==
          doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("two X180 gates match the hand-evaluated density matrix") {
    const CliffordTable table = build_clifford_table();
    Matrix2c x180;
    const std::complex<double> i(0, 1);
    x180 << 0, -i, -i, 0;
    const int id = table.find(x180);
    REQUIRE(id >= 0);
    REQUIRE(table.decomposition[id].size() == 1);

    NoiseParams noise;  // 50 us / 60 us / 50 ns defaults
    RBSequence seq;
    seq.clifford_ids = {id};
    seq.recovery_id = id;  // X180 is its own inverse

    // By hand: |0> -X-> |1>, damp: rho00 = g, rho11 = 1-g; -X->
    // rho00 = 1-g, rho11 = g; damp: rho00 = 1-g+g^2.
    const double g = 1.0 - std::exp(-0.05 / 50.0);
    CHECK(simulate_sequence(table, seq, noise) ==
          doctest::Approx(1.0 - g + g * g).epsilon(1e-12));
}

TEST_CASE("noise parameter validation") {
    NoiseParams bad;
    bad.t2_us = 150;  // > 2 T1 = 100
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.t2_us = 60;
    bad.tg_ns = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("depolarizing channel decay fits back to lambda") {
    const CliffordTable table = build_clifford_table();
    const double lambda = 0.995;
    RBDataset data;
    for (int n : {1, 5, 10, 20, 40, 80, 160, 320}) {
        const RBSequence seq = generate_rb_sequence(table, n, 99 + n);
        data.lengths.push_back(n);
        data.mean_fidelity.push_back(
            simulate_sequence_depolarizing(table, seq, lambda));
        data.fidelity_sd.push_back(0.0);
    }
    const RBFit fit = fit_rb_decay(data);
    CHECK(fit.p == doctest::Approx(lambda).epsilon(1e-4));
}

TEST_CASE("exact synthetic decay recovers the generator parameters") {
    RBDataset data;
    for (int n = 1; n <= 400; n += 21) {
        data.lengths.push_back(n);
        data.mean_fidelity.push_back(0.5 * std::pow(0.998, n) + 0.5);
        data.fidelity_sd.push_back(0.0);
    }
    const RBFit fit = fit_rb_decay(data);
    CHECK(fit.amplitude == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(fit.p == doctest::Approx(0.998).epsilon(1e-8));
    CHECK(fit.offset == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("RB algebra maps p to gate error and fidelity") {
    const RBFit fit = rb_metrics_from_p(0.99776);
    CHECK(fit.r_clifford == doctest::Approx(1.12e-3).epsilon(1e-3));
    CHECK(fit.r_gate == doctest::Approx(5.973e-4).epsilon(1e-3));
    CHECK(fit.f1q == doctest::Approx(0.99940).epsilon(1e-5));
    // Within the quoted (5.98 +/- 0.30) x 1e-4.
    CHECK(std::abs(fit.r_gate - 5.98e-4) < 0.30e-4);
    CHECK_THROWS_AS(rb_metrics_from_p(0.0), std::invalid_argument);
    CHECK_THROWS_AS(rb_metrics_from_p(1.5), std::invalid_argument);

    const RBFit perfect = rb_metrics_from_p(1.0);
    CHECK(perfect.r_gate == 0.0);
    CHECK(perfect.f1q == 1.0);
}

TEST_CASE("coherence limit closed form") {
    NoiseParams noise;  // 50 us, 60 us, 50 ns
    const double f = coherence_limit_fidelity(noise);
    CHECK(f == doctest::Approx(0.99956).epsilon(5e-5));

    NoiseParams instant = noise;
    instant.tg_ns = 1e-9;
    CHECK(coherence_limit_fidelity(instant) ==
          doctest::Approx(1.0).epsilon(1e-10));

    // Monotone in both coherence times.
    NoiseParams better = noise;
    better.t1_us = 80;
    CHECK(coherence_limit_fidelity(better) > f);
    better = noise;
    better.t2_us = 80;
    CHECK(coherence_limit_fidelity(better) > f);

    // T2 = 2 T1, tg << T1: F ~ 1 - tg / (3 T1).
    NoiseParams lim;
    lim.t1_us = 100;
    lim.t2_us = 200;
    lim.tg_ns = 10;
    const double tg_us = 1e-2;
    CHECK(coherence_limit_fidelity(lim) ==
          doctest::Approx(1.0 - tg_us / (3 * 100.0)).epsilon(1e-8));
}

TEST_CASE("simulated dataset is deterministic under the seed") {
    const CliffordTable table = build_clifford_table();
    NoiseParams noise;
    const std::vector<int> lengths{1, 10, 30, 60};
    const RBDataset a = run_rb_simulation(table, lengths, 5, noise, 21);
    const RBDataset b = run_rb_simulation(table, lengths, 5, noise, 21);
    CHECK(a.mean_fidelity == b.mean_fidelity);
    const RBDataset c = run_rb_simulation(table, lengths, 5, noise, 22);
    CHECK(a.mean_fidelity != c.mean_fidelity);
}

}  // TEST_SUITE
