#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

// Randomized benchmarking: the 24-element single-qubit Clifford group with
// minimal generator decompositions, a 2x2 density-matrix noise simulator
// used as the fitting oracle, the F = A p^n + B decay fit and the
// per-gate coherence-limit fidelity.

namespace qloss {

using Matrix2c = Eigen::Matrix2cd;

inline constexpr int kHilbertDim = 2;
inline constexpr double kAvgGeneratorCount = 1.875;

struct PhysicalGate {
    std::string name;  // X90, Xm90, Y90, Ym90, X180, Y180
    Matrix2c unitary;
};

struct CliffordTable {
    std::vector<Matrix2c> elements;             // 24, distinct up to phase
    std::vector<std::vector<int>> decomposition;  // generator ids, in time order
    std::vector<int> inverse;                   // index of the group inverse
    std::vector<PhysicalGate> generators;

    double average_generator_count() const;
    // Index of the element equal to m up to global phase; -1 if absent.
    int find(const Matrix2c& m) const;
    int identity_index() const;
};

CliffordTable build_clifford_table();

struct RBSequence {
    std::vector<int> clifford_ids;  // n random elements, time order
    int recovery_id = 0;            // unique inverting element
};

RBSequence generate_rb_sequence(const CliffordTable& table, int n,
                                uint64_t seed);

struct NoiseParams {
    double t1_us = 50;
    double t2_us = 60;
    double tg_ns = 50;

    void validate() const;  // rejects T2 > 2 T1 and non-positive tg
};

// Ground-state return probability after the sequence plus recovery. Each
// physical generator is the ideal unitary followed by amplitude damping
// and pure dephasing over tg; the identity costs no time.
double simulate_sequence(const CliffordTable& table, const RBSequence& seq,
                         const NoiseParams& noise);

// Idealized variant: depolarizing channel of strength lambda applied once
// per Clifford, no other noise. Fitted decay must recover p = lambda.
double simulate_sequence_depolarizing(const CliffordTable& table,
                                      const RBSequence& seq, double lambda);

struct RBDataset {
    std::vector<int> lengths;            // strictly increasing
    std::vector<double> mean_fidelity;   // in [0, 1]
    std::vector<double> fidelity_sd;
    int repetitions = 80;

    void validate() const;
};

RBDataset run_rb_simulation(const CliffordTable& table,
                            const std::vector<int>& lengths,
                            int seeds_per_length, const NoiseParams& noise,
                            uint64_t base_seed);

struct RBFit {
    double amplitude = 0;  // A
    double p = 0;
    double offset = 0;     // B
    double amplitude_sd = 0;
    double p_sd = 0;
    double offset_sd = 0;
    double r_clifford = 0;
    double r_gate = 0;
    double f1q = 0;
    double r_gate_sd = 0;
    double residual_norm = 0;
};

RBFit fit_rb_decay(const RBDataset& data);

// Eqs. 2-3 applied to an already-known decay parameter p.
RBFit rb_metrics_from_p(double p);

// Per-gate average fidelity of the combined damping + dephasing channel:
// 1/2 + (1/3) exp(-tg/T2) + (1/6) exp(-tg/T1).
double coherence_limit_fidelity(const NoiseParams& noise);

}  // namespace qloss
