#include "qloss/rb.hpp"

#include "qloss/nlls.hpp"

#include <cmath>
#include <deque>
#include <numbers>
#include <random>
#include <stdexcept>

namespace qloss {

namespace {

using cd = std::complex<double>;

// Global-phase normalization: rotate so the first nonzero entry is real
// positive, then round for use as a dedup key.
Matrix2c phase_normalize(const Matrix2c& m) {
    cd pivot = 0;
    for (int i = 0; i < 2 && pivot == cd(0); ++i) {
        for (int j = 0; j < 2; ++j) {
            if (std::abs(m(i, j)) > 1e-9) {
                pivot = m(i, j);
                break;
            }
        }
    }
    if (pivot == cd(0)) return m;
    return m * (std::conj(pivot) / std::abs(pivot));
}

bool equal_up_to_phase(const Matrix2c& a, const Matrix2c& b) {
    return (phase_normalize(a) - phase_normalize(b)).cwiseAbs().maxCoeff() <
           1e-9;
}

std::vector<PhysicalGate> make_generators() {
    const double s = 1.0 / std::numbers::sqrt2;
    const cd i(0, 1);
    std::vector<PhysicalGate> g(6);
    g[0].name = "X90";
    g[0].unitary << s, -i * s, -i * s, s;
    g[1].name = "Xm90";
    g[1].unitary << s, i * s, i * s, s;
    g[2].name = "Y90";
    g[2].unitary << s, -s, s, s;
    g[3].name = "Ym90";
    g[3].unitary << s, s, -s, s;
    g[4].name = "X180";
    g[4].unitary << 0, -i, -i, 0;
    g[5].name = "Y180";
    g[5].unitary << 0, -1, 1, 0;
    return g;
}

}  // namespace

double CliffordTable::average_generator_count() const {
    // The identity Clifford is played as a single idle of one gate period,
    // so it costs 1 even though its decomposition is empty.
    double total = 0;
    for (const auto& d : decomposition) {
        total += d.empty() ? 1.0 : static_cast<double>(d.size());
    }
    return total / static_cast<double>(elements.size());
}

int CliffordTable::find(const Matrix2c& m) const {
    for (size_t k = 0; k < elements.size(); ++k) {
        if (equal_up_to_phase(elements[k], m)) return static_cast<int>(k);
    }
    return -1;
}

int CliffordTable::identity_index() const {
    return find(Matrix2c::Identity());
}

CliffordTable build_clifford_table() {
    CliffordTable table;
    table.generators = make_generators();

    // Breadth-first closure; BFS depth equals the minimal generator count,
    // so the first decomposition found for each element is minimal.
    table.elements.push_back(Matrix2c::Identity());
    table.decomposition.push_back({});
    std::deque<size_t> queue{0};
    while (!queue.empty()) {
        const size_t idx = queue.front();
        queue.pop_front();
        const Matrix2c base = table.elements[idx];
        const std::vector<int> base_dec = table.decomposition[idx];
        for (size_t g = 0; g < table.generators.size(); ++g) {
            const Matrix2c next = table.generators[g].unitary * base;
            if (table.find(next) >= 0) continue;
            table.elements.push_back(phase_normalize(next));
            auto dec = base_dec;
            dec.push_back(static_cast<int>(g));
            table.decomposition.push_back(std::move(dec));
            queue.push_back(table.elements.size() - 1);
        }
    }
    if (table.elements.size() != 24) {
        throw std::logic_error("Clifford closure did not yield 24 elements");
    }

    table.inverse.assign(24, -1);
    for (int a = 0; a < 24; ++a) {
        table.inverse[a] = table.find(table.elements[a].adjoint());
        if (table.inverse[a] < 0) {
            throw std::logic_error("Clifford element without inverse in table");
        }
    }
    return table;
}

RBSequence generate_rb_sequence(const CliffordTable& table, int n,
                                uint64_t seed) {
    if (n < 0) throw std::invalid_argument("sequence length must be >= 0");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, 23);
    RBSequence seq;
    seq.clifford_ids.reserve(n);
    Matrix2c product = Matrix2c::Identity();
    for (int k = 0; k < n; ++k) {
        const int id = pick(rng);
        seq.clifford_ids.push_back(id);
        product = table.elements[id] * product;
    }
    seq.recovery_id = table.find(product.adjoint());
    if (seq.recovery_id < 0) {
        throw std::logic_error("recovery gate not found in Clifford table");
    }
    return seq;
}

void NoiseParams::validate() const {
    if (t1_us <= 0 || t2_us <= 0) {
        throw std::invalid_argument("T1 and T2 must be positive");
    }
    if (t2_us > 2.0 * t1_us + 1e-12) {
        throw std::invalid_argument(
            "T2 > 2 T1 implies a negative dephasing rate");
    }
    if (tg_ns <= 0) throw std::invalid_argument("gate time must be positive");
}

namespace {

void check_density(const Matrix2c& rho) {
    const double tr = rho.trace().real();
    const double det =
        (rho(0, 0) * rho(1, 1) - rho(0, 1) * rho(1, 0)).real();
    if (std::abs(tr - 1.0) > 1e-10 || rho(0, 0).real() < -1e-10 ||
        rho(1, 1).real() < -1e-10 || det < -1e-10) {
        throw std::logic_error("density matrix lost positivity/unit trace");
    }
}

// Amplitude damping (rate 1/T1) then pure dephasing (1/Tphi) over tg.
void apply_decoherence(Matrix2c& rho, const NoiseParams& noise) {
    const double tg_us = noise.tg_ns * 1e-3;
    const double gamma = 1.0 - std::exp(-tg_us / noise.t1_us);
    const double rphi = 1.0 / noise.t2_us - 0.5 / noise.t1_us;
    const double dephase = std::exp(-tg_us * std::max(0.0, rphi));

    const double sq = std::sqrt(1.0 - gamma);
    const cd r01 = rho(0, 1) * sq;
    const double r11 = rho(1, 1).real() * (1.0 - gamma);
    rho(0, 0) += rho(1, 1).real() * gamma;
    rho(1, 1) = r11;
    rho(0, 1) = r01 * dephase;
    rho(1, 0) = std::conj(rho(0, 1));
    check_density(rho);
}

void apply_clifford(Matrix2c& rho, const CliffordTable& table, int id,
                    const NoiseParams& noise) {
    const auto& decomp = table.decomposition[id];
    if (decomp.empty()) {
        // Identity Clifford: idle for one gate period.
        apply_decoherence(rho, noise);
        return;
    }
    for (int g : decomp) {
        const Matrix2c& u = table.generators[g].unitary;
        rho = u * rho * u.adjoint();
        apply_decoherence(rho, noise);
    }
}

}  // namespace

double simulate_sequence(const CliffordTable& table, const RBSequence& seq,
                         const NoiseParams& noise) {
    noise.validate();
    Matrix2c rho = Matrix2c::Zero();
    rho(0, 0) = 1;
    for (int id : seq.clifford_ids) apply_clifford(rho, table, id, noise);
    apply_clifford(rho, table, seq.recovery_id, noise);
    return rho(0, 0).real();
}

double simulate_sequence_depolarizing(const CliffordTable& table,
                                      const RBSequence& seq, double lambda) {
    if (lambda < 0 || lambda > 1) {
        throw std::invalid_argument("depolarizing strength must be in [0, 1]");
    }
    Matrix2c rho = Matrix2c::Zero();
    rho(0, 0) = 1;
    auto step = [&](int id) {
        const Matrix2c& u = table.elements[id];
        rho = u * rho * u.adjoint();
        rho = lambda * rho +
              (1.0 - lambda) * 0.5 * Matrix2c::Identity() * rho.trace();
        check_density(rho);
    };
    for (int id : seq.clifford_ids) step(id);
    // The recovery gate is excluded from the depolarizing count so the
    // fitted decay equals lambda exactly.
    const Matrix2c& u = table.elements[seq.recovery_id];
    rho = u * rho * u.adjoint();
    return rho(0, 0).real();
}

void RBDataset::validate() const {
    if (lengths.size() != mean_fidelity.size() ||
        lengths.size() != fidelity_sd.size()) {
        throw std::invalid_argument("RB dataset columns differ in length");
    }
    for (size_t k = 0; k + 1 < lengths.size(); ++k) {
        if (lengths[k + 1] <= lengths[k]) {
            throw std::invalid_argument("RB lengths must be strictly increasing");
        }
    }
    for (double f : mean_fidelity) {
        if (f < 0 || f > 1) {
            throw std::invalid_argument("sequence fidelity outside [0, 1]");
        }
    }
}

RBDataset run_rb_simulation(const CliffordTable& table,
                            const std::vector<int>& lengths,
                            int seeds_per_length, const NoiseParams& noise,
                            uint64_t base_seed) {
    noise.validate();
    if (seeds_per_length < 2) {
        throw std::invalid_argument("need >= 2 repetitions per length");
    }
    RBDataset data;
    data.repetitions = seeds_per_length;
    for (size_t li = 0; li < lengths.size(); ++li) {
        double sum = 0, sumsq = 0;
        for (int rep = 0; rep < seeds_per_length; ++rep) {
            // Seed partitioned per (length, repetition) so scheduling order
            // cannot change results.
            const uint64_t seed =
                base_seed ^ (static_cast<uint64_t>(li) * 0x9e3779b97f4a7c15ULL +
                             static_cast<uint64_t>(rep) * 0xbf58476d1ce4e5b9ULL +
                             0x94d049bb133111ebULL);
            const RBSequence seq =
                generate_rb_sequence(table, lengths[li], seed);
            const double f = simulate_sequence(table, seq, noise);
            sum += f;
            sumsq += f * f;
        }
        const double n = seeds_per_length;
        const double mean = sum / n;
        const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1));
        data.lengths.push_back(lengths[li]);
        data.mean_fidelity.push_back(mean);
        data.fidelity_sd.push_back(std::sqrt(var));
    }
    return data;
}

RBFit rb_metrics_from_p(double p) {
    if (p <= 0 || p > 1) {
        throw std::invalid_argument("RB decay parameter must lie in (0, 1]");
    }
    RBFit fit;
    fit.p = p;
    fit.r_clifford = (1.0 - p) * (kHilbertDim - 1) / kHilbertDim;
    fit.r_gate = fit.r_clifford / kAvgGeneratorCount;
    fit.f1q = 1.0 - fit.r_gate;
    return fit;
}

RBFit fit_rb_decay(const RBDataset& data) {
    data.validate();
    const int n = static_cast<int>(data.lengths.size());
    if (n < 4) throw std::invalid_argument("RB fit needs >= 4 lengths");

    const double f_first = data.mean_fidelity.front();
    const double f_last = data.mean_fidelity.back();
    double a0 = f_first - f_last;
    if (a0 <= 0) a0 = 0.5;
    const double b0 = f_last;
    // Two-point log estimate of p from the first and middle lengths.
    double p0 = 0.999;
    {
        const int mid = n / 2;
        const double y0 = data.mean_fidelity[0] - b0;
        const double ym = data.mean_fidelity[mid] - b0;
        if (y0 > 0 && ym > 0 && data.lengths[mid] > data.lengths[0]) {
            p0 = std::exp(std::log(ym / y0) /
                          (data.lengths[mid] - data.lengths[0]));
        }
    }
    if (!(p0 > 0 && p0 <= 1)) {
        throw std::invalid_argument("initial decay estimate outside (0, 1]");
    }

    auto fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r,
                  Eigen::MatrixXd* jac) {
        const double a = x[0], p = x[1], b = x[2];
        for (int k = 0; k < n; ++k) {
            const double m = data.lengths[k];
            const double pn = std::pow(p, m);
            r[k] = data.mean_fidelity[k] - (a * pn + b);
            if (jac) {
                (*jac)(k, 0) = -pn;
                (*jac)(k, 1) = p > 0 ? -a * m * std::pow(p, m - 1) : 0.0;
                (*jac)(k, 2) = -1.0;
            }
        }
    };
    Eigen::VectorXd x0(3);
    x0 << a0, p0, b0;
    const NllsResult res = levenberg_marquardt(fn, n, x0);
    if (!(res.params[1] > 0 && res.params[1] <= 1 + 1e-12)) {
        throw std::runtime_error("fitted RB decay parameter outside (0, 1]");
    }

    RBFit fit = rb_metrics_from_p(std::min(res.params[1], 1.0));
    fit.amplitude = res.params[0];
    fit.offset = res.params[2];
    fit.amplitude_sd = res.param_sd[0];
    fit.p_sd = res.param_sd[1];
    fit.offset_sd = res.param_sd[2];
    fit.r_gate_sd = fit.p_sd * (kHilbertDim - 1) / kHilbertDim /
                    kAvgGeneratorCount;
    fit.residual_norm = res.residual_norm;
    return fit;
}

double coherence_limit_fidelity(const NoiseParams& noise) {
    noise.validate();
    const double tg_us = noise.tg_ns * 1e-3;
    return 0.5 + std::exp(-tg_us / noise.t2_us) / 3.0 +
           std::exp(-tg_us / noise.t1_us) / 6.0;
}

}  // namespace qloss
