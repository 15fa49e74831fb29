#include "qloss/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qloss {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string kv(const std::string& key, const std::string& value) {
    return key + '\t' + value;
}

std::string kv(const std::string& key, double value) {
    return kv(key, fmt(value));
}

}  // namespace

std::string RunReport::to_text() const {
    std::ostringstream os;
    os << "qloss run report\n";
    os << "inputs_digest\t" << std::hex << inputs_digest << std::dec << '\n';
    os << "seed\t" << seed << '\n';
    for (const auto& st : stages) {
        os << "\n[stage " << st.stage << "]\n";
        for (const auto& line : st.lines) os << line << '\n';
    }
    if (!warnings.empty()) {
        os << "\n[warnings]\n";
        for (const auto& w : warnings) os << w << '\n';
    }
    return os.str();
}

ParticipationPair run_participation(const GeometryConfig& cfg,
                                    double min_cell_nm, double grading) {
    ParticipationPair pair;
    {
        const CrossSection cs = build_from_config(cfg, true);
        const Mesh mesh = generate_mesh(cs, min_cell_nm, grading);
        const FieldSolution sol = solve_potential(mesh);
        pair.direct = participation_ratios(sol, cfg.name);
        pair.direct.method = "direct";
    }
    {
        const CrossSection bare = build_from_config(cfg, false);
        const Mesh mesh = generate_mesh(bare, min_cell_nm, grading);
        const FieldSolution sol = solve_potential(mesh);
        ParticipationReport rep = participation_ratios(sol, cfg.name);
        const double total = sol.total_energy();
        const ThinLayerSpec ma{SurfaceKind::MetalAir,
                               bare.oxide_thickness_ma_nm,
                               cfg.params.eps_ma};
        const ThinLayerSpec sa{SurfaceKind::SubstrateAir,
                               bare.oxide_thickness_sa_nm,
                               cfg.params.eps_sa};
        // thin_layer_participation reports u_layer / total_bare.
        const double u_ma = thin_layer_participation(sol, ma) * total;
        const double u_sa = thin_layer_participation(sol, sa) * total;
        // First-order: layer energies are added on top of the bare total.
        const double denom = total + u_ma + u_sa;
        ParticipationReport out;
        out.geometry_id = cfg.name;
        out.method = "surface-approximation";
        for (const auto& [region, p] : rep.ratios) {
            out.ratios.emplace_back(region, p * total / denom);
        }
        out.ratios.emplace_back(kMetalAir, u_ma / denom);
        out.ratios.emplace_back(kSubstrateAir, u_sa / denom);
        pair.surface = std::move(out);
    }
    return pair;
}

namespace {

void write_participation_file(const fs::path& file,
                              const ParticipationPair& pair) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "region\tp_direct\tp_surface\n";
    std::vector<std::string> regions;
    for (const auto& [r, p] : pair.direct.ratios) regions.push_back(r);
    for (const auto& [r, p] : pair.surface.ratios) {
        if (std::find(regions.begin(), regions.end(), r) == regions.end()) {
            regions.push_back(r);
        }
    }
    std::sort(regions.begin(), regions.end());
    for (const auto& r : regions) {
        out << r << '\t' << fmt(pair.direct.get(r)) << '\t'
            << fmt(pair.surface.get(r)) << '\n';
    }
}

struct StageRunner {
    const PipelineConfig& cfg;
    RunReport& report;

    bool wanted(const std::string& stage, bool has_input) const {
        if (!cfg.stages.empty()) {
            return std::find(cfg.stages.begin(), cfg.stages.end(), stage) !=
                   cfg.stages.end();
        }
        return has_input;
    }

    template <typename Fn>
    void run(const std::string& stage, Fn&& fn) {
        StageResult result;
        result.stage = stage;
        try {
            fn(result);
        } catch (const std::exception& e) {
            // Keep what we have so the partial report reaches disk.
            report.stages.push_back(std::move(result));
            std::ofstream out(cfg.out_dir / "report.txt");
            out << report.to_text();
            throw StageError(stage, e.what());
        }
        report.stages.push_back(std::move(result));
    }
};

}  // namespace

RunReport run_pipeline(const PipelineConfig& config) {
    fs::create_directories(config.out_dir);
    RunReport report;
    report.seed = config.seed;
    for (const auto& p : {config.device_table, config.participation_table,
                          config.trace_manifest, config.rb_data,
                          config.jj_data}) {
        if (!p.empty() && fs::exists(p)) {
            report.inputs_digest =
                fnv1a_combine(report.inputs_digest, fnv1a_digest(p));
        }
    }
    for (const auto& p : config.geometry_configs) {
        if (fs::exists(p)) {
            report.inputs_digest =
                fnv1a_combine(report.inputs_digest, fnv1a_digest(p));
        }
    }

    StageRunner runner{config, report};
    std::map<std::string, double> computed_pma;

    if (runner.wanted("participation", !config.geometry_configs.empty())) {
        runner.run("participation", [&](StageResult& st) {
            for (const auto& path : config.geometry_configs) {
                if (!fs::exists(path)) {
                    throw std::runtime_error("missing geometry config " +
                                             path.string());
                }
                const GeometryConfig gc = load_geometry_config(path.string());
                const ParticipationPair pair = run_participation(
                    gc, config.mesh_min_cell_nm, config.mesh_grading);
                write_participation_file(
                    config.out_dir / ("participation_" + gc.name + ".tsv"),
                    pair);
                computed_pma[gc.name] = pair.direct.get(kMetalAir);
                st.lines.push_back(
                    kv(gc.name + ".p_ma_direct", pair.direct.get(kMetalAir)));
                st.lines.push_back(kv(gc.name + ".p_ma_surface",
                                      pair.surface.get(kMetalAir)));
                st.lines.push_back(
                    kv(gc.name + ".p_sa_direct", pair.direct.get(kSubstrateAir)));
                st.lines.push_back(
                    kv(gc.name + ".p_substrate", pair.direct.get(kSubstrate)));
                st.lines.push_back(kv(gc.name + ".sum", pair.direct.sum()));
            }
        });
    }

    if (runner.wanted("loss", !config.device_table.empty())) {
        runner.run("loss", [&](StageResult& st) {
            if (!fs::exists(config.device_table)) {
                throw std::runtime_error("missing device table " +
                                         config.device_table.string());
            }
            const auto devices = ingest_devices(config.device_table);
            std::map<std::string, double> pma;
            if (config.pma_source == "computed") {
                pma = computed_pma;
                if (pma.empty()) {
                    throw std::runtime_error(
                        "pma_source=computed needs the participation stage");
                }
            } else {
                const auto table =
                    ingest_participation_table(config.participation_table);
                for (const auto& [design, regions] : table) {
                    const auto it = regions.find(kMetalAir);
                    if (it != regions.end()) pma[design] = it->second;
                }
            }

            std::vector<LossPoint> points;
            std::vector<const QubitDevice*> resonators;
            for (const auto& d : devices) {
                if (std::find(config.exclude_devices.begin(),
                              config.exclude_devices.end(),
                              d.name) != config.exclude_devices.end()) {
                    continue;
                }
                if (d.is_resonator()) {
                    resonators.push_back(&d);
                    continue;
                }
                const auto it = pma.find(to_string(d.design));
                if (it == pma.end()) {
                    report.warnings.push_back("loss\t" + d.name +
                                              "\tno p_MA for design " +
                                              to_string(d.design));
                    continue;
                }
                LossPoint pt;
                pt.label = d.name;
                pt.p_ma = it->second;
                pt.inverse_q = 1.0 / q_factor(d.t1_mean_us, d.frequency_ghz);
                const double n =
                    std::max(1, d.measurement_count);
                pt.weight = pt.inverse_q * d.t1_sd_us /
                            (d.t1_mean_us * std::sqrt(n));
                points.push_back(std::move(pt));
            }

            LossFitOptions opts;
            opts.weighted = config.weighted;
            const LossFit fit = fit_loss_line(points, opts);
            write_loss_plot_data(config.out_dir, fit);
            st.lines.push_back(kv("n_points", static_cast<double>(fit.n)));
            st.lines.push_back(kv("slope", fit.slope));
            st.lines.push_back(kv("slope_ci95", fit.slope_ci95));
            st.lines.push_back(kv("intercept", fit.intercept));
            st.lines.push_back(kv("intercept_ci95", fit.intercept_ci95));
            const JunctionLimit jl = junction_limited_t1(fit, config.f_ref_ghz);
            st.lines.push_back(kv("f_ref_ghz", jl.f_ref_ghz));
            st.lines.push_back(
                kv("junction_limited_t1_us", jl.resolved ? jl.t1_us : 0.0));
            st.lines.push_back(kv("junction_limited_t1_ci_low_us",
                                  jl.resolved ? jl.ci_low_us : 0.0));
            st.lines.push_back(kv("junction_limited_t1_ci_high_us",
                                  jl.resolved ? jl.ci_high_us : 0.0));

            if (!resonators.empty()) {
                double mean_iq = 0;
                double mean_p = 0;
                for (const auto* r : resonators) {
                    mean_iq += 1.0 / q_factor(r->t1_mean_us, r->frequency_ghz);
                    mean_p += pma.count("RES") ? pma.at("RES") : 0.0;
                }
                mean_iq /= static_cast<double>(resonators.size());
                mean_p /= static_cast<double>(resonators.size());
                st.lines.push_back(kv("resonator_mean_inverse_q", mean_iq));
                st.lines.push_back(kv("resonator_band_center",
                                      fit.value(mean_p)));
                st.lines.push_back(kv("resonator_band_half_width",
                                      fit.band_half_width(mean_p)));
            }
        });
    }

    if (runner.wanted("coherence", !config.trace_manifest.empty())) {
        runner.run("coherence", [&](StageResult& st) {
            if (!fs::exists(config.trace_manifest)) {
                throw std::runtime_error("missing trace manifest " +
                                         config.trace_manifest.string());
            }
            const auto traces = ingest_traces(config.trace_manifest);
            std::ofstream fits(config.out_dir / "coherence_fits.tsv");
            fits << "label\tkind\tt_us\tt_sd_us\tdetuning_mhz\tfallback\n";
            std::vector<double> t1_values;
            for (const auto& tr : traces) {
                try {
                    DecayFit fit;
                    std::string kind;
                    if (tr.kind == DecayModel::Ramsey) {
                        fit = fit_ramsey(tr.series);
                        kind = "ramsey";
                    } else {
                        fit = fit_exponential_decay(tr.series, tr.kind);
                        kind = tr.kind == DecayModel::T1 ? "t1" : "echo";
                    }
                    fits << tr.label << '\t' << kind << '\t' << fmt(fit.t_us)
                         << '\t' << fmt(fit.t_sd) << '\t'
                         << fmt(fit.detuning_mhz) << '\t'
                         << (fit.fell_back_to_exponential ? 1 : 0) << '\n';
                    if (tr.kind == DecayModel::T1) t1_values.push_back(fit.t_us);
                } catch (const NoDecayResolvable& e) {
                    report.warnings.push_back("coherence\t" + tr.label + '\t' +
                                              e.what());
                }
            }
            st.lines.push_back(
                kv("n_traces", static_cast<double>(traces.size())));
            st.lines.push_back(
                kv("n_t1_fits", static_cast<double>(t1_values.size())));
            if (t1_values.size() >= 2) {
                const SampleStats ss = sample_stats(t1_values);
                st.lines.push_back(kv("t1_mean_us", ss.mean));
                st.lines.push_back(kv("t1_sd_us", ss.sd));
                st.lines.push_back(kv("t1_q1_us", ss.q1));
                st.lines.push_back(kv("t1_q3_us", ss.q3));
                const KdeCurve curve = kde(t1_values);
                write_kde_curve(config.out_dir / "t1_kde.tsv", curve);
                st.lines.push_back(kv("kde_bandwidth_us", curve.bandwidth));
            }
        });
    }

    if (runner.wanted("rb", config.simulate_rb || !config.rb_data.empty())) {
        runner.run("rb", [&](StageResult& st) {
            const CliffordTable table = build_clifford_table();
            RBDataset data;
            if (config.simulate_rb) {
                data = run_rb_simulation(table, config.rb_lengths,
                                         config.rb_seeds_per_length,
                                         config.rb_noise, config.seed);
                write_rb_dataset(config.out_dir / "rb_simulated.tsv", data);
            } else {
                if (!fs::exists(config.rb_data)) {
                    throw std::runtime_error("missing RB data " +
                                             config.rb_data.string());
                }
                data = read_rb_dataset(config.rb_data);
            }
            const RBFit fit = fit_rb_decay(data);
            st.lines.push_back(kv("amplitude", fit.amplitude));
            st.lines.push_back(kv("p", fit.p));
            st.lines.push_back(kv("p_sd", fit.p_sd));
            st.lines.push_back(kv("offset", fit.offset));
            st.lines.push_back(kv("r_clifford", fit.r_clifford));
            st.lines.push_back(kv("r_gate", fit.r_gate));
            st.lines.push_back(kv("r_gate_sd", fit.r_gate_sd));
            st.lines.push_back(kv("f1q", fit.f1q));
            st.lines.push_back(
                kv("coherence_limit", coherence_limit_fidelity(config.rb_noise)));
        });
    }

    if (runner.wanted("jj", !config.jj_data.empty())) {
        runner.run("jj", [&](StageResult& st) {
            if (!fs::exists(config.jj_data)) {
                throw std::runtime_error("missing junction data " +
                                         config.jj_data.string());
            }
            const auto arrays = ingest_jj_arrays(config.jj_data);
            const auto points = rsd_points(arrays);
            const RSDFit fit = fit_rsd_model(points);
            {
                std::ofstream out(config.out_dir / "jj_rsd.tsv");
                out << "area_um2\trsd\tmodel\n";
                for (const auto& p : points) {
                    out << fmt(p.area_um2) << '\t' << fmt(p.rsd) << '\t'
                        << fmt(fit.value(p.area_um2)) << '\n';
                }
            }
            st.lines.push_back(kv("n_arrays", static_cast<double>(points.size())));
            st.lines.push_back(kv("a", fit.a));
            st.lines.push_back(kv("a_sd", fit.a_sd));
            st.lines.push_back(kv("gamma", fit.gamma));
            st.lines.push_back(kv("gamma_sd", fit.gamma_sd));
            st.lines.push_back(kv("b", fit.b));
            st.lines.push_back(kv("b_sd", fit.b_sd));
            st.lines.push_back(kv("gamma_determined",
                                  fit.gamma_determined ? 1.0 : 0.0));
        });
    }

    std::ofstream out(config.out_dir / "report.txt");
    out << report.to_text();
    return report;
}

}  // namespace qloss
