#pragma once

#include "qloss/io.hpp"
#include "qloss/participation.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

// End-to-end orchestration: ingest, run the selected analysis stages in a
// fixed order, emit plot-ready data files and a deterministic text report.

namespace qloss {

struct PipelineConfig {
    std::vector<std::filesystem::path> geometry_configs;
    std::filesystem::path device_table;
    std::filesystem::path participation_table;  // reference p values
    std::filesystem::path trace_manifest;       // optional
    std::filesystem::path rb_data;              // optional, pre-measured
    std::filesystem::path jj_data;              // optional
    std::vector<std::string> stages;  // subset of {participation, loss,
                                      // coherence, rb, jj}; empty = all
                                      // stages whose inputs are configured
    std::filesystem::path out_dir = "out";
    uint64_t seed = 1;
    bool weighted = false;
    std::string pma_source = "reference";  // or "computed"
    std::vector<std::string> exclude_devices;
    double f_ref_ghz = 3.0;
    double mesh_min_cell_nm = 2.0;
    double mesh_grading = 1.4;
    bool simulate_rb = false;  // run the density-matrix oracle instead of
                               // reading rb_data
    NoiseParams rb_noise;
    std::vector<int> rb_lengths = {1, 25, 50, 100, 200, 400, 700, 1000,
                                   1500, 2000};
    int rb_seeds_per_length = 80;
};

struct StageResult {
    std::string stage;
    std::vector<std::string> lines;  // key<tab>value pairs, report order
};

struct RunReport {
    uint64_t inputs_digest = 0;
    uint64_t seed = 0;
    std::vector<StageResult> stages;
    std::vector<std::string> warnings;  // "stage<tab>record<tab>message"

    std::string to_text() const;
};

// Raised when a stage fails; the partial report written so far is kept on
// disk next to the outputs.
struct StageError : std::runtime_error {
    std::string stage;
    StageError(std::string st, const std::string& msg)
        : std::runtime_error(st + ": " + msg), stage(std::move(st)) {}
};

RunReport run_pipeline(const PipelineConfig& config);

// Participation runs for one geometry config: direct (thin layers meshed)
// and the bare-solution surface approximation.
struct ParticipationPair {
    ParticipationReport direct;
    ParticipationReport surface;
};

ParticipationPair run_participation(const GeometryConfig& cfg,
                                    double min_cell_nm, double grading);

}  // namespace qloss
