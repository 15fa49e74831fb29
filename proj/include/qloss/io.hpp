#pragma once

#include "qloss/coherence.hpp"
#include "qloss/jjstats.hpp"
#include "qloss/lossbudget.hpp"
#include "qloss/rb.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

// Tabular ingest/emit. All files are tab-separated with a header row;
// '#' lines are comments. Errors carry the file, row and column.

namespace qloss {

// FNV-1a over the raw bytes; used to stamp reports with an input digest.
uint64_t fnv1a_digest(const std::filesystem::path& file);
uint64_t fnv1a_combine(uint64_t a, uint64_t b);

std::vector<QubitDevice> ingest_devices(const std::filesystem::path& file);
void write_device_table(const std::filesystem::path& file,
                        const std::vector<QubitDevice>& devices);

// Reference participation ratios keyed by design tag then region name.
std::map<std::string, std::map<std::string, double>> ingest_participation_table(
    const std::filesystem::path& file);

struct LabelledSeries {
    std::string label;
    DecayModel kind = DecayModel::T1;
    DecaySeries series;
};

// Manifest rows: label <tab> kind (t1|ramsey|echo) <tab> relative path.
std::vector<LabelledSeries> ingest_traces(
    const std::filesystem::path& manifest);

DecaySeries read_decay_series(const std::filesystem::path& file);
void write_decay_series(const std::filesystem::path& file,
                        const DecaySeries& series);

RBDataset read_rb_dataset(const std::filesystem::path& file);
void write_rb_dataset(const std::filesystem::path& file, const RBDataset& data);

std::vector<JJArray> ingest_jj_arrays(const std::filesystem::path& file);

// Plot-ready columnar emitters.
void write_kde_curve(const std::filesystem::path& file, const KdeCurve& curve);
void write_loss_plot_data(const std::filesystem::path& dir,
                          const LossFit& fit);

// Helpers shared by the ingest routines.
std::vector<std::string> split_fields(const std::string& line, char delim);
double parse_number(const std::string& token, const std::string& context);

}  // namespace qloss
