#include "qloss/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qloss {

namespace fs = std::filesystem;

uint64_t fnv1a_digest(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    uint64_t h = 0xcbf29ce484222325ULL;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

uint64_t fnv1a_combine(uint64_t a, uint64_t b) {
    uint64_t h = a;
    for (int k = 0; k < 8; ++k) {
        h ^= (b >> (8 * k)) & 0xff;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& token, const std::string& context) {
    try {
        size_t pos = 0;
        const double v = std::stod(token, &pos);
        if (pos != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(context + ": not a number: '" + token + "'");
    }
}

namespace {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> line_numbers;
    fs::path file;

    int column(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw std::runtime_error(file.string() + ": missing column '" +
                                     name + "'");
        }
        return static_cast<int>(it - header.begin());
    }
};

Table read_table(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    Table t;
    t.file = file;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line, '\t');
        if (t.header.empty()) {
            t.header = std::move(fields);
            continue;
        }
        if (fields.size() != t.header.size()) {
            throw std::runtime_error(file.string() + ":" +
                                     std::to_string(lineno) + ": expected " +
                                     std::to_string(t.header.size()) +
                                     " fields, got " +
                                     std::to_string(fields.size()));
        }
        t.rows.push_back(std::move(fields));
        t.line_numbers.push_back(lineno);
    }
    if (t.header.empty()) {
        throw std::runtime_error(file.string() + ": no header row");
    }
    return t;
}

std::string row_context(const Table& t, size_t r, const std::string& col) {
    return t.file.string() + ":" + std::to_string(t.line_numbers[r]) +
           " column '" + col + "'";
}

}  // namespace

std::vector<QubitDevice> ingest_devices(const fs::path& file) {
    const Table t = read_table(file);
    const int c_name = t.column("name");
    const int c_geom = t.column("geometry");
    const int c_etch = t.column("etch");
    const int c_res = t.column("resistivity");
    const int c_t1 = t.column("t1_mean_us");
    const int c_sd = t.column("t1_sd_us");
    const int c_f = t.column("freq_ghz");
    const int c_area = t.column("junction_area_um2");
    const int c_count = t.column("count");

    std::vector<QubitDevice> out;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        QubitDevice d;
        d.name = row[c_name];
        for (const auto& prev : out) {
            if (prev.name == d.name) {
                throw std::runtime_error(row_context(t, r, "name") +
                                         ": duplicate device '" + d.name + "'");
            }
        }
        try {
            d.design = design_from_string(row[c_geom]);
        } catch (const std::exception& e) {
            throw std::runtime_error(row_context(t, r, "geometry") + ": " +
                                     e.what());
        }
        d.etch = row[c_etch];
        d.resistivity = row[c_res];
        d.t1_mean_us = parse_number(row[c_t1], row_context(t, r, "t1_mean_us"));
        d.t1_sd_us = parse_number(row[c_sd], row_context(t, r, "t1_sd_us"));
        d.frequency_ghz = parse_number(row[c_f], row_context(t, r, "freq_ghz"));
        if (!row[c_area].empty() && row[c_area] != "-") {
            d.junction_area_um2 =
                parse_number(row[c_area], row_context(t, r, "junction_area_um2"));
        }
        d.measurement_count = static_cast<int>(
            parse_number(row[c_count], row_context(t, r, "count")));
        try {
            d.validate();
        } catch (const std::exception& e) {
            throw std::runtime_error(t.file.string() + ":" +
                                     std::to_string(t.line_numbers[r]) + ": " +
                                     e.what());
        }
        out.push_back(std::move(d));
    }
    return out;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

void write_device_table(const fs::path& file,
                        const std::vector<QubitDevice>& devices) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "name\tgeometry\tetch\tresistivity\tt1_mean_us\tt1_sd_us\t"
           "freq_ghz\tjunction_area_um2\tcount\n";
    for (const auto& d : devices) {
        out << d.name << '\t' << to_string(d.design) << '\t' << d.etch << '\t'
            << d.resistivity << '\t' << fmt(d.t1_mean_us) << '\t'
            << fmt(d.t1_sd_us) << '\t' << fmt(d.frequency_ghz) << '\t'
            << (d.junction_area_um2 ? fmt(*d.junction_area_um2)
                                    : std::string("-"))
            << '\t' << d.measurement_count << '\n';
    }
}

std::map<std::string, std::map<std::string, double>> ingest_participation_table(
    const fs::path& file) {
    const Table t = read_table(file);
    const int c_design = t.column("design");
    const int c_region = t.column("region");
    const int c_p = t.column("participation");
    std::map<std::string, std::map<std::string, double>> out;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        out[row[c_design]][row[c_region]] =
            parse_number(row[c_p], row_context(t, r, "participation"));
    }
    return out;
}

DecaySeries read_decay_series(const fs::path& file) {
    const Table t = read_table(file);
    const int c_t = t.column("time_us");
    const int c_p = t.column("population");
    DecaySeries s;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        s.times_us.push_back(
            parse_number(t.rows[r][c_t], row_context(t, r, "time_us")));
        s.populations.push_back(
            parse_number(t.rows[r][c_p], row_context(t, r, "population")));
    }
    try {
        s.validate();
    } catch (const std::exception& e) {
        throw std::runtime_error(file.string() + ": " + e.what());
    }
    return s;
}

void write_decay_series(const fs::path& file, const DecaySeries& series) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "time_us\tpopulation\n";
    for (size_t k = 0; k < series.size(); ++k) {
        out << fmt(series.times_us[k]) << '\t' << fmt(series.populations[k])
            << '\n';
    }
}

std::vector<LabelledSeries> ingest_traces(const fs::path& manifest) {
    const Table t = read_table(manifest);
    const int c_label = t.column("label");
    const int c_kind = t.column("kind");
    const int c_file = t.column("file");
    const fs::path base = manifest.parent_path();
    std::vector<LabelledSeries> out;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        LabelledSeries ls;
        ls.label = t.rows[r][c_label];
        const std::string& kind = t.rows[r][c_kind];
        if (kind == "t1") {
            ls.kind = DecayModel::T1;
        } else if (kind == "ramsey") {
            ls.kind = DecayModel::Ramsey;
        } else if (kind == "echo") {
            ls.kind = DecayModel::Echo;
        } else {
            throw std::runtime_error(row_context(t, r, "kind") +
                                     ": unknown trace kind '" + kind + "'");
        }
        ls.series = read_decay_series(base / t.rows[r][c_file]);
        out.push_back(std::move(ls));
    }
    return out;
}

RBDataset read_rb_dataset(const fs::path& file) {
    const Table t = read_table(file);
    const int c_n = t.column("length");
    const int c_f = t.column("mean_fidelity");
    const int c_sd = t.column("sd");
    RBDataset data;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        data.lengths.push_back(static_cast<int>(
            parse_number(t.rows[r][c_n], row_context(t, r, "length"))));
        data.mean_fidelity.push_back(
            parse_number(t.rows[r][c_f], row_context(t, r, "mean_fidelity")));
        data.fidelity_sd.push_back(
            parse_number(t.rows[r][c_sd], row_context(t, r, "sd")));
    }
    try {
        data.validate();
    } catch (const std::exception& e) {
        throw std::runtime_error(file.string() + ": " + e.what());
    }
    return data;
}

void write_rb_dataset(const fs::path& file, const RBDataset& data) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "length\tmean_fidelity\tsd\n";
    for (size_t k = 0; k < data.lengths.size(); ++k) {
        out << data.lengths[k] << '\t' << fmt(data.mean_fidelity[k]) << '\t'
            << fmt(data.fidelity_sd[k]) << '\n';
    }
}

std::vector<JJArray> ingest_jj_arrays(const fs::path& file) {
    const Table t = read_table(file);
    const int c_area = t.column("area_um2");
    const int c_r = t.column("resistance_ohm");
    const int c_g = t.column("group_label");
    std::vector<JJArray> out;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        const std::string& label = t.rows[r][c_g];
        const double area =
            parse_number(t.rows[r][c_area], row_context(t, r, "area_um2"));
        const double res = parse_number(t.rows[r][c_r],
                                        row_context(t, r, "resistance_ohm"));
        auto it = std::find_if(out.begin(), out.end(), [&](const JJArray& a) {
            return a.label == label;
        });
        if (it == out.end()) {
            out.push_back({area, {}, label});
            it = out.end() - 1;
        } else if (std::abs(it->area_um2 - area) > 1e-12 * area) {
            throw std::runtime_error(row_context(t, r, "area_um2") +
                                     ": area differs within group '" + label +
                                     "'");
        }
        it->resistances_ohm.push_back(res);
    }
    for (const auto& a : out) a.validate();
    return out;
}

void write_kde_curve(const fs::path& file, const KdeCurve& curve) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "# bandwidth_us\t" << fmt(curve.bandwidth) << '\n';
    out << "t1_us\tdensity\n";
    for (size_t k = 0; k < curve.x.size(); ++k) {
        out << fmt(curve.x[k]) << '\t' << fmt(curve.density[k]) << '\n';
    }
}

void write_loss_plot_data(const fs::path& dir, const LossFit& fit) {
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "loss_points.tsv");
        out << "label\tp_ma\tinverse_q\tresidual\n";
        for (size_t k = 0; k < fit.points.size(); ++k) {
            const auto& pt = fit.points[k];
            out << pt.label << '\t' << fmt(pt.p_ma) << '\t'
                << fmt(pt.inverse_q) << '\t' << fmt(fit.residuals[k]) << '\n';
        }
    }
    {
        double pmax = 0;
        for (const auto& pt : fit.points) pmax = std::max(pmax, pt.p_ma);
        std::ofstream out(dir / "loss_line.tsv");
        out << "p_ma\tfit\tlower95\tupper95\n";
        const int n = 101;
        for (int k = 0; k < n; ++k) {
            const double p = 1.1 * pmax * k / (n - 1);
            const double y = fit.value(p);
            const double h = fit.band_half_width(p);
            out << fmt(p) << '\t' << fmt(y) << '\t' << fmt(y - h) << '\t'
                << fmt(y + h) << '\n';
        }
    }
}

}  // namespace qloss
