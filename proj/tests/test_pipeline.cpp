#include <doctest.h>

#include "qloss/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

using namespace qloss;
namespace fs = std::filesystem;

namespace {

PipelineConfig loss_only_config(const fs::path& out) {
    PipelineConfig cfg;
    cfg.device_table = fs::path(QLOSS_DATA_DIR) / "devices.tsv";
    cfg.participation_table =
        fs::path(QLOSS_DATA_DIR) / "participation_reference.tsv";
    cfg.stages = {"loss"};
    cfg.out_dir = out;
    return cfg;
}

double stage_value(const RunReport& report, const std::string& stage,
                   const std::string& key) {
    for (const auto& st : report.stages) {
        if (st.stage != stage) continue;
        for (const auto& line : st.lines) {
            const auto tab = line.find('\t');
            if (line.substr(0, tab) == key) {
                return std::stod(line.substr(tab + 1));
            }
        }
    }
    throw std::runtime_error("missing " + stage + "/" + key);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("loss stage on bundled data reports the junction limit") {
    const fs::path out = "pipeline_test_out";
    const RunReport report = run_pipeline(loss_only_config(out));
    const double t1 = stage_value(report, "loss", "junction_limited_t1_us");
    CHECK(t1 > 63.0);
    CHECK(t1 < 143.0);
    const double c = stage_value(report, "loss", "intercept");
    CHECK(c > 0.2e-6);
    CHECK(c < 0.9e-6);
    CHECK(fs::exists(out / "loss_points.tsv"));
    CHECK(fs::exists(out / "loss_line.tsv"));
    CHECK(fs::exists(out / "report.txt"));
    fs::remove_all(out);
}

TEST_CASE("runs are deterministic byte for byte") {
    const fs::path out1 = "pipeline_det_1", out2 = "pipeline_det_2";
    run_pipeline(loss_only_config(out1));
    run_pipeline(loss_only_config(out2));
    CHECK(slurp(out1 / "report.txt") == slurp(out2 / "report.txt"));
    CHECK(slurp(out1 / "loss_line.tsv") == slurp(out2 / "loss_line.tsv"));
    fs::remove_all(out1);
    fs::remove_all(out2);
}

TEST_CASE("excluding devices changes the fit input count") {
    const fs::path out = "pipeline_excl_out";
    PipelineConfig cfg = loss_only_config(out);
    cfg.exclude_devices = {"A1", "B1"};
    const RunReport report = run_pipeline(cfg);
    CHECK(stage_value(report, "loss", "n_points") == 13.0);
    fs::remove_all(out);
}

TEST_CASE("missing inputs halt with the stage name and a partial report") {
    const fs::path out = "pipeline_missing_out";
    PipelineConfig cfg = loss_only_config(out);
    cfg.device_table = "no_such_table.tsv";
    CHECK_THROWS_AS(run_pipeline(cfg), StageError);
    try {
        run_pipeline(cfg);
    } catch (const StageError& e) {
        CHECK(e.stage == "loss");
        CHECK(std::string(e.what()).find("no_such_table.tsv") !=
              std::string::npos);
    }
    CHECK(fs::exists(out / "report.txt"));  // partial report was written
    fs::remove_all(out);
}

TEST_CASE("rb simulation stage produces a consistent fit") {
    const fs::path out = "pipeline_rb_out";
    PipelineConfig cfg;
    cfg.stages = {"rb"};
    cfg.out_dir = out;
    cfg.simulate_rb = true;
    cfg.rb_lengths = {1, 20, 60, 140, 300};
    cfg.rb_seeds_per_length = 12;
    cfg.seed = 5;
    const RunReport report = run_pipeline(cfg);
    const double f1q = stage_value(report, "rb", "f1q");
    const double limit = stage_value(report, "rb", "coherence_limit");
    CHECK(f1q > 0.998);
    CHECK(f1q <= 1.0);
    CHECK(limit == doctest::Approx(0.99956).epsilon(5e-5));
    CHECK(fs::exists(out / "rb_simulated.tsv"));
    fs::remove_all(out);
}

TEST_CASE("jj stage fits ingested resistance groups") {
    const fs::path out = "pipeline_jj_out";
    const fs::path data = out / "jj.tsv";
    fs::create_directories(out);
    {
        std::ofstream f(data);
        f << "area_um2\tresistance_ohm\tgroup_label\n";
        std::mt19937_64 rng(31);
        for (double area : {0.03, 0.045, 0.06, 0.08, 0.1, 0.125}) {
            const double rsd = std::sqrt(1e-3 / area);
            std::normal_distribution<double> n(8000.0, 8000.0 * rsd);
            for (int k = 0; k < 300; ++k) {
                f << area << '\t' << n(rng) << "\tg" << area << '\n';
            }
        }
    }
    PipelineConfig cfg;
    cfg.stages = {"jj"};
    cfg.out_dir = out;
    cfg.jj_data = data;
    const RunReport report = run_pipeline(cfg);
    const double gamma = stage_value(report, "jj", "gamma");
    CHECK(gamma > 0.5);
    CHECK(gamma < 3.0);
    CHECK(fs::exists(out / "jj_rsd.tsv"));
    fs::remove_all(out);
}

}  // TEST_SUITE
