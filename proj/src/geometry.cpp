#include "qloss/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qloss {

namespace {

constexpr double kNmToUm = 1e-3;
constexpr double kCoordEps = 1e-9;

double rects_area(const std::vector<Rect>& rs) {
    double a = 0;
    for (const auto& r : rs) a += r.area();
    return a;
}

// Material priority used while painting elementary boxes. Conductors win,
// then the metal coating, then the substrate oxide.
enum class Paint { Conductor, MetalAirEdge, MetalAir, SubstrateAirEdge, SubstrateAir, Substrate, Air };

struct Painter {
    const std::vector<Conductor>* conductors;
    const std::vector<Point>* corners;
    bool layers;
    double t_ma, t_sa, band;

    bool near_corner(double x, double y) const {
        for (const auto& c : *corners) {
            if (std::max(std::abs(x - c.x), std::abs(y - c.y)) < band) return true;
        }
        return false;
    }

    std::pair<Paint, double> at(double x, double y) const {
        for (const auto& c : *conductors) {
            for (const auto& r : c.extent) {
                if (r.contains(x, y)) return {Paint::Conductor, c.potential};
            }
        }
        if (layers) {
            for (const auto& c : *conductors) {
                for (const auto& r : c.extent) {
                    if (x >= r.x0 - t_ma && x < r.x1 + t_ma && y >= 0 && y < r.y1 + t_ma) {
                        return {near_corner(x, y) ? Paint::MetalAirEdge : Paint::MetalAir, 0};
                    }
                }
            }
            if (y >= 0 && y < t_sa) {
                return {near_corner(x, y) ? Paint::SubstrateAirEdge : Paint::SubstrateAir, 0};
            }
        }
        if (y < 0) return {Paint::Substrate, 0};
        return {Paint::Air, 0};
    }
};

void add_sorted_unique(std::vector<double>& v, double p, double lo, double hi) {
    if (p < lo - kCoordEps || p > hi + kCoordEps) return;
    p = std::clamp(p, lo, hi);
    for (double q : v) {
        if (std::abs(q - p) < kCoordEps) return;
    }
    v.push_back(p);
}

// Paints the dielectric space between the conductors as non-overlapping
// rectangles. Elementary boxes sharing a material are merged row-wise.
void paint_regions(CrossSection& cs, const GeometryParams& p, bool layers) {
    const Painter painter{&cs.conductors, &cs.edge_corners, layers,
                          p.oxide_thickness_ma_nm * kNmToUm,
                          p.oxide_thickness_sa_nm * kNmToUm,
                          p.edge_band_nm * kNmToUm};

    std::vector<double> xb{cs.domain.x0, cs.domain.x1};
    std::vector<double> yb{cs.domain.y0, cs.domain.y1, 0.0};
    auto addx = [&](double v) { add_sorted_unique(xb, v, cs.domain.x0, cs.domain.x1); };
    auto addy = [&](double v) { add_sorted_unique(yb, v, cs.domain.y0, cs.domain.y1); };
    for (const auto& c : cs.conductors) {
        for (const auto& r : c.extent) {
            addx(r.x0); addx(r.x1); addy(r.y0); addy(r.y1);
            if (layers) {
                addx(r.x0 - painter.t_ma); addx(r.x1 + painter.t_ma);
                addy(r.y1 + painter.t_ma);
            }
        }
    }
    if (layers) {
        addy(painter.t_sa);
        for (const auto& c : cs.edge_corners) {
            addx(c.x - painter.band); addx(c.x + painter.band);
            addy(c.y - painter.band); addy(c.y + painter.band);
        }
    }
    std::sort(xb.begin(), xb.end());
    std::sort(yb.begin(), yb.end());

    std::map<Paint, std::vector<Rect>> rects;
    for (size_t j = 0; j + 1 < yb.size(); ++j) {
        std::vector<std::pair<Paint, Rect>> row;
        for (size_t i = 0; i + 1 < xb.size(); ++i) {
            const double xc = 0.5 * (xb[i] + xb[i + 1]);
            const double yc = 0.5 * (yb[j] + yb[j + 1]);
            auto [m, v] = painter.at(xc, yc);
            if (m == Paint::Conductor) continue;
            Rect r{xb[i], xb[i + 1], yb[j], yb[j + 1]};
            if (!row.empty() && row.back().first == m &&
                std::abs(row.back().second.x1 - r.x0) < kCoordEps) {
                row.back().second.x1 = r.x1;
            } else {
                row.emplace_back(m, r);
            }
        }
        for (auto& [m, r] : row) rects[m].push_back(r);
    }

    auto emit = [&](Paint m, const char* name, double eps) {
        auto it = rects.find(m);
        if (it == rects.end() || it->second.empty()) return;
        cs.regions.push_back({name, eps, std::move(it->second)});
    };
    emit(Paint::Substrate, kSubstrate, p.eps_substrate);
    emit(Paint::Air, kAir, 1.0);
    emit(Paint::MetalAir, kMetalAir, p.eps_ma);
    emit(Paint::SubstrateAir, kSubstrateAir, p.eps_sa);
    emit(Paint::MetalAirEdge, kMetalAirEdge, p.eps_ma);
    emit(Paint::SubstrateAirEdge, kSubstrateAirEdge, p.eps_sa);
}

void collect_edge_corners(CrossSection& cs) {
    for (const auto& c : cs.conductors) {
        for (const auto& r : c.extent) {
            for (double x : {r.x0, r.x1}) {
                if (std::abs(x - cs.domain.x0) < kCoordEps ||
                    std::abs(x - cs.domain.x1) < kCoordEps) {
                    continue;  // flush with the truncation boundary
                }
                cs.edge_corners.push_back({x, r.y0});
                cs.edge_corners.push_back({x, r.y1});
            }
        }
    }
}

void finish(CrossSection& cs, const GeometryParams& p, bool layers) {
    cs.oxide_thickness_ma_nm = p.oxide_thickness_ma_nm;
    cs.oxide_thickness_sa_nm = p.oxide_thickness_sa_nm;
    cs.edge_band_um = p.edge_band_nm * kNmToUm;
    cs.has_thin_layers = layers;
    collect_edge_corners(cs);
    paint_regions(cs, p, layers);
}

void check_layer_params(const GeometryParams& p, bool layers) {
    if (!layers) return;
    const double t_ma = p.oxide_thickness_ma_nm * kNmToUm;
    const double t_sa = p.oxide_thickness_sa_nm * kNmToUm;
    if (t_ma <= 0 || t_sa <= 0) {
        throw std::invalid_argument("oxide layer thickness must be positive");
    }
    if (t_ma >= p.metal_thickness_um || t_sa >= p.metal_thickness_um) {
        throw std::invalid_argument(
            "oxide layers must be strictly thinner than the metal");
    }
}

}  // namespace

double DielectricRegion::area() const { return rects_area(extent); }
double Conductor::area() const { return rects_area(extent); }

double CrossSection::thinnest_layer() const {
    if (!has_thin_layers) return 0;
    return std::min(oxide_thickness_ma_nm, oxide_thickness_sa_nm) * kNmToUm;
}

CrossSection build_cpw_cross_section(double gap_um, double width_um,
                                     bool include_thin_layers,
                                     const GeometryParams& p) {
    if (gap_um <= 0 || width_um <= 0) {
        throw std::invalid_argument("CPW gap and width must be positive");
    }
    check_layer_params(p, include_thin_layers);

    CrossSection cs;
    cs.gap_G = gap_um;
    cs.conductor_width_W = width_um;
    const double half = 0.5 * p.lateral_factor * (width_um + 2 * gap_um);
    cs.domain = {-half, half, -p.substrate_depth_um, p.air_height_um};
    const double t = p.metal_thickness_um;
    cs.conductors.push_back(
        {"center", 1.0, {{-width_um / 2, width_um / 2, 0, t}}, t});
    cs.conductors.push_back(
        {"ground_left", 0.0, {{-half, -width_um / 2 - gap_um, 0, t}}, t});
    cs.conductors.push_back(
        {"ground_right", 0.0, {{width_um / 2 + gap_um, half, 0, t}}, t});
    finish(cs, p, include_thin_layers);
    return cs;
}

CrossSection build_two_pad_cross_section(double gap_um, double pad_width_um,
                                         bool include_thin_layers,
                                         const GeometryParams& p) {
    if (gap_um <= 0 || pad_width_um <= 0) {
        throw std::invalid_argument("pad gap and width must be positive");
    }
    check_layer_params(p, include_thin_layers);

    CrossSection cs;
    cs.gap_G = gap_um;
    cs.conductor_width_W = pad_width_um;
    const double half = 0.5 * p.lateral_factor * (pad_width_um + 2 * gap_um);
    cs.domain = {-half, half, -p.substrate_depth_um, p.air_height_um};
    const double t = p.metal_thickness_um;
    cs.conductors.push_back(
        {"pad_left", 0.5, {{-gap_um / 2 - pad_width_um, -gap_um / 2, 0, t}}, t});
    cs.conductors.push_back(
        {"pad_right", -0.5, {{gap_um / 2, gap_um / 2 + pad_width_um, 0, t}}, t});
    cs.conductors.push_back(
        {"ground_left", 0.0, {{-half, -half + p.ground_width_um, 0, t}}, t});
    cs.conductors.push_back(
        {"ground_right", 0.0, {{half - p.ground_width_um, half, 0, t}}, t});
    finish(cs, p, include_thin_layers);
    return cs;
}

namespace {

// One mesh interval between two material breakpoints: cell sizes start at
// min_cell at both ends and grow geometrically, capped at max_cell. Thin
// intervals are subdivided uniformly so layers always get >= 2 cells.
std::vector<double> grade_interval(double len, double min_cell, double ratio,
                                   double max_cell) {
    if (len <= 4 * min_cell) {
        const int n = std::max(2, static_cast<int>(std::ceil(len / min_cell)));
        std::vector<double> sizes(n, len / n);
        return sizes;
    }
    std::vector<double> half;  // one side of the symmetric grading
    double s = min_cell;
    double sum2 = 0;
    while (sum2 + 2 * s * ratio < len) {
        half.push_back(s);
        sum2 += 2 * s;
        s = std::min(s * ratio, max_cell);
    }
    // Fill the middle with near-uniform cells whose size stays within one
    // grading step of the last graded cell.
    while (true) {
        const double rem = len - sum2;
        const double s_last = half.empty() ? min_cell : half.back();
        const double target = std::min(max_cell, s_last * ratio);
        int nmid = std::max(1, static_cast<int>(std::lround(rem / target)));
        double mid = rem / nmid;
        while (mid > s_last * ratio + kCoordEps) {
            ++nmid;
            mid = rem / nmid;
        }
        if (mid + kCoordEps >= s_last / ratio || half.empty()) {
            std::vector<double> sizes(half);
            sizes.insert(sizes.end(), nmid, mid);
            sizes.insert(sizes.end(), half.rbegin(), half.rend());
            return sizes;
        }
        sum2 -= 2 * half.back();
        half.pop_back();
    }
}

std::vector<double> graded_axis(const std::vector<double>& breaks,
                                double min_cell, double ratio,
                                double max_cell) {
    std::vector<double> pts{breaks.front()};
    for (size_t k = 0; k + 1 < breaks.size(); ++k) {
        const auto sizes = grade_interval(breaks[k + 1] - breaks[k], min_cell,
                                          ratio, max_cell);
        double p = breaks[k];
        for (size_t m = 0; m + 1 < sizes.size(); ++m) {
            p += sizes[m];
            pts.push_back(p);
        }
        pts.push_back(breaks[k + 1]);
    }
    return pts;
}

}  // namespace

Mesh generate_mesh(const CrossSection& cs, double min_cell_nm,
                   double grading_ratio) {
    if (grading_ratio <= 1.0 || grading_ratio > 2.0) {
        throw std::invalid_argument("grading ratio must be in (1, 2]");
    }
    if (min_cell_nm <= 0) {
        throw std::invalid_argument("min cell size must be positive");
    }
    const double min_cell = min_cell_nm * kNmToUm;
    if (cs.has_thin_layers && min_cell > 0.5 * cs.thinnest_layer()) {
        std::ostringstream os;
        os << "min cell " << min_cell_nm
           << " nm is too coarse: thin layers require <= "
           << 0.5 * cs.thinnest_layer() / kNmToUm << " nm";
        throw std::invalid_argument(os.str());
    }

    std::vector<double> xb{cs.domain.x0, cs.domain.x1};
    std::vector<double> yb{cs.domain.y0, cs.domain.y1};
    auto addx = [&](double v) { add_sorted_unique(xb, v, cs.domain.x0, cs.domain.x1); };
    auto addy = [&](double v) { add_sorted_unique(yb, v, cs.domain.y0, cs.domain.y1); };
    for (const auto& reg : cs.regions) {
        for (const auto& r : reg.extent) {
            addx(r.x0); addx(r.x1); addy(r.y0); addy(r.y1);
        }
    }
    for (const auto& c : cs.conductors) {
        for (const auto& r : c.extent) {
            addx(r.x0); addx(r.x1); addy(r.y0); addy(r.y1);
        }
    }
    std::sort(xb.begin(), xb.end());
    std::sort(yb.begin(), yb.end());

    const double max_cell =
        std::max(cs.domain.width(), cs.domain.height()) / 32.0;

    // Cheap upper bound on the cell count before building anything.
    double est_x = 0, est_y = 0;
    for (size_t k = 0; k + 1 < xb.size(); ++k) {
        est_x += 2 + 2 * std::log(std::max(2.0, (xb[k + 1] - xb[k]) / min_cell)) /
                         std::log(grading_ratio);
    }
    for (size_t k = 0; k + 1 < yb.size(); ++k) {
        est_y += 2 + 2 * std::log(std::max(2.0, (yb[k + 1] - yb[k]) / min_cell)) /
                         std::log(grading_ratio);
    }
    constexpr double kMaxCells = 2.5e7;
    if (est_x * est_y > kMaxCells) {
        std::ostringstream os;
        os << "mesh would need ~" << static_cast<long long>(est_x * est_y)
           << " cells, over the " << static_cast<long long>(kMaxCells)
           << " cell budget";
        throw std::invalid_argument(os.str());
    }

    Mesh mesh;
    mesh.grading_ratio = grading_ratio;
    mesh.edge_band_um = cs.edge_band_um;
    mesh.edge_corners = cs.edge_corners;
    mesh.x = graded_axis(xb, min_cell, grading_ratio, max_cell);
    mesh.y = graded_axis(yb, min_cell, grading_ratio, max_cell);

    // Material table: dielectric regions first, then conductors.
    std::map<std::string, int> index;
    for (const auto& reg : cs.regions) {
        index[reg.name] = static_cast<int>(mesh.materials.size());
        mesh.materials.push_back({reg.name, reg.relative_permittivity, 0, false});
    }
    for (const auto& c : cs.conductors) {
        index[c.name] = static_cast<int>(mesh.materials.size());
        mesh.materials.push_back({c.name, 0, c.potential, true});
    }

    const int nx = mesh.nx(), ny = mesh.ny();
    mesh.cell_tag.assign(static_cast<size_t>(nx) * ny, -1);

    // Classify elementary boxes once, then map cells onto them.
    const int ex = static_cast<int>(xb.size()) - 1;
    const int ey = static_cast<int>(yb.size()) - 1;
    std::vector<int> box_tag(static_cast<size_t>(ex) * ey, -1);
    for (int bj = 0; bj < ey; ++bj) {
        for (int bi = 0; bi < ex; ++bi) {
            const double px = 0.5 * (xb[bi] + xb[bi + 1]);
            const double py = 0.5 * (yb[bj] + yb[bj + 1]);
            int tag = -1;
            for (const auto& c : cs.conductors) {
                for (const auto& r : c.extent) {
                    if (r.contains(px, py)) { tag = index[c.name]; break; }
                }
                if (tag >= 0) break;
            }
            if (tag < 0) {
                for (const auto& reg : cs.regions) {
                    for (const auto& r : reg.extent) {
                        if (r.contains(px, py)) { tag = index[reg.name]; break; }
                    }
                    if (tag >= 0) break;
                }
            }
            if (tag < 0) {
                throw std::invalid_argument(
                    "regions and conductors do not tile the domain");
            }
            box_tag[static_cast<size_t>(bj) * ex + bi] = tag;
        }
    }
    auto box_of = [](const std::vector<double>& edges, double v) {
        const auto it = std::upper_bound(edges.begin(), edges.end(), v);
        return static_cast<int>(std::distance(edges.begin(), it)) - 1;
    };
    for (int j = 0; j < ny; ++j) {
        const int bj = box_of(yb, mesh.yc(j));
        for (int i = 0; i < nx; ++i) {
            const int bi = box_of(xb, mesh.xc(i));
            mesh.cell_tag[static_cast<size_t>(j) * nx + i] =
                box_tag[static_cast<size_t>(bj) * ex + bi];
        }
    }
    return mesh;
}

namespace {

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open geometry config: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key, eq, value;
        if (!(ls >> key)) continue;
        if (!(ls >> value)) continue;
        if (value == "=") {
            if (!(ls >> value)) continue;
        }
        kv[key] = value;
    }
    return kv;
}

}  // namespace

GeometryConfig load_geometry_config(const std::string& path) {
    const auto kv = parse_kv_file(path);
    GeometryConfig cfg;
    auto str = [&](const char* k, std::string def) {
        auto it = kv.find(k);
        return it == kv.end() ? def : it->second;
    };
    auto num = [&](const char* k, double def) {
        auto it = kv.find(k);
        return it == kv.end() ? def : std::stod(it->second);
    };
    cfg.name = str("name", "unnamed");
    cfg.kind = str("kind", "cpw");
    if (cfg.kind != "cpw" && cfg.kind != "two_pad") {
        throw std::runtime_error(path + ": unknown geometry kind " + cfg.kind);
    }
    cfg.gap_um = num("G_um", 0);
    cfg.width_um = num("W_um", 0);
    GeometryParams d;
    cfg.params.metal_thickness_um = num("t_metal_um", d.metal_thickness_um);
    cfg.params.oxide_thickness_ma_nm = num("t_MA_nm", d.oxide_thickness_ma_nm);
    cfg.params.oxide_thickness_sa_nm = num("t_SA_nm", d.oxide_thickness_sa_nm);
    cfg.params.eps_substrate = num("eps_substrate", d.eps_substrate);
    cfg.params.eps_sa = num("eps_SA", d.eps_sa);
    cfg.params.eps_ma = num("eps_MA", d.eps_ma);
    cfg.params.substrate_depth_um = num("substrate_depth_um", d.substrate_depth_um);
    cfg.params.air_height_um = num("air_height_um", d.air_height_um);
    cfg.params.lateral_factor = num("lateral_factor", d.lateral_factor);
    cfg.params.ground_width_um = num("ground_width_um", d.ground_width_um);
    cfg.params.edge_band_nm = num("edge_band_nm", d.edge_band_nm);
    if (cfg.gap_um <= 0 || cfg.width_um <= 0) {
        throw std::runtime_error(path + ": G_um and W_um must be positive");
    }
    return cfg;
}

CrossSection build_from_config(const GeometryConfig& cfg, bool include_thin_layers) {
    CrossSection cs = cfg.kind == "cpw"
        ? build_cpw_cross_section(cfg.gap_um, cfg.width_um, include_thin_layers, cfg.params)
        : build_two_pad_cross_section(cfg.gap_um, cfg.width_um, include_thin_layers, cfg.params);
    cs.name = cfg.name;
    return cs;
}

}  // namespace qloss
