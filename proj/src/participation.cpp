#include "qloss/participation.hpp"

#include <cmath>
#include <stdexcept>

namespace qloss {

double ParticipationReport::get(const std::string& region) const {
    for (const auto& [name, p] : ratios) {
        if (name == region) return p;
    }
    return 0.0;
}

double ParticipationReport::sum() const {
    double s = 0;
    for (const auto& [name, p] : ratios) s += p;
    return s;
}

ParticipationReport participation_ratios(const FieldSolution& sol,
                                         const std::string& geometry_id) {
    const double total = sol.total_energy();
    if (!(total > 0)) {
        throw std::invalid_argument("total field energy is zero, cannot normalize");
    }
    ParticipationReport rep;
    rep.geometry_id = geometry_id;
    rep.method = "direct";
    for (const auto& [name, u] : sol.region_energy) {
        rep.ratios.emplace_back(name, u / total);
    }
    return rep;
}

namespace {

bool in_edge_band(const Mesh& m, double x, double y) {
    for (const auto& c : m.edge_corners) {
        if (std::max(std::abs(x - c.x), std::abs(y - c.y)) < m.edge_band_um) {
            return true;
        }
    }
    return false;
}

}  // namespace

double thin_layer_participation(const FieldSolution& bare,
                                const ThinLayerSpec& layer) {
    const Mesh& m = bare.mesh;
    const int nx = m.nx(), ny = m.ny();
    const double t = layer.thickness_nm * 1e-3;
    const double eps_l = layer.permittivity;
    if (t <= 0 || eps_l <= 0) {
        throw std::invalid_argument("layer thickness and permittivity must be positive");
    }
    const double total = bare.total_energy();
    if (!(total > 0)) throw std::invalid_argument("bare solution carries no energy");

    auto idx = [nx](int i, int j) { return static_cast<size_t>(j) * nx + i; };
    auto is_cond = [&](int i, int j) {
        return m.materials[m.tag(i, j)].is_conductor;
    };

    double u_layer = 0;
    bool found_surface = false;

    if (layer.kind == SurfaceKind::MetalAir) {
        // Exposed metal faces: air cell next to a conductor cell. The layer
        // field is purely normal, E_l = eps_amb * E_n / eps_l.
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                const auto& mat = m.materials[m.tag(i, j)];
                if (mat.is_conductor || mat.name != kAir) continue;
                const double eps_amb = mat.permittivity;
                const double phi = bare.potential[idx(i, j)];
                struct Nb { int di, dj; };
                for (const Nb nb : {Nb{1, 0}, Nb{-1, 0}, Nb{0, 1}, Nb{0, -1}}) {
                    const int ii = i + nb.di, jj = j + nb.dj;
                    if (ii < 0 || ii >= nx || jj < 0 || jj >= ny) continue;
                    if (!is_cond(ii, jj)) continue;
                    found_surface = true;
                    const bool horiz = (nb.dj == 0);
                    const double fx = horiz ? (nb.di > 0 ? m.x[i + 1] : m.x[i]) : m.xc(i);
                    const double fy = horiz ? m.yc(j) : (nb.dj > 0 ? m.y[j + 1] : m.y[j]);
                    if (in_edge_band(m, fx, fy)) continue;
                    const double half = 0.5 * (horiz ? m.dx(i) : m.dy(j));
                    const double face = horiz ? m.dy(j) : m.dx(i);
                    const double en =
                        (m.materials[m.tag(ii, jj)].potential - phi) / half;
                    const double d = eps_amb * en;  // normal D, continuous
                    u_layer += 0.5 * d * d / eps_l * t * face;
                }
            }
        }
    } else {
        // Horizontal substrate-air surface; fields taken on the air side.
        for (int j = 1; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                const auto& above = m.materials[m.tag(i, j)];
                const auto& below = m.materials[m.tag(i, j - 1)];
                if (above.name != kAir || below.name != kSubstrate) continue;
                found_surface = true;
                if (in_edge_band(m, m.xc(i), m.y[j])) continue;
                const double et = bare.field_x[idx(i, j)];
                const double en = above.permittivity * bare.field_y[idx(i, j)];
                u_layer += 0.5 * (eps_l * et * et + en * en / eps_l) * t * m.dx(i);
            }
        }
    }

    if (!found_surface) {
        throw std::invalid_argument(
            layer.kind == SurfaceKind::MetalAir
                ? "no exposed metal-air surface in this geometry"
                : "no substrate-air surface in this geometry");
    }
    return u_layer / total;
}

}  // namespace qloss
