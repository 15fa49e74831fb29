#pragma once

#include <string>
#include <vector>

// Parameterized 2D device cross-sections (CPW / Xmon arm, two-pad transmon)
// with optional thin interface-oxide layers, and graded rectilinear meshes
// for the field solver. All lengths are in micrometers unless a suffix says
// otherwise.

namespace qloss {

struct Rect {
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    bool contains(double x, double y) const {
        return x >= x0 && x < x1 && y >= y0 && y < y1;
    }
};

struct Point {
    double x = 0, y = 0;
};

struct DielectricRegion {
    std::string name;
    double relative_permittivity = 1.0;
    std::vector<Rect> extent;

    double area() const;
};

struct Conductor {
    std::string name;
    double potential = 0.0;  // volts
    std::vector<Rect> extent;
    double thickness = 0.0;

    double area() const;
};

// Canonical region names used by the builders and the participation module.
inline constexpr const char* kSubstrate = "substrate";
inline constexpr const char* kAir = "air";
inline constexpr const char* kMetalAir = "metal_air";
inline constexpr const char* kSubstrateAir = "substrate_air";
// Thin-layer cells within edge_band_um of a convex metal corner are tagged
// separately. The sharp-corner field there is an artifact of the idealized
// rectangular metal profile (real etched edges are rounded at the ~10 nm
// scale), so the headline metal_air / substrate_air participations are
// reported from the band-free layer.
inline constexpr const char* kMetalAirEdge = "metal_air_edge";
inline constexpr const char* kSubstrateAirEdge = "substrate_air_edge";

struct CrossSection {
    std::string name;
    double gap_G = 0;
    double conductor_width_W = 0;
    std::vector<DielectricRegion> regions;
    std::vector<Conductor> conductors;
    double oxide_thickness_ma_nm = 5.0;
    double oxide_thickness_sa_nm = 4.0;
    double edge_band_um = 0.008;
    Rect domain;
    // Convex metal corners exposed to air; consumed by the surface
    // participation approximation and the edge-band tagging.
    std::vector<Point> edge_corners;
    bool has_thin_layers = false;

    double thinnest_layer() const;
};

// Knobs that are not fixed by the device designs themselves. Width defaults
// are calibration values, not measured geometry.
struct GeometryParams {
    double metal_thickness_um = 0.07;
    double oxide_thickness_ma_nm = 5.0;
    double oxide_thickness_sa_nm = 4.0;
    double eps_substrate = 11.9;
    double eps_sa = 3.9;
    double eps_ma = 5.0;
    double substrate_depth_um = 200.0;
    double air_height_um = 200.0;
    double lateral_factor = 10.0;  // domain width = factor * (W + 2G)
    double ground_width_um = 50.0; // two-pad layout only
    double edge_band_nm = 8.0;
};

// Symmetric ground-gap-center-gap-ground layout, center at +1 V.
CrossSection build_cpw_cross_section(double gap_um, double width_um,
                                     bool include_thin_layers,
                                     const GeometryParams& params = {});

// Two pads at +/-0.5 V separated by the gap, grounds at the domain edges.
CrossSection build_two_pad_cross_section(double gap_um, double pad_width_um,
                                         bool include_thin_layers,
                                         const GeometryParams& params = {});

struct MaterialInfo {
    std::string name;
    double permittivity = 0.0;  // unused for conductors
    double potential = 0.0;     // unused for dielectrics
    bool is_conductor = false;
};

// Tensor-product mesh. Cell (i, j) spans [x[i], x[i+1]] x [y[j], y[j+1]]
// and carries exactly one material tag (index into materials).
struct Mesh {
    std::vector<double> x;  // node coordinates, size nx+1
    std::vector<double> y;  // size ny+1
    std::vector<int> cell_tag;  // row-major, j * nx + i
    std::vector<MaterialInfo> materials;
    double grading_ratio = 0;
    double edge_band_um = 0;
    std::vector<Point> edge_corners;

    int nx() const { return static_cast<int>(x.size()) - 1; }
    int ny() const { return static_cast<int>(y.size()) - 1; }
    int tag(int i, int j) const { return cell_tag[static_cast<size_t>(j) * nx() + i]; }
    double dx(int i) const { return x[i + 1] - x[i]; }
    double dy(int j) const { return y[j + 1] - y[j]; }
    double xc(int i) const { return 0.5 * (x[i] + x[i + 1]); }
    double yc(int j) const { return 0.5 * (y[j] + y[j + 1]); }
    double cell_area(int i, int j) const { return dx(i) * dy(j); }
};

// Graded mesh with cells of ~min_cell at material interfaces, growing
// geometrically by grading_ratio away from them. min_cell is in nanometers.
Mesh generate_mesh(const CrossSection& cs, double min_cell_nm,
                   double grading_ratio);

// Config-file front end (key-value text, see data/geometry/*.cfg).
struct GeometryConfig {
    std::string name;
    std::string kind;  // "cpw" or "two_pad"
    double gap_um = 0;
    double width_um = 0;
    GeometryParams params;
};

GeometryConfig load_geometry_config(const std::string& path);
CrossSection build_from_config(const GeometryConfig& cfg, bool include_thin_layers);

}  // namespace qloss
