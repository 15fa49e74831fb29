#pragma once

#include <map>
#include <string>
#include <vector>

#include "qloss/geometry.hpp"

// Electrostatics on a rectilinear mesh: div(eps grad phi) = 0 with the
// conductors as Dirichlet data and zero normal flux on the truncation
// boundary. Finite-volume 5-point discretization with harmonic averaging
// of eps at cell faces, so normal-D continuity is preserved across
// material interfaces. Energies are in units of eps0 * V^2 per unit
// length; the eps0 factor cancels in every ratio this library reports.

namespace qloss {

struct FieldSolution {
    Mesh mesh;
    std::vector<double> potential;    // per cell, conductors carry their bias
    std::vector<double> field_x;      // E components per cell, V/um
    std::vector<double> field_y;
    std::vector<double> field_mag;    // |E| per cell, zero in conductors
    std::map<std::string, double> region_energy;
    double achieved_residual = 0;

    double total_energy() const;
};

struct SolveOptions {
    double tolerance = 1e-10;  // relative residual
};

FieldSolution solve_potential(const Mesh& mesh, const SolveOptions& opts = {});

// Per-region electric energy table (same data as FieldSolution carries;
// recomputed from the stored fields).
std::map<std::string, double> compute_region_energies(const FieldSolution& sol);

// Per-cell dump (x, y, region, |E|) for external plotting.
void write_field_dump(const FieldSolution& sol, const std::string& path);

}  // namespace qloss
