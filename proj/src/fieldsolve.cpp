#include "qloss/fieldsolve.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qloss {

double FieldSolution::total_energy() const {
    double u = 0;
    for (const auto& [name, e] : region_energy) u += e;
    return u;
}

namespace {

struct Grid {
    const Mesh& m;
    int nx, ny;
    std::vector<int> unknown;  // cell -> unknown index, -1 for conductors

    explicit Grid(const Mesh& mesh) : m(mesh), nx(mesh.nx()), ny(mesh.ny()) {
        unknown.assign(static_cast<size_t>(nx) * ny, -1);
        int n = 0;
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                if (!m.materials[m.tag(i, j)].is_conductor) {
                    unknown[idx(i, j)] = n++;
                }
            }
        }
    }
    size_t idx(int i, int j) const { return static_cast<size_t>(j) * nx + i; }
    bool conductor(int i, int j) const {
        return m.materials[m.tag(i, j)].is_conductor;
    }
    double eps(int i, int j) const {
        return m.materials[m.tag(i, j)].permittivity;
    }
    double bias(int i, int j) const {
        return m.materials[m.tag(i, j)].potential;
    }
};

}  // namespace

FieldSolution solve_potential(const Mesh& mesh, const SolveOptions& opts) {
    if (opts.tolerance <= 0 || opts.tolerance > 1e-6) {
        throw std::invalid_argument("solver tolerance must be in (0, 1e-6]");
    }
    std::set<double> dirichlet;
    for (const auto& mat : mesh.materials) {
        if (mat.is_conductor) dirichlet.insert(mat.potential);
    }
    if (dirichlet.size() < 2) {
        throw std::invalid_argument(
            "need >= 2 distinct conductor potentials (is a ground present?)");
    }

    const Grid g(mesh);
    const int nx = g.nx, ny = g.ny;
    int n_unknown = 0;
    for (int v : g.unknown) n_unknown += (v >= 0);

    using Trip = Eigen::Triplet<double>;
    std::vector<Trip> trips;
    trips.reserve(static_cast<size_t>(n_unknown) * 5);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_unknown);

    // Face conductance with harmonic eps averaging; conductor faces are
    // Dirichlet, domain boundary faces carry no flux.
    auto couple = [&](int i, int j, int ii, int jj, int a) {
        const bool horiz = (jj == j);
        const double face = horiz ? mesh.dy(j) : mesh.dx(i);
        const double di = 0.5 * (horiz ? mesh.dx(i) : mesh.dy(j));
        if (g.conductor(ii, jj)) {
            const double cond = face * g.eps(i, j) / di;
            trips.emplace_back(a, a, cond);
            rhs[a] += cond * g.bias(ii, jj);
        } else {
            const double dj = 0.5 * (horiz ? mesh.dx(ii) : mesh.dy(jj));
            const double cond = face / (di / g.eps(i, j) + dj / g.eps(ii, jj));
            trips.emplace_back(a, a, cond);
            trips.emplace_back(a, g.unknown[g.idx(ii, jj)], -cond);
        }
    };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int a = g.unknown[g.idx(i, j)];
            if (a < 0) continue;
            if (i + 1 < nx) couple(i, j, i + 1, j, a);
            if (i > 0) couple(i, j, i - 1, j, a);
            if (j + 1 < ny) couple(i, j, i, j + 1, a);
            if (j > 0) couple(i, j, i, j - 1, a);
        }
    }

    Eigen::SparseMatrix<double> A(n_unknown, n_unknown);
    A.setFromTriplets(trips.begin(), trips.end());

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(A);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("sparse factorization failed (singular system?)");
    }
    const Eigen::VectorXd phi = solver.solve(rhs);
    const double rhs_norm = rhs.norm();
    const double residual =
        rhs_norm > 0 ? (A * phi - rhs).norm() / rhs_norm : 0.0;
    if (residual > opts.tolerance) {
        std::ostringstream os;
        os << "linear solve did not reach tolerance: achieved relative residual "
           << residual << " > " << opts.tolerance;
        throw std::runtime_error(os.str());
    }

    FieldSolution sol;
    sol.mesh = mesh;
    sol.achieved_residual = residual;
    const size_t ncell = static_cast<size_t>(nx) * ny;
    sol.potential.assign(ncell, 0.0);
    sol.field_x.assign(ncell, 0.0);
    sol.field_y.assign(ncell, 0.0);
    sol.field_mag.assign(ncell, 0.0);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int a = g.unknown[g.idx(i, j)];
            sol.potential[g.idx(i, j)] = a >= 0 ? phi[a] : g.bias(i, j);
        }
    }

    // Cell fields from flux-consistent face potentials: the face value is
    // the eps/d weighted interpolation, which keeps normal D continuous.
    auto face_pot = [&](int i, int j, int ii, int jj) {
        if (ii < 0 || ii >= nx || jj < 0 || jj >= ny) {
            return sol.potential[g.idx(i, j)];  // no-flux boundary
        }
        if (g.conductor(ii, jj)) return g.bias(ii, jj);
        const bool horiz = (jj == j);
        const double di = 0.5 * (horiz ? mesh.dx(i) : mesh.dy(j));
        const double dj = 0.5 * (horiz ? mesh.dx(ii) : mesh.dy(jj));
        const double wi = g.eps(i, j) / di;
        const double wj = g.eps(ii, jj) / dj;
        return (wi * sol.potential[g.idx(i, j)] +
                wj * sol.potential[g.idx(ii, jj)]) / (wi + wj);
    };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (g.conductor(i, j)) continue;
            const double pw = face_pot(i, j, i - 1, j);
            const double pe = face_pot(i, j, i + 1, j);
            const double ps = face_pot(i, j, i, j - 1);
            const double pn = face_pot(i, j, i, j + 1);
            const double ex = (pw - pe) / mesh.dx(i);
            const double ey = (ps - pn) / mesh.dy(j);
            sol.field_x[g.idx(i, j)] = ex;
            sol.field_y[g.idx(i, j)] = ey;
            sol.field_mag[g.idx(i, j)] = std::hypot(ex, ey);
        }
    }
    sol.region_energy = compute_region_energies(sol);
    return sol;
}

std::map<std::string, double> compute_region_energies(const FieldSolution& sol) {
    if (sol.potential.empty()) {
        throw std::invalid_argument("field solution has no potential data");
    }
    const Mesh& m = sol.mesh;
    std::map<std::string, double> energy;
    for (const auto& mat : m.materials) {
        if (!mat.is_conductor) energy[mat.name] = 0.0;
    }
    const int nx = m.nx(), ny = m.ny();
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const auto& mat = m.materials[m.tag(i, j)];
            if (mat.is_conductor) continue;
            const double e2 =
                sol.field_mag[static_cast<size_t>(j) * nx + i];
            energy[mat.name] +=
                0.5 * mat.permittivity * e2 * e2 * m.cell_area(i, j);
        }
    }
    return energy;
}

void write_field_dump(const FieldSolution& sol, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write field dump: " + path);
    out << "x_um\ty_um\tregion\tE_mag\n";
    const Mesh& m = sol.mesh;
    const int nx = m.nx(), ny = m.ny();
    char buf[160];
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const auto& mat = m.materials[m.tag(i, j)];
            if (mat.is_conductor) continue;
            std::snprintf(buf, sizeof buf, "%.9g\t%.9g\t%s\t%.9g\n",
                          m.xc(i), m.yc(j), mat.name.c_str(),
                          sol.field_mag[static_cast<size_t>(j) * nx + i]);
            out << buf;
        }
    }
}

}  // namespace qloss
