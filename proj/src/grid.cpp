#include "chemostokes/grid.hpp"

#include <algorithm>
#include <cmath>

namespace chemostokes {

GridSpec GridSpec::make(int nx, int ny, double h) {
    if (nx < 4 || ny < 4) throw ContractError("GridSpec: nx and ny must be >= 4");
    if (!(h > 0.0) || !std::isfinite(h)) throw ContractError("GridSpec: h must be positive");
    GridSpec g;
    g.nx = nx;
    g.ny = ny;
    g.h = h;
    g.Lx = nx * h;
    g.Ly = ny * h;
    return g;
}

GridSpec GridSpec::from_extent(double Lx, double Ly, int nx, int ny) {
    if (nx < 4 || ny < 4) throw ContractError("GridSpec: nx and ny must be >= 4");
    const double hx = Lx / nx;
    const double hy = Ly / ny;
    if (std::abs(hx - hy) > 1e-12 * std::max(std::abs(hx), std::abs(hy)))
        throw ContractError("GridSpec: Lx/nx and Ly/ny must agree (square cells)");
    return make(nx, ny, hx);
}

double GridSpec::center_boundary_distance(int i, int j) const {
    const double x = x_center(i);
    const double y = y_center(j);
    return std::min(std::min(x, Lx - x), std::min(y, Ly - y));
}

double BoundaryTrace::max_abs() const {
    double m = 0.0;
    for (const auto* a : {&west, &east, &south, &north})
        for (double v : *a) m = std::max(m, std::abs(v));
    return m;
}

ScalarField::ScalarField(const GridSpec& g, ScalarBc bc_kind, double fill)
    : nx(g.nx), ny(g.ny), bc(bc_kind), values(g.cell_count(), fill) {
    if (bc == ScalarBc::Dirichlet) {
        trace.west.assign(ny, fill);
        trace.east.assign(ny, fill);
        trace.south.assign(nx, fill);
        trace.north.assign(nx, fill);
    }
}

double ScalarField::min_value() const {
    double m = values.empty() ? 0.0 : values[0];
    for (double v : values) m = std::min(m, v);
    return m;
}

double ScalarField::max_value() const {
    double m = values.empty() ? 0.0 : values[0];
    for (double v : values) m = std::max(m, v);
    return m;
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

bool ScalarField::all_finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    if (bc == ScalarBc::Dirichlet) {
        for (const auto* a : {&trace.west, &trace.east, &trace.south, &trace.north})
            for (double v : *a)
                if (!std::isfinite(v)) return false;
    }
    return true;
}

void ScalarField::require_layout(const GridSpec& g, const char* where) const {
    if (nx != g.nx || ny != g.ny || static_cast<long>(values.size()) != g.cell_count())
        throw ContractError(std::string(where) + ": scalar field does not match grid");
    if (bc == ScalarBc::Dirichlet) {
        if (static_cast<int>(trace.west.size()) != ny ||
            static_cast<int>(trace.east.size()) != ny ||
            static_cast<int>(trace.south.size()) != nx ||
            static_cast<int>(trace.north.size()) != nx)
            throw ContractError(std::string(where) + ": Dirichlet trace is missing or mis-sized");
    }
}

VectorField::VectorField(const GridSpec& g, bool no_slip_flag)
    : nx(g.nx),
      ny(g.ny),
      no_slip(no_slip_flag),
      x(static_cast<long>(g.nx + 1) * g.ny, 0.0),
      y(static_cast<long>(g.nx) * (g.ny + 1), 0.0) {}

double VectorField::max_abs() const {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    for (double v : y) m = std::max(m, std::abs(v));
    return m;
}

bool VectorField::all_finite() const {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    for (double v : y)
        if (!std::isfinite(v)) return false;
    return true;
}

void VectorField::zero_boundary_faces() {
    for (int j = 0; j < ny; ++j) {
        ux(0, j) = 0.0;
        ux(nx, j) = 0.0;
    }
    for (int i = 0; i < nx; ++i) {
        uy(i, 0) = 0.0;
        uy(i, ny) = 0.0;
    }
}

double VectorField::boundary_face_max_abs() const {
    double m = 0.0;
    for (int j = 0; j < ny; ++j)
        m = std::max({m, std::abs(ux(0, j)), std::abs(ux(nx, j))});
    for (int i = 0; i < nx; ++i)
        m = std::max({m, std::abs(uy(i, 0)), std::abs(uy(i, ny))});
    return m;
}

void VectorField::require_layout(const GridSpec& g, const char* where) const {
    if (nx != g.nx || ny != g.ny ||
        static_cast<long>(x.size()) != static_cast<long>(g.nx + 1) * g.ny ||
        static_cast<long>(y.size()) != static_cast<long>(g.nx) * (g.ny + 1))
        throw ContractError(std::string(where) + ": vector field does not match grid (MAC layout)");
}

ScalarField sample_cells(const GridSpec& g, ScalarBc bc,
                         const std::function<double(double, double)>& f) {
    ScalarField out(g, bc);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) out.at(i, j) = f(g.x_center(i), g.y_center(j));
    return out;
}

BoundaryTrace sample_trace(const GridSpec& g,
                           const std::function<double(double, double)>& f) {
    BoundaryTrace t;
    t.west.resize(g.ny);
    t.east.resize(g.ny);
    t.south.resize(g.nx);
    t.north.resize(g.nx);
    for (int j = 0; j < g.ny; ++j) {
        t.west[j] = f(0.0, g.y_center(j));
        t.east[j] = f(g.Lx, g.y_center(j));
    }
    for (int i = 0; i < g.nx; ++i) {
        t.south[i] = f(g.x_center(i), 0.0);
        t.north[i] = f(g.x_center(i), g.Ly);
    }
    return t;
}

ScalarField sample_dirichlet(const GridSpec& g,
                             const std::function<double(double, double)>& f) {
    ScalarField out = sample_cells(g, ScalarBc::Dirichlet, f);
    out.trace = sample_trace(g, f);
    return out;
}

VectorField sample_faces(const GridSpec& g,
                         const std::function<double(double, double)>& fx,
                         const std::function<double(double, double)>& fy,
                         bool no_slip) {
    VectorField v(g, no_slip);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) v.ux(i, j) = fx(g.x_face(i), g.y_center(j));
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) v.uy(i, j) = fy(g.x_center(i), g.y_face(j));
    if (no_slip) v.zero_boundary_faces();
    return v;
}

}  // namespace chemostokes
