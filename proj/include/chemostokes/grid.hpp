#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "chemostokes/errors.hpp"

namespace chemostokes {

/// Uniform rectangular grid of nx*ny square cells of width h.
/// Scalars live at cell centers, velocity components at cell faces (MAC).
struct GridSpec {
    int nx = 0;
    int ny = 0;
    double h = 0.0;
    double Lx = 0.0;  // stored as nx*h, exactly
    double Ly = 0.0;  // stored as ny*h, exactly

    static GridSpec make(int nx, int ny, double h);
    static GridSpec from_extent(double Lx, double Ly, int nx, int ny);
    static GridSpec unit_square(int n) { return make(n, n, 1.0 / n); }

    long cell_count() const { return static_cast<long>(nx) * ny; }
    long cell_index(int i, int j) const { return static_cast<long>(j) * nx + i; }

    double x_center(int i) const { return (i + 0.5) * h; }
    double y_center(int j) const { return (j + 0.5) * h; }
    double x_face(int i) const { return i * h; }  // vertical-face x (i in [0, nx])
    double y_face(int j) const { return j * h; }  // horizontal-face y (j in [0, ny])

    bool is_boundary_cell(int i, int j) const {
        return i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
    }
    /// Distance from a cell center to the rectangle boundary.
    double center_boundary_distance(int i, int j) const;

    bool same_layout(const GridSpec& o) const {
        return nx == o.nx && ny == o.ny && h == o.h;
    }
};

enum class ScalarBc { Neumann, Dirichlet };

/// Prescribed boundary values sampled at boundary-face midpoints.
struct BoundaryTrace {
    std::vector<double> west;   // ny values, index j
    std::vector<double> east;   // ny values
    std::vector<double> south;  // nx values, index i
    std::vector<double> north;  // nx values

    double max_abs() const;
};

/// Cell-centered scalar with its boundary-condition descriptor.
/// Storage is row-major, y-outer: values[j*nx + i].
struct ScalarField {
    int nx = 0;
    int ny = 0;
    ScalarBc bc = ScalarBc::Neumann;
    std::vector<double> values;
    BoundaryTrace trace;  // used only for Dirichlet fields

    ScalarField() = default;
    ScalarField(const GridSpec& g, ScalarBc bc_kind, double fill = 0.0);

    double& at(int i, int j) { return values[static_cast<long>(j) * nx + i]; }
    double at(int i, int j) const { return values[static_cast<long>(j) * nx + i]; }
    long size() const { return static_cast<long>(nx) * ny; }

    double min_value() const;
    double max_value() const;
    double max_abs() const;
    bool all_finite() const;

    void require_layout(const GridSpec& g, const char* where) const;
};

/// MAC velocity field: x-components on vertical faces ((nx+1)*ny values,
/// index j*(nx+1)+i), y-components on horizontal faces (nx*(ny+1) values,
/// index j*nx+i). With no_slip set, boundary faces are pinned to zero.
struct VectorField {
    int nx = 0;
    int ny = 0;
    bool no_slip = true;
    std::vector<double> x;
    std::vector<double> y;

    VectorField() = default;
    VectorField(const GridSpec& g, bool no_slip_flag = true);

    double& ux(int i, int j) { return x[static_cast<long>(j) * (nx + 1) + i]; }
    double ux(int i, int j) const { return x[static_cast<long>(j) * (nx + 1) + i]; }
    double& uy(int i, int j) { return y[static_cast<long>(j) * nx + i]; }
    double uy(int i, int j) const { return y[static_cast<long>(j) * nx + i]; }

    double max_abs() const;
    bool all_finite() const;
    void zero_boundary_faces();
    /// Max |value| over boundary faces; 0 when clean no-slip data.
    double boundary_face_max_abs() const;

    void require_layout(const GridSpec& g, const char* where) const;
};

/// Samples f(x, y) at every cell center.
ScalarField sample_cells(const GridSpec& g, ScalarBc bc,
                         const std::function<double(double, double)>& f);

/// Samples f(x, y) at boundary-face midpoints.
BoundaryTrace sample_trace(const GridSpec& g,
                           const std::function<double(double, double)>& f);

/// Samples a Dirichlet field: cell centers plus its own boundary trace.
ScalarField sample_dirichlet(const GridSpec& g,
                             const std::function<double(double, double)>& f);

/// Samples (fx, fy) at x-face and y-face centers respectively.
VectorField sample_faces(const GridSpec& g,
                         const std::function<double(double, double)>& fx,
                         const std::function<double(double, double)>& fy,
                         bool no_slip = false);

}  // namespace chemostokes
