#include "chemostokes/operators.hpp"

namespace chemostokes {

VectorField grad_to_faces(const ScalarField& f, const GridSpec& g) {
    f.require_layout(g, "grad_to_faces");
    VectorField out(g, /*no_slip=*/false);
    const double inv_h = 1.0 / g.h;
    const double inv_h2 = 2.0 / g.h;  // one-sided through a trace at distance h/2

    for (int j = 0; j < g.ny; ++j) {
        for (int i = 1; i < g.nx; ++i)
            out.ux(i, j) = (f.at(i, j) - f.at(i - 1, j)) * inv_h;
        if (f.bc == ScalarBc::Dirichlet) {
            out.ux(0, j) = (f.at(0, j) - f.trace.west[j]) * inv_h2;
            out.ux(g.nx, j) = (f.trace.east[j] - f.at(g.nx - 1, j)) * inv_h2;
        }  // Neumann: boundary faces stay 0
    }
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out.uy(i, j) = (f.at(i, j) - f.at(i, j - 1)) * inv_h;
    if (f.bc == ScalarBc::Dirichlet) {
        for (int i = 0; i < g.nx; ++i) {
            out.uy(i, 0) = (f.at(i, 0) - f.trace.south[i]) * inv_h2;
            out.uy(i, g.ny) = (f.trace.north[i] - f.at(i, g.ny - 1)) * inv_h2;
        }
    }
    return out;
}

ScalarField divergence(const VectorField& v, const GridSpec& g) {
    v.require_layout(g, "divergence");
    ScalarField out(g, ScalarBc::Neumann);
    const double inv_h = 1.0 / g.h;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out.at(i, j) = (v.ux(i + 1, j) - v.ux(i, j) + v.uy(i, j + 1) - v.uy(i, j)) * inv_h;
    return out;
}

ScalarField laplacian(const ScalarField& f, const GridSpec& g) {
    return divergence(grad_to_faces(f, g), g);
}

double integrate(const ScalarField& f, const GridSpec& g) {
    f.require_layout(g, "integrate");
    double s = 0.0;
    for (double v : f.values) s += v;
    return g.h * g.h * s;
}

double face_inner(const VectorField& a, const VectorField& b, const GridSpec& g) {
    a.require_layout(g, "face_inner");
    b.require_layout(g, "face_inner");
    double s = 0.0;
    for (size_t k = 0; k < a.x.size(); ++k) s += a.x[k] * b.x[k];
    for (size_t k = 0; k < a.y.size(); ++k) s += a.y[k] * b.y[k];
    return g.h * g.h * s;
}

void grad_at_centers(const ScalarField& f, const GridSpec& g,
                     std::vector<double>& gx, std::vector<double>& gy) {
    const VectorField grad = grad_to_faces(f, g);
    gx.assign(g.cell_count(), 0.0);
    gy.assign(g.cell_count(), 0.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            gx[g.cell_index(i, j)] = 0.5 * (grad.ux(i, j) + grad.ux(i + 1, j));
            gy[g.cell_index(i, j)] = 0.5 * (grad.uy(i, j) + grad.uy(i, j + 1));
        }
}

void velocity_at_centers(const VectorField& v, const GridSpec& g,
                         std::vector<double>& ucx, std::vector<double>& ucy) {
    v.require_layout(g, "velocity_at_centers");
    ucx.assign(g.cell_count(), 0.0);
    ucy.assign(g.cell_count(), 0.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            ucx[g.cell_index(i, j)] = 0.5 * (v.ux(i, j) + v.ux(i + 1, j));
            ucy[g.cell_index(i, j)] = 0.5 * (v.uy(i, j) + v.uy(i, j + 1));
        }
}

}  // namespace chemostokes
