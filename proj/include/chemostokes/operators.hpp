#pragma once

#include "chemostokes/grid.hpp"

namespace chemostokes {

/// Face-centered gradient. Interior faces use the centered difference across
/// the face; boundary faces honor the field's descriptor (Neumann: zero normal
/// gradient, Dirichlet: one-sided difference through the prescribed trace).
VectorField grad_to_faces(const ScalarField& f, const GridSpec& g);

/// Per-cell MAC flux balance (Fx_e - Fx_w + Fy_n - Fy_s) / h.
ScalarField divergence(const VectorField& v, const GridSpec& g);

/// Discrete Laplacian as the exact stencil composition divergence(grad_to_faces(f)).
ScalarField laplacian(const ScalarField& f, const GridSpec& g);

/// Midpoint quadrature: h^2 * sum of cell values, fixed summation order.
double integrate(const ScalarField& f, const GridSpec& g);

/// MAC inner product h^2 * (sum over x-faces + sum over y-faces).
double face_inner(const VectorField& a, const VectorField& b, const GridSpec& g);

/// Face gradients averaged back to cell centers (gx, gy sized nx*ny).
void grad_at_centers(const ScalarField& f, const GridSpec& g,
                     std::vector<double>& gx, std::vector<double>& gy);

/// Face velocities averaged to cell centers.
void velocity_at_centers(const VectorField& v, const GridSpec& g,
                         std::vector<double>& ucx, std::vector<double>& ucy);

}  // namespace chemostokes
