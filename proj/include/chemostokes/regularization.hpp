#pragma once

#include "chemostokes/grid.hpp"

namespace chemostokes {

/// The epsilon family: interior cutoff rho plus the saturation functions
/// f_eps, g_eps that turn the limit system into its approximating one.
struct RegParams {
    double epsilon = 0.0;
    ScalarField rho;
};

/// Quintic smoothstep 6t^5 - 15t^4 + 10t^3 clamped to [0, 1].
double smoothstep(double t);

/// Cutoff field rho(x) = S(d(x) / (2 eps min(Lx, Ly))) with d the distance of
/// the cell center to the boundary. Boundary-adjacent cells are forced to 0 so
/// the discrete support stays strictly interior at every grid resolution.
ScalarField build_cutoff(const GridSpec& g, double epsilon);

RegParams make_reg_params(const GridSpec& g, double epsilon);

/// f_eps(s) = (1 + eps s)^-3, defined for s >= 0.
double f_eps(double s, double epsilon);

/// g_eps(s) = s / (1 + eps s), defined for s >= 0.
double g_eps(double s, double epsilon);

}  // namespace chemostokes
