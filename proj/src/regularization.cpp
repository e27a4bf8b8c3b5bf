#include "chemostokes/regularization.hpp"

#include <algorithm>
#include <cmath>

namespace chemostokes {

namespace {

void require_epsilon(double epsilon) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw ValidationError("epsilon_in_unit_interval", "epsilon must lie in (0, 1)");
}

void require_nonneg(double s, const char* who) {
    if (!(s >= 0.0))
        throw ValidationError("argument_nonnegative", std::string(who) + ": s must be >= 0");
}

}  // namespace

double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return ((6.0 * t - 15.0) * t + 10.0) * t * t * t;
}

ScalarField build_cutoff(const GridSpec& g, double epsilon) {
    require_epsilon(epsilon);
    const double width = 2.0 * epsilon * std::min(g.Lx, g.Ly);
    ScalarField rho(g, ScalarBc::Neumann);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (g.is_boundary_cell(i, j)) {
                rho.at(i, j) = 0.0;  // compact support strictly inside the domain
                continue;
            }
            rho.at(i, j) = smoothstep(g.center_boundary_distance(i, j) / width);
        }
    return rho;
}

RegParams make_reg_params(const GridSpec& g, double epsilon) {
    return RegParams{epsilon, build_cutoff(g, epsilon)};
}

double f_eps(double s, double epsilon) {
    require_nonneg(s, "f_eps");
    const double d = 1.0 + epsilon * s;
    return 1.0 / (d * d * d);
}

double g_eps(double s, double epsilon) {
    require_nonneg(s, "g_eps");
    return s / (1.0 + epsilon * s);
}

}  // namespace chemostokes
