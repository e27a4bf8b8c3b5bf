#pragma once

#include <functional>
#include <string>
#include <vector>

#include "chemostokes/stepper.hpp"

namespace chemostokes {

enum class TestKind { FreeScalar, ZeroBoundaryScalar, SolenoidalVector };

/// Analytic space-time test function with compact support in time. Scalar
/// kinds fill the value/ddt/ddx/ddy closures, the vector kind fills the
/// component closures plus the partials needed for gradient pairing and the
/// divergence self-check.
struct TestFunction {
    std::string id;
    TestKind kind = TestKind::FreeScalar;
    double t_supp = 1.0;

    using Fn = std::function<double(double, double, double)>;  // (x, y, t)
    Fn value, ddt, ddx, ddy;
    Fn vx, vy, vxt, vyt, dvx_dx, dvx_dy, dvy_dx, dvy_dy;
};

/// Time-stamped field snapshot; a trajectory is a uniform-cadence sequence
/// starting at t = 0.
struct FieldTriple {
    double t = 0.0;
    ScalarField n;
    ScalarField c;
    VectorField u;
};
using Trajectory = std::vector<FieldTriple>;

/// |LHS - RHS| of the cell-density weak identity: midpoint quadrature in
/// space, trapezoid in time, gradients from face differences.
double residual_n(const Trajectory& traj, const TestFunction& phi, const PhysicalParams& p,
                  const GridSpec& g);

/// Same for the signal identity; the consumption term uses the plain product
/// n c (the limit form, no regularizer).
double residual_c(const Trajectory& traj, const TestFunction& phi_hat, const GridSpec& g);

/// Same for the fluid identity; the test function is sampled at face centers
/// for the velocity pairing and its sampled divergence must vanish.
double residual_u(const Trajectory& traj, const TestFunction& psi, const PhysicalParams& p,
                  const GridSpec& g);

struct CauchyDiffs {
    double n = 0.0;
    double c = 0.0;
    double u = 0.0;
};

/// Discrete L^2(Omega x (0,T)) distances between two trajectories computed on
/// the same grid, cadence, and inputs except epsilon.
CauchyDiffs epsilon_cauchy(const Trajectory& a, const Trajectory& b, const GridSpec& g);

/// Built-in suite: polynomial-in-t bumps times trigonometric space factors,
/// plus stream-function curls; at least two functions per identity.
std::vector<TestFunction> default_test_suite(const GridSpec& g, double t_supp);

/// Velocity gradient tensor sampled at cell centers (for the weak pairing).
struct CenterGradients {
    std::vector<double> dux_dx, dux_dy, duy_dx, duy_dy;
};
CenterGradients velocity_gradients_at_centers(const VectorField& v, const GridSpec& g);

}  // namespace chemostokes
