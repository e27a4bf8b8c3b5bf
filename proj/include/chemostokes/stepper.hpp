#pragma once

#include <functional>
#include <vector>

#include "chemostokes/grid.hpp"
#include "chemostokes/poisson.hpp"
#include "chemostokes/regularization.hpp"

namespace chemostokes {

/// Model data: growth/decay rates, gravitational potential, boundary signal.
struct PhysicalParams {
    double kappa = 0.0;   // growth rate, >= 0
    double mu = 1.0;      // quadratic decay coefficient, > 0
    ScalarField phi;      // potential, Neumann-descriptor sampled field
    ScalarField c_star;   // prescribed signal, Dirichlet field with its trace
};

struct InitialData {
    ScalarField n0;  // Neumann
    ScalarField c0;  // Dirichlet, trace must match c_star
    VectorField u0;  // no-slip MAC field
};

struct SchemeConfig {
    double cfl_sigma = 0.65;       // in (0, 1]
    double dt_max = 1e-3;
    double projection_tol = 1e-10;
    double n_max_abort = 1e3;      // blow-up guard on ||n||_inf
    double dt_min_abort = 1e-12;   // blow-up guard on the step size
    double T = 1.0;
};

struct SimState {
    ScalarField n;
    ScalarField c;
    VectorField u;
    double t = 0.0;
    long step_index = 0;

    // Clip bookkeeping for the comparison-principle surrogate.
    double clipped_mass_cum = 0.0;    // mass added when clipping n at 0
    double clipped_c_cum = 0.0;       // same for c
    double worst_min_n = 0.0;         // most negative pre-clip n seen so far
    double worst_min_c = 0.0;
};

struct ScalarUpdate {
    ScalarField field;
    double clipped = 0.0;          // integrated amount removed by the clip
    double min_before_clip = 0.0;
};

/// Explicit stability bound:
/// dt = sigma * min(h^2/8, h/(|u|+|grad c|+delta), 1/(kappa+2 mu |n|+delta), dt_max).
/// Raises BlowupError when ||n||_inf exceeds n_max_abort or dt falls below
/// dt_min_abort (surrogate for the extensibility criterion).
double compute_dt(const SimState& s, const PhysicalParams& p, const SchemeConfig& cfg,
                  const GridSpec& g);

/// Conservative cell update of n: divergence of the face flux
/// grad n - rho_eps f_eps(n) n grad c - upwind(u n), plus the logistic source.
/// Boundary faces carry zero total flux. Negative results are clipped and logged.
ScalarUpdate step_n(const SimState& s, const PhysicalParams& p, const RegParams& reg,
                    double dt, const GridSpec& g);

/// Signal update: c + dt (lap c - upwind(u . grad c) - g_eps(n) c) with
/// Dirichlet ghosts from the c_star trace.
ScalarUpdate step_c(const SimState& s, const PhysicalParams& p, const RegParams& reg,
                    double dt, const GridSpec& g);

/// Stokes update: explicit diffusion + buoyancy n grad(phi), then projection.
VectorField step_u(const SimState& s, const PhysicalParams& p, double dt, const GridSpec& g,
                   double tol, const NeumannPoissonSolver& solver);
VectorField step_u(const SimState& s, const PhysicalParams& p, double dt, const GridSpec& g,
                   double tol);

/// One Lie-split step in the fixed order u -> c -> n, each sub-step reading
/// the newest available fields.
SimState step(const SimState& s, const PhysicalParams& p, const RegParams& reg,
              const SchemeConfig& cfg, const GridSpec& g, const NeumannPoissonSolver& solver);
SimState step(const SimState& s, const PhysicalParams& p, const RegParams& reg,
              const SchemeConfig& cfg, const GridSpec& g);

/// Buoyancy force n grad(phi) interpolated to faces (shared by the stepper and
/// the energy diagnostics so the discrete identity closes).
VectorField buoyancy_force_faces(const ScalarField& n, const ScalarField& phi,
                                 const GridSpec& g);

struct RunHooks {
    long record_every = 1;                 // cadence in steps; records start at step 0
    long snapshot_every = 0;               // 0 disables cadence snapshots
    std::vector<double> snapshot_times;    // additional one-shot snapshot targets
    std::function<void(const SimState&)> on_record;
    std::function<void(const SimState&)> on_snapshot;
};

/// Integrates to cfg.T (no final-step clamping, so the cadence stays uniform).
/// Inputs are assumed validated; sub-step errors are surfaced with step index
/// and time attached.
SimState run(const InitialData& id, const PhysicalParams& p, const RegParams& reg,
             const SchemeConfig& cfg, const GridSpec& g, const RunHooks& hooks);

/// Checks every PhysicalParams/InitialData assumption, projects u0 and fixes a
/// c0/c_star trace mismatch below 1e-12. Each violation raises a named
/// ValidationError.
InitialData validate_inputs(const InitialData& id, const PhysicalParams& p, const GridSpec& g,
                            double projection_tol = 1e-10);

/// Builds the time-zero SimState from validated inputs.
SimState make_initial_state(const InitialData& validated, const PhysicalParams& p,
                            const GridSpec& g);

}  // namespace chemostokes
