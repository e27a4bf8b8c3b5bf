#include "chemostokes/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chemostokes/operators.hpp"

namespace chemostokes {

namespace {

constexpr double kDtFloorShift = 1e-12;

double face_grad_max_abs(const ScalarField& f, const GridSpec& g) {
    return grad_to_faces(f, g).max_abs();
}

ScalarUpdate clip_nonnegative(ScalarField&& f, const GridSpec& g, const char* who) {
    ScalarUpdate out;
    out.min_before_clip = f.min_value();
    double removed = 0.0;
    for (double& v : f.values) {
        if (!std::isfinite(v))
            throw NumericalError(std::string(who) + ": non-finite value produced");
        if (v < 0.0) {
            removed += -v;
            v = 0.0;
        }
    }
    out.clipped = removed * g.h * g.h;
    out.field = std::move(f);
    return out;
}

}  // namespace

double compute_dt(const SimState& s, const PhysicalParams& p, const SchemeConfig& cfg,
                  const GridSpec& g) {
    const double norm_u = s.u.max_abs();
    const double norm_gc = face_grad_max_abs(s.c, g);
    const double norm_n = s.n.max_abs();
    if (!std::isfinite(norm_u) || !std::isfinite(norm_gc) || !std::isfinite(norm_n))
        throw NumericalError("compute_dt: non-finite state norm");
    if (norm_n > cfg.n_max_abort)
        throw BlowupError("blow-up suspected: ||n||_inf exceeded n_max_abort (" +
                              std::to_string(norm_n) + ")",
                          s.t, s.step_index);

    const double h = g.h;
    const double diffusion = h * h / 8.0;
    const double transport = h / (norm_u + norm_gc + kDtFloorShift);
    const double reaction = 1.0 / (p.kappa + 2.0 * p.mu * norm_n + kDtFloorShift);
    const double dt =
        cfg.cfl_sigma * std::min(std::min(diffusion, transport), std::min(reaction, cfg.dt_max));
    if (dt < cfg.dt_min_abort)
        throw BlowupError("blow-up suspected: stable dt fell below dt_min_abort (" +
                              std::to_string(dt) + ")",
                          s.t, s.step_index);
    return dt;
}

ScalarUpdate step_n(const SimState& s, const PhysicalParams& p, const RegParams& reg,
                    double dt, const GridSpec& g) {
    s.n.require_layout(g, "step_n");
    s.c.require_layout(g, "step_n");
    s.u.require_layout(g, "step_n");
    reg.rho.require_layout(g, "step_n");

    const ScalarField& n = s.n;
    const ScalarField& rho = reg.rho;
    const double eps = reg.epsilon;
    const double inv_h = 1.0 / g.h;

    // Total face flux: diffusive - chemotactic - advective. Boundary faces
    // carry zero flux (homogeneous Neumann for n, rho = 0 at the wall, u.nu = 0).
    VectorField flux(g, /*no_slip=*/false);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 1; i < g.nx; ++i) {
            const double nl = n.at(i - 1, j), nr = n.at(i, j);
            const double diff = (nr - nl) * inv_h;
            const double gc = (s.c.at(i, j) - s.c.at(i - 1, j)) * inv_h;
            const double chem = 0.5 * (rho.at(i - 1, j) + rho.at(i, j)) *
                                0.5 * (f_eps(nl, eps) + f_eps(nr, eps)) * 0.5 * (nl + nr) * gc;
            const double u = s.u.ux(i, j);
            const double adv = u * (u >= 0.0 ? nl : nr);
            flux.ux(i, j) = diff - chem - adv;
        }
    }
    for (int j = 1; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double nl = n.at(i, j - 1), nr = n.at(i, j);
            const double diff = (nr - nl) * inv_h;
            const double gc = (s.c.at(i, j) - s.c.at(i, j - 1)) * inv_h;
            const double chem = 0.5 * (rho.at(i, j - 1) + rho.at(i, j)) *
                                0.5 * (f_eps(nl, eps) + f_eps(nr, eps)) * 0.5 * (nl + nr) * gc;
            const double u = s.u.uy(i, j);
            const double adv = u * (u >= 0.0 ? nl : nr);
            flux.uy(i, j) = diff - chem - adv;
        }
    }

    const ScalarField div_flux = divergence(flux, g);
    ScalarField next(g, ScalarBc::Neumann);
    for (long idx = 0; idx < g.cell_count(); ++idx) {
        const double v = n.values[idx];
        next.values[idx] =
            v + dt * (div_flux.values[idx] + p.kappa * v - p.mu * v * v);
    }
    return clip_nonnegative(std::move(next), g, "step_n");
}

ScalarUpdate step_c(const SimState& s, const PhysicalParams& p, const RegParams& reg,
                    double dt, const GridSpec& g) {
    s.c.require_layout(g, "step_c");
    s.n.require_layout(g, "step_c");
    s.u.require_layout(g, "step_c");
    p.c_star.require_layout(g, "step_c");

    ScalarField c = s.c;
    c.bc = ScalarBc::Dirichlet;
    c.trace = p.c_star.trace;  // Dirichlet ghosts come from the prescribed signal

    const ScalarField lap = laplacian(c, g);
    const double inv_h = 1.0 / g.h;
    const double eps = reg.epsilon;

    ScalarField next = c;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            // First-order upwind advective derivative from face velocities.
            // Boundary faces carry u = 0, so missing neighbors are never read.
            double adv = 0.0;
            const double uxe = s.u.ux(i + 1, j);
            const double uxw = s.u.ux(i, j);
            if (uxe < 0.0 && i + 1 < g.nx) adv += uxe * (c.at(i + 1, j) - c.at(i, j)) * inv_h;
            if (uxw > 0.0 && i > 0) adv += uxw * (c.at(i, j) - c.at(i - 1, j)) * inv_h;
            const double uyn = s.u.uy(i, j + 1);
            const double uys = s.u.uy(i, j);
            if (uyn < 0.0 && j + 1 < g.ny) adv += uyn * (c.at(i, j + 1) - c.at(i, j)) * inv_h;
            if (uys > 0.0 && j > 0) adv += uys * (c.at(i, j) - c.at(i, j - 1)) * inv_h;

            const long idx = g.cell_index(i, j);
            next.values[idx] = c.values[idx] +
                               dt * (lap.values[idx] - adv -
                                     g_eps(s.n.values[idx], eps) * c.values[idx]);
        }
    }
    return clip_nonnegative(std::move(next), g, "step_c");
}

VectorField buoyancy_force_faces(const ScalarField& n, const ScalarField& phi,
                                 const GridSpec& g) {
    const VectorField gphi = grad_to_faces(phi, g);
    VectorField f(g, /*no_slip=*/false);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            f.ux(i, j) = 0.5 * (n.at(i - 1, j) + n.at(i, j)) * gphi.ux(i, j);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            f.uy(i, j) = 0.5 * (n.at(i, j - 1) + n.at(i, j)) * gphi.uy(i, j);
    return f;
}

VectorField step_u(const SimState& s, const PhysicalParams& p, double dt, const GridSpec& g,
                   double tol, const NeumannPoissonSolver& solver) {
    s.u.require_layout(g, "step_u");
    const VectorField force = buoyancy_force_faces(s.n, p.phi, g);
    const VectorField& u = s.u;
    const double inv_h2 = 1.0 / (g.h * g.h);

    VectorField ustar = u;
    // x-component: vertical walls hold stored zeros, horizontal walls use
    // reflected (Dirichlet-0) ghost values for the tangential velocity.
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 1; i < g.nx; ++i) {
            const double c0 = u.ux(i, j);
            const double left = u.ux(i - 1, j);
            const double right = u.ux(i + 1, j);
            const double down = (j > 0) ? u.ux(i, j - 1) : -c0;
            const double up = (j < g.ny - 1) ? u.ux(i, j + 1) : -c0;
            const double lap = (left + right + up + down - 4.0 * c0) * inv_h2;
            ustar.ux(i, j) = c0 + dt * (lap + force.ux(i, j));
        }
    }
    for (int j = 1; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double c0 = u.uy(i, j);
            const double down = u.uy(i, j - 1);
            const double up = u.uy(i, j + 1);
            const double left = (i > 0) ? u.uy(i - 1, j) : -c0;
            const double right = (i < g.nx - 1) ? u.uy(i + 1, j) : -c0;
            const double lap = (left + right + up + down - 4.0 * c0) * inv_h2;
            ustar.uy(i, j) = c0 + dt * (lap + force.uy(i, j));
        }
    }
    if (!ustar.all_finite()) throw NumericalError("step_u: non-finite velocity produced");
    return project(ustar, g, dt, tol, solver);
}

VectorField step_u(const SimState& s, const PhysicalParams& p, double dt, const GridSpec& g,
                   double tol) {
    return step_u(s, p, dt, g, tol, NeumannPoissonSolver(g));
}

SimState step(const SimState& s, const PhysicalParams& p, const RegParams& reg,
              const SchemeConfig& cfg, const GridSpec& g, const NeumannPoissonSolver& solver) {
    const double dt = compute_dt(s, p, cfg, g);

    SimState next = s;
    next.u = step_u(s, p, dt, g, cfg.projection_tol, solver);

    ScalarUpdate cu = step_c(next, p, reg, dt, g);
    next.c = std::move(cu.field);
    next.clipped_c_cum += cu.clipped;
    next.worst_min_c = std::min(next.worst_min_c, cu.min_before_clip);

    ScalarUpdate nu = step_n(next, p, reg, dt, g);
    next.n = std::move(nu.field);
    next.clipped_mass_cum += nu.clipped;
    next.worst_min_n = std::min(next.worst_min_n, nu.min_before_clip);

    next.t = s.t + dt;
    next.step_index = s.step_index + 1;
    return next;
}

SimState step(const SimState& s, const PhysicalParams& p, const RegParams& reg,
              const SchemeConfig& cfg, const GridSpec& g) {
    return step(s, p, reg, cfg, g, NeumannPoissonSolver(g));
}

SimState make_initial_state(const InitialData& validated, const PhysicalParams& p,
                            const GridSpec& g) {
    (void)g;
    SimState s;
    s.n = validated.n0;
    s.n.bc = ScalarBc::Neumann;
    s.c = validated.c0;
    s.c.bc = ScalarBc::Dirichlet;
    s.c.trace = p.c_star.trace;
    s.u = validated.u0;
    s.u.no_slip = true;
    return s;
}

SimState run(const InitialData& id, const PhysicalParams& p, const RegParams& reg,
             const SchemeConfig& cfg, const GridSpec& g, const RunHooks& hooks) {
    SimState s = make_initial_state(id, p, g);
    const NeumannPoissonSolver solver(g);

    std::vector<double> pending_times = hooks.snapshot_times;
    std::sort(pending_times.begin(), pending_times.end());
    size_t next_time = 0;

    const auto emit = [&](const SimState& state, bool force_snapshot) {
        if (hooks.on_record && hooks.record_every > 0 &&
            state.step_index % hooks.record_every == 0)
            hooks.on_record(state);
        bool want_snapshot = force_snapshot;
        if (hooks.snapshot_every > 0 && state.step_index % hooks.snapshot_every == 0)
            want_snapshot = true;
        while (next_time < pending_times.size() && state.t >= pending_times[next_time]) {
            want_snapshot = true;
            ++next_time;
        }
        if (want_snapshot && hooks.on_snapshot) hooks.on_snapshot(state);
    };

    emit(s, /*force_snapshot=*/hooks.snapshot_every > 0 || !pending_times.empty());
    if (cfg.T <= 0.0) return s;

    while (s.t < cfg.T) {
        try {
            s = step(s, p, reg, cfg, g, solver);
        } catch (const BlowupError&) {
            throw;
        } catch (const NumericalError& e) {
            throw NumericalError("run: step " + std::to_string(s.step_index + 1) + " at t=" +
                                 std::to_string(s.t) + " failed: " + e.what());
        } catch (const SolverError& e) {
            throw SolverError("run: step " + std::to_string(s.step_index + 1) + " at t=" +
                                  std::to_string(s.t) + " failed: " + e.what(),
                              e.residual());
        }
        emit(s, /*force_snapshot=*/false);
    }
    return s;
}

InitialData validate_inputs(const InitialData& id, const PhysicalParams& p, const GridSpec& g,
                            double projection_tol) {
    if (!(p.kappa >= 0.0))
        throw ValidationError("kappa_nonnegative", "kappa must satisfy kappa >= 0");
    if (!(p.mu > 0.0)) throw ValidationError("mu_positive", "mu must satisfy mu > 0");

    p.c_star.require_layout(g, "validate_inputs(c_star)");
    if (p.c_star.bc != ScalarBc::Dirichlet)
        throw ValidationError("c_star_has_trace", "c_star must carry a boundary trace");
    if (!p.c_star.all_finite())
        throw ValidationError("c_star_finite", "c_star contains non-finite values");
    if (p.c_star.min_value() < 0.0)
        throw ValidationError("c_star_nonnegative", "c_star must satisfy c_* >= 0");
    for (const auto* a : {&p.c_star.trace.west, &p.c_star.trace.east, &p.c_star.trace.south,
                          &p.c_star.trace.north})
        for (double v : *a)
            if (v < 0.0)
                throw ValidationError("c_star_nonnegative",
                                      "c_star trace must satisfy c_* >= 0");

    p.phi.require_layout(g, "validate_inputs(phi)");
    if (!p.phi.all_finite() || !grad_to_faces(p.phi, g).all_finite() ||
        !laplacian(p.phi, g).all_finite())
        throw ValidationError("phi_w2inf",
                              "phi must be finite with finite first/second differences");

    id.n0.require_layout(g, "validate_inputs(n0)");
    if (!id.n0.all_finite())
        throw ValidationError("n0_finite", "n0 contains non-finite values");
    if (id.n0.min_value() < 0.0)
        throw ValidationError("n0_nonnegative", "n0 must be nonnegative");
    if (id.n0.max_abs() == 0.0)
        throw ValidationError("n0_not_identically_zero", "n0 must not vanish identically");

    id.c0.require_layout(g, "validate_inputs(c0)");
    if (!id.c0.all_finite())
        throw ValidationError("c0_finite", "c0 contains non-finite values");
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double v = id.c0.at(i, j);
            if (g.is_boundary_cell(i, j) ? (v < 0.0) : !(v > 0.0))
                throw ValidationError("c0_positive_interior",
                                      "c0 must be positive away from the boundary");
        }

    InitialData out = id;
    out.c0.bc = ScalarBc::Dirichlet;
    if (static_cast<int>(id.c0.trace.west.size()) == g.ny) {
        double mismatch = 0.0;
        const auto acc = [&](const std::vector<double>& a, const std::vector<double>& b) {
            for (size_t k = 0; k < a.size(); ++k)
                mismatch = std::max(mismatch, std::abs(a[k] - b[k]));
        };
        acc(id.c0.trace.west, p.c_star.trace.west);
        acc(id.c0.trace.east, p.c_star.trace.east);
        acc(id.c0.trace.south, p.c_star.trace.south);
        acc(id.c0.trace.north, p.c_star.trace.north);
        if (mismatch > 1e-12)
            throw ValidationError("c0_boundary_trace_matches_c_star",
                                  "c0 boundary trace deviates from c_star by " +
                                      std::to_string(mismatch));
    }
    out.c0.trace = p.c_star.trace;

    out.u0.require_layout(g, "validate_inputs(u0)");
    if (!out.u0.all_finite())
        throw ValidationError("u0_finite", "u0 contains non-finite values");
    if (out.u0.boundary_face_max_abs() != 0.0)
        throw ValidationError("u0_no_slip", "u0 must vanish on boundary faces");
    out.u0.no_slip = true;
    out.u0 = project(out.u0, g, 1.0, projection_tol);
    return out;
}

}  // namespace chemostokes
