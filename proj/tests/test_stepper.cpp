#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "chemostokes/diagnostics.hpp"
#include "chemostokes/operators.hpp"
#include "chemostokes/stepper.hpp"

using namespace chemostokes;

namespace {

constexpr double kPi = std::numbers::pi;

struct Setup {
    GridSpec g;
    PhysicalParams p;
    RegParams reg;
    SchemeConfig cfg;
};

Setup make_setup(int n, double kappa = 0.5, double mu = 1.0, double eps = 0.1) {
    Setup s{GridSpec::unit_square(n), {}, {}, {}};
    s.p.kappa = kappa;
    s.p.mu = mu;
    s.p.phi = sample_cells(s.g, ScalarBc::Neumann, [](double, double y) { return -y; });
    s.p.c_star = sample_dirichlet(
        s.g, [](double x, double) { return 1.0 + 0.5 * x * (1.0 - x); });
    s.reg = make_reg_params(s.g, eps);
    return s;
}

SimState uniform_state(const Setup& su, double n_val, double c_val) {
    SimState s;
    s.n = ScalarField(su.g, ScalarBc::Neumann, n_val);
    s.c = ScalarField(su.g, ScalarBc::Dirichlet, c_val);
    s.c.trace = su.p.c_star.trace;
    s.u = VectorField(su.g);
    return s;
}

SimState default_like_state(const Setup& su) {
    SimState s;
    s.n = sample_cells(su.g, ScalarBc::Neumann, [](double x, double y) {
        return std::max(0.1, 1.0 + 0.5 * std::cos(kPi * x) * std::cos(kPi * y));
    });
    s.c = su.p.c_star;
    s.u = VectorField(su.g);
    return s;
}

double state_distance(const SimState& a, const SimState& b) {
    double d = 0.0;
    for (size_t k = 0; k < a.n.values.size(); ++k)
        d = std::max(d, std::abs(a.n.values[k] - b.n.values[k]));
    for (size_t k = 0; k < a.c.values.size(); ++k)
        d = std::max(d, std::abs(a.c.values[k] - b.c.values[k]));
    for (size_t k = 0; k < a.u.x.size(); ++k)
        d = std::max(d, std::abs(a.u.x[k] - b.u.x[k]));
    for (size_t k = 0; k < a.u.y.size(); ++k)
        d = std::max(d, std::abs(a.u.y[k] - b.u.y[k]));
    return d;
}

}  // namespace

TEST_CASE("compute_dt picks the binding stability term") {
    Setup su = make_setup(32);
    su.cfg.cfl_sigma = 1.0;
    su.cfg.dt_max = 1.0;

    SUBCASE("zero state: diffusion binds") {
        SimState s = uniform_state(su, 0.0, 0.0);
        s.c.trace = sample_trace(su.g, [](double, double) { return 0.0; });
        CHECK(compute_dt(s, su.p, su.cfg, su.g) == su.g.h * su.g.h / 8.0);
    }

    SUBCASE("huge velocity: transport binds") {
        SimState s = uniform_state(su, 0.0, 0.0);
        s.c.trace = sample_trace(su.g, [](double, double) { return 0.0; });
        s.u.ux(10, 10) = 1e6;
        const double dt = compute_dt(s, su.p, su.cfg, su.g);
        CHECK(dt == doctest::Approx(su.g.h / 1e6).epsilon(1e-9));
    }

    SUBCASE("norm guard trips before non-finite values") {
        su.cfg.n_max_abort = 10.0;
        SimState s = uniform_state(su, 11.0, 1.0);
        CHECK_THROWS_AS(compute_dt(s, su.p, su.cfg, su.g), BlowupError);
    }

    SUBCASE("dt guard trips") {
        su.cfg.dt_min_abort = 1e-3;  // above the diffusive bound
        SimState s = uniform_state(su, 1.0, 1.0);
        CHECK_THROWS_AS(compute_dt(s, su.p, su.cfg, su.g), BlowupError);
    }
}

TEST_CASE("step_n keeps the zero equilibrium and the uniform logistic map") {
    Setup su = make_setup(16, /*kappa=*/1.0, /*mu=*/2.0);

    SUBCASE("n = 0 is a fixed point") {
        SimState s = uniform_state(su, 0.0, 1.0);
        const ScalarUpdate up = step_n(s, su.p, su.reg, 1e-3, su.g);
        for (double v : up.field.values) CHECK(v == 0.0);
        CHECK(up.clipped == 0.0);
    }

    SUBCASE("uniform fields follow the pointwise logistic update exactly") {
        const double nbar = 0.37, dt = 2e-3;
        SimState s = uniform_state(su, nbar, 1.0);
        const ScalarUpdate up = step_n(s, su.p, su.reg, dt, su.g);
        const double expect = nbar + dt * (su.p.kappa * nbar - su.p.mu * nbar * nbar);
        for (double v : up.field.values) CHECK(v == expect);
    }

    SUBCASE("iterated uniform update converges to kappa/mu") {
        SimState s = uniform_state(su, 0.1, 1.0);
        const double dt = 0.01;
        for (int k = 0; k < 4000; ++k) s.n = step_n(s, su.p, su.reg, dt, su.g).field;
        for (double v : s.n.values) CHECK(v == doctest::Approx(0.5).epsilon(1e-10));
    }
}

TEST_CASE("step_c holds steady states and uniform consumption exactly") {
    Setup su = make_setup(16);
    const double K = 2.25;
    su.p.c_star = sample_dirichlet(su.g, [&](double, double) { return K; });

    SUBCASE("constant signal with matching trace is steady") {
        SimState s = uniform_state(su, 0.0, K);
        s.c.trace = su.p.c_star.trace;
        const ScalarUpdate up = step_c(s, su.p, su.reg, 1e-3, su.g);
        for (double v : up.field.values) CHECK(v == K);
    }

    SUBCASE("uniform consumption matches the closed form in the interior") {
        const double nbar = 0.8, dt = 1e-3;
        SimState s = uniform_state(su, nbar, K);
        s.c.trace = su.p.c_star.trace;
        const ScalarUpdate up = step_c(s, su.p, su.reg, dt, su.g);
        const double expect = K - dt * g_eps(nbar, su.reg.epsilon) * K;
        for (int j = 1; j < su.g.ny - 1; ++j)
            for (int i = 1; i < su.g.nx - 1; ++i)
                CHECK(up.field.at(i, j) == doctest::Approx(expect).epsilon(1e-15));
    }
}

TEST_CASE("pure heat equation decays at the Dirichlet rate") {
    // Oracle: the analytic solution e^{-2 pi^2 t} sin(pi x) sin(pi y).
    Setup su = make_setup(32);
    su.p.kappa = 0.0;
    su.p.c_star = sample_dirichlet(su.g, [](double, double) { return 0.0; });
    su.cfg.cfl_sigma = 0.65;

    SimState s;
    s.n = ScalarField(su.g, ScalarBc::Neumann, 0.0);
    s.c = sample_dirichlet(su.g, [](double x, double y) {
        return std::sin(kPi * x) * std::sin(kPi * y);
    });
    s.u = VectorField(su.g);

    const double c0_max = s.c.max_value();
    const double T = 0.1;
    while (s.t < T) {
        const double dt = compute_dt(s, su.p, su.cfg, su.g);
        s.c = step_c(s, su.p, su.reg, dt, su.g).field;
        s.t += dt;
    }
    const double measured_rate = -std::log(s.c.max_value() / c0_max) / s.t;
    CHECK(measured_rate == doctest::Approx(2.0 * kPi * kPi).epsilon(0.01));
}

TEST_CASE("step_u respects rest states and dissipates kinetic energy") {
    Setup su = make_setup(32);

    SUBCASE("rest state with no forcing stays at rest") {
        SimState s = uniform_state(su, 0.0, 1.0);
        const VectorField u = step_u(s, su.p, 1e-4, su.g, 1e-12);
        CHECK(u.max_abs() == 0.0);
    }

    SUBCASE("constant potential produces no forcing") {
        su.p.phi = ScalarField(su.g, ScalarBc::Neumann, 42.0);
        SimState s = default_like_state(su);
        const VectorField u = step_u(s, su.p, 1e-4, su.g, 1e-12);
        CHECK(u.max_abs() == 0.0);
    }

    SUBCASE("Stokes decay: kinetic energy strictly decreases") {
        SimState s = uniform_state(su, 0.0, 1.0);
        const double inv_h = 1.0 / su.g.h;
        const auto psi = [](double x, double y) {
            const double sx = std::sin(kPi * x), sy = std::sin(kPi * y);
            return 0.1 * sx * sx * sy * sy;
        };
        for (int j = 0; j < su.g.ny; ++j)
            for (int i = 0; i <= su.g.nx; ++i)
                s.u.ux(i, j) =
                    (psi(su.g.x_face(i), su.g.y_face(j + 1)) -
                     psi(su.g.x_face(i), su.g.y_face(j))) * inv_h;
        for (int j = 0; j <= su.g.ny; ++j)
            for (int i = 0; i < su.g.nx; ++i)
                s.u.uy(i, j) =
                    -(psi(su.g.x_face(i + 1), su.g.y_face(j)) -
                      psi(su.g.x_face(i), su.g.y_face(j))) * inv_h;

        const NeumannPoissonSolver solver(su.g);
        double prev = face_inner(s.u, s.u, su.g);
        for (int k = 0; k < 40; ++k) {
            const double dt = compute_dt(s, su.p, su.cfg, su.g);
            s.u = step_u(s, su.p, dt, su.g, su.cfg.projection_tol, solver);
            const double ke = face_inner(s.u, s.u, su.g);
            CHECK(ke < prev);
            prev = ke;
        }
    }
}

TEST_CASE("step holds the exact steady state and balances mass") {
    Setup su = make_setup(32);
    const double K = 1.5;
    su.p.kappa = 0.0;
    su.p.c_star = sample_dirichlet(su.g, [&](double, double) { return K; });

    SUBCASE("steady state is reproduced to round-off") {
        SimState s = uniform_state(su, 0.0, K);
        s.c.trace = su.p.c_star.trace;
        const SimState next = step(s, su.p, su.reg, su.cfg, su.g);
        CHECK(state_distance(s, next) <= 1e-14);
    }

    SUBCASE("single-step mass balance telescopes") {
        Setup sd = make_setup(32);
        SimState s = default_like_state(sd);
        const double dt = compute_dt(s, sd.p, sd.cfg, sd.g);
        const SimState next = step(s, sd.p, sd.reg, sd.cfg, sd.g);

        // The flux terms telescope, so the only residual is the clip (if any)
        // plus round-off. Note the update uses the mid state's n (u and c were
        // already advanced), which for the split order u->c->n is s.n itself.
        const double mass0 = integrate(s.n, sd.g);
        ScalarField nsq = s.n;
        for (double& v : nsq.values) v *= v;
        const double rhs = sd.p.kappa * mass0 - sd.p.mu * integrate(nsq, sd.g);
        const double residual =
            std::abs(integrate(next.n, sd.g) - mass0 - dt * rhs) / dt;
        CHECK(residual <= 1e-10);
    }
}

TEST_CASE("two half-steps versus one full step scale at the splitting order") {
    Setup su = make_setup(32);
    SimState s0 = default_like_state(su);
    // Give the fluid something to do so every sub-equation participates.
    {
        const NeumannPoissonSolver solver(su.g);
        for (int k = 0; k < 5; ++k) s0 = step(s0, su.p, su.reg, su.cfg, su.g, solver);
    }

    const auto split_defect = [&](double dt) {
        SchemeConfig big = su.cfg;
        big.cfl_sigma = 1.0;
        big.dt_max = dt;  // forces dt exactly (other terms are larger)
        SchemeConfig half = big;
        half.dt_max = dt / 2.0;
        const NeumannPoissonSolver solver(su.g);
        const SimState full = step(s0, su.p, su.reg, big, su.g, solver);
        SimState two = step(s0, su.p, su.reg, half, su.g, solver);
        two = step(two, su.p, su.reg, half, su.g, solver);
        return state_distance(full, two);
    };

    const double base_dt = su.g.h * su.g.h / 16.0;
    const double d1 = split_defect(base_dt);
    const double d2 = split_defect(base_dt / 2.0);
    CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.4));
}

TEST_CASE("run reaches T, emits records, and is bitwise reproducible") {
    Setup su = make_setup(16);
    su.cfg.T = 0.02;
    InitialData id;
    id.n0 = sample_cells(su.g, ScalarBc::Neumann, [](double x, double y) {
        return std::max(0.1, 1.0 + 0.5 * std::cos(kPi * x) * std::cos(kPi * y));
    });
    id.c0 = su.p.c_star;
    id.u0 = VectorField(su.g);
    const InitialData valid = validate_inputs(id, su.p, su.g);

    const auto capture = [&](double T) {
        std::vector<FunctionalRecord> recs;
        RunHooks hooks;
        hooks.record_every = 5;
        hooks.on_record = [&](const SimState& st) {
            recs.push_back(compute_record(st, su.g, su.reg, su.p));
        };
        SchemeConfig cfg = su.cfg;
        cfg.T = T;
        const SimState fin = run(valid, su.p, su.reg, cfg, su.g, hooks);
        return std::pair{recs, fin};
    };

    SUBCASE("T = 0 returns the initial state with one record") {
        const auto [recs, fin] = capture(0.0);
        CHECK(recs.size() == 1);
        CHECK(fin.t == 0.0);
        CHECK(fin.step_index == 0);
    }

    SUBCASE("identical inputs give bitwise-identical record streams") {
        const auto [ra, fa] = capture(su.cfg.T);
        const auto [rb, fb] = capture(su.cfg.T);
        CHECK(fa.t >= su.cfg.T);
        REQUIRE(ra.size() == rb.size());
        CHECK(ra.size() > 2);
        for (size_t k = 0; k < ra.size(); ++k)
            CHECK(ra[k].csv_row() == rb[k].csv_row());
    }
}

TEST_CASE("validate_inputs rejects each violated assumption by name") {
    Setup su = make_setup(16);
    InitialData id;
    id.n0 = ScalarField(su.g, ScalarBc::Neumann, 1.0);
    id.c0 = su.p.c_star;
    id.u0 = VectorField(su.g);

    SUBCASE("accepts the default scenario") {
        CHECK_NOTHROW(validate_inputs(id, su.p, su.g));
    }

    SUBCASE("n0 identically zero") {
        id.n0 = ScalarField(su.g, ScalarBc::Neumann, 0.0);
        try {
            validate_inputs(id, su.p, su.g);
            FAIL("expected rejection");
        } catch (const ValidationError& e) {
            CHECK(e.assumption() == "n0_not_identically_zero");
        }
    }

    SUBCASE("negative n0") {
        id.n0.at(3, 3) = -1e-3;
        try {
            validate_inputs(id, su.p, su.g);
            FAIL("expected rejection");
        } catch (const ValidationError& e) {
            CHECK(e.assumption() == "n0_nonnegative");
        }
    }

    SUBCASE("mu = 0") {
        su.p.mu = 0.0;
        try {
            validate_inputs(id, su.p, su.g);
            FAIL("expected rejection");
        } catch (const ValidationError& e) {
            CHECK(e.assumption() == "mu_positive");
        }
    }

    SUBCASE("c_star with a negative cell") {
        su.p.c_star.at(2, 2) = -0.25;
        try {
            validate_inputs(id, su.p, su.g);
            FAIL("expected rejection");
        } catch (const ValidationError& e) {
            CHECK(e.assumption() == "c_star_nonnegative");
        }
    }

    SUBCASE("c0 trace mismatch beyond 1e-12") {
        id.c0.trace.west[2] += 1e-6;
        try {
            validate_inputs(id, su.p, su.g);
            FAIL("expected rejection");
        } catch (const ValidationError& e) {
            CHECK(e.assumption() == "c0_boundary_trace_matches_c_star");
        }
    }

    SUBCASE("tiny c0 trace mismatch is repaired") {
        id.c0.trace.west[2] += 5e-13;
        const InitialData fixed = validate_inputs(id, su.p, su.g);
        CHECK(fixed.c0.trace.west[2] == su.p.c_star.trace.west[2]);
    }

    SUBCASE("u0 with nonzero boundary face") {
        id.u0.ux(0, 3) = 0.1;
        try {
            validate_inputs(id, su.p, su.g);
            FAIL("expected rejection");
        } catch (const ValidationError& e) {
            CHECK(e.assumption() == "u0_no_slip");
        }
    }
}
