#include <doctest.h>

#include <cmath>
#include <numbers>

#include "chemostokes/diagnostics.hpp"
#include "chemostokes/operators.hpp"
#include "chemostokes/weakform.hpp"

using namespace chemostokes;

namespace {

constexpr double kPi = std::numbers::pi;

struct Setup {
    GridSpec g;
    PhysicalParams p;
    RegParams reg;
    SchemeConfig cfg;
};

Setup make_setup(int n) {
    Setup s{GridSpec::unit_square(n), {}, {}, {}};
    s.p.kappa = 0.5;
    s.p.mu = 1.0;
    s.p.phi = sample_cells(s.g, ScalarBc::Neumann, [](double, double y) { return -y; });
    s.p.c_star = sample_dirichlet(
        s.g, [](double x, double) { return 1.0 + 0.5 * x * (1.0 - x); });
    s.reg = make_reg_params(s.g, 0.1);
    return s;
}

SimState initial_state(const Setup& su) {
    SimState s;
    s.n = sample_cells(su.g, ScalarBc::Neumann, [](double x, double y) {
        return std::max(0.1, 1.0 + 0.5 * std::cos(kPi * x) * std::cos(kPi * y));
    });
    s.c = su.p.c_star;
    s.u = VectorField(su.g);
    return s;
}

Trajectory simulate(const Setup& su, SimState s, double t_end, long snap_every) {
    Trajectory traj;
    const NeumannPoissonSolver solver(su.g);
    traj.push_back({s.t, s.n, s.c, s.u});
    long k = 0;
    while (s.t < t_end) {
        s = step(s, su.p, su.reg, su.cfg, su.g, solver);
        if (++k % snap_every == 0) traj.push_back({s.t, s.n, s.c, s.u});
    }
    return traj;
}

Trajectory constant_trajectory(const Setup& su, const SimState& s, int samples, double dt) {
    Trajectory traj;
    for (int k = 0; k < samples; ++k) {
        FieldTriple f{k * dt, s.n, s.c, s.u};
        traj.push_back(std::move(f));
    }
    return traj;
}

TestFunction zero_function(TestKind kind, double t_supp) {
    TestFunction tf;
    tf.id = "zero";
    tf.kind = kind;
    tf.t_supp = t_supp;
    const auto z = [](double, double, double) { return 0.0; };
    tf.value = tf.ddt = tf.ddx = tf.ddy = z;
    tf.vx = tf.vy = tf.vxt = tf.vyt = z;
    tf.dvx_dx = tf.dvx_dy = tf.dvy_dx = tf.dvy_dy = z;
    return tf;
}

TestFunction scale(const TestFunction& in, double lambda) {
    TestFunction tf = in;
    const auto wrap = [lambda](TestFunction::Fn f) -> TestFunction::Fn {
        if (!f) return f;
        return [lambda, f](double x, double y, double t) { return lambda * f(x, y, t); };
    };
    tf.value = wrap(in.value);
    tf.ddt = wrap(in.ddt);
    tf.ddx = wrap(in.ddx);
    tf.ddy = wrap(in.ddy);
    tf.vx = wrap(in.vx);
    tf.vy = wrap(in.vy);
    tf.vxt = wrap(in.vxt);
    tf.vyt = wrap(in.vyt);
    tf.dvx_dx = wrap(in.dvx_dx);
    tf.dvx_dy = wrap(in.dvx_dy);
    tf.dvy_dx = wrap(in.dvy_dx);
    tf.dvy_dy = wrap(in.dvy_dy);
    return tf;
}

}  // namespace

TEST_CASE("residuals vanish for zero test functions and zero trajectories") {
    Setup su = make_setup(16);
    SimState s = initial_state(su);
    const Trajectory traj = constant_trajectory(su, s, 17, 0.01);

    CHECK(residual_n(traj, zero_function(TestKind::FreeScalar, 0.16), su.p, su.g) == 0.0);

    SimState zero;
    zero.n = ScalarField(su.g, ScalarBc::Neumann, 0.0);
    zero.c = su.p.c_star;
    zero.u = VectorField(su.g);
    const Trajectory ztraj = constant_trajectory(su, zero, 17, 0.01);
    const auto suite = default_test_suite(su.g, 0.16);
    CHECK(residual_n(ztraj, suite[0], su.p, su.g) == 0.0);
    CHECK(residual_u(ztraj, suite[4], su.p, su.g) == 0.0);
}

TEST_CASE("steady constant signal satisfies the c identity up to quadrature error") {
    Setup su = make_setup(32);
    const double K = 1.5;
    su.p.c_star = sample_dirichlet(su.g, [&](double, double) { return K; });
    SimState s;
    s.n = ScalarField(su.g, ScalarBc::Neumann, 0.0);
    s.c = ScalarField(su.g, ScalarBc::Dirichlet, K);
    s.c.trace = su.p.c_star.trace;
    s.u = VectorField(su.g);

    const Trajectory traj = constant_trajectory(su, s, 65, 1.0 / 64.0);
    const auto suite = default_test_suite(su.g, 1.0);
    const double res = residual_c(traj, suite[2], su.g);
    CHECK(res <= 5e-4);  // pure time-quadrature error of the bump
}

TEST_CASE("default suite test functions satisfy their own preconditions") {
    Setup su = make_setup(16);
    const auto suite = default_test_suite(su.g, 0.2);
    REQUIRE(suite.size() == 6);
    CHECK(suite[0].kind == TestKind::FreeScalar);
    CHECK(suite[2].kind == TestKind::ZeroBoundaryScalar);
    CHECK(suite[4].kind == TestKind::SolenoidalVector);

    // Sampled divergence of the curl-built functions is at round-off.
    for (const auto& tf : {suite[4], suite[5]}) {
        double worst = 0.0;
        for (int j = 0; j < su.g.ny; ++j)
            for (int i = 0; i < su.g.nx; ++i)
                worst = std::max(worst,
                                 std::abs(tf.dvx_dx(su.g.x_center(i), su.g.y_center(j), 0.05) +
                                          tf.dvy_dy(su.g.x_center(i), su.g.y_center(j), 0.05)));
        CHECK(worst <= 1e-12);
    }

    // Values vanish for t >= t_supp.
    CHECK(suite[0].value(0.3, 0.4, 0.25) == 0.0);
    CHECK(suite[4].vx(0.3, 0.4, 0.25) == 0.0);
}

TEST_CASE("residuals are homogeneous of degree one in the test function") {
    Setup su = make_setup(16);
    SimState s = initial_state(su);
    // A short simulated stretch so every term is active.
    su.cfg.cfl_sigma = 1.0;
    su.cfg.dt_max = 5e-4;
    const Trajectory traj = simulate(su, s, 0.08, 10);
    const auto suite = default_test_suite(su.g, traj.back().t);

    const double lambda = -3.0;
    const double rn = residual_n(traj, suite[0], su.p, su.g);
    const double rn_scaled = residual_n(traj, scale(suite[0], lambda), su.p, su.g);
    CHECK(rn_scaled == doctest::Approx(std::abs(lambda) * rn).epsilon(1e-10));

    const double rc = residual_c(traj, suite[2], su.g);
    const double rc_scaled = residual_c(traj, scale(suite[2], lambda), su.g);
    CHECK(rc_scaled == doctest::Approx(std::abs(lambda) * rc).epsilon(1e-10));

    const double ru = residual_u(traj, suite[4], su.p, su.g);
    const double ru_scaled = residual_u(traj, scale(suite[4], lambda), su.p, su.g);
    CHECK(ru_scaled == doctest::Approx(std::abs(lambda) * ru).epsilon(1e-10));
}

TEST_CASE("fluid residual is invariant under shifting the potential") {
    Setup su = make_setup(16);
    SimState s = initial_state(su);
    su.cfg.cfl_sigma = 1.0;
    su.cfg.dt_max = 5e-4;
    const Trajectory traj = simulate(su, s, 0.08, 10);
    const auto suite = default_test_suite(su.g, traj.back().t);

    const double r1 = residual_u(traj, suite[4], su.p, su.g);
    Setup shifted = su;
    for (double& v : shifted.p.phi.values) v += 123.0;
    const double r2 = residual_u(traj, suite[4], shifted.p, su.g);
    CHECK(r1 == r2);
}

TEST_CASE("space-constant bump reduces residual_n to the integrated mass identity") {
    Setup su = make_setup(24);
    su.cfg.cfl_sigma = 1.0;
    su.cfg.dt_max = 2e-4;
    SimState s = initial_state(su);
    const Trajectory traj = simulate(su, s, 0.1, 5);
    const double t_end = traj.back().t;

    TestFunction tf;
    tf.id = "mass_bump";
    tf.kind = TestKind::FreeScalar;
    tf.t_supp = t_end;
    tf.value = [t_end](double, double, double t) {
        return t < t_end ? 1.0 - t / t_end : 0.0;
    };
    // Left-derivative convention at the support kink, so the trapezoid sees
    // the constant slope on every covered interval.
    tf.ddt = [t_end](double, double, double t) { return t <= t_end ? -1.0 / t_end : 0.0; };
    tf.ddx = [](double, double, double) { return 0.0; };
    tf.ddy = [](double, double, double) { return 0.0; };

    const double res = residual_n(traj, tf, su.p, su.g);

    // Cross-validation: the mass-ODE residual integrated against the bump
    // bounds the weak residual (both see the same discrete trajectory).
    std::vector<FunctionalRecord> recs;
    for (const FieldTriple& f : traj) {
        SimState st;
        st.n = f.n;
        st.c = f.c;
        st.u = f.u;
        st.t = f.t;
        recs.push_back(compute_record(st, su.g, su.reg, su.p));
    }
    const double delta = recs[1].t - recs[0].t;
    const MassOdeResult ode = check_mass_ode(recs, su.p.kappa, su.p.mu, delta, su.g.h);
    CHECK(res <= ode.max_residual * t_end + 1e-6);
}

TEST_CASE("epsilon_cauchy distances") {
    Setup su = make_setup(16);
    SimState s = initial_state(su);
    su.cfg.cfl_sigma = 1.0;
    su.cfg.dt_max = 5e-4;

    const auto run_at = [&](double eps) {
        Setup se = su;
        se.reg = make_reg_params(se.g, eps);
        return simulate(se, initial_state(se), 0.05, 10);
    };

    SUBCASE("identical epsilons give zero distance") {
        const Trajectory a = run_at(0.2);
        const CauchyDiffs d = epsilon_cauchy(a, a, su.g);
        CHECK(d.n == 0.0);
        CHECK(d.c == 0.0);
        CHECK(d.u == 0.0);
    }

    SUBCASE("different epsilons give a positive, finite distance") {
        const Trajectory a = run_at(0.2);
        const Trajectory b = run_at(0.1);
        const CauchyDiffs d = epsilon_cauchy(a, b, su.g);
        CHECK(d.n > 0.0);
        CHECK(d.c > 0.0);
        CHECK(std::isfinite(d.n + d.c + d.u));
    }

    SUBCASE("mismatched grids are rejected") {
        const Trajectory a = run_at(0.2);
        const GridSpec g2 = GridSpec::unit_square(8);
        CHECK_THROWS_AS(epsilon_cauchy(a, a, g2), ContractError);
    }
}

TEST_CASE("too-coarse snapshot cadence is rejected") {
    Setup su = make_setup(16);
    SimState s = initial_state(su);
    const Trajectory traj = constant_trajectory(su, s, 5, 0.05);  // 4 intervals over 0.2
    const auto suite = default_test_suite(su.g, 0.2);
    CHECK_THROWS_AS(residual_n(traj, suite[0], su.p, su.g), ContractError);
}
