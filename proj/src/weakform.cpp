#include "chemostokes/weakform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chemostokes/operators.hpp"

namespace chemostokes {

namespace {

void require_trajectory(const Trajectory& traj, const TestFunction& tf, const GridSpec& g,
                        const char* who) {
    if (traj.size() < 2) throw ContractError(std::string(who) + ": need >= 2 snapshots");
    const double delta = traj[1].t - traj[0].t;
    if (!(delta > 0.0))
        throw ContractError(std::string(who) + ": snapshot times must increase");
    for (size_t k = 0; k + 1 < traj.size(); ++k)
        if (std::abs(traj[k + 1].t - traj[k].t - delta) > 1e-9 * delta)
            throw ContractError(std::string(who) + ": snapshot cadence is not uniform");
    if (std::abs(traj.front().t) > 1e-12)
        throw ContractError(std::string(who) + ": trajectory must start at t = 0");
    if (traj.back().t < tf.t_supp * (1.0 - 1e-9))
        throw ContractError(std::string(who) + ": snapshots do not cover [0, T_supp]");
    if (tf.t_supp / delta < 8.0 - 1e-9)
        throw ContractError(std::string(who) + ": snapshot cadence too coarse (< 8 samples)");
    for (const FieldTriple& f : traj) {
        f.n.require_layout(g, who);
        f.c.require_layout(g, who);
        f.u.require_layout(g, who);
    }
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& v) {
    double s = 0.0;
    for (size_t k = 0; k + 1 < t.size(); ++k)
        s += 0.5 * (v[k] + v[k + 1]) * (t[k + 1] - t[k]);
    return s;
}

void require_zero_boundary(const TestFunction& tf, const GridSpec& g, const char* who) {
    const double times[] = {0.0, 0.25 * tf.t_supp, 0.5 * tf.t_supp};
    double worst = 0.0;
    const auto probe = [&](double x, double y, double t) {
        if (tf.kind == TestKind::SolenoidalVector)
            worst = std::max({worst, std::abs(tf.vx(x, y, t)), std::abs(tf.vy(x, y, t))});
        else
            worst = std::max(worst, std::abs(tf.value(x, y, t)));
    };
    for (double t : times) {
        for (int j = 0; j < g.ny; ++j) {
            probe(0.0, g.y_center(j), t);
            probe(g.Lx, g.y_center(j), t);
        }
        for (int i = 0; i < g.nx; ++i) {
            probe(g.x_center(i), 0.0, t);
            probe(g.x_center(i), g.Ly, t);
        }
    }
    if (worst > 1e-12)
        throw ContractError(std::string(who) + ": test function does not vanish on the boundary");
}

}  // namespace

double residual_n(const Trajectory& traj, const TestFunction& phi, const PhysicalParams& p,
                  const GridSpec& g) {
    if (phi.kind != TestKind::FreeScalar)
        throw ContractError("residual_n: free-boundary scalar test function required");
    require_trajectory(traj, phi, g, "residual_n");
    const double h2 = g.h * g.h;

    const size_t m = traj.size();
    std::vector<double> t(m), i_phit(m), i_gradpair(m), i_chem(m), i_lin(m), i_quad(m),
        i_adv(m);
    std::vector<double> gnx, gny, gcx, gcy, ucx, ucy;
    for (size_t k = 0; k < m; ++k) {
        const FieldTriple& f = traj[k];
        t[k] = f.t;
        grad_at_centers(f.n, g, gnx, gny);
        grad_at_centers(f.c, g, gcx, gcy);
        velocity_at_centers(f.u, g, ucx, ucy);
        double a_phit = 0.0, a_grad = 0.0, a_chem = 0.0, a_lin = 0.0, a_quad = 0.0,
               a_adv = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const long idx = g.cell_index(i, j);
                const double x = g.x_center(i), y = g.y_center(j);
                const double nv = f.n.values[idx];
                const double px = phi.ddx(x, y, f.t), py = phi.ddy(x, y, f.t);
                a_phit += nv * phi.ddt(x, y, f.t);
                a_grad += gnx[idx] * px + gny[idx] * py;
                a_chem += nv * (gcx[idx] * px + gcy[idx] * py);
                a_lin += nv * phi.value(x, y, f.t);
                a_quad += nv * nv * phi.value(x, y, f.t);
                a_adv += nv * (ucx[idx] * px + ucy[idx] * py);
            }
        i_phit[k] = a_phit * h2;
        i_gradpair[k] = a_grad * h2;
        i_chem[k] = a_chem * h2;
        i_lin[k] = a_lin * h2;
        i_quad[k] = a_quad * h2;
        i_adv[k] = a_adv * h2;
    }

    double init = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            init += traj[0].n.at(i, j) * phi.value(g.x_center(i), g.y_center(j), 0.0);
    init *= h2;

    const double lhs = -trapezoid(t, i_phit) - init;
    const double rhs = -trapezoid(t, i_gradpair) + trapezoid(t, i_chem) +
                       p.kappa * trapezoid(t, i_lin) - p.mu * trapezoid(t, i_quad) +
                       trapezoid(t, i_adv);
    return std::abs(lhs - rhs);
}

double residual_c(const Trajectory& traj, const TestFunction& phi_hat, const GridSpec& g) {
    if (phi_hat.kind != TestKind::ZeroBoundaryScalar)
        throw ContractError("residual_c: zero-boundary scalar test function required");
    require_trajectory(traj, phi_hat, g, "residual_c");
    require_zero_boundary(phi_hat, g, "residual_c");
    const double h2 = g.h * g.h;

    const size_t m = traj.size();
    std::vector<double> t(m), i_phit(m), i_grad(m), i_cons(m), i_adv(m);
    std::vector<double> gcx, gcy, ucx, ucy;
    for (size_t k = 0; k < m; ++k) {
        const FieldTriple& f = traj[k];
        t[k] = f.t;
        grad_at_centers(f.c, g, gcx, gcy);
        velocity_at_centers(f.u, g, ucx, ucy);
        double a_phit = 0.0, a_grad = 0.0, a_cons = 0.0, a_adv = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const long idx = g.cell_index(i, j);
                const double x = g.x_center(i), y = g.y_center(j);
                const double cv = f.c.values[idx];
                const double px = phi_hat.ddx(x, y, f.t), py = phi_hat.ddy(x, y, f.t);
                a_phit += cv * phi_hat.ddt(x, y, f.t);
                a_grad += gcx[idx] * px + gcy[idx] * py;
                a_cons += f.n.values[idx] * cv * phi_hat.value(x, y, f.t);
                a_adv += cv * (ucx[idx] * px + ucy[idx] * py);
            }
        i_phit[k] = a_phit * h2;
        i_grad[k] = a_grad * h2;
        i_cons[k] = a_cons * h2;
        i_adv[k] = a_adv * h2;
    }

    double init = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            init += traj[0].c.at(i, j) * phi_hat.value(g.x_center(i), g.y_center(j), 0.0);
    init *= h2;

    const double lhs = -trapezoid(t, i_phit) - init;
    const double rhs = -trapezoid(t, i_grad) - trapezoid(t, i_cons) + trapezoid(t, i_adv);
    return std::abs(lhs - rhs);
}

CenterGradients velocity_gradients_at_centers(const VectorField& v, const GridSpec& g) {
    v.require_layout(g, "velocity_gradients_at_centers");
    CenterGradients cg;
    cg.dux_dx.assign(g.cell_count(), 0.0);
    cg.dux_dy.assign(g.cell_count(), 0.0);
    cg.duy_dx.assign(g.cell_count(), 0.0);
    cg.duy_dy.assign(g.cell_count(), 0.0);
    const double inv_h = 1.0 / g.h;

    // Vertical variation of ux at an x-face, one-sided at the walls.
    const auto ux_dy = [&](int i, int j) {
        if (j == 0) return (v.ux(i, 1) - v.ux(i, 0)) * inv_h;
        if (j == g.ny - 1) return (v.ux(i, j) - v.ux(i, j - 1)) * inv_h;
        return (v.ux(i, j + 1) - v.ux(i, j - 1)) * (0.5 * inv_h);
    };
    const auto uy_dx = [&](int i, int j) {
        if (i == 0) return (v.uy(1, j) - v.uy(0, j)) * inv_h;
        if (i == g.nx - 1) return (v.uy(i, j) - v.uy(i - 1, j)) * inv_h;
        return (v.uy(i + 1, j) - v.uy(i - 1, j)) * (0.5 * inv_h);
    };

    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const long idx = g.cell_index(i, j);
            cg.dux_dx[idx] = (v.ux(i + 1, j) - v.ux(i, j)) * inv_h;
            cg.duy_dy[idx] = (v.uy(i, j + 1) - v.uy(i, j)) * inv_h;
            cg.dux_dy[idx] = 0.5 * (ux_dy(i, j) + ux_dy(i + 1, j));
            cg.duy_dx[idx] = 0.5 * (uy_dx(i, j) + uy_dx(i, j + 1));
        }
    return cg;
}

double residual_u(const Trajectory& traj, const TestFunction& psi, const PhysicalParams& p,
                  const GridSpec& g) {
    if (psi.kind != TestKind::SolenoidalVector)
        throw ContractError("residual_u: solenoidal vector test function required");
    require_trajectory(traj, psi, g, "residual_u");
    require_zero_boundary(psi, g, "residual_u");

    // Sampled-divergence self-check on the analytic closures.
    double div_worst = 0.0;
    for (double t : {0.0, 0.5 * psi.t_supp})
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.x_center(i), y = g.y_center(j);
                div_worst =
                    std::max(div_worst, std::abs(psi.dvx_dx(x, y, t) + psi.dvy_dy(x, y, t)));
            }
    if (div_worst > 1e-12)
        throw ContractError("residual_u: test function divergence exceeds 1e-12");

    const double h2 = g.h * g.h;
    const size_t m = traj.size();
    std::vector<double> t(m), i_psit(m), i_grad(m), i_force(m);
    for (size_t k = 0; k < m; ++k) {
        const FieldTriple& f = traj[k];
        t[k] = f.t;

        double a_psit = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i <= g.nx; ++i)
                a_psit += f.u.ux(i, j) * psi.vxt(g.x_face(i), g.y_center(j), f.t);
        for (int j = 0; j <= g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                a_psit += f.u.uy(i, j) * psi.vyt(g.x_center(i), g.y_face(j), f.t);
        i_psit[k] = a_psit * h2;

        const CenterGradients cg = velocity_gradients_at_centers(f.u, g);
        double a_grad = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const long idx = g.cell_index(i, j);
                const double x = g.x_center(i), y = g.y_center(j);
                a_grad += cg.dux_dx[idx] * psi.dvx_dx(x, y, f.t) +
                          cg.dux_dy[idx] * psi.dvx_dy(x, y, f.t) +
                          cg.duy_dx[idx] * psi.dvy_dx(x, y, f.t) +
                          cg.duy_dy[idx] * psi.dvy_dy(x, y, f.t);
            }
        i_grad[k] = a_grad * h2;

        const VectorField force = buoyancy_force_faces(f.n, p.phi, g);
        double a_force = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i <= g.nx; ++i)
                a_force += force.ux(i, j) * psi.vx(g.x_face(i), g.y_center(j), f.t);
        for (int j = 0; j <= g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                a_force += force.uy(i, j) * psi.vy(g.x_center(i), g.y_face(j), f.t);
        i_force[k] = a_force * h2;
    }

    double init = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            init += traj[0].u.ux(i, j) * psi.vx(g.x_face(i), g.y_center(j), 0.0);
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            init += traj[0].u.uy(i, j) * psi.vy(g.x_center(i), g.y_face(j), 0.0);
    init *= h2;

    const double lhs = -trapezoid(t, i_psit) - init;
    const double rhs = -trapezoid(t, i_grad) + trapezoid(t, i_force);
    return std::abs(lhs - rhs);
}

CauchyDiffs epsilon_cauchy(const Trajectory& a, const Trajectory& b, const GridSpec& g) {
    if (a.size() != b.size() || a.size() < 2)
        throw ContractError("epsilon_cauchy: trajectories must share size >= 2");
    for (size_t k = 0; k < a.size(); ++k) {
        a[k].n.require_layout(g, "epsilon_cauchy");
        b[k].n.require_layout(g, "epsilon_cauchy");
        a[k].u.require_layout(g, "epsilon_cauchy");
        b[k].u.require_layout(g, "epsilon_cauchy");
        if (std::abs(a[k].t - b[k].t) > 1e-12)
            throw ContractError("epsilon_cauchy: snapshot times do not match");
    }
    const double h2 = g.h * g.h;
    const size_t m = a.size();
    std::vector<double> t(m), dn(m), dc(m), du(m);
    for (size_t k = 0; k < m; ++k) {
        t[k] = a[k].t;
        double sn = 0.0, sc = 0.0, su = 0.0;
        for (long idx = 0; idx < g.cell_count(); ++idx) {
            const double vn = a[k].n.values[idx] - b[k].n.values[idx];
            const double vc = a[k].c.values[idx] - b[k].c.values[idx];
            sn += vn * vn;
            sc += vc * vc;
        }
        for (size_t f = 0; f < a[k].u.x.size(); ++f) {
            const double v = a[k].u.x[f] - b[k].u.x[f];
            su += v * v;
        }
        for (size_t f = 0; f < a[k].u.y.size(); ++f) {
            const double v = a[k].u.y[f] - b[k].u.y[f];
            su += v * v;
        }
        dn[k] = sn * h2;
        dc[k] = sc * h2;
        du[k] = su * h2;
    }
    CauchyDiffs out;
    out.n = std::sqrt(trapezoid(t, dn));
    out.c = std::sqrt(trapezoid(t, dc));
    out.u = std::sqrt(trapezoid(t, du));
    return out;
}

namespace {

// Bump (1 - t/T)_+^p and its derivative.
double bump(double t, double T, int p) {
    const double s = 1.0 - t / T;
    return s > 0.0 ? std::pow(s, p) : 0.0;
}
double bump_dt(double t, double T, int p) {
    const double s = 1.0 - t / T;
    return s > 0.0 ? -static_cast<double>(p) / T * std::pow(s, p - 1) : 0.0;
}

TestFunction scalar_product_function(const std::string& id, TestKind kind, double T, int p,
                                     std::function<double(double)> X,
                                     std::function<double(double)> Xp,
                                     std::function<double(double)> Y,
                                     std::function<double(double)> Yp) {
    TestFunction tf;
    tf.id = id;
    tf.kind = kind;
    tf.t_supp = T;
    tf.value = [=](double x, double y, double t) { return bump(t, T, p) * X(x) * Y(y); };
    tf.ddt = [=](double x, double y, double t) { return bump_dt(t, T, p) * X(x) * Y(y); };
    tf.ddx = [=](double x, double y, double t) { return bump(t, T, p) * Xp(x) * Y(y); };
    tf.ddy = [=](double x, double y, double t) { return bump(t, T, p) * X(x) * Yp(y); };
    return tf;
}

// Divergence-free field from the stream function b(t) X(x) Y(y).
TestFunction curl_function(const std::string& id, double T, int p,
                           std::function<double(double)> X, std::function<double(double)> Xp,
                           std::function<double(double)> Xpp,
                           std::function<double(double)> Y, std::function<double(double)> Yp,
                           std::function<double(double)> Ypp) {
    TestFunction tf;
    tf.id = id;
    tf.kind = TestKind::SolenoidalVector;
    tf.t_supp = T;
    tf.vx = [=](double x, double y, double t) { return bump(t, T, p) * X(x) * Yp(y); };
    tf.vy = [=](double x, double y, double t) { return -bump(t, T, p) * Xp(x) * Y(y); };
    tf.vxt = [=](double x, double y, double t) { return bump_dt(t, T, p) * X(x) * Yp(y); };
    tf.vyt = [=](double x, double y, double t) { return -bump_dt(t, T, p) * Xp(x) * Y(y); };
    tf.dvx_dx = [=](double x, double y, double t) { return bump(t, T, p) * Xp(x) * Yp(y); };
    tf.dvx_dy = [=](double x, double y, double t) { return bump(t, T, p) * X(x) * Ypp(y); };
    tf.dvy_dx = [=](double x, double y, double t) { return -bump(t, T, p) * Xpp(x) * Y(y); };
    tf.dvy_dy = [=](double x, double y, double t) { return -bump(t, T, p) * Xp(x) * Yp(y); };
    return tf;
}

}  // namespace

std::vector<TestFunction> default_test_suite(const GridSpec& g, double t_supp) {
    using std::cos;
    using std::sin;
    const double pi = std::numbers::pi;
    const double ax = pi / g.Lx;
    const double ay = pi / g.Ly;

    std::vector<TestFunction> suite;

    suite.push_back(scalar_product_function(
        "n_cos1", TestKind::FreeScalar, t_supp, 3,
        [=](double x) { return cos(ax * x); }, [=](double x) { return -ax * sin(ax * x); },
        [=](double y) { return cos(ay * y); }, [=](double y) { return -ay * sin(ay * y); }));
    suite.push_back(scalar_product_function(
        "n_cos2", TestKind::FreeScalar, t_supp, 2,
        [=](double x) { return cos(2.0 * ax * x); },
        [=](double x) { return -2.0 * ax * sin(2.0 * ax * x); },
        [=](double y) { return cos(ay * y); }, [=](double y) { return -ay * sin(ay * y); }));

    suite.push_back(scalar_product_function(
        "c_sin1", TestKind::ZeroBoundaryScalar, t_supp, 2,
        [=](double x) { return sin(ax * x); }, [=](double x) { return ax * cos(ax * x); },
        [=](double y) { return sin(ay * y); }, [=](double y) { return ay * cos(ay * y); }));
    suite.push_back(scalar_product_function(
        "c_sin2", TestKind::ZeroBoundaryScalar, t_supp, 3,
        [=](double x) { return sin(2.0 * ax * x); },
        [=](double x) { return 2.0 * ax * cos(2.0 * ax * x); },
        [=](double y) { return sin(ay * y); }, [=](double y) { return ay * cos(ay * y); }));

    const auto sin2 = [](double a) {
        return [a](double s) { const double v = std::sin(a * s); return v * v; };
    };
    const auto sin2_p = [](double a) {
        return [a](double s) { return a * std::sin(2.0 * a * s); };
    };
    const auto sin2_pp = [](double a) {
        return [a](double s) { return 2.0 * a * a * std::cos(2.0 * a * s); };
    };
    suite.push_back(curl_function("u_curl1", t_supp, 2, sin2(ax), sin2_p(ax), sin2_pp(ax),
                                  sin2(ay), sin2_p(ay), sin2_pp(ay)));
    suite.push_back(curl_function("u_curl2", t_supp, 3, sin2(2.0 * ax), sin2_p(2.0 * ax),
                                  sin2_pp(2.0 * ax), sin2(ay), sin2_p(ay), sin2_pp(ay)));
    return suite;
}

}  // namespace chemostokes
