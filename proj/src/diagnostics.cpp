#include "chemostokes/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "chemostokes/operators.hpp"

namespace chemostokes {

namespace {

constexpr double kVacuumFloor = 1e-12;

double checked(double v, const char* functional) {
    if (!std::isfinite(v))
        throw NumericalError(std::string("compute_record: non-finite functional ") + functional);
    return v;
}

// Discrete Dirichlet energy matching the stepper's vector Laplacian: all
// pairwise differences between stored faces plus reflected-ghost wall terms.
double grad_u_dirichlet_form(const VectorField& u, const GridSpec& g) {
    double s = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double d = u.ux(i + 1, j) - u.ux(i, j);
            s += d * d;
        }
    for (int i = 0; i <= g.nx; ++i) {
        for (int j = 0; j + 1 < g.ny; ++j) {
            const double d = u.ux(i, j + 1) - u.ux(i, j);
            s += d * d;
        }
        if (u.no_slip && g.ny > 0) {
            s += 2.0 * u.ux(i, 0) * u.ux(i, 0);
            s += 2.0 * u.ux(i, g.ny - 1) * u.ux(i, g.ny - 1);
        }
    }
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double d = u.uy(i, j + 1) - u.uy(i, j);
            s += d * d;
        }
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i + 1 < g.nx; ++i) {
            const double d = u.uy(i + 1, j) - u.uy(i, j);
            s += d * d;
        }
        if (u.no_slip && g.nx > 0) {
            s += 2.0 * u.uy(0, j) * u.uy(0, j);
            s += 2.0 * u.uy(g.nx - 1, j) * u.uy(g.nx - 1, j);
        }
    }
    return s;
}

double trace_max_diff(const BoundaryTrace& a, const BoundaryTrace& b) {
    double m = 0.0;
    const auto acc = [&](const std::vector<double>& x, const std::vector<double>& y) {
        for (size_t k = 0; k < x.size() && k < y.size(); ++k)
            m = std::max(m, std::abs(x[k] - y[k]));
    };
    acc(a.west, b.west);
    acc(a.east, b.east);
    acc(a.south, b.south);
    acc(a.north, b.north);
    return m;
}

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Prefix trapezoid integral P[k] = int_0^{t_k} f dt.
std::vector<double> prefix_integral(std::span<const double> t, std::span<const double> f) {
    std::vector<double> p(t.size(), 0.0);
    for (size_t k = 0; k + 1 < t.size(); ++k)
        p[k + 1] = p[k] + 0.5 * (f[k] + f[k + 1]) * (t[k + 1] - t[k]);
    return p;
}

// Trapezoid integral over ((t_k - width)+, t_k) with linear interpolation of
// the fractional first segment.
std::vector<double> rolling_window(std::span<const double> t, std::span<const double> f,
                                   double width) {
    const std::vector<double> p = prefix_integral(t, f);
    std::vector<double> out(t.size(), 0.0);
    for (size_t k = 0; k < t.size(); ++k) {
        const double start = std::max(t[k] - width, t.front());
        size_t j = 0;
        while (j + 1 < t.size() && t[j + 1] <= start) ++j;
        double p_start = p[j];
        if (start > t[j] && j + 1 < t.size()) {
            const double frac = (start - t[j]) / (t[j + 1] - t[j]);
            const double f_start = f[j] + frac * (f[j + 1] - f[j]);
            p_start += 0.5 * (f[j] + f_start) * (start - t[j]);
        }
        out[k] = p[k] - p_start;
    }
    return out;
}

}  // namespace

std::string FunctionalRecord::csv_header() {
    return "t,mass,l2n_sq,c_max,c_min,grad_c_l2_sq,lap_c_l2_sq,grad_c_l4,kinetic,"
           "grad_u_l2_sq,u_l6,entropy,fisher,n2_log,grad_n_43,theta,chat_boundary_max,"
           "clipped_mass_cum,u_forcing";
}

std::string FunctionalRecord::csv_row() const {
    const double v[] = {t,       mass,         l2n_sq, c_max,   c_min,     grad_c_l2_sq,
                        lap_c_l2_sq, grad_c_l4, kinetic, grad_u_l2_sq, u_l6, entropy,
                        fisher,  n2_log,       grad_n_43, theta, chat_boundary_max,
                        clipped_mass_cum, u_forcing};
    std::string row;
    for (size_t k = 0; k < sizeof(v) / sizeof(v[0]); ++k) {
        if (k) row += ',';
        row += fmt17(v[k]);
    }
    return row;
}

FunctionalRecord compute_record(const SimState& s, const GridSpec& g, const RegParams& reg,
                                const PhysicalParams& p) {
    (void)reg;
    s.n.require_layout(g, "compute_record");
    s.c.require_layout(g, "compute_record");
    s.u.require_layout(g, "compute_record");
    const double h2 = g.h * g.h;

    FunctionalRecord r;
    r.t = s.t;
    r.clipped_mass_cum = s.clipped_mass_cum;

    double mass = 0.0, l2 = 0.0, entropy = 0.0, n2log = 0.0, theta = 0.0;
    for (double v : s.n.values) {
        mass += v;
        l2 += v * v;
        if (v > 0.0) {
            const double lg = std::log(v);
            entropy += v * lg;
            n2log += v * v * lg;
        }
        theta += v * v * std::log1p(v * v);
    }
    r.mass = checked(mass * h2, "mass");
    r.l2n_sq = checked(l2 * h2, "l2n_sq");
    r.entropy = checked(entropy * h2, "entropy");
    r.n2_log = checked(n2log * h2, "n2_log");
    r.theta = checked(theta * h2, "theta");

    r.c_max = checked(s.c.max_value(), "c_max");
    r.c_min = checked(s.c.min_value(), "c_min");

    std::vector<double> gx, gy;
    grad_at_centers(s.c, g, gx, gy);
    double gc2 = 0.0, gc4 = 0.0;
    for (long idx = 0; idx < g.cell_count(); ++idx) {
        const double m2 = gx[idx] * gx[idx] + gy[idx] * gy[idx];
        gc2 += m2;
        gc4 += m2 * m2;
    }
    r.grad_c_l2_sq = checked(gc2 * h2, "grad_c_l2_sq");
    r.grad_c_l4 = checked(gc4 * h2, "grad_c_l4");

    const ScalarField lap_c = laplacian(s.c, g);
    double lc2 = 0.0;
    for (double v : lap_c.values) lc2 += v * v;
    r.lap_c_l2_sq = checked(lc2 * h2, "lap_c_l2_sq");

    grad_at_centers(s.n, g, gx, gy);
    double fisher = 0.0, gn43 = 0.0;
    for (long idx = 0; idx < g.cell_count(); ++idx) {
        const double m2 = gx[idx] * gx[idx] + gy[idx] * gy[idx];
        const double nv = s.n.values[idx];
        if (nv >= kVacuumFloor) fisher += m2 / nv;
        gn43 += std::pow(m2, 2.0 / 3.0);
    }
    r.fisher = checked(fisher * h2, "fisher");
    r.grad_n_43 = checked(gn43 * h2, "grad_n_43");

    double ke = 0.0;
    for (double v : s.u.x) ke += v * v;
    for (double v : s.u.y) ke += v * v;
    r.kinetic = checked(ke * h2, "kinetic");
    // Volume h^2 and gradient 1/h^2 weights cancel in the Dirichlet form.
    r.grad_u_l2_sq = checked(grad_u_dirichlet_form(s.u, g), "grad_u_l2_sq");

    std::vector<double> ucx, ucy;
    velocity_at_centers(s.u, g, ucx, ucy);
    double u6 = 0.0;
    for (long idx = 0; idx < g.cell_count(); ++idx) {
        const double m2 = ucx[idx] * ucx[idx] + ucy[idx] * ucy[idx];
        u6 += m2 * m2 * m2;
    }
    r.u_l6 = checked(u6 * h2, "u_l6");

    r.u_forcing =
        checked(face_inner(buoyancy_force_faces(s.n, p.phi, g), s.u, g), "u_forcing");
    r.chat_boundary_max = checked(trace_max_diff(p.c_star.trace, s.c.trace),
                                  "chat_boundary_max");
    return r;
}

ScalarField chat_field(const SimState& s, const PhysicalParams& p, const GridSpec& g) {
    s.c.require_layout(g, "chat_field");
    p.c_star.require_layout(g, "chat_field");
    ScalarField out(g, ScalarBc::Dirichlet);
    for (long idx = 0; idx < g.cell_count(); ++idx)
        out.values[idx] = p.c_star.values[idx] - s.c.values[idx];
    const auto sub = [](const std::vector<double>& a, const std::vector<double>& b,
                        std::vector<double>& dst) {
        dst.resize(a.size());
        for (size_t k = 0; k < a.size(); ++k) dst[k] = a[k] - b[k];
    };
    sub(p.c_star.trace.west, s.c.trace.west, out.trace.west);
    sub(p.c_star.trace.east, s.c.trace.east, out.trace.east);
    sub(p.c_star.trace.south, s.c.trace.south, out.trace.south);
    sub(p.c_star.trace.north, s.c.trace.north, out.trace.north);
    return out;
}

double require_uniform_cadence(std::span<const FunctionalRecord> series, const char* who) {
    if (series.size() < 2)
        throw ContractError(std::string(who) + ": need at least 2 records");
    const double delta = series[1].t - series[0].t;
    if (!(delta > 0.0)) throw ContractError(std::string(who) + ": non-increasing record times");
    for (size_t k = 0; k + 1 < series.size(); ++k) {
        const double d = series[k + 1].t - series[k].t;
        if (std::abs(d - delta) > 1e-9 * std::max(delta, 1e-300))
            throw ContractError(std::string(who) + ": record cadence is not uniform");
    }
    return delta;
}

MassOdeResult check_mass_ode(std::span<const FunctionalRecord> series, double kappa, double mu,
                             double dt, double h) {
    if (series.size() < 3) throw ContractError("check_mass_ode: need at least 3 records");
    const double delta = require_uniform_cadence(series, "check_mass_ode");

    MassOdeResult out;
    for (size_t k = 0; k + 1 < series.size(); ++k) {
        const FunctionalRecord& a = series[k];
        const FunctionalRecord& b = series[k + 1];
        const double lhs = (b.mass - a.mass) / delta;
        const double rhs = 0.5 * ((kappa * a.mass - mu * a.l2n_sq) +
                                  (kappa * b.mass - mu * b.l2n_sq));
        out.max_residual = std::max(out.max_residual, std::abs(lhs - rhs));
    }
    out.tol = kMassOdeTol(dt, h);
    out.pass = out.max_residual <= out.tol;
    return out;
}

MaxPrincipleResult check_max_principle(std::span<const FunctionalRecord> series, double c0_max,
                                       double cstar_max) {
    MaxPrincipleResult out;
    out.bound = std::max(c0_max, cstar_max);
    double worst = -std::numeric_limits<double>::infinity();
    for (const FunctionalRecord& r : series) worst = std::max(worst, r.c_max - out.bound);
    out.worst_margin = series.empty() ? 0.0 : worst;
    out.pass = out.worst_margin <= 1e-10;
    return out;
}

UEnergyResult check_u_energy(std::span<const FunctionalRecord> series, double grad_phi_inf,
                             double dt, double h) {
    if (series.size() < 2) throw ContractError("check_u_energy: need at least 2 records");
    UEnergyResult out;
    out.identity_tol = kUEnergyTol(dt, h);
    const double c1 = 0.5 * grad_phi_inf * grad_phi_inf + 0.5;
    out.inequality_pass = true;
    out.worst_inequality_margin = -std::numeric_limits<double>::infinity();

    for (size_t k = 0; k + 1 < series.size(); ++k) {
        const FunctionalRecord& a = series[k];
        const FunctionalRecord& b = series[k + 1];
        const double d = b.t - a.t;
        if (!(d > 0.0)) throw ContractError("check_u_energy: non-increasing record times");
        const double dE = 0.5 * (b.kinetic - a.kinetic) / d;
        const double grad_mid = 0.5 * (a.grad_u_l2_sq + b.grad_u_l2_sq);
        const double force_mid = 0.5 * (a.u_forcing + b.u_forcing);
        const double l2n_mid = 0.5 * (a.l2n_sq + b.l2n_sq);

        out.max_identity_residual =
            std::max(out.max_identity_residual, std::abs(dE + grad_mid - force_mid));

        const double margin = dE + 0.5 * grad_mid - c1 * l2n_mid - out.identity_tol;
        out.worst_inequality_margin = std::max(out.worst_inequality_margin, margin);
        if (margin > 0.0) out.inequality_pass = false;
    }
    out.identity_pass = out.max_identity_residual <= out.identity_tol;
    return out;
}

FittedConstant check_gradc_inequality(std::span<const FunctionalRecord> series) {
    if (series.size() < 2)
        throw ContractError("check_gradc_inequality: need at least 2 records");
    FittedConstant out;
    for (size_t k = 0; k + 1 < series.size(); ++k) {
        const FunctionalRecord& a = series[k];
        const FunctionalRecord& b = series[k + 1];
        const double d = b.t - a.t;
        if (!(d > 0.0))
            throw ContractError("check_gradc_inequality: non-increasing record times");
        const double lhs = 0.5 * (b.grad_c_l2_sq - a.grad_c_l2_sq) / d +
                           0.25 * 0.5 * (a.lap_c_l2_sq + b.lap_c_l2_sq);
        const double denom = 0.5 * (a.l2n_sq + b.l2n_sq) + 1.0;
        out.c = std::max(out.c, lhs / denom);
    }
    out.c = std::max(out.c, 0.0);
    out.pass = std::isfinite(out.c);
    return out;
}

FittedConstant check_entropy_inequality(std::span<const FunctionalRecord> series, double mu) {
    if (series.size() < 2)
        throw ContractError("check_entropy_inequality: need at least 2 records");
    FittedConstant out;
    for (size_t k = 0; k + 1 < series.size(); ++k) {
        const FunctionalRecord& a = series[k];
        const FunctionalRecord& b = series[k + 1];
        const double d = b.t - a.t;
        if (!(d > 0.0))
            throw ContractError("check_entropy_inequality: non-increasing record times");
        const double lhs = (b.entropy - a.entropy) / d +
                           0.5 * 0.5 * (a.fisher + b.fisher) +
                           0.5 * mu * 0.5 * (a.n2_log + b.n2_log);
        const double denom =
            0.5 * (a.l2n_sq + b.l2n_sq) + 0.5 * (a.grad_c_l4 + b.grad_c_l4) + 1.0;
        out.c = std::max(out.c, lhs / denom);
    }
    out.c = std::max(out.c, 0.0);
    out.pass = std::isfinite(out.c);
    return out;
}

OdeComparisonResult ode_comparison_check(std::span<const double> t, std::span<const double> y,
                                         std::span<const double> h, double a, double c,
                                         double tol) {
    if (!(a > 0.0)) throw ValidationError("ode_comparison_a_positive", "a must be positive");
    if (!(c >= 0.0))
        throw ValidationError("ode_comparison_c_nonnegative", "C must be nonnegative");
    if (t.size() != y.size() || t.size() != h.size() || t.size() < 2)
        throw ContractError("ode_comparison_check: series sizes must match, >= 2 samples");

    OdeComparisonResult out;
    out.bound = y[0] + c / (1.0 - std::exp(-a));

    bool hyp_ok = true;
    for (size_t k = 0; k + 1 < t.size(); ++k) {
        const double d = t[k + 1] - t[k];
        if (!(d > 0.0)) throw ContractError("ode_comparison_check: non-increasing times");
        const double lhs = (y[k + 1] - y[k]) / d + a * 0.5 * (y[k] + y[k + 1]);
        const double rhs = 0.5 * (h[k] + h[k + 1]);
        if (lhs > rhs + tol) hyp_ok = false;
    }
    const std::vector<double> windows = rolling_window(t, h, 1.0);
    for (double w : windows)
        if (w > c + tol) hyp_ok = false;

    out.worst_margin = -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < y.size(); ++k) {
        const double margin = y[k] - out.bound;
        out.worst_margin = std::max(out.worst_margin, margin);
        if (margin > tol && out.first_violation < 0)
            out.first_violation = static_cast<long>(k);
    }

    if (out.first_violation >= 0)
        out.verdict = OdeVerdict::Fail;
    else
        out.verdict = hyp_ok ? OdeVerdict::Pass : OdeVerdict::HypothesisFail;
    return out;
}

const std::vector<std::string>& WindowBounds::channel_names() {
    static const std::vector<std::string> names = {
        "sup_mass",        "sup_grad_c_l2_sq", "sup_grad_u_l2_sq", "sup_u_l6",
        "win_l2n_sq",      "win_lap_c_l2_sq",  "win_grad_c_l4",    "cum_grad_n_43"};
    return names;
}

std::vector<double> WindowBounds::channel_maxima() const {
    const auto peak = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, x);
        return m;
    };
    return {peak(sup_mass),   peak(sup_grad_c_l2_sq), peak(sup_grad_u_l2_sq),
            peak(sup_u_l6),   peak(win_l2n_sq),       peak(win_lap_c_l2_sq),
            peak(win_grad_c_l4), peak(cum_grad_n_43)};
}

WindowBounds window_bounds(std::span<const FunctionalRecord> series) {
    WindowBounds wb;
    const size_t m = series.size();
    wb.t.resize(m);
    std::vector<double> l2n(m), lap(m), gc4(m), gn43(m);
    wb.sup_mass.resize(m);
    wb.sup_grad_c_l2_sq.resize(m);
    wb.sup_grad_u_l2_sq.resize(m);
    wb.sup_u_l6.resize(m);

    double s_mass = -std::numeric_limits<double>::infinity();
    double s_gc = s_mass, s_gu = s_mass, s_u6 = s_mass;
    for (size_t k = 0; k < m; ++k) {
        const FunctionalRecord& r = series[k];
        wb.t[k] = r.t;
        s_mass = std::max(s_mass, r.mass);
        s_gc = std::max(s_gc, r.grad_c_l2_sq);
        s_gu = std::max(s_gu, r.grad_u_l2_sq);
        s_u6 = std::max(s_u6, r.u_l6);
        wb.sup_mass[k] = s_mass;
        wb.sup_grad_c_l2_sq[k] = s_gc;
        wb.sup_grad_u_l2_sq[k] = s_gu;
        wb.sup_u_l6[k] = s_u6;
        l2n[k] = r.l2n_sq;
        lap[k] = r.lap_c_l2_sq;
        gc4[k] = r.grad_c_l4;
        gn43[k] = r.grad_n_43;
    }
    if (m == 0) return wb;
    wb.win_l2n_sq = rolling_window(wb.t, l2n, 1.0);
    wb.win_lap_c_l2_sq = rolling_window(wb.t, lap, 1.0);
    wb.win_grad_c_l4 = rolling_window(wb.t, gc4, 1.0);
    wb.cum_grad_n_43 = prefix_integral(wb.t, gn43);
    return wb;
}

}  // namespace chemostokes
