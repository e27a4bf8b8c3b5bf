#include "chemostokes/poisson.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "chemostokes/operators.hpp"

namespace chemostokes {

namespace {

// Eigenvalues of the 1-D mirror-ghost Neumann Laplacian on n cells.
Eigen::VectorXd neumann_eigenvalues(int n, double h) {
    Eigen::VectorXd lam(n);
    for (int k = 0; k < n; ++k) {
        const double s = std::sin(0.5 * std::numbers::pi * k / n);
        lam(k) = -4.0 * s * s / (h * h);
    }
    return lam;
}

// Columns are the cosine modes v_k(i) = cos(pi k (i + 1/2) / n).
Eigen::MatrixXd cosine_basis(int n) {
    Eigen::MatrixXd v(n, n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            v(i, k) = std::cos(std::numbers::pi * k * (i + 0.5) / n);
    return v;
}

Eigen::VectorXd mode_weights(int n) {
    Eigen::VectorXd w(n);
    w(0) = 1.0 / n;
    for (int k = 1; k < n; ++k) w(k) = 2.0 / n;
    return w;
}

}  // namespace

struct NeumannPoissonSolver::Basis {
    Eigen::MatrixXd vx, vy;
    Eigen::VectorXd lx, ly;
    Eigen::VectorXd wx, wy;
};

NeumannPoissonSolver::NeumannPoissonSolver(const GridSpec& g)
    : g_(g), basis_(std::make_unique<Basis>()) {
    basis_->vx = cosine_basis(g.nx);
    basis_->vy = cosine_basis(g.ny);
    basis_->lx = neumann_eigenvalues(g.nx, g.h);
    basis_->ly = neumann_eigenvalues(g.ny, g.h);
    basis_->wx = mode_weights(g.nx);
    basis_->wy = mode_weights(g.ny);
}

NeumannPoissonSolver::~NeumannPoissonSolver() = default;
NeumannPoissonSolver::NeumannPoissonSolver(NeumannPoissonSolver&&) noexcept = default;
NeumannPoissonSolver& NeumannPoissonSolver::operator=(NeumannPoissonSolver&&) noexcept = default;

PoissonResult NeumannPoissonSolver::solve(const ScalarField& rhs, double tol) const {
    rhs.require_layout(g_, "poisson_neumann");
    const Basis& b = *basis_;

    // values[j*nx + i] maps directly to a column-major (nx x ny) matrix.
    Eigen::Map<const Eigen::MatrixXd> r(rhs.values.data(), g_.nx, g_.ny);
    Eigen::MatrixXd coef = b.vx.transpose() * r * b.vy;
    for (int l = 0; l < g_.ny; ++l)
        for (int k = 0; k < g_.nx; ++k) coef(k, l) *= b.wx(k) * b.wy(l);

    const double shift = coef(0, 0);  // mean of rhs (constant-mode coefficient)
    coef(0, 0) = 0.0;
    for (int l = 0; l < g_.ny; ++l)
        for (int k = 0; k < g_.nx; ++k) {
            if (k == 0 && l == 0) continue;
            coef(k, l) /= b.lx(k) + b.ly(l);
        }

    PoissonResult out;
    out.q = ScalarField(g_, ScalarBc::Neumann);
    Eigen::Map<Eigen::MatrixXd> qm(out.q.values.data(), g_.nx, g_.ny);
    qm = b.vx * coef * b.vy.transpose();

    // Pin the mean to zero and measure the actual residual.
    double mean_q = 0.0;
    for (double v : out.q.values) mean_q += v;
    mean_q /= out.q.size();
    for (double& v : out.q.values) v -= mean_q;

    const ScalarField lq = laplacian(out.q, g_);
    double rnorm2 = 0.0, bnorm2 = 0.0;
    for (long idx = 0; idx < g_.cell_count(); ++idx) {
        const double bv = rhs.values[idx] - shift;
        const double rv = lq.values[idx] - bv;
        rnorm2 += rv * rv;
        bnorm2 += bv * bv;
    }
    out.compatibility_shift = shift;
    out.rel_residual = bnorm2 > 0.0 ? std::sqrt(rnorm2 / bnorm2) : std::sqrt(rnorm2);
    if (!(out.rel_residual <= tol) && bnorm2 > 0.0)
        throw SolverError("poisson_neumann: residual above tolerance", out.rel_residual);
    return out;
}

PoissonResult poisson_neumann(const ScalarField& rhs, const GridSpec& g, double tol) {
    return NeumannPoissonSolver(g).solve(rhs, tol);
}

VectorField project(const VectorField& v, const GridSpec& g, double dt, double tol,
                    const NeumannPoissonSolver& solver) {
    v.require_layout(g, "project");
    if (!(dt > 0.0)) throw ContractError("project: dt must be positive");

    ScalarField rhs = divergence(v, g);
    const double inv_dt = 1.0 / dt;
    for (double& r : rhs.values) r *= inv_dt;

    const PoissonResult pr = solver.solve(rhs, tol);
    const VectorField gq = grad_to_faces(pr.q, g);  // Neumann q: boundary faces stay 0

    VectorField out = v;
    for (size_t k = 0; k < out.x.size(); ++k) out.x[k] -= dt * gq.x[k];
    for (size_t k = 0; k < out.y.size(); ++k) out.y[k] -= dt * gq.y[k];
    if (out.no_slip) out.zero_boundary_faces();

    const ScalarField div_after = divergence(out, g);
    const double worst = div_after.max_abs();
    if (!(worst <= tol / g.h))
        throw SolverError("project: post-correction divergence above tol/h", worst);
    return out;
}

VectorField project(const VectorField& v, const GridSpec& g, double dt, double tol) {
    return project(v, g, dt, tol, NeumannPoissonSolver(g));
}

}  // namespace chemostokes
