#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "chemostokes/operators.hpp"
#include "chemostokes/poisson.hpp"

using namespace chemostokes;

namespace {

constexpr double kPi = std::numbers::pi;

double observed_order(double err_coarse, double err_fine) {
    return std::log2(err_coarse / err_fine);
}

VectorField random_interior_field(const GridSpec& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    VectorField v(g, /*no_slip=*/true);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) v.ux(i, j) = dist(rng);
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) v.uy(i, j) = dist(rng);
    return v;
}

// Discrete curl of a node-sampled stream function; solenoidal by construction.
VectorField discrete_curl(const GridSpec& g, const std::function<double(double, double)>& psi) {
    VectorField v(g, /*no_slip=*/true);
    const double inv_h = 1.0 / g.h;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i)
            v.ux(i, j) = (psi(g.x_face(i), g.y_face(j + 1)) - psi(g.x_face(i), g.y_face(j))) *
                         inv_h;
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            v.uy(i, j) = -(psi(g.x_face(i + 1), g.y_face(j)) - psi(g.x_face(i), g.y_face(j))) *
                         inv_h;
    return v;
}

}  // namespace

TEST_CASE("GridSpec stores exact extents and validates sizes") {
    const GridSpec g = GridSpec::make(20, 20, 0.05);
    CHECK(g.Lx == 20 * 0.05);
    CHECK(g.Ly == 20 * 0.05);
    CHECK_THROWS_AS(GridSpec::make(3, 8, 0.1), ContractError);
    CHECK_THROWS_AS(GridSpec::make(8, 8, -0.1), ContractError);
    CHECK_THROWS_AS(GridSpec::from_extent(1.0, 1.0, 8, 16), ContractError);

    CHECK(g.is_boundary_cell(0, 5));
    CHECK(g.is_boundary_cell(19, 0));
    CHECK_FALSE(g.is_boundary_cell(10, 10));
}

TEST_CASE("laplacian of a constant Neumann field vanishes") {
    const GridSpec g = GridSpec::unit_square(16);
    const ScalarField f(g, ScalarBc::Neumann, 7.0);
    const ScalarField lap = laplacian(f, g);
    for (double v : lap.values) CHECK(v == 0.0);
}

TEST_CASE("laplacian of x^2 + y^2 is 4 exactly on interior cells") {
    const GridSpec g = GridSpec::unit_square(16);
    const ScalarField f =
        sample_cells(g, ScalarBc::Neumann, [](double x, double y) { return x * x + y * y; });
    const ScalarField lap = laplacian(f, g);
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i)
            CHECK(lap.at(i, j) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("laplacian converges at second order for the Dirichlet sine mode") {
    // Oracle: analytic Laplacian of sin(pi x) sin(pi y) is -2 pi^2 times it.
    std::vector<double> errs;
    for (int n : {16, 32, 64}) {
        const GridSpec g = GridSpec::unit_square(n);
        const ScalarField f = sample_dirichlet(
            g, [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); });
        const ScalarField lap = laplacian(f, g);
        double err = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double exact = -2.0 * kPi * kPi * f.at(i, j);
                err = std::max(err, std::abs(lap.at(i, j) - exact));
            }
        errs.push_back(err);
    }
    CHECK(observed_order(errs[0], errs[1]) == doctest::Approx(2.0).epsilon(0.15));
    CHECK(observed_order(errs[1], errs[2]) == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("grad_to_faces is exact for constants and affine fields") {
    const GridSpec g = GridSpec::unit_square(12);
    const ScalarField c(g, ScalarBc::Neumann, 3.5);
    const VectorField gc = grad_to_faces(c, g);
    CHECK(gc.max_abs() == 0.0);

    const double a = 2.0, b = -0.75;
    const ScalarField f =
        sample_cells(g, ScalarBc::Neumann, [&](double x, double y) { return a * x + b * y; });
    const VectorField gf = grad_to_faces(f, g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            CHECK(gf.ux(i, j) == doctest::Approx(a).epsilon(1e-13));
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            CHECK(gf.uy(i, j) == doctest::Approx(b).epsilon(1e-13));
}

TEST_CASE("grad_to_faces converges at second order against the analytic gradient") {
    std::vector<double> errs;
    for (int n : {16, 32, 64}) {
        const GridSpec g = GridSpec::unit_square(n);
        const ScalarField f =
            sample_cells(g, ScalarBc::Neumann, [](double x, double) { return std::cos(kPi * x); });
        const VectorField gf = grad_to_faces(f, g);
        double err = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i <= g.nx; ++i)
                err = std::max(err,
                               std::abs(gf.ux(i, j) + kPi * std::sin(kPi * g.x_face(i))));
        errs.push_back(err);
    }
    CHECK(observed_order(errs[0], errs[1]) == doctest::Approx(2.0).epsilon(0.2));
    CHECK(observed_order(errs[1], errs[2]) == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("divergence of the analytically solenoidal shear is exactly zero") {
    const GridSpec g = GridSpec::unit_square(16);
    const VectorField v = sample_faces(
        g, [](double, double y) { return y; }, [](double x, double) { return x; });
    const ScalarField div = divergence(v, g);
    for (double d : div.values) CHECK(d == 0.0);

    const VectorField zero(g);
    CHECK(divergence(zero, g).max_abs() == 0.0);
}

TEST_CASE("poisson_neumann handles trivial and manufactured right-hand sides") {
    const GridSpec g = GridSpec::unit_square(32);

    SUBCASE("zero rhs gives zero solution") {
        const ScalarField rhs(g, ScalarBc::Neumann, 0.0);
        const PoissonResult r = poisson_neumann(rhs, g, 1e-10);
        CHECK(r.compatibility_shift == 0.0);
        CHECK(r.q.max_abs() <= 1e-14);
    }

    SUBCASE("constant rhs is pure incompatibility") {
        const ScalarField rhs(g, ScalarBc::Neumann, 5.0);
        const PoissonResult r = poisson_neumann(rhs, g, 1e-10);
        CHECK(r.compatibility_shift == doctest::Approx(5.0).epsilon(1e-13));
        CHECK(r.q.max_abs() <= 1e-12);
    }

    SUBCASE("manufactured cosine mode converges at second order") {
        std::vector<double> errs;
        for (int n : {16, 32, 64}) {
            const GridSpec gl = GridSpec::make(n, n, 2.0 / n);  // [0,2]^2 domain
            const ScalarField rhs = sample_cells(gl, ScalarBc::Neumann, [&](double x, double) {
                return std::cos(kPi * x / gl.Lx);
            });
            const PoissonResult r = poisson_neumann(rhs, gl, 1e-10);
            const double scale = (gl.Lx / kPi) * (gl.Lx / kPi);
            // Compare after removing means (solution is defined up to a constant).
            double mean_exact = 0.0;
            for (int j = 0; j < gl.ny; ++j)
                for (int i = 0; i < gl.nx; ++i)
                    mean_exact += -scale * std::cos(kPi * gl.x_center(i) / gl.Lx);
            mean_exact /= gl.cell_count();
            double err = 0.0;
            for (int j = 0; j < gl.ny; ++j)
                for (int i = 0; i < gl.nx; ++i) {
                    const double exact =
                        -scale * std::cos(kPi * gl.x_center(i) / gl.Lx) - mean_exact;
                    err = std::max(err, std::abs(r.q.at(i, j) - exact));
                }
            errs.push_back(err);
        }
        CHECK(observed_order(errs[0], errs[1]) == doctest::Approx(2.0).epsilon(0.15));
        CHECK(observed_order(errs[1], errs[2]) == doctest::Approx(2.0).epsilon(0.15));
    }
}

TEST_CASE("project leaves solenoidal fields alone and kills gradients") {
    const GridSpec g = GridSpec::unit_square(32);
    const double tol = 1e-12;

    SUBCASE("identity on its range") {
        const VectorField v = discrete_curl(g, [](double x, double y) {
            const double sx = std::sin(kPi * x), sy = std::sin(kPi * y);
            return sx * sx * sy * sy;
        });
        CHECK(divergence(v, g).max_abs() <= 1e-12);
        const VectorField pv = project(v, g, 1.0, tol);
        double diff = 0.0;
        for (size_t k = 0; k < v.x.size(); ++k)
            diff = std::max(diff, std::abs(pv.x[k] - v.x[k]));
        for (size_t k = 0; k < v.y.size(); ++k)
            diff = std::max(diff, std::abs(pv.y[k] - v.y[k]));
        CHECK(diff <= 1e-10);
    }

    SUBCASE("annihilates discrete gradients") {
        const ScalarField f = sample_cells(g, ScalarBc::Neumann, [](double x, double y) {
            return std::cos(kPi * x) * std::cos(2.0 * kPi * y);
        });
        VectorField v = grad_to_faces(f, g);
        v.no_slip = true;  // gradient of a Neumann field has zero boundary faces
        const VectorField pv = project(v, g, 1.0, tol);
        CHECK(pv.max_abs() <= 1e-10);
    }

    SUBCASE("random interior data ends up divergence-free") {
        const VectorField v = random_interior_field(g, 1234u);
        const VectorField pv = project(v, g, 1.0, tol);
        CHECK(divergence(pv, g).max_abs() <= 1e-10);
        CHECK(pv.boundary_face_max_abs() == 0.0);
    }
}

TEST_CASE("project is idempotent to solver tolerance") {
    const GridSpec g = GridSpec::unit_square(24);
    const double tol = 1e-12;
    const VectorField v = random_interior_field(g, 77u);
    const VectorField p1 = project(v, g, 1.0, tol);
    const VectorField p2 = project(p1, g, 1.0, tol);
    double diff = 0.0;
    for (size_t k = 0; k < p1.x.size(); ++k) diff = std::max(diff, std::abs(p2.x[k] - p1.x[k]));
    for (size_t k = 0; k < p1.y.size(); ++k) diff = std::max(diff, std::abs(p2.y[k] - p1.y[k]));
    CHECK(diff <= 10.0 * tol / g.h);
}

TEST_CASE("integrate implements the midpoint rule") {
    const GridSpec g = GridSpec::unit_square(16);
    CHECK(integrate(ScalarField(g, ScalarBc::Neumann, 1.0), g) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(integrate(ScalarField(g, ScalarBc::Neumann, 0.0), g) == 0.0);
    const ScalarField fx =
        sample_cells(g, ScalarBc::Neumann, [](double x, double) { return x; });
    CHECK(integrate(fx, g) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("adjointness of divergence and face gradient") {
    const GridSpec g = GridSpec::unit_square(20);
    std::mt19937 rng(5u);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ScalarField f(g, ScalarBc::Neumann);
    for (double& v : f.values) v = dist(rng);
    const VectorField v = random_interior_field(g, 99u);

    ScalarField fdiv = divergence(v, g);
    for (long k = 0; k < g.cell_count(); ++k) fdiv.values[k] *= f.values[k];
    const double lhs = integrate(fdiv, g);
    const double rhs = -face_inner(grad_to_faces(f, g), v, g);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("laplacian equals the divergence of the face gradient bitwise") {
    const GridSpec g = GridSpec::unit_square(16);
    std::mt19937 rng(3u);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    ScalarField f(g, ScalarBc::Neumann);
    for (double& v : f.values) v = dist(rng);
    const ScalarField a = laplacian(f, g);
    const ScalarField b = divergence(grad_to_faces(f, g), g);
    for (long k = 0; k < g.cell_count(); ++k) CHECK(a.values[k] == b.values[k]);
}

TEST_CASE("operator outputs are bitwise deterministic") {
    const GridSpec g = GridSpec::unit_square(20);
    std::mt19937 rng(11u);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ScalarField f(g, ScalarBc::Neumann);
    for (double& v : f.values) v = dist(rng);

    const double i1 = integrate(f, g);
    const double i2 = integrate(f, g);
    CHECK(i1 == i2);

    const ScalarField l1 = laplacian(f, g);
    const ScalarField l2 = laplacian(f, g);
    for (long k = 0; k < g.cell_count(); ++k) CHECK(l1.values[k] == l2.values[k]);

    const PoissonResult p1 = poisson_neumann(f, g, 1e-10);
    const PoissonResult p2 = poisson_neumann(f, g, 1e-10);
    for (long k = 0; k < g.cell_count(); ++k) CHECK(p1.q.values[k] == p2.q.values[k]);
}

TEST_CASE("size mismatches raise contract errors") {
    const GridSpec g = GridSpec::unit_square(8);
    const GridSpec g2 = GridSpec::unit_square(16);
    const ScalarField f(g, ScalarBc::Neumann, 1.0);
    CHECK_THROWS_AS(laplacian(f, g2), ContractError);
    CHECK_THROWS_AS(integrate(f, g2), ContractError);
    const VectorField v(g);
    CHECK_THROWS_AS(divergence(v, g2), ContractError);
}
