#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>

#include "chemostokes/config.hpp"
#include "chemostokes/expression.hpp"
#include "chemostokes/io.hpp"

using namespace chemostokes;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static int counter = 0;
    fs::path p = fs::temp_directory_path() /
                 ("chemostokes_test_" + std::to_string(::getpid()) + "_" +
                  std::to_string(counter++));
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("expression grammar") {
    const Expression e = Expression::parse("1 + 0.5*x*(1-x)");
    CHECK(e.eval(0.0, 0.0) == 1.0);
    CHECK(e.eval(0.5, 0.3) == doctest::Approx(1.125).epsilon(1e-15));

    CHECK(Expression::parse("pi").eval(0, 0) == doctest::Approx(3.14159265358979).epsilon(1e-12));
    CHECK(Expression::parse("2^3^2").eval(0, 0) == 512.0);  // right-associative
    CHECK(Expression::parse("-x^2").eval(3.0, 0) == -9.0);
    CHECK(Expression::parse("min(3, max(1, 2))").eval(0, 0) == 2.0);
    CHECK(Expression::parse("sin(pi/2)").eval(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(Expression::parse("ln(exp(2))").eval(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(Expression::parse("cos(pi*x)*cos(pi*y)").eval(1.0, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_AS(Expression::parse("2 +"), ExpressionParseError);
    CHECK_THROWS_AS(Expression::parse("foo(3)"), ExpressionParseError);
    CHECK_THROWS_AS(Expression::parse("1 2"), ExpressionParseError);
    CHECK_THROWS_AS(Expression::parse("min(1)"), ExpressionParseError);
    CHECK_THROWS_AS(Expression::parse(""), ExpressionParseError);
}

TEST_CASE("field snapshots round-trip bitwise") {
    const GridSpec g = GridSpec::unit_square(12);
    const fs::path dir = temp_dir();

    std::mt19937 rng(2024u);
    std::uniform_real_distribution<double> dist(-5.0, 5.0);
    ScalarField f(g, ScalarBc::Neumann);
    for (double& v : f.values) v = dist(rng);
    f.values[0] = -0.0;
    f.values[1] = 1e-310;  // subnormal survives the byte round-trip

    const fs::path p = dir / "n.field";
    write_scalar_snapshot(p, "n", f, 0.625);
    double t = 0.0;
    std::string name;
    const ScalarField back = read_scalar_snapshot(p, g, &t, &name);
    CHECK(t == 0.625);
    CHECK(name == "n");
    for (long k = 0; k < g.cell_count(); ++k) {
        const double a = f.values[k], b = back.values[k];
        CHECK(std::memcmp(&a, &b, sizeof(double)) == 0);
    }

    VectorField v(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) v.ux(i, j) = dist(rng);
    const fs::path pu = dir / "u.field";
    write_velocity_snapshot(pu, "u", v, 0.25);
    const VectorField vb = read_velocity_snapshot(pu, g, &t);
    CHECK(t == 0.25);
    for (size_t k = 0; k < v.x.size(); ++k) CHECK(v.x[k] == vb.x[k]);
    for (size_t k = 0; k < v.y.size(); ++k) CHECK(v.y[k] == vb.y[k]);

    fs::remove_all(dir);
}

TEST_CASE("tampered snapshot headers are rejected") {
    const GridSpec g = GridSpec::unit_square(8);
    const fs::path dir = temp_dir();
    const fs::path p = dir / "n.field";
    write_scalar_snapshot(p, "n", ScalarField(g, ScalarBc::Neumann, 1.0), 0.0);

    std::ifstream in(p, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    const size_t at = content.find("v1");
    content[at + 1] = '2';
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();

    CHECK_THROWS_AS(read_scalar_snapshot(p, g), IoError);
    fs::remove_all(dir);
}

TEST_CASE("records CSV round-trips through 17 significant digits") {
    const fs::path dir = temp_dir();
    std::vector<FunctionalRecord> recs(3);
    std::mt19937 rng(7u);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int k = 0; k < 3; ++k) {
        recs[k].t = k * (1.0 / 3.0);
        recs[k].mass = dist(rng);
        recs[k].l2n_sq = dist(rng) * 1e-17;
        recs[k].entropy = dist(rng) * 1e9;
        recs[k].u_forcing = dist(rng);
    }
    const fs::path p = dir / "records.csv";
    write_records_csv(p, recs);
    const auto back = read_records_csv(p);
    REQUIRE(back.size() == recs.size());
    for (size_t k = 0; k < recs.size(); ++k) CHECK(back[k].csv_row() == recs[k].csv_row());
    fs::remove_all(dir);
}

TEST_CASE("atomic writer leaves no partial artifacts behind") {
    const fs::path dir = temp_dir();
    const fs::path p = dir / "data.csv";
    {
        AtomicFileWriter w(p);
        w.stream() << "incomplete";
        // no commit: destructor must clean up
    }
    CHECK_FALSE(fs::exists(p));
    CHECK_FALSE(fs::exists(dir / "data.csv.partial"));

    {
        AtomicFileWriter w(p);
        w.stream() << "done";
        w.commit();
    }
    CHECK(fs::exists(p));
    CHECK_FALSE(fs::exists(dir / "data.csv.partial"));
    fs::remove_all(dir);
}

TEST_CASE("config loading") {
    const fs::path dir = temp_dir();

    SUBCASE("minimal config applies documented defaults, echo is byte-stable") {
        const fs::path p = dir / "min.json";
        std::ofstream(p) << R"({"grid": {"nx": 16}, "physics": {"mu": 1.0},
                               "scheme": {"T": 0.25}})";
        const RunConfig a = load_config(p);
        CHECK(a.kappa == 0.5);
        CHECK(a.epsilons == std::vector<double>{0.1});
        CHECK(a.scheme.T == 0.25);
        CHECK(a.output.record_every == 50);
        const RunConfig b = load_config(p);
        CHECK(dump_config(a) == dump_config(b));
    }

    SUBCASE("missing mu is rejected citing the assumption") {
        const fs::path p = dir / "nomu.json";
        std::ofstream(p) << R"({"grid": {"nx": 16}})";
        try {
            load_config(p);
            FAIL("expected rejection");
        } catch (const ValidationError& e) {
            CHECK(e.assumption() == "mu_positive");
            CHECK(std::string(e.what()).find("mu > 0") != std::string::npos);
        }
    }

    SUBCASE("increasing epsilon list is rejected") {
        const fs::path p = dir / "eps.json";
        std::ofstream(p) << R"({"grid": {"nx": 16}, "physics": {"mu": 1.0},
                               "epsilon_list": [0.1, 0.2]})";
        CHECK_THROWS_AS(load_config(p), ValidationError);
    }

    SUBCASE("unknown keys are rejected") {
        const fs::path p = dir / "unknown.json";
        std::ofstream(p) << R"({"grid": {"nx": 16}, "physics": {"mu": 1.0},
                               "turbo": true})";
        CHECK_THROWS_AS(load_config(p), ValidationError);
    }

    SUBCASE("parse errors carry position info") {
        const fs::path p = dir / "broken.json";
        std::ofstream(p) << "{ not json";
        CHECK_THROWS_AS(load_config(p), IoError);
    }

    SUBCASE("overrides bypass validation") {
        const fs::path p = dir / "ok.json";
        std::ofstream(p) << R"({"grid": {"nx": 16}, "physics": {"mu": 1.0}})";
        RunConfig cfg = load_config(p);
        CHECK(cfg.validated);
        apply_override(cfg, "physics.mu=0");
        CHECK(cfg.mu == 0.0);
        CHECK_FALSE(cfg.validated);
        CHECK_THROWS_AS(apply_override(cfg, "bogus.key=1"), ContractError);
    }

    SUBCASE("file-backed field inputs") {
        const GridSpec g = GridSpec::unit_square(16);
        ScalarField n0(g, ScalarBc::Neumann, 0.75);
        write_scalar_snapshot(dir / "n0.field", "n0", n0, 0.0);
        const fs::path p = dir / "filecfg.json";
        std::ofstream(p) << R"({"grid": {"nx": 16}, "physics": {"mu": 1.0,
                               "n0": {"file": "n0.field"}}})";
        const RunConfig cfg = load_config(p);
        const MaterializedInputs m = materialize(cfg, cfg.grid);
        CHECK(m.initial.n0.at(3, 3) == 0.75);
    }

    fs::remove_all(dir);
}

TEST_CASE("trajectory loading catches missing fields") {
    const GridSpec g = GridSpec::unit_square(8);
    const fs::path dir = temp_dir();
    write_scalar_snapshot(dir / snapshot_file_name(0, "n"), "n",
                          ScalarField(g, ScalarBc::Neumann, 1.0), 0.0);
    write_scalar_snapshot(dir / snapshot_file_name(0, "c"), "c",
                          ScalarField(g, ScalarBc::Neumann, 1.0), 0.0);
    CHECK_THROWS_AS(load_trajectory(dir, g), IoError);

    write_velocity_snapshot(dir / snapshot_file_name(0, "u"), "u", VectorField(g), 0.0);
    const Trajectory traj = load_trajectory(dir, g);
    CHECK(traj.size() == 1);
    CHECK(traj[0].t == 0.0);
    fs::remove_all(dir);
}
