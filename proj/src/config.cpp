#include "chemostokes/config.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "chemostokes/io.hpp"

namespace chemostokes {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& item : j.items())
        if (!known.count(item.key()))
            throw ValidationError("unknown_config_key",
                                  "unknown key \"" + item.key() + "\" in " + where);
}

FieldInput parse_field_input(const json& j, const std::string& where) {
    FieldInput in;
    if (j.is_string()) {
        in.expression = j.get<std::string>();
        Expression::parse(in.expression);  // fail fast with position info
    } else if (j.is_number()) {
        in.expression = fmt17(j.get<double>());
    } else if (j.is_object()) {
        reject_unknown_keys(j, {"file"}, where);
        in.file = j.at("file").get<std::string>();
    } else {
        throw ValidationError("config_field_input",
                              where + " must be an expression string or {\"file\": path}");
    }
    return in;
}

json field_input_json(const FieldInput& in) {
    if (in.from_file()) return json{{"file", in.file}};
    return json(in.expression);
}

ScalarField sample_input(const FieldInput& in, const GridSpec& g, ScalarBc bc,
                         const std::filesystem::path& base_dir) {
    if (in.from_file()) {
        std::filesystem::path p = in.file;
        if (p.is_relative()) p = base_dir / p;
        ScalarField f = read_scalar_snapshot(p, g);
        f.bc = bc;
        if (bc == ScalarBc::Dirichlet) {
            // The snapshot format stores cell values only: extrapolate the
            // trace linearly from the two nearest cell rows.
            f.trace.west.resize(g.ny);
            f.trace.east.resize(g.ny);
            f.trace.south.resize(g.nx);
            f.trace.north.resize(g.nx);
            for (int j = 0; j < g.ny; ++j) {
                f.trace.west[j] = 1.5 * f.at(0, j) - 0.5 * f.at(1, j);
                f.trace.east[j] = 1.5 * f.at(g.nx - 1, j) - 0.5 * f.at(g.nx - 2, j);
            }
            for (int i = 0; i < g.nx; ++i) {
                f.trace.south[i] = 1.5 * f.at(i, 0) - 0.5 * f.at(i, 1);
                f.trace.north[i] = 1.5 * f.at(i, g.ny - 1) - 0.5 * f.at(i, g.ny - 2);
            }
        }
        return f;
    }
    const Expression e = Expression::parse(in.expression);
    const auto fn = [&e](double x, double y) { return e.eval(x, y); };
    if (bc == ScalarBc::Dirichlet) return sample_dirichlet(g, fn);
    return sample_cells(g, bc, fn);
}

}  // namespace

RunConfig default_config() {
    RunConfig cfg;
    cfg.grid = GridSpec::unit_square(64);
    return cfg;
}

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw IoError(std::string("config parse error: ") + e.what());
    }

    reject_unknown_keys(j, {"grid", "physics", "epsilon", "epsilon_list", "scheme", "output"},
                        "config root");
    RunConfig cfg = default_config();

    if (!j.contains("grid")) throw ValidationError("config_grid", "config must define grid");
    {
        const json& jg = j["grid"];
        reject_unknown_keys(jg, {"nx", "ny", "Lx", "Ly"}, "grid");
        const int nx = jg.value("nx", 64);
        const int ny = jg.value("ny", nx);
        const double lx = jg.value("Lx", 1.0);
        const double ly = jg.value("Ly", lx * ny / nx);
        cfg.grid = GridSpec::from_extent(lx, ly, nx, ny);
    }

    if (j.contains("physics")) {
        const json& jp = j["physics"];
        reject_unknown_keys(jp,
                            {"kappa", "mu", "phi", "c_star", "n0", "c0", "u0", "u0x", "u0y"},
                            "physics");
        if (jp.contains("kappa")) cfg.kappa = jp["kappa"].get<double>();
        if (!jp.contains("mu"))
            throw ValidationError("mu_positive",
                                  "physics.mu is required (mu > 0, growth/decay assumption)");
        cfg.mu = jp["mu"].get<double>();
        if (jp.contains("phi")) cfg.phi = parse_field_input(jp["phi"], "physics.phi");
        if (jp.contains("c_star"))
            cfg.c_star = parse_field_input(jp["c_star"], "physics.c_star");
        if (jp.contains("n0")) cfg.n0 = parse_field_input(jp["n0"], "physics.n0");
        if (jp.contains("c0")) cfg.c0 = parse_field_input(jp["c0"], "physics.c0");
        if (jp.contains("u0")) {
            reject_unknown_keys(jp["u0"], {"file"}, "physics.u0");
            cfg.u0_file = jp["u0"].at("file").get<std::string>();
        }
        if (jp.contains("u0x")) cfg.u0x = parse_field_input(jp["u0x"], "physics.u0x");
        if (jp.contains("u0y")) cfg.u0y = parse_field_input(jp["u0y"], "physics.u0y");
    } else {
        throw ValidationError("mu_positive",
                              "physics.mu is required (mu > 0, growth/decay assumption)");
    }

    if (j.contains("epsilon") && j.contains("epsilon_list"))
        throw ValidationError("config_epsilon", "give either epsilon or epsilon_list");
    if (j.contains("epsilon")) cfg.epsilons = {j["epsilon"].get<double>()};
    if (j.contains("epsilon_list")) {
        cfg.epsilons = j["epsilon_list"].get<std::vector<double>>();
        if (cfg.epsilons.empty())
            throw ValidationError("config_epsilon", "epsilon_list must not be empty");
        for (size_t k = 0; k + 1 < cfg.epsilons.size(); ++k)
            if (!(cfg.epsilons[k] > cfg.epsilons[k + 1]))
                throw ValidationError("epsilon_list_strictly_decreasing",
                                      "epsilon_list must be strictly decreasing");
    }
    for (double e : cfg.epsilons)
        if (!(e > 0.0) || !(e < 1.0))
            throw ValidationError("epsilon_in_unit_interval", "epsilon must lie in (0, 1)");

    if (j.contains("scheme")) {
        const json& js = j["scheme"];
        reject_unknown_keys(js,
                            {"cfl_sigma", "dt_max", "projection_tol", "n_max_abort",
                             "dt_min_abort", "T"},
                            "scheme");
        cfg.scheme.cfl_sigma = js.value("cfl_sigma", cfg.scheme.cfl_sigma);
        cfg.scheme.dt_max = js.value("dt_max", cfg.scheme.dt_max);
        cfg.scheme.projection_tol = js.value("projection_tol", cfg.scheme.projection_tol);
        cfg.scheme.n_max_abort = js.value("n_max_abort", cfg.scheme.n_max_abort);
        cfg.scheme.dt_min_abort = js.value("dt_min_abort", cfg.scheme.dt_min_abort);
        cfg.scheme.T = js.value("T", cfg.scheme.T);
    }
    if (!(cfg.scheme.cfl_sigma > 0.0) || !(cfg.scheme.cfl_sigma <= 1.0))
        throw ValidationError("cfl_sigma_range", "scheme.cfl_sigma must lie in (0, 1]");
    if (!(cfg.scheme.dt_max > 0.0) || !(cfg.scheme.projection_tol > 0.0) ||
        !(cfg.scheme.n_max_abort > 0.0) || !(cfg.scheme.dt_min_abort > 0.0))
        throw ValidationError("scheme_tolerances_positive",
                              "scheme tolerances and thresholds must be positive");

    if (j.contains("output")) {
        const json& jo = j["output"];
        reject_unknown_keys(jo, {"record_every", "snapshot_every", "snapshot_times", "dir"},
                            "output");
        cfg.output.record_every = jo.value("record_every", cfg.output.record_every);
        cfg.output.snapshot_every = jo.value("snapshot_every", cfg.output.snapshot_every);
        if (jo.contains("snapshot_times"))
            cfg.output.snapshot_times = jo["snapshot_times"].get<std::vector<double>>();
        cfg.output.dir = jo.value("dir", cfg.output.dir);
    }
    if (cfg.output.record_every < 1)
        throw ValidationError("record_every_positive", "output.record_every must be >= 1");

    cfg.base_dir = base_dir.empty() ? "." : base_dir.string();

    // Sampling every input now surfaces expression/file problems at load time
    // and runs the full assumption validation.
    materialize(cfg, cfg.grid, /*validate=*/true);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str(), path.parent_path());
}

void apply_override(RunConfig& cfg, const std::string& key_eq_value) {
    const size_t eq = key_eq_value.find('=');
    if (eq == std::string::npos)
        throw ContractError("override must look like key=value: " + key_eq_value);
    const std::string key = key_eq_value.substr(0, eq);
    const std::string value = key_eq_value.substr(eq + 1);
    const auto num = [&]() {
        char* end = nullptr;
        const double v = std::strtod(value.c_str(), &end);
        if (end == value.c_str() || *end != '\0')
            throw ContractError("override value for " + key + " is not a number");
        return v;
    };

    if (key == "physics.kappa") cfg.kappa = num();
    else if (key == "physics.mu") cfg.mu = num();
    else if (key == "physics.phi") cfg.phi = FieldInput{value, ""};
    else if (key == "physics.c_star") cfg.c_star = FieldInput{value, ""};
    else if (key == "physics.n0") cfg.n0 = FieldInput{value, ""};
    else if (key == "physics.c0") cfg.c0 = FieldInput{value, ""};
    else if (key == "physics.u0x") cfg.u0x = FieldInput{value, ""};
    else if (key == "physics.u0y") cfg.u0y = FieldInput{value, ""};
    else if (key == "epsilon") cfg.epsilons = {num()};
    else if (key == "scheme.cfl_sigma") cfg.scheme.cfl_sigma = num();
    else if (key == "scheme.dt_max") cfg.scheme.dt_max = num();
    else if (key == "scheme.projection_tol") cfg.scheme.projection_tol = num();
    else if (key == "scheme.n_max_abort") cfg.scheme.n_max_abort = num();
    else if (key == "scheme.dt_min_abort") cfg.scheme.dt_min_abort = num();
    else if (key == "scheme.T") cfg.scheme.T = num();
    else if (key == "output.record_every") cfg.output.record_every = static_cast<long>(num());
    else if (key == "output.snapshot_every")
        cfg.output.snapshot_every = static_cast<long>(num());
    else if (key == "output.dir") cfg.output.dir = value;
    else throw ContractError("unknown override key: " + key);

    cfg.validated = false;  // overrides bypass the assumption validation
}

std::string dump_config(const RunConfig& cfg) {
    json j;
    j["grid"] = {{"nx", cfg.grid.nx}, {"ny", cfg.grid.ny}, {"Lx", cfg.grid.Lx},
                 {"Ly", cfg.grid.Ly}};
    j["physics"] = {{"kappa", cfg.kappa},
                    {"mu", cfg.mu},
                    {"phi", field_input_json(cfg.phi)},
                    {"c_star", field_input_json(cfg.c_star)},
                    {"n0", field_input_json(cfg.n0)},
                    {"c0", field_input_json(cfg.c0 ? *cfg.c0 : cfg.c_star)},
                    {"u0x", field_input_json(cfg.u0x)},
                    {"u0y", field_input_json(cfg.u0y)}};
    if (cfg.epsilons.size() == 1)
        j["epsilon"] = cfg.epsilons.front();
    else
        j["epsilon_list"] = cfg.epsilons;
    j["scheme"] = {{"cfl_sigma", cfg.scheme.cfl_sigma},
                   {"dt_max", cfg.scheme.dt_max},
                   {"projection_tol", cfg.scheme.projection_tol},
                   {"n_max_abort", cfg.scheme.n_max_abort},
                   {"dt_min_abort", cfg.scheme.dt_min_abort},
                   {"T", cfg.scheme.T}};
    j["output"] = {{"record_every", cfg.output.record_every},
                   {"snapshot_every", cfg.output.snapshot_every},
                   {"snapshot_times", cfg.output.snapshot_times},
                   {"dir", cfg.output.dir}};
    return j.dump(2) + "\n";
}

MaterializedInputs materialize(const RunConfig& cfg, const GridSpec& g, bool validate) {
    const std::filesystem::path base = cfg.base_dir;
    MaterializedInputs m;
    m.physics.kappa = cfg.kappa;
    m.physics.mu = cfg.mu;
    m.physics.phi = sample_input(cfg.phi, g, ScalarBc::Neumann, base);
    m.physics.c_star = sample_input(cfg.c_star, g, ScalarBc::Dirichlet, base);
    m.initial.n0 = sample_input(cfg.n0, g, ScalarBc::Neumann, base);
    m.initial.c0 = sample_input(cfg.c0 ? *cfg.c0 : cfg.c_star, g, ScalarBc::Dirichlet, base);

    if (!cfg.u0_file.empty()) {
        std::filesystem::path p = cfg.u0_file;
        if (p.is_relative()) p = base / p;
        m.initial.u0 = read_velocity_snapshot(p, g);
        m.initial.u0.no_slip = true;
        m.initial.u0.zero_boundary_faces();
    } else {
        const Expression ex = Expression::parse(cfg.u0x.expression);
        const Expression ey = Expression::parse(cfg.u0y.expression);
        m.initial.u0 = sample_faces(
            g, [&](double x, double y) { return ex.eval(x, y); },
            [&](double x, double y) { return ey.eval(x, y); }, /*no_slip=*/true);
    }

    if (validate)
        m.initial = validate_inputs(m.initial, m.physics, g, cfg.scheme.projection_tol);
    else
        m.initial.u0 = project(m.initial.u0, g, 1.0, cfg.scheme.projection_tol);
    return m;
}

}  // namespace chemostokes
