#include "chemostokes/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace chemostokes {

namespace fs = std::filesystem;

namespace {

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_le_doubles(std::ostream& os, std::span<const double> data) {
    for (double v : data) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        unsigned char bytes[8];
        for (int k = 0; k < 8; ++k) bytes[k] = static_cast<unsigned char>(bits >> (8 * k));
        os.write(reinterpret_cast<const char*>(bytes), 8);
    }
}

void read_le_doubles(std::istream& is, std::vector<double>& data, long count) {
    data.resize(count);
    for (long idx = 0; idx < count; ++idx) {
        unsigned char bytes[8];
        if (!is.read(reinterpret_cast<char*>(bytes), 8))
            throw IoError("field block truncated while reading values");
        std::uint64_t bits = 0;
        for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
        data[idx] = std::bit_cast<double>(bits);
    }
}

}  // namespace

void write_field_block(std::ostream& os, const std::string& name, int nx, int ny, double t,
                       std::span<const double> data) {
    if (static_cast<long>(data.size()) != static_cast<long>(nx) * ny)
        throw ContractError("write_field_block: data size does not match nx*ny");
    os << "CHEMOSTOKES-FIELD v1 " << name << ' ' << nx << ' ' << ny << ' ' << fmt17(t) << '\n';
    write_le_doubles(os, data);
    if (!os) throw IoError("write_field_block: stream failure while writing " + name);
}

FieldBlockHeader read_field_block(std::istream& is, std::vector<double>& data) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("field block: missing header line");
    std::istringstream hs(line);
    std::string magic, version;
    FieldBlockHeader h;
    hs >> magic >> version >> h.name >> h.nx >> h.ny >> h.t;
    if (!hs || magic != "CHEMOSTOKES-FIELD" || version != "v1")
        throw IoError("field block: bad header \"" + line + "\"");
    if (h.nx <= 0 || h.ny <= 0) throw IoError("field block: non-positive dimensions");
    read_le_doubles(is, data, static_cast<long>(h.nx) * h.ny);
    return h;
}

void write_scalar_snapshot(const fs::path& path, const std::string& name, const ScalarField& f,
                           double t) {
    AtomicFileWriter w(path);
    write_field_block(w.stream(), name, f.nx, f.ny, t, f.values);
    w.commit();
}

void write_velocity_snapshot(const fs::path& path, const std::string& name,
                             const VectorField& v, double t) {
    AtomicFileWriter w(path);
    write_field_block(w.stream(), name + "_x", v.nx + 1, v.ny, t, v.x);
    write_field_block(w.stream(), name + "_y", v.nx, v.ny + 1, t, v.y);
    w.commit();
}

ScalarField read_scalar_snapshot(const fs::path& path, const GridSpec& g, double* t_out,
                                 std::string* name_out) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open snapshot " + path.string());
    std::vector<double> data;
    const FieldBlockHeader h = read_field_block(is, data);
    if (h.nx != g.nx || h.ny != g.ny)
        throw IoError("snapshot " + path.string() + " does not match the grid");
    ScalarField f(g, ScalarBc::Neumann);
    f.values = std::move(data);
    if (t_out) *t_out = h.t;
    if (name_out) *name_out = h.name;
    return f;
}

VectorField read_velocity_snapshot(const fs::path& path, const GridSpec& g, double* t_out) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open snapshot " + path.string());
    std::vector<double> xs, ys;
    const FieldBlockHeader hx = read_field_block(is, xs);
    const FieldBlockHeader hy = read_field_block(is, ys);
    if (hx.nx != g.nx + 1 || hx.ny != g.ny || hy.nx != g.nx || hy.ny != g.ny + 1)
        throw IoError("velocity snapshot " + path.string() + " does not match the grid");
    if (hx.t != hy.t)
        throw IoError("velocity snapshot " + path.string() + " has inconsistent block times");
    VectorField v(g);
    v.x = std::move(xs);
    v.y = std::move(ys);
    if (t_out) *t_out = hx.t;
    return v;
}

void write_records_csv(const fs::path& path, std::span<const FunctionalRecord> records) {
    AtomicFileWriter w(path);
    w.stream() << FunctionalRecord::csv_header() << '\n';
    for (const FunctionalRecord& r : records) w.stream() << r.csv_row() << '\n';
    w.commit();
}

std::vector<FunctionalRecord> read_records_csv(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open records CSV " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw IoError("records CSV is empty: " + path.string());
    if (line != FunctionalRecord::csv_header())
        throw IoError("records CSV has an unexpected header: " + path.string());

    std::vector<FunctionalRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> vals;
        size_t start = 0;
        while (start <= line.size()) {
            const size_t comma = line.find(',', start);
            const std::string tok =
                line.substr(start, comma == std::string::npos ? std::string::npos
                                                              : comma - start);
            char* end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str()) throw IoError("records CSV: malformed number " + tok);
            vals.push_back(v);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (vals.size() != 19)
            throw IoError("records CSV: expected 19 columns, found " +
                          std::to_string(vals.size()));
        FunctionalRecord r;
        r.t = vals[0];
        r.mass = vals[1];
        r.l2n_sq = vals[2];
        r.c_max = vals[3];
        r.c_min = vals[4];
        r.grad_c_l2_sq = vals[5];
        r.lap_c_l2_sq = vals[6];
        r.grad_c_l4 = vals[7];
        r.kinetic = vals[8];
        r.grad_u_l2_sq = vals[9];
        r.u_l6 = vals[10];
        r.entropy = vals[11];
        r.fisher = vals[12];
        r.n2_log = vals[13];
        r.grad_n_43 = vals[14];
        r.theta = vals[15];
        r.chat_boundary_max = vals[16];
        r.clipped_mass_cum = vals[17];
        r.u_forcing = vals[18];
        out.push_back(r);
    }
    return out;
}

struct AtomicFileWriter::Impl {
    std::ofstream os;
};

AtomicFileWriter::AtomicFileWriter(fs::path final_path)
    : final_path_(std::move(final_path)),
      partial_path_(final_path_.string() + ".partial"),
      impl_(std::make_unique<Impl>()) {
    if (final_path_.has_parent_path()) fs::create_directories(final_path_.parent_path());
    impl_->os.open(partial_path_, std::ios::binary | std::ios::trunc);
    if (!impl_->os) throw IoError("cannot open " + partial_path_.string() + " for writing");
}

AtomicFileWriter::~AtomicFileWriter() {
    if (!committed_) {
        impl_->os.close();
        std::error_code ec;
        fs::remove(partial_path_, ec);  // leave nothing behind on abandon
    }
}

std::ostream& AtomicFileWriter::stream() { return impl_->os; }

void AtomicFileWriter::commit() {
    impl_->os.flush();
    if (!impl_->os) throw IoError("write failure on " + partial_path_.string());
    impl_->os.close();
    fs::rename(partial_path_, final_path_);
    committed_ = true;
}

std::string snapshot_file_name(long step_index, const std::string& field) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "snap_%08ld_%s.field", step_index, field.c_str());
    return buf;
}

Trajectory load_trajectory(const fs::path& dir, const GridSpec& g, const ScalarField* c_star) {
    std::map<long, FieldTriple> by_step;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        long step = 0;
        char field[8] = {0};
        if (std::sscanf(name.c_str(), "snap_%08ld_%1s.field", &step, field) != 2) continue;
        FieldTriple& f = by_step[step];
        double t = 0.0;
        switch (field[0]) {
            case 'n': f.n = read_scalar_snapshot(entry.path(), g, &t); break;
            case 'c': f.c = read_scalar_snapshot(entry.path(), g, &t); break;
            case 'u': f.u = read_velocity_snapshot(entry.path(), g, &t); break;
            default: continue;
        }
        f.t = t;
    }
    Trajectory traj;
    traj.reserve(by_step.size());
    for (auto& [step, f] : by_step) {
        if (f.n.size() == 0 || f.c.size() == 0 || f.u.x.empty())
            throw IoError("trajectory in " + dir.string() + " misses a field at step " +
                          std::to_string(step));
        if (c_star) {
            f.c.bc = ScalarBc::Dirichlet;
            f.c.trace = c_star->trace;
        }
        traj.push_back(std::move(f));
    }
    if (traj.empty()) throw IoError("no snapshots found in " + dir.string());
    return traj;
}

}  // namespace chemostokes
