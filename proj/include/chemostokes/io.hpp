#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "chemostokes/diagnostics.hpp"
#include "chemostokes/weakform.hpp"

namespace chemostokes {

/// CHEMOSTOKES-FIELD v1: a text header line
///   "CHEMOSTOKES-FIELD v1 <name> <nx> <ny> <t>\n"
/// followed by nx*ny little-endian 64-bit floats, row-major (y-outer, x-inner).
/// Velocity snapshots store the two face arrays consecutively, each with its
/// own header (names "<name>_x" and "<name>_y").
struct FieldBlockHeader {
    std::string name;
    int nx = 0;
    int ny = 0;
    double t = 0.0;
};

void write_field_block(std::ostream& os, const std::string& name, int nx, int ny, double t,
                       std::span<const double> data);
FieldBlockHeader read_field_block(std::istream& is, std::vector<double>& data);

void write_scalar_snapshot(const std::filesystem::path& path, const std::string& name,
                           const ScalarField& f, double t);
void write_velocity_snapshot(const std::filesystem::path& path, const std::string& name,
                             const VectorField& v, double t);

ScalarField read_scalar_snapshot(const std::filesystem::path& path, const GridSpec& g,
                                 double* t_out = nullptr, std::string* name_out = nullptr);
VectorField read_velocity_snapshot(const std::filesystem::path& path, const GridSpec& g,
                                   double* t_out = nullptr);

/// Records CSV: one header row naming every FunctionalRecord field, one row
/// per sample, 17-significant-digit decimal floats.
void write_records_csv(const std::filesystem::path& path,
                       std::span<const FunctionalRecord> records);
std::vector<FunctionalRecord> read_records_csv(const std::filesystem::path& path);

/// Writes via a ".partial" sibling and renames on success, so an interrupted
/// run never leaves a readable artifact behind.
class AtomicFileWriter {
public:
    explicit AtomicFileWriter(std::filesystem::path final_path);
    ~AtomicFileWriter();
    std::ostream& stream();
    void commit();

private:
    std::filesystem::path final_path_;
    std::filesystem::path partial_path_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
    bool committed_ = false;
};

/// Snapshot file names used by the run artefacts: snap_<step>_{n,c,u}.field.
std::string snapshot_file_name(long step_index, const std::string& field);

/// Loads a trajectory previously written by the run driver (scans the
/// directory for snapshot triples, sorted by step index). When c_star is
/// given, the loaded c fields get their Dirichlet descriptor and trace back
/// (the snapshot format stores cell values only).
Trajectory load_trajectory(const std::filesystem::path& dir, const GridSpec& g,
                           const ScalarField* c_star = nullptr);

}  // namespace chemostokes
