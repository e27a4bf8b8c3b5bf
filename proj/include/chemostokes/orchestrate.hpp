#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "chemostokes/config.hpp"
#include "chemostokes/diagnostics.hpp"
#include "chemostokes/io.hpp"
#include "chemostokes/weakform.hpp"

namespace chemostokes {

// Exit-code contract: 0 all checks pass, 1 a check failed, 2 blow-up abort,
// 3 usage/configuration problem.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitBlowup = 2;
inline constexpr int kExitUsage = 3;

struct CheckVerdict {
    std::string check_id;
    std::string verdict;  // PASS | FAIL | HYPOTHESIS-FAIL | ERROR | EXACT
    double metric = 0.0;
    double threshold = 0.0;
    std::string detail;

    std::string csv_row() const;
    static std::string csv_header();
};

struct RunArtifacts {
    double epsilon = 0.0;
    std::vector<FunctionalRecord> records;
    Trajectory trajectory;  // filled when snapshots are enabled
    std::vector<CheckVerdict> verdicts;
    bool aborted = false;
    std::string abort_reason;
    double dt = 0.0;
    double wall_seconds = 0.0;

    bool all_pass() const;
};

/// One simulation: integrate, stream records, write snapshots and the records
/// CSV atomically, evaluate the per-run checks.
RunArtifacts run_single(const RunConfig& cfg, double epsilon,
                        const std::filesystem::path& out_dir, bool write_artifacts,
                        bool keep_trajectory);

/// Per-run check battery on an existing record series.
std::vector<CheckVerdict> evaluate_series_checks(std::span<const FunctionalRecord> records,
                                                 const RunConfig& cfg,
                                                 const MaterializedInputs& inputs,
                                                 double dt);

struct SweepReport {
    std::vector<double> epsilons;
    std::vector<RunArtifacts> members;          // one per epsilon, run order
    std::vector<CauchyDiffs> cauchy;            // adjacent pairs
    std::vector<CheckVerdict> cross_checks;     // uniformity, stability, Cauchy decay
    bool degenerate = false;

    bool all_pass() const;
};

SweepReport sweep(const RunConfig& cfg, const std::filesystem::path& out_dir, int threads);

struct RefineRow {
    std::string quantity;
    int level = 0;
    double h = 0.0;
    double dt = 0.0;
    double error = 0.0;
    double order = 0.0;   // vs previous level; NaN on the first level
    bool exact = false;   // error at round-off, order not meaningful
};

struct RefineReport {
    std::vector<RefineRow> rows;
    std::vector<CheckVerdict> verdicts;
    bool all_pass() const;
};

RefineReport refine(const RunConfig& cfg, int levels, const std::filesystem::path& out_dir);

int cmd_run(const RunConfig& cfg, const std::filesystem::path& out_dir);
int cmd_sweep(const RunConfig& cfg, const std::filesystem::path& out_dir, int threads);
int cmd_refine(const RunConfig& cfg, int levels, const std::filesystem::path& out_dir);
int cmd_check(const std::filesystem::path& run_dir, const std::vector<std::string>& suites);

void write_verdicts_csv(const std::filesystem::path& path,
                        std::span<const CheckVerdict> verdicts);
std::vector<CheckVerdict> read_verdicts_csv(const std::filesystem::path& path);

}  // namespace chemostokes
