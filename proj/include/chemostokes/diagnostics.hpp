#pragma once

#include <span>
#include <string>
#include <vector>

#include "chemostokes/stepper.hpp"

namespace chemostokes {

/// One time-sample of every tracked functional.
struct FunctionalRecord {
    double t = 0.0;
    double mass = 0.0;              // int n
    double l2n_sq = 0.0;            // int n^2
    double c_max = 0.0;
    double c_min = 0.0;
    double grad_c_l2_sq = 0.0;      // int |grad c|^2
    double lap_c_l2_sq = 0.0;       // int |lap c|^2
    double grad_c_l4 = 0.0;         // int |grad c|^4
    double kinetic = 0.0;           // int |u|^2 (face sum)
    double grad_u_l2_sq = 0.0;      // discrete Dirichlet form of int |grad u|^2
    double u_l6 = 0.0;              // int |u|^6
    double entropy = 0.0;           // int n ln n  (0 ln 0 = 0)
    double fisher = 0.0;            // int |grad n|^2 / n, vacuum-floored
    double n2_log = 0.0;            // int n^2 ln n
    double grad_n_43 = 0.0;         // int |grad n|^{4/3}
    double theta = 0.0;             // int n^2 ln(n^2 + 1)
    double chat_boundary_max = 0.0; // max over the trace of |c_* - c|
    double clipped_mass_cum = 0.0;
    double u_forcing = 0.0;         // int n (grad phi . u), face sum

    static std::string csv_header();
    std::string csv_row() const;
};

/// Fills every functional from a state. Throws NumericalError naming the
/// functional if a non-finite value appears.
FunctionalRecord compute_record(const SimState& s, const GridSpec& g, const RegParams& reg,
                                const PhysicalParams& p);

/// Diagnostic field c_hat = c_* - c (Dirichlet-zero trace by construction).
ScalarField chat_field(const SimState& s, const PhysicalParams& p, const GridSpec& g);

/// Frozen tolerance model for discrete-derivative identity checks,
/// tol = A dt + B h^2, calibrated on the pure-diffusion case.
struct TolModel {
    double a = 0.0;
    double b = 0.0;
    double operator()(double dt, double h) const { return a * dt + b * h * h; }
};
inline constexpr TolModel kMassOdeTol{25.0, 0.02};
inline constexpr TolModel kUEnergyTol{40.0, 0.02};

struct MassOdeResult {
    double max_residual = 0.0;
    double tol = 0.0;
    bool pass = false;
};

/// Residual of d/dt int n = kappa int n - mu int n^2, centered differences
/// against trapezoid midpoints of the right-hand side.
MassOdeResult check_mass_ode(std::span<const FunctionalRecord> series, double kappa, double mu,
                             double dt, double h);

struct MaxPrincipleResult {
    bool pass = false;
    double worst_margin = 0.0;  // max over time of c_max - bound (negative when safe)
    double bound = 0.0;
};

MaxPrincipleResult check_max_principle(std::span<const FunctionalRecord> series, double c0_max,
                                       double cstar_max);

struct UEnergyResult {
    double max_identity_residual = 0.0;
    double identity_tol = 0.0;
    bool identity_pass = false;
    bool inequality_pass = false;  // (1/2) dE/dt + (1/2) int|grad u|^2 <= C1 int n^2 + tol
    double worst_inequality_margin = 0.0;
};

/// Tests the pre-Young fluid energy identity
/// (1/2) d/dt int|u|^2 = -int|grad u|^2 + int n (grad phi . u)
/// and the inequality form with C1 = |grad phi|_inf^2 / 2 + 1/2.
UEnergyResult check_u_energy(std::span<const FunctionalRecord> series, double grad_phi_inf,
                             double dt, double h);

struct FittedConstant {
    double c = 0.0;   // smallest admissible constant
    bool pass = false;
};

/// Smallest C >= 0 with (1/2) d/dt int|grad c|^2 + (1/4) int|lap c|^2
///   <= C (int n^2 + 1) at every interval.
FittedConstant check_gradc_inequality(std::span<const FunctionalRecord> series);

/// Smallest C >= 0 with d/dt int n ln n + (1/2) fisher + (mu/2) int n^2 ln n
///   <= C (int n^2 + int |grad c|^4 + 1).
FittedConstant check_entropy_inequality(std::span<const FunctionalRecord> series, double mu);

enum class OdeVerdict { Pass, Fail, HypothesisFail };

struct OdeComparisonResult {
    OdeVerdict verdict = OdeVerdict::Pass;
    long first_violation = -1;     // sample index of the first bound violation
    double worst_margin = 0.0;     // max over samples of y - bound
    double bound = 0.0;            // y(0) + C / (1 - e^-a)
};

/// Checker for the comparison statement: if y' + a y <= h on every interval
/// and every unit-window integral of h is below C, then
/// y <= y(0) + C / (1 - e^-a). Hypotheses are verified on the sampled series;
/// a violated conclusion is reported as Fail, otherwise broken hypotheses as
/// HypothesisFail.
OdeComparisonResult ode_comparison_check(std::span<const double> t, std::span<const double> y,
                                         std::span<const double> h, double a, double c,
                                         double tol);

/// Running suprema and unit-window trapezoid integrals per record.
struct WindowBounds {
    std::vector<double> t;
    std::vector<double> sup_mass;
    std::vector<double> sup_grad_c_l2_sq;
    std::vector<double> sup_grad_u_l2_sq;
    std::vector<double> sup_u_l6;
    std::vector<double> win_l2n_sq;       // int over ((t-1)+, t) of int n^2
    std::vector<double> win_lap_c_l2_sq;
    std::vector<double> win_grad_c_l4;
    std::vector<double> cum_grad_n_43;    // int over (0, t) of int |grad n|^{4/3}

    /// Worst (largest) value each channel attains; order matches channel_names().
    std::vector<double> channel_maxima() const;
    static const std::vector<std::string>& channel_names();
};

WindowBounds window_bounds(std::span<const FunctionalRecord> series);

/// Uniform-cadence precondition shared by the series checks.
double require_uniform_cadence(std::span<const FunctionalRecord> series, const char* who);

}  // namespace chemostokes
