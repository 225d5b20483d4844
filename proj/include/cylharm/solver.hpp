#pragma once

#include <cstdint>
#include <vector>

#include "cylharm/construct.hpp"
#include "cylharm/grid.hpp"

namespace cylharm {

struct SolveOptions {
    int max_sweeps = 200000;
    // Target sup distance between the returned map and the exact discrete
    // minimizer.  The sweep loop stops once the extrapolated remaining
    // movement (per-sweep displacement times rho/(1-rho) for the measured
    // contraction ratio rho) drops below half this value; the raw per-sweep
    // displacement alone says little because it is (1-rho) times the error.
    double tol_move = 1e-6;
    double tol_energy = 1e-10;  // relative energy decrease between samples
    double barycenter_tol = 1e-11;
    std::vector<double> exhaustion_schedule = {4.0, 6.0, 8.0};
    double compare_window = 2.0;  // sub-cylinder length for stage comparison
    double compare_tol = 0.05;    // target for the final stage-to-stage jump
    int energy_every = 16;        // sweep sampling cadence
    uint64_t seed = 1;
};

void validate_options(const SolveOptions& opts);

struct SweepRecord {
    int sweep = 0;
    double energy = 0.0;
    double max_move = 0.0;
    double err_est = 0.0;   // extrapolated sup distance to the fixed point
    double residual = 0.0;  // harmonicity residual at this sample
};

struct SolveResult {
    EquivariantGridMap map;
    int sweeps_used = 0;
    bool converged = false;
    double final_energy = 0.0;
    double harmonicity_residual = 0.0;
    double err_est = 0.0;
    std::vector<SweepRecord> convergence_curve;
};

// max over interior nodes of the distance from the node value to the
// weighted barycenter of its four (twisted) neighbors
double harmonicity_residual(const EquivariantGridMap& m,
                            double barycenter_tol = 1e-11);

// Dirichlet solve: rows 0 and n_t of init are held fixed, interior nodes are
// relaxed to the weighted barycenter of their neighbors with weights
// (1/h_t^2, 1/h_t^2, 1/h_psi^2, 1/h_psi^2), sweeping the two checkerboard
// color classes in turn.  Energy never increases across updates.
SolveResult solve_annulus(const EquivariantGridMap& init,
                          const SolveOptions& opts);
SolveResult solve_annulus(const std::vector<Point>& outer,
                          const std::vector<Point>& inner,
                          const EquivariantGridMap& init,
                          const SolveOptions& opts);

struct ExhaustionDiagnostics {
    std::vector<double> T_values;
    // sup distance between consecutive stage solutions on [0, compare_window]
    std::vector<double> sup_jump;
    std::vector<double> energy_window;    // stage energy over [0, compare_window]
    std::vector<double> prototype_window;  // same window, prototype competitor
    double window_C = 0.0;  // max excess of stage energy over the prototype's
    bool jumps_decreasing = false;
    bool cauchy_met = false;
};

struct PuncturedResult {
    SolveResult final_solve;           // deepest stage
    std::vector<SolveResult> stages;   // one per schedule entry
    ExhaustionDiagnostics diag;
    bool flagged_partial = false;
};

// Exhaustion toward the puncture: for each T in the schedule, solve the
// annulus [0, T] with the given outer boundary at t = 0 and the prototype
// slice as inner boundary at t = T.  Every stage starts from the prototype
// map; perturb_amp > 0 jitters the interior of the start (used by the
// two-start probe).  Stage grids share h_t, so consecutive solutions are
// compared node by node on the common window.
PuncturedResult solve_punctured(const ModelSpace& space, const Isometry& twist,
                                const std::vector<Point>& outer, double h_t,
                                const SolveOptions& opts,
                                double prototype_exponent = 1.0 / 3.0,
                                double perturb_amp = 0.0);

struct TwoStartResult {
    PuncturedResult run0;
    PuncturedResult run1;
    std::vector<double> slice_sup;  // per slice of the final grid
    double max_over_window = 0.0;   // max slice_sup for t <= compare_window
    double d2_max = 0.0;            // max of d^2(u0, u1) over all nodes
    double d2_spread = 0.0;         // max - min of d^2 over all nodes
};

// solves the same problem twice from independently perturbed starts;
// agreement certifies uniqueness of the discrete minimizer at solver scale
TwoStartResult two_start_uniqueness(const ModelSpace& space,
                                    const Isometry& twist,
                                    const std::vector<Point>& outer,
                                    double h_t, const SolveOptions& opts,
                                    double prototype_exponent = 1.0 / 3.0,
                                    double perturb_amp = 0.25);

}  // namespace cylharm
