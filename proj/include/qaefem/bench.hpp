#ifndef QAEFEM_BENCH_HPP
#define QAEFEM_BENCH_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qaefem/aqae.hpp"
#include "qaefem/fem1d.hpp"
#include "qaefem/samplers.hpp"

namespace qaefem {

/// Inclusive bit-depth sweep [lo, hi].
struct DRange {
    int lo = 0;
    int hi = 0;
};

/// One experiment, declaratively.  Parsed from a single JSON document; every
/// field has a schema key of the same name except where noted below.
///
///   problem        "homogeneous" | "nonhomogeneous"
///   N, p           elements / polynomial order
///   k0             wavenumber, given either as "k0" (raw) or "k0_pi"
///                  (multiple of pi); at most one of the two keys
///   n_modes        homogeneous only (default 1)
///   D | D_range    bits per component: exactly one of the two keys
///   solver         "exhaustive" | "simulated_annealing"
///   sa             {numreads, sweeps, beta_min, beta_max}
///   sigma_eta | sigma_range   ICE noise level(s); at most one key
///   n_delta, n_lambda, ratio, box_half_width   box-algorithm schedule
///   threshold      convergence bound on the final relative residual
///   repeats        runs per stochastic grid point
///   seed           64-bit master seed (CLI --seed overrides)
///   material       "vacuum_sio2" | "uniform"
///   source         "sin2pi" | "zero" (nonhomogeneous only)
///   output_dir     artifact directory (CLI --out overrides)
struct ExperimentConfig {
    std::string problem = "homogeneous";
    int elements = 10;
    int order = 1;
    double k0 = 0.0;
    int n_modes = 1;
    int bits = 0;  // 0 = unset; then bits_range must be set
    std::optional<DRange> bits_range;
    std::string solver = "simulated_annealing";
    SaConfig sa;
    double sigma_eta = 0.0;
    std::vector<double> sigma_range;  // non-empty only for ICE sweeps
    int n_delta = 25;
    int n_lambda = 10;
    double ratio = 0.5;
    double box_half_width = 1.0;
    double threshold = 1e-6;
    int repeats = 5;
    std::uint64_t seed = 1;
    std::string material = "vacuum_sio2";
    std::string source = "sin2pi";
    std::string output_dir = "out";

    /// Strict parse: unknown keys, conflicting keys, and out-of-range values
    /// all throw ConfigError.
    static ExperimentConfig from_json(const nlohmann::json& j);

    void validate() const;

    int max_bits() const { return bits_range ? bits_range->hi : bits; }
    Material make_material() const;
    FeProblem assemble_problem() const;
};

/// Headline verdict of one experiment.  `converged` compares the final
/// relative residual against `threshold` (recorded alongside, since the
/// verdict is meaningless without it).  d_star == 0 and sigma_star < 0 mean
/// "not applicable / not found".  wall_ms is informational only; it goes to
/// timing.json, never into the deterministic CSVs.
struct RunSummary {
    bool converged = false;
    double final_residual = 0.0;
    double threshold = 1e-6;
    int d_star = 0;
    double sigma_star = -1.0;
    double wall_ms = 0.0;
};

/// Source-free eigenmode study: modes 0..n_modes-1 with deflation.
/// Artifacts in output_dir: trace_mode<n>.csv, references.csv, summary.csv,
/// timing.json.  `converged` is true when every mode's final relative
/// residual is within threshold (vacuously true for n_modes = 0);
/// final_residual is the worst final residual across modes.
RunSummary run_homogeneous(const ExperimentConfig& cfg);

/// Driven problem via the rank-one normal-equations pencil, over ascending
/// bit depths.  Each D gets up to `repeats` runs (stopping early once a
/// majority verdict is fixed); D_star is the first D where a majority of
/// repeats converge, and the scan stops there.  At D_star the recovered
/// solution is compared against the direct SPD solve (recovery.csv).
/// Artifacts: trace_D<d>_rep<r>.csv, recovery.csv, summary.csv, timing.json.
RunSummary run_nonhomogeneous(const ExperimentConfig& cfg);

/// Noise-threshold sweep over sigma_range (ascending).  Per sigma, `repeats`
/// runs; the score of a run is its residual drop in orders of magnitude,
/// -log10(final relative residual), 0 for a NaN sentinel.  sigma_star is the
/// smallest sigma whose mean drop falls below one order.  `converged` is true
/// when the smallest sigma still achieves a mean drop >= 1.  Works on either
/// problem (mode 0 only); requires a single D and repeats >= 3.
/// Artifacts: trace_s<i>_rep<r>.csv, ice_stats.csv, summary.csv, timing.json.
RunSummary run_ice_sweep(const ExperimentConfig& cfg);

/// One row of the condition-number table for A = (K+M)^T (K+M).
struct CondCell {
    int elements = 0;
    int order = 0;
    double k0 = 0.0;
};
struct CondRow {
    CondCell cell;
    double cond = 0.0;
};

/// The six (N, p, k0) combinations of the reference study:
/// {(10,1),(2,5)} x k0 in {0, pi, 2pi}.
std::vector<CondCell> default_condition_cells();

/// Condition numbers of the normal-equations operator, one row per cell;
/// also writes cond_table.csv into output_dir.
std::vector<CondRow> run_condition_table(const std::vector<CondCell>& cells,
                                         const std::string& output_dir);

}  // namespace qaefem

#endif
