#ifndef QAEFEM_AQAE_HPP
#define QAEFEM_AQAE_HPP

#include "qaefem/gevp.hpp"
#include "qaefem/samplers.hpp"

namespace qaefem {

/// Bisection window and depth for one eigenvalue search.
struct QaeConfig {
    double lambda_min = 0.0;
    double lambda_max = 1.0;
    int n_lambda = 10;
    // Where the final solve that yields phi_star happens, as a fraction of
    // the certified bracket width below lambda_star. 0 solves at the
    // certified top, where phi_star is the negative-form witness; 0.5 solves
    // at the bracket midpoint, where the form is positive on everything but
    // the eigendirection and the argmin is the most eigen-aligned grid point
    // (the outer box driver needs this to keep refining).
    double final_offset = 0.0;

    void validate() const;
};

struct QaeStep {
    double lambda;
    Vector phi;    // decoded minimizer at this lambda
    bool nonneg;   // sign-test outcome (>= 0 moves lambda_min up)
};

/// Outcome of one bisection run: decoded minimizer of the final QUBO solve,
/// lambda_star = final lambda_max, plus the refined bracket and the per-step
/// log for invariant checks.
struct QaeResult {
    Vector phi_star;
    double lambda_star;
    double lambda_min;
    double lambda_max;
    // Penalized Rayleigh quotient of phi_star (NaN for the zero vector).
    // Unlike lambda_star it is not quantized to the bisection grid, so the
    // outer driver recenters the next bracket on it.
    double rayleigh_star;
    std::vector<QaeStep> steps;
};

/// Eigenvalue bisection over the box grid.  At each of n_lambda midpoints the
/// sampler minimizes phi^T (H - lambda M + penalty) phi on the grid; the sign
/// of that form at the decoded minimizer (penalized H, exact matrices, never
/// the ICE-perturbed QUBO) decides the branch: >= 0 raises lambda_min, < 0
/// lowers lambda_max.  A decoded zero vector therefore raises lambda_min.
/// Deflation weights are beta_m = max(1, 2 (lambda_max - lambda_m)) with the
/// bracket top at call time.  phi_star comes from one extra solve at
/// lambda_star - final_offset * (certified bracket width).
QaeResult qae_solve(const Gevp& gevp, const BinaryBox& box, const QaeConfig& cfg,
                    const Sampler& sampler, std::uint64_t seed);

/// Box schedule around the bisection: n_delta outer iterations, each
/// re-centering the box on the last phi_star and shrinking its width by
/// `ratio`.  The lambda bracket shrinks in lockstep: after the first
/// iteration it collapses to a small multiple of the certified resolution
/// around the iterate's Rayleigh quotient, then shrinks by `ratio` per
/// iteration, so lambda precision keeps pace with the refining grids.
struct AqaeConfig {
    int n_delta = 25;
    double ratio = 0.5;
    BinaryBox box;
    QaeConfig qae;

    void validate() const;
};

/// Convergence diagnostics for one iterate against the classical reference.
/// All fields are NaN when phi is the zero vector (the trace continues).
struct Metrics {
    double residual_sq;  // ||H phi_hat - lambda M phi_hat||^2, phi_hat M-normalized
    double eig_disc;     // |lambda - lambda_ref| / |lambda_ref|
    double mode_disc;    // ||phi_hat - phi_ref|| / ||phi_ref||, sign aligned
};

Metrics metrics(const Matrix& h, const Matrix& m, const Vector& phi, double lambda,
                const EigenPair& reference);

struct TraceEntry {
    double lambda;
    Vector phi;
    double rel_residual;
    double eig_disc;
    double mode_disc;
    double box_width;  // widest component of the box this iterate used
};

struct SolveTrace {
    std::vector<TraceEntry> entries;
    double residual0 = 0.0;  // raw R(0); rel_residual is R(i)/R(0)
    EigenPair reference;

    const TraceEntry& final_entry() const { return entries.back(); }
};

/// Full adaptive solve of one mode.  The reference eigenpair defaults to
/// densela::generalized_eigen(H, M)[deflation size]; pass one to avoid the
/// recomputation.
SolveTrace aqae_solve(const Gevp& gevp, const AqaeConfig& cfg, const Sampler& sampler,
                      std::uint64_t seed, const EigenPair* reference = nullptr);

struct ModeResult {
    SolveTrace trace;
    EigenPair pair;          // M-normalized converged vector
    bool degenerate = false; // eigenvalue within 1e-8 relative of an earlier mode
};

/// Solve modes 0..n_modes-1 iteratively, deflating each converged pair.
std::vector<ModeResult> solve_modes(const Gevp& gevp, int n_modes,
                                    const AqaeConfig& cfg, const Sampler& sampler,
                                    std::uint64_t seed);

/// Map the ground pair (lambda0, w0) of the rank-one pencil back to the
/// driven-problem solution phi = -lambda0 w0 / (b^T w0).
Vector recover_solution(double lambda0, const Vector& w0, const Vector& b);

struct QpIterate {
    Vector x;
    double box_width;
};

/// Box algorithm on the convex QP argmin 1/2 x^T A x - b^T x (no bisection).
std::vector<QpIterate> box_minimize_qp(const Matrix& a, const Vector& b,
                                       BinaryBox box, double ratio, int n_delta,
                                       const Sampler& sampler, std::uint64_t seed);

/// Enclosing brackets.  Homogeneous: [0, 2 max_i sum_j |H_ij| / M_ii] in the
/// omega^2 convention.  Normal equations: [-2 ||b||^2 / lambda_min(A), 0].
std::pair<double, double> homogeneous_bracket(const Gevp& gevp);
std::pair<double, double> normal_bracket(const Matrix& a, const Vector& b);

}  // namespace qaefem

#endif
