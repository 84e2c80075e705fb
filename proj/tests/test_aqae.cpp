#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qaefem/aqae.hpp"
#include "qaefem/fem1d.hpp"

using namespace qaefem;

namespace {

BitString bits_of(std::size_t value, std::size_t dim) {
    BitString b(dim, 0);
    for (std::size_t i = 0; i < dim; ++i) b[i] = (value >> i) & 1u;
    return b;
}

// Independent bisection oracle: evaluates the continuous form directly on
// every decoded grid point (no QUBO construction), with the exhaustive
// sampler's lexicographic tie-break.
struct OracleStep {
    double lambda;
    Vector phi;
    bool nonneg;
};
std::vector<OracleStep> bisect_oracle(const Matrix& h, const Matrix& m,
                                      const BinaryBox& box, double lo, double hi,
                                      int n_lambda) {
    std::vector<OracleStep> steps;
    for (int t = 0; t < n_lambda; ++t) {
        double lambda = 0.5 * (lo + hi);
        double best = 1e300;
        BitString best_bits;
        Vector best_phi;
        for (std::size_t v = 0; v < (1u << box.dim()); ++v) {
            BitString bits = bits_of(v, box.dim());
            Vector x = decode(box, bits);
            double e = dot(x, matvec(h, x)) - lambda * dot(x, matvec(m, x));
            bool better = e < best;
            if (!better && e == best) {
                for (std::size_t i = 0; i < bits.size(); ++i) {
                    if (bits[i] != best_bits[i]) {
                        better = bits[i] < best_bits[i];
                        break;
                    }
                }
            }
            if (better) {
                best = e;
                best_bits = bits;
                best_phi = x;
            }
        }
        bool nonneg = best >= 0.0;
        if (nonneg)
            lo = lambda;
        else
            hi = lambda;
        steps.push_back(OracleStep{lambda, best_phi, nonneg});
    }
    return steps;
}

Gevp diag_pencil() {
    return Gevp{Matrix{{2.0, 0.0}, {0.0, 5.0}}, Matrix::identity(2), {}};
}

BinaryBox sym_box(std::size_t n, int d) {
    return BinaryBox{Vector(n, -1.0), Vector(n, 1.0), d, BitWeighting::standard};
}

// Boxes fed to the outer drivers use the symmetric zero-free grid; the bare
// bisection tests above keep the default grid, whose frozen oracle traces
// include decoded zero vectors.
BinaryBox solver_box(std::size_t n, int d) {
    return BinaryBox{Vector(n, -1.0), Vector(n, 1.0), d, BitWeighting::normalized};
}

}  // namespace

TEST_CASE("bisection on diag(2,5) matches the enumeration oracle") {
    Gevp g = diag_pencil();
    BinaryBox box = sym_box(2, 2);
    QaeConfig cfg{0.0, 10.0, 10};
    QaeResult res = qae_solve(g, box, cfg, ExhaustiveSampler{}, 0);

    auto oracle = bisect_oracle(g.h, g.m, box, 0.0, 10.0, 10);
    REQUIRE(res.steps.size() == oracle.size());
    for (std::size_t t = 0; t < oracle.size(); ++t) {
        CHECK(res.steps[t].lambda == oracle[t].lambda);
        CHECK(res.steps[t].nonneg == oracle[t].nonneg);
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(res.steps[t].phi[j] == oracle[t].phi[j]);
    }
    CHECK(res.lambda_star >= 2.0 - 0.0098);
    CHECK(res.lambda_star <= 2.0 + 0.0098);
    CHECK(std::abs(res.phi_star[0]) == doctest::Approx(1.0));
    CHECK(res.phi_star[1] == doctest::Approx(0.0));
}

TEST_CASE("bisection bracket invariant holds under re-evaluation") {
    Gevp g = diag_pencil();
    BinaryBox box = sym_box(2, 2);
    QaeConfig cfg{0.0, 10.0, 10};
    QaeResult res = qae_solve(g, box, cfg, ExhaustiveSampler{}, 0);
    double lo = cfg.lambda_min, hi = cfg.lambda_max;
    for (const auto& step : res.steps) {
        CHECK(step.lambda == 0.5 * (lo + hi));
        double form = dot(step.phi, matvec(g.h, step.phi)) -
                      step.lambda * dot(step.phi, matvec(g.m, step.phi));
        CHECK((form >= 0.0) == step.nonneg);
        if (step.nonneg)
            lo = step.lambda;
        else
            hi = step.lambda;
    }
    CHECK(res.lambda_min == lo);
    CHECK(res.lambda_max == hi);
    CHECK(res.lambda_star == hi);
}

TEST_CASE("H equal to M pins lambda at 1 regardless of box") {
    Matrix m{{3.0, 0.5}, {0.5, 1.0}};
    Gevp g{m, m, {}};
    for (double shift : {0.0, 0.4}) {
        BinaryBox box{{-1.0 + shift, -1.0}, {1.0 + shift, 1.0}, 2,
                      BitWeighting::standard};
        QaeResult res = qae_solve(g, box, QaeConfig{0.0, 10.0, 10},
                                  ExhaustiveSampler{}, 0);
        CHECK(std::abs(res.lambda_star - 1.0) <= 10.0 * std::ldexp(1.0, -10) + 1e-12);
    }
}

TEST_CASE("decoded zero vector takes the nonnegative branch") {
    Gevp g{Matrix::identity(2), Matrix::identity(2), {}};
    BinaryBox box = sym_box(2, 2);
    QaeResult res = qae_solve(g, box, QaeConfig{-4.0, -2.0, 8},
                              ExhaustiveSampler{}, 0);
    for (const auto& step : res.steps) {
        CHECK(step.nonneg);
        CHECK(norm2(step.phi) == 0.0);
    }
    CHECK(res.lambda_star == -2.0);  // lambda_max never moves
    CHECK(norm2(res.phi_star) == 0.0);
}

TEST_CASE("inverted bracket is rejected") {
    Gevp g = diag_pencil();
    CHECK_THROWS_AS(
        qae_solve(g, sym_box(2, 2), QaeConfig{5.0, 5.0, 4}, ExhaustiveSampler{}, 0),
        EmptyBracket);
}

TEST_CASE("box widths shrink geometrically and nest on the last iterate") {
    Gevp g{Matrix{{2.0}}, Matrix{{1.0}}, {}};
    AqaeConfig cfg;
    cfg.n_delta = 12;
    cfg.ratio = 0.5;
    cfg.box = solver_box(1, 1);
    cfg.qae = QaeConfig{0.0, 10.0, 6};
    SolveTrace trace = aqae_solve(g, cfg, ExhaustiveSampler{}, 0);
    REQUIRE(trace.entries.size() == 12);
    for (int i = 0; i < 12; ++i)
        CHECK(trace.entries[i].box_width == 2.0 * std::ldexp(1.0, -i));
    // With one bit the grid is the box edge pair; the next iterate sitting at
    // exactly half the shrunk width from the last certifies the re-centering.
    for (int i = 0; i + 1 < 12; ++i) {
        double gap = std::abs(trace.entries[i + 1].phi[0] - trace.entries[i].phi[0]);
        CHECK(gap == 0.5 * trace.entries[i + 1].box_width);
    }
}

TEST_CASE("trace starts at relative residual 1 and is deterministic") {
    Gevp g = diag_pencil();
    AqaeConfig cfg;
    cfg.n_delta = 8;
    cfg.box = solver_box(2, 2);
    cfg.qae = QaeConfig{0.0, 10.0, 10};
    SolveTrace a = aqae_solve(g, cfg, ExhaustiveSampler{}, 3);
    SolveTrace b = aqae_solve(g, cfg, ExhaustiveSampler{}, 3);
    CHECK(a.entries[0].rel_residual == 1.0);
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        CHECK(a.entries[i].lambda == b.entries[i].lambda);
        CHECK(a.entries[i].rel_residual == b.entries[i].rel_residual);
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(a.entries[i].phi[j] == b.entries[i].phi[j]);
    }
}

TEST_CASE("metrics on exact, flipped, and zero vectors") {
    Matrix h{{2.0, 0.0}, {0.0, 5.0}};
    Matrix m = Matrix::identity(2);
    auto pairs = generalized_eigen(h, m);
    Metrics exact = metrics(h, m, pairs[0].vector, pairs[0].value, pairs[0]);
    CHECK(exact.residual_sq <= 1e-20);
    CHECK(exact.eig_disc <= 1e-14);
    CHECK(exact.mode_disc <= 1e-12);

    Vector flipped = -1.0 * pairs[0].vector;
    Metrics flip = metrics(h, m, flipped, pairs[0].value, pairs[0]);
    CHECK(flip.mode_disc <= 1e-12);

    Metrics zero = metrics(h, m, Vector(2, 0.0), 1.0, pairs[0]);
    CHECK(std::isnan(zero.residual_sq));
    CHECK(std::isnan(zero.eig_disc));
    CHECK(std::isnan(zero.mode_disc));
}

TEST_CASE("homogeneous ground mode converges six orders with the exact sampler") {
    FeProblem prob = assemble(10, 1, M_PI);
    Gevp g = homogeneous_gevp(prob);
    auto bracket = homogeneous_bracket(g);
    AqaeConfig cfg;
    cfg.n_delta = 25;
    cfg.ratio = 0.5;
    cfg.box = solver_box(prob.n_dof, 2);
    cfg.qae = QaeConfig{bracket.first, bracket.second, 10};
    SolveTrace trace = aqae_solve(g, cfg, ExhaustiveSampler{}, 11);
    CHECK(trace.entries[0].rel_residual == 1.0);
    CHECK(trace.final_entry().rel_residual <= 1e-6);
    CHECK(trace.final_entry().eig_disc <= 1e-3);
}

TEST_CASE("ICE at sigma 0.02 breaks convergence of the same problem") {
    FeProblem prob = assemble(10, 1, M_PI);
    Gevp g = homogeneous_gevp(prob);
    auto bracket = homogeneous_bracket(g);
    AqaeConfig cfg;
    cfg.n_delta = 25;
    cfg.ratio = 0.5;
    cfg.box = solver_box(prob.n_dof, 2);
    cfg.qae = QaeConfig{bracket.first, bracket.second, 10};
    IceSampler noisy(std::make_shared<ExhaustiveSampler>(), IceConfig{0.02});
    SolveTrace trace = aqae_solve(g, cfg, noisy, 11);
    CHECK(trace.final_entry().rel_residual > 1e-2);
}

TEST_CASE("solve_modes matches densela on a small homogeneous problem") {
    FeProblem prob = assemble(4, 1, M_PI);
    Gevp g = homogeneous_gevp(prob);
    auto bracket = homogeneous_bracket(g);
    AqaeConfig cfg;
    cfg.n_delta = 20;
    cfg.ratio = 0.5;
    cfg.box = solver_box(prob.n_dof, 2);
    cfg.qae = QaeConfig{bracket.first, bracket.second, 10};
    auto results = solve_modes(g, 3, cfg, ExhaustiveSampler{}, 17);
    auto refs = generalized_eigen(g.h, g.m);
    REQUIRE(results.size() == 3);
    for (int n = 0; n < 3; ++n) {
        CHECK(std::abs(results[n].pair.value - refs[n].value) <=
              1e-3 * std::abs(refs[n].value));
        double mn = dot(results[n].pair.vector,
                        matvec(g.m, results[n].pair.vector));
        CHECK(mn == doctest::Approx(1.0).epsilon(1e-8));
        CHECK_FALSE(results[n].degenerate);
    }
    // Deflation produced M-orthogonal modes.
    CHECK(std::abs(dot(results[1].pair.vector,
                       matvec(g.m, results[0].pair.vector))) <= 1e-3);
    CHECK(std::abs(dot(results[2].pair.vector,
                       matvec(g.m, results[0].pair.vector))) <= 1e-3);
}

TEST_CASE("three modes of the N=10 homogeneous problem converge deeply") {
    FeProblem prob = assemble(10, 1, 0.0);
    Gevp g = homogeneous_gevp(prob);
    auto bracket = homogeneous_bracket(g);
    AqaeConfig cfg;
    cfg.n_delta = 25;
    cfg.ratio = 0.5;
    cfg.box = solver_box(prob.n_dof, 2);
    cfg.qae = QaeConfig{bracket.first, bracket.second, 10};
    auto results = solve_modes(g, 3, cfg, ExhaustiveSampler{}, 7);
    auto refs = generalized_eigen(g.h, g.m);
    REQUIRE(results.size() == 3);
    for (int n = 0; n < 3; ++n) {
        CHECK(std::abs(results[n].pair.value - refs[n].value) <=
              1e-3 * std::abs(refs[n].value));
        CHECK(results[n].trace.final_entry().rel_residual <= 1e-6);
        for (int m = 0; m < n; ++m)
            CHECK(std::abs(dot(results[n].pair.vector,
                               matvec(g.m, results[m].pair.vector))) <= 1e-3);
    }
}

TEST_CASE("solve_modes with one mode equals aqae_solve") {
    Gevp g = diag_pencil();
    AqaeConfig cfg;
    cfg.n_delta = 10;
    cfg.box = solver_box(2, 2);
    cfg.qae = QaeConfig{0.0, 10.0, 10};
    auto modes = solve_modes(g, 1, cfg, ExhaustiveSampler{}, 5);
    SolveTrace direct = aqae_solve(g, cfg, ExhaustiveSampler{}, mix_seed(5, 0));
    REQUIRE(modes.size() == 1);
    CHECK(modes[0].trace.final_entry().lambda == direct.final_entry().lambda);
    CHECK(modes[0].trace.final_entry().rel_residual ==
          direct.final_entry().rel_residual);
    auto empty = solve_modes(g, 0, cfg, ExhaustiveSampler{}, 5);
    CHECK(empty.empty());
}

TEST_CASE("recover_solution reproduces the direct solve") {
    FeProblem prob = assemble(10, 1, 2.0 * M_PI);
    NormalGevp ng = normal_gevp(prob);
    auto pairs = generalized_eigen(ng.gevp.h, ng.gevp.m);
    Vector phi = recover_solution(pairs[0].value, pairs[0].vector, ng.b);
    Vector direct = solve_spd(ng.gevp.m, ng.b);
    CHECK(norm2(phi - direct) <= 1e-8 * norm2(direct));
    Vector residual = matvec(ng.gevp.m, phi) - ng.b;
    CHECK(norm2(residual) <= 1e-8 * norm2(ng.b));
}

TEST_CASE("rank-one pencil algebra on a random SPD instance") {
    SplitMix64 rng(51);
    Matrix g4(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) g4(i, j) = 2.0 * rng.uniform() - 1.0;
    Matrix a = matmul(transpose(g4), g4);
    for (std::size_t i = 0; i < 4; ++i) a(i, i) += 0.5;
    Vector b(4);
    for (double& v : b) v = 2.0 * rng.uniform() - 1.0;

    Gevp pencil{-1.0 * outer(b, b), a, {}};
    auto pairs = generalized_eigen(pencil.h, pencil.m);
    double expect = -dot(b, solve_spd(a, b));
    CHECK(pairs[0].value == doctest::Approx(expect).epsilon(1e-10));

    Vector phi1 = recover_solution(pairs[0].value, pairs[0].vector, b);
    Vector phi2 = recover_solution(pairs[0].value, 3.7 * pairs[0].vector, b);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(phi1[i] == doctest::Approx(phi2[i]).epsilon(1e-12));
}

TEST_CASE("orthogonal ground vector is rejected") {
    CHECK_THROWS_AS(recover_solution(-1.0, {0.0, 1.0}, {1.0, 0.0}),
                    OrthogonalGroundState);
}

TEST_CASE("brackets enclose their targets") {
    Gevp g = diag_pencil();
    auto hb = homogeneous_bracket(g);
    CHECK(hb.first == 0.0);
    CHECK(hb.second == 10.0);

    Vector b{3.0, 4.0};
    auto nb = normal_bracket(Matrix::identity(2), b);
    CHECK(nb.first == doctest::Approx(-50.0));
    CHECK(nb.second == 0.0);

    SplitMix64 rng(52);
    Matrix g3(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) g3(i, j) = 2.0 * rng.uniform() - 1.0;
    Matrix a = matmul(transpose(g3), g3);
    for (std::size_t i = 0; i < 3; ++i) a(i, i) += 0.5;
    Vector src{1.0, -2.0, 0.5};
    auto nb2 = normal_bracket(a, src);
    double ground = -dot(src, solve_spd(a, src));
    CHECK(nb2.first < ground);
    CHECK(ground < nb2.second + 1e-15);
}

TEST_CASE("identity QP converges for every bit count") {
    SplitMix64 rng(53);
    for (int d : {1, 2, 3}) {
        Vector xstar(2);
        for (double& v : xstar) v = 1.8 * rng.uniform() - 0.9;
        Vector b = xstar;  // A = I
        auto iterates = box_minimize_qp(Matrix::identity(2), b, sym_box(2, d), 0.5,
                                        25, ExhaustiveSampler{}, 9);
        REQUIRE(iterates.size() == 25);
        // Scale-free grids keep the error within the box half-width.
        for (const auto& it : iterates) {
            for (std::size_t j = 0; j < 2; ++j)
                CHECK(std::abs(it.x[j] - xstar[j]) <= 0.5 * it.box_width + 1e-12);
        }
        double err = norm2(iterates.back().x - xstar);
        CHECK(err <= 1e-6);
    }
}

TEST_CASE("QP box recursion converges at condition 5 and stalls at 50") {
    // Rotated SPD pencils sharing one geometry: eigenvectors 5 degrees off
    // axis, optimum at (-0.15, -0.30).  Only the eigenvalue spread changes.
    auto rotated = [](double k) {
        double c = std::cos(std::numbers::pi / 36.0);
        double s = std::sin(std::numbers::pi / 36.0);
        return Matrix{{c * c + k * s * s, c * s * (1.0 - k)},
                      {c * s * (1.0 - k), s * s + k * c * c}};
    };
    Vector xstar{-0.15, -0.30};

    Matrix mild = rotated(5.0);
    CHECK(condition_number(mild) == doctest::Approx(5.0));
    Vector b5 = matvec(mild, xstar);
    auto good = box_minimize_qp(mild, b5, sym_box(2, 2), 0.5, 25,
                                ExhaustiveSampler{}, 1);
    CHECK(norm2(good.back().x - xstar) <= 1e-4 * norm2(xstar));

    // Ten times the spread: the coarse grid's energy argmin sits down-valley,
    // the box zooms there, and the true optimum leaves the box for good.
    Matrix harsh = rotated(50.0);
    CHECK(condition_number(harsh) == doctest::Approx(50.0));
    Vector b50 = matvec(harsh, xstar);
    auto stuck = box_minimize_qp(harsh, b50, sym_box(2, 2), 0.5, 25,
                                 ExhaustiveSampler{}, 1);
    CHECK(norm2(stuck.back().x - xstar) > 1e-1 * norm2(xstar));
}

TEST_CASE("QP driver validates its inputs") {
    Vector b{1.0, 1.0};
    CHECK_THROWS_AS(box_minimize_qp(Matrix{{1.0, 2.0}, {2.0, 1.0}}, b, sym_box(2, 2),
                                    0.5, 5, ExhaustiveSampler{}, 0),
                    NotPositiveDefinite);
    CHECK_THROWS_AS(box_minimize_qp(Matrix::identity(2), b, sym_box(2, 2), 1.5, 5,
                                    ExhaustiveSampler{}, 0),
                    ConfigError);
}
