#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qaefem/fem1d.hpp"

using namespace qaefem;

namespace {

double ground_omega(const FeProblem& prob) {
    Gevp g = homogeneous_gevp(prob);
    auto pairs = generalized_eigen(g.h, g.m);
    return std::sqrt(pairs.front().value);
}

}  // namespace

TEST_CASE("GLL nodes for low orders") {
    Vector n1 = gll_nodes(1);
    CHECK(n1[0] == doctest::Approx(-1.0));
    CHECK(n1[1] == doctest::Approx(1.0));
    Vector n2 = gll_nodes(2);
    CHECK(n2[1] == doctest::Approx(0.0).epsilon(1e-14));
    Vector n3 = gll_nodes(3);
    CHECK(n3[1] == doctest::Approx(-1.0 / std::sqrt(5.0)).epsilon(1e-13));
    CHECK(n3[2] == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-13));
}

TEST_CASE("GLL node invariants up to order 16") {
    for (int p = 1; p <= 16; ++p) {
        Vector nodes = gll_nodes(p);
        REQUIRE(nodes.size() == static_cast<std::size_t>(p) + 1);
        CHECK(nodes.front() == -1.0);
        CHECK(nodes.back() == 1.0);
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
            CHECK(nodes[i] < nodes[i + 1]);
        for (std::size_t i = 0; i < nodes.size(); ++i)
            CHECK(nodes[i] == doctest::Approx(-nodes[nodes.size() - 1 - i]).epsilon(1e-12));
        // Interior nodes are roots of P_p': check (1 - x^2) P_p'(x) ~ 0 via
        // a central difference of P_p built from the recurrence.
        auto legendre_p = [p](double x) {
            double p0 = 1.0, p1 = x;
            for (int k = 1; k < p; ++k) {
                double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
                p0 = p1;
                p1 = p2;
            }
            return p == 0 ? 1.0 : p1;
        };
        for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
            double x = nodes[i];
            double dp = (legendre_p(x + 1e-6) - legendre_p(x - 1e-6)) / 2e-6;
            CHECK(std::abs((1.0 - x * x) * dp) <= 1e-7);
        }
    }
    CHECK_THROWS_AS(gll_nodes(0), UnsupportedOrder);
    CHECK_THROWS_AS(gll_nodes(17), UnsupportedOrder);
}

TEST_CASE("Gauss-Legendre quadrature") {
    Vector x, w;
    gauss_legendre(2, x, w);
    CHECK(x[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(w[1] == doctest::Approx(1.0).epsilon(1e-14));
    for (int n = 1; n <= 12; ++n) {
        gauss_legendre(n, x, w);
        // Exact for polynomials up to degree 2n-1.
        for (int deg = 0; deg <= 2 * n - 1; ++deg) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += w[i] * std::pow(x[i], deg);
            double exact = (deg % 2 == 0) ? 2.0 / (deg + 1.0) : 0.0;
            CHECK(s == doctest::Approx(exact).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("Lagrange basis partition of unity") {
    for (int p : {1, 3, 6}) {
        GllBasis basis(p);
        for (double x : {-0.9, -0.3, 0.12, 0.77}) {
            double s = 0.0, ds = 0.0;
            for (int j = 0; j <= p; ++j) {
                s += basis.value(j, x);
                ds += basis.derivative(j, x);
            }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(std::abs(ds) <= 1e-10);
        }
        // Kronecker property at the nodes.
        for (int j = 0; j <= p; ++j)
            for (int i = 0; i <= p; ++i)
                CHECK(basis.value(j, basis.nodes()[i]) ==
                      doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
    }
}

TEST_CASE("two linear elements, uniform k = 1: frozen matrices") {
    FeProblem prob = assemble(2, 1, 1.0, Material::uniform_unit());
    REQUIRE(prob.n_dof == 2);
    CHECK(prob.k_mat(0, 0) == doctest::Approx(-4.0).epsilon(1e-13));
    CHECK(prob.k_mat(0, 1) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(prob.k_mat(1, 0) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(prob.k_mat(1, 1) == doctest::Approx(-2.0).epsilon(1e-13));
    CHECK(prob.m_mat(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(prob.m_mat(0, 1) == doctest::Approx(1.0 / 12.0).epsilon(1e-13));
    CHECK(prob.m_mat(1, 0) == doctest::Approx(1.0 / 12.0).epsilon(1e-13));
    CHECK(prob.m_mat(1, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
    CHECK(prob.dof_x[0] == doctest::Approx(0.5));
    CHECK(prob.dof_x[1] == doctest::Approx(1.0));
}

TEST_CASE("k0 = 0 zeroes the mass term") {
    FeProblem prob = assemble(10, 1, 0.0);
    CHECK(max_abs(prob.m_mat) == 0.0);
}

TEST_CASE("K is negative semidefinite, Mtilde and A are SPD") {
    FeProblem prob = assemble(10, 2, M_PI);
    auto neg_k = generalized_eigen(-1.0 * prob.k_mat, Matrix::identity(prob.n_dof));
    CHECK(neg_k.front().value >= -1e-10 * max_abs(prob.k_mat));
    CHECK_NOTHROW(cholesky_factor(prob.mtilde));
    NormalEquations ne = normal_equations(prob);
    CHECK_NOTHROW(cholesky_factor(ne.a));
}

TEST_CASE("uniform medium ground frequency matches pi/2") {
    FeProblem prob = assemble(40, 5, 1.0, Material::uniform_unit());
    CHECK(ground_omega(prob) == doctest::Approx(M_PI / 2.0).epsilon(1e-8));
}

TEST_CASE("higher harmonics of the uniform medium") {
    FeProblem prob = assemble(40, 5, 1.0, Material::uniform_unit());
    Gevp g = homogeneous_gevp(prob);
    auto pairs = generalized_eigen(g.h, g.m);
    for (int n = 0; n < 4; ++n) {
        double omega = (2.0 * n + 1.0) * M_PI / 2.0;
        CHECK(std::sqrt(pairs[n].value) == doctest::Approx(omega).epsilon(1e-7));
    }
}

TEST_CASE("h-refinement converges at second order for p = 1") {
    double errs[3];
    int ns[3] = {4, 8, 16};
    for (int i = 0; i < 3; ++i) {
        FeProblem prob = assemble(ns[i], 1, 1.0, Material::uniform_unit());
        errs[i] = std::abs(ground_omega(prob) - M_PI / 2.0);
    }
    double slope = std::log(errs[0] / errs[2]) / std::log(4.0);
    CHECK(slope >= 1.5);
    CHECK(slope <= 2.5);
}

TEST_CASE("heterogeneous mesh must conform to the interface") {
    CHECK_THROWS_AS(assemble(3, 1, M_PI), NonConformingMesh);
    CHECK_NOTHROW(assemble(4, 1, M_PI));
    CHECK_NOTHROW(assemble(3, 1, M_PI, Material::uniform_unit()));
}

TEST_CASE("driven solve satisfies the unsquared system") {
    FeProblem prob = assemble(10, 1, 2.0 * M_PI);
    NormalEquations ne = normal_equations(prob);
    Vector phi = solve_spd(ne.a, ne.b);
    Matrix km = prob.k_mat + prob.m_mat;
    Vector r = matvec(km, phi) - prob.f_load;
    CHECK(norm2(r) <= 1e-8 * norm2(prob.f_load));
}

TEST_CASE("normal-equation pencil: rank-one spectrum and ground value") {
    FeProblem prob = assemble(10, 1, 2.0 * M_PI);
    NormalGevp ng = normal_gevp(prob);
    auto pairs = generalized_eigen(ng.gevp.h, ng.gevp.m);
    double ground_ref = -dot(ng.b, solve_spd(ng.gevp.m, ng.b));
    CHECK(pairs.front().value == doctest::Approx(ground_ref).epsilon(1e-8));
    double scale = std::abs(ground_ref);
    for (std::size_t i = 1; i < pairs.size(); ++i)
        CHECK(std::abs(pairs[i].value) <= 1e-8 * scale);
}

TEST_CASE("zero source is rejected") {
    FeProblem prob = assemble(4, 1, M_PI, Material::vacuum_sio2(),
                              [](double) { return 0.0; });
    CHECK_THROWS_AS(normal_gevp(prob), ZeroSource);
}

TEST_CASE("normal-equation conditioning, coarse linear mesh") {
    FeProblem prob = assemble(10, 1, 0.0);
    NormalEquations ne = normal_equations(prob);
    double sigma = condition_number(ne.a);
    CHECK(sigma == doctest::Approx(175.0 * 175.0).epsilon(0.05));
}

TEST_CASE("problem JSON round trip") {
    FeProblem prob = assemble(4, 2, M_PI);
    nlohmann::json j = to_json(prob);
    FeProblem back = problem_from_json(j);
    CHECK(back.elements == prob.elements);
    CHECK(back.order == prob.order);
    CHECK(back.k0 == prob.k0);
    CHECK(back.n_dof == prob.n_dof);
    CHECK(max_abs(back.k_mat - prob.k_mat) == 0.0);
    CHECK(max_abs(back.m_mat - prob.m_mat) == 0.0);
    CHECK(max_abs(back.ktilde - prob.ktilde) == 0.0);
    CHECK(max_abs(back.mtilde - prob.mtilde) == 0.0);
    for (std::size_t i = 0; i < prob.f_load.size(); ++i)
        CHECK(back.f_load[i] == prob.f_load[i]);
}
