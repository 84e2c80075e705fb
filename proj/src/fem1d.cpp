#include "qaefem/fem1d.hpp"

#include <cmath>

#include "qaefem/jsonio.hpp"

namespace qaefem {

namespace {

// Legendre P_n(x) and derivative via the three-term recurrence.
void legendre(int n, double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    if (n == 0) {
        p = 1.0;
        dp = 0.0;
        return;
    }
    for (int k = 1; k < n; ++k) {
        double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    // (x^2 - 1) P_n' = n (x P_n - P_{n-1})
    double denom = x * x - 1.0;
    if (std::abs(denom) < 1e-300)
        dp = 0.5 * n * (n + 1.0) * (x > 0.0 ? 1.0 : (n % 2 ? 1.0 : -1.0));
    else
        dp = n * (x * p1 - p0) / denom;
}

}  // namespace

Vector gll_nodes(int p) {
    if (p < 1 || p > 16) throw UnsupportedOrder("element order must be in 1..16");
    Vector nodes(p + 1);
    nodes.front() = -1.0;
    nodes.back() = 1.0;
    // Interior nodes are the roots of P_p'; Newton from Chebyshev-like
    // guesses.  d/dx P_p' follows from the Legendre ODE:
    // (1-x^2) P'' = 2x P' - p(p+1) P.
    for (int i = 1; i < p; ++i) {
        double x = -std::cos(M_PI * i / p);
        for (int it = 0; it < 100; ++it) {
            double pv, dpv;
            legendre(p, x, pv, dpv);
            double d2 = (2.0 * x * dpv - p * (p + 1.0) * pv) / (1.0 - x * x);
            double step = dpv / d2;
            x -= step;
            if (std::abs(step) < 1e-15) break;
        }
        nodes[i] = x;
    }
    return nodes;
}

void gauss_legendre(int n, Vector& nodes, Vector& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pv = 0.0, dpv = 1.0;
        for (int it = 0; it < 100; ++it) {
            legendre(n, x, pv, dpv);
            double step = pv / dpv;
            x -= step;
            if (std::abs(step) < 1e-15) break;
        }
        legendre(n, x, pv, dpv);
        nodes[n - 1 - i] = x;  // ascending order
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dpv * dpv);
    }
}

double GllBasis::value(std::size_t j, double x) const {
    double v = 1.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (i == j) continue;
        v *= (x - nodes_[i]) / (nodes_[j] - nodes_[i]);
    }
    return v;
}

double GllBasis::derivative(std::size_t j, double x) const {
    double sum = 0.0;
    for (std::size_t m = 0; m < nodes_.size(); ++m) {
        if (m == j) continue;
        double term = 1.0 / (nodes_[j] - nodes_[m]);
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (i == j || i == m) continue;
            term *= (x - nodes_[i]) / (nodes_[j] - nodes_[i]);
        }
        sum += term;
    }
    return sum;
}

double default_source(double x) { return std::sin(2.0 * M_PI * x); }

FeProblem assemble(int elements, int order, double k0, const Material& material,
                   const SourceFn& source) {
    if (elements < 1) throw ConfigError("element count must be positive");
    if (order < 1 || order > 16)
        throw UnsupportedOrder("element order must be in 1..16");
    if (!material.uniform() && elements % 2 != 0)
        throw NonConformingMesh(
            "heterogeneous material needs the interface at a mesh vertex");

    const int p = order;
    const int nq = p + 2;  // exact for the degree-2p mass integrand
    GllBasis basis(p);
    Vector qx, qw;
    gauss_legendre(nq, qx, qw);

    // Reference-element basis tables at quadrature points.
    Matrix bv(p + 1, nq), bd(p + 1, nq);
    for (int j = 0; j <= p; ++j)
        for (int q = 0; q < nq; ++q) {
            bv(j, q) = basis.value(j, qx[q]);
            bd(j, q) = basis.derivative(j, qx[q]);
        }

    FeProblem prob;
    prob.elements = elements;
    prob.order = p;
    prob.k0 = k0;
    prob.material = material;
    prob.n_dof = static_cast<std::size_t>(elements) * p;
    std::size_t n = prob.n_dof;
    prob.k_mat = Matrix(n, n);
    prob.m_mat = Matrix(n, n);
    prob.ktilde = Matrix(n, n);
    prob.mtilde = Matrix(n, n);
    prob.f_load = Vector(n, 0.0);
    prob.dof_x = Vector(n, 0.0);

    const double h = 1.0 / elements;
    for (int e = 0; e < elements; ++e) {
        double a = e * h;
        double c = material.speed(a + 0.5 * h);
        double k = k0 / c;
        for (int jl = 0; jl <= p; ++jl) {
            long jg = static_cast<long>(e) * p + jl - 1;  // Dirichlet node dropped
            if (jg < 0) continue;
            prob.dof_x[jg] = a + 0.5 * h * (basis.nodes()[jl] + 1.0);
            double fj = 0.0;
            for (int q = 0; q < nq; ++q) {
                double x = a + 0.5 * h * (qx[q] + 1.0);
                fj += qw[q] * source(x) * bv(jl, q);
            }
            prob.f_load[jg] += 0.5 * h * fj;
            for (int il = 0; il <= p; ++il) {
                long ig = static_cast<long>(e) * p + il - 1;
                if (ig < 0) continue;
                double stiff = 0.0, mass = 0.0;
                for (int q = 0; q < nq; ++q) {
                    stiff += qw[q] * bd(il, q) * bd(jl, q);
                    mass += qw[q] * bv(il, q) * bv(jl, q);
                }
                stiff *= 2.0 / h;   // chain rule for d/dx on [a, a+h]
                mass *= 0.5 * h;
                prob.k_mat(ig, jg) += -stiff;
                prob.m_mat(ig, jg) += k * k * mass;
                prob.ktilde(ig, jg) += -c * c * stiff;
                prob.mtilde(ig, jg) += mass;
            }
        }
    }
    return prob;
}

NormalEquations normal_equations(const FeProblem& prob) {
    Matrix km = prob.k_mat + prob.m_mat;
    Matrix kmt = transpose(km);
    return NormalEquations{matmul(kmt, km), matvec(kmt, prob.f_load)};
}

Gevp homogeneous_gevp(const FeProblem& prob) {
    return Gevp{-1.0 * prob.ktilde, prob.mtilde, {}};
}

NormalGevp normal_gevp(const FeProblem& prob) {
    NormalEquations ne = normal_equations(prob);
    if (norm2(ne.b) <= 1e-14) throw ZeroSource("normal equations with zero source");
    try {
        cholesky_factor(ne.a);
    } catch (const NotPositiveDefinite&) {
        throw SingularOperator("normal-equation matrix is not positive definite");
    }
    return NormalGevp{Gevp{-1.0 * outer(ne.b, ne.b), ne.a, {}}, ne.b};
}

nlohmann::json to_json(const FeProblem& prob) {
    nlohmann::json j;
    j["elements"] = prob.elements;
    j["order"] = prob.order;
    j["k0"] = prob.k0;
    j["material"] = {{"c_left", prob.material.c_left},
                     {"c_right", prob.material.c_right}};
    j["n_dof"] = prob.n_dof;
    j["dof_x"] = prob.dof_x;
    to_json(j["K"], prob.k_mat);
    to_json(j["M"], prob.m_mat);
    to_json(j["Ktilde"], prob.ktilde);
    to_json(j["Mtilde"], prob.mtilde);
    j["f"] = prob.f_load;
    return j;
}

FeProblem problem_from_json(const nlohmann::json& j) {
    FeProblem prob;
    prob.elements = j.at("elements").get<int>();
    prob.order = j.at("order").get<int>();
    prob.k0 = j.at("k0").get<double>();
    prob.material.c_left = j.at("material").at("c_left").get<double>();
    prob.material.c_right = j.at("material").at("c_right").get<double>();
    prob.n_dof = j.at("n_dof").get<std::size_t>();
    prob.dof_x = j.at("dof_x").get<Vector>();
    from_json(j.at("K"), prob.k_mat);
    from_json(j.at("M"), prob.m_mat);
    from_json(j.at("Ktilde"), prob.ktilde);
    from_json(j.at("Mtilde"), prob.mtilde);
    prob.f_load = j.at("f").get<Vector>();
    return prob;
}

}  // namespace qaefem
