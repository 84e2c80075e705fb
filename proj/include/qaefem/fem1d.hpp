#ifndef QAEFEM_FEM1D_HPP
#define QAEFEM_FEM1D_HPP

#include <cmath>
#include <functional>

#include <json.hpp>

#include "qaefem/gevp.hpp"

namespace qaefem {

/// Piecewise-constant wave speed on [0,1] with an interface at x = 1/2.
/// Defaults model vacuum on the left and SiO2 (relative permittivity 3.9)
/// on the right.  A uniform medium is the special case c_left == c_right.
struct Material {
    double c_left = 1.0;
    double c_right = 1.0 / std::sqrt(3.9);

    double speed(double x) const { return x < 0.5 ? c_left : c_right; }
    bool uniform() const { return c_left == c_right; }

    static Material vacuum_sio2() { return Material{}; }
    static Material uniform_unit() { return Material{1.0, 1.0}; }
};

/// Gauss-Lobatto-Legendre nodes on [-1,1] for polynomial order p
/// (p+1 nodes, endpoints included).  Supported orders: 1..16.
Vector gll_nodes(int p);

/// Gauss-Legendre quadrature on [-1,1]: n nodes and weights.
void gauss_legendre(int n, Vector& nodes, Vector& weights);

/// Lagrange basis on a fixed node set (reference element [-1,1]).
class GllBasis {
  public:
    explicit GllBasis(int p) : nodes_(gll_nodes(p)) {}

    int order() const { return static_cast<int>(nodes_.size()) - 1; }
    const Vector& nodes() const { return nodes_; }

    double value(std::size_t j, double x) const;
    double derivative(std::size_t j, double x) const;

  private:
    Vector nodes_;
};

/// Discretized Helmholtz boundary value problem on [0,1] with a Dirichlet
/// condition at x = 0 (eliminated) and a natural Neumann condition at x = 1.
///
/// Sign conventions follow the weak form of phi'' + k^2 phi = f:
///   K_ij      = -int phi'_i phi'_j      (negative semidefinite)
///   M_ij      =  int k^2 phi_i phi_j    (k = k0 / c, zero when k0 = 0)
///   Ktilde_ij = -int c^2 phi'_i phi'_j
///   Mtilde_ij =  int phi_i phi_j
///   f_j       =  int f phi_j
struct FeProblem {
    int elements = 0;
    int order = 0;
    double k0 = 0.0;
    Material material;
    std::size_t n_dof = 0;
    Vector dof_x;  // coordinates of the retained (non-Dirichlet) nodes
    Matrix k_mat, m_mat, ktilde, mtilde;
    Vector f_load;
};

using SourceFn = std::function<double(double)>;

/// Default source term f(x) = sin(2 pi x).
double default_source(double x);

/// Assemble the order-p GLL discretization on a uniform mesh of `elements`
/// elements.  When the material is heterogeneous the interface at 1/2 must be
/// a mesh vertex (elements even), otherwise NonConformingMesh is thrown.
FeProblem assemble(int elements, int order, double k0,
                   const Material& material = Material::vacuum_sio2(),
                   const SourceFn& source = default_source);

/// Normal equations of the driven problem: A = (K+M)^T (K+M), b = (K+M)^T f.
struct NormalEquations {
    Matrix a;
    Vector b;
};
NormalEquations normal_equations(const FeProblem& prob);

/// Source-free pencil H = -Ktilde (PSD), M = Mtilde (SPD); solver eigenvalues
/// are omega^2 >= 0.
Gevp homogeneous_gevp(const FeProblem& prob);

/// Rank-one pencil H = -b b^T, M = A from the normal equations.  The ground
/// eigenvalue is -b^T A^-1 b < 0 and every other eigenvalue is 0.
/// Throws ZeroSource when ||b|| <= 1e-14 and SingularOperator when A is not
/// positive definite.
struct NormalGevp {
    Gevp gevp;
    Vector b;
};
NormalGevp normal_gevp(const FeProblem& prob);

nlohmann::json to_json(const FeProblem& prob);
FeProblem problem_from_json(const nlohmann::json& j);

}  // namespace qaefem

#endif
