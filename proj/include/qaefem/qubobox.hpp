#ifndef QAEFEM_QUBOBOX_HPP
#define QAEFEM_QUBOBOX_HPP

#include <json.hpp>

#include "qaefem/densela.hpp"

namespace qaefem {

/// Per-bit weight schemes for the fixed-point encoding of a box.
///
/// With component width delta = phi_max - phi_min and D bits, component j
/// decodes as  phi_j = phi_min_j + delta_j * sum_k w_k q_{j,k}:
///   paper:      w_k = 2^-k          (all-ones overshoots phi_max for D >= 2)
///   standard:   w_k = 2^-(k+1), or w_0 = 1 when D = 1
///               (uniform grid of spacing delta * 2^-D; default)
///   normalized: w_k = 2^-k / (2 - 2^(1-D))  (all-ones lands on phi_max)
enum class BitWeighting { standard, paper, normalized };

/// Axis-aligned search box with a D-bit binary grid per component.
/// Bit k of component j lives at QUBO index j*D + k.
struct BinaryBox {
    Vector phi_min;
    Vector phi_max;
    int bits = 1;
    BitWeighting weighting = BitWeighting::standard;

    std::size_t components() const { return phi_min.size(); }
    std::size_t dim() const { return phi_min.size() * static_cast<std::size_t>(bits); }

    /// Dimensionless weight w_k of bit k.
    double weight(int k) const;
    /// Physical step of bit k of component `comp`.
    double step(std::size_t comp, int k) const {
        return (phi_max[comp] - phi_min[comp]) * weight(k);
    }

    void validate() const;
};

/// Map a bitstring through the box encoding.
Vector decode(const BinaryBox& box, const BitString& bits);

/// Upper-triangular QUBO: energy(q) = q^T C q + offset with C_ij = 0 for
/// i > j.
struct Qubo {
    std::size_t dim = 0;
    Matrix coeffs;
    double offset = 0.0;

    double energy(const BitString& q) const;
    double max_abs_coeff() const;
};

nlohmann::json to_json(const Qubo& q);
Qubo qubo_from_json(const nlohmann::json& j);

/// QUBO of the quadratic form x^T A x + c^T x over the box grid
/// (cross terms folded above the diagonal, constant part in offset).
Qubo quadratic_form_to_qubo(const Matrix& a, const Vector& c, const BinaryBox& box);

/// QUBO of x^T A x over the box grid.
Qubo quad_to_qubo(const Matrix& a, const BinaryBox& box);

/// Eigenpair scheduled for exclusion, with penalty weight beta > 0.
struct WeightedMode {
    Vector phi;     // M-normalized
    double lambda;
    double beta;
};
using DeflationSet = std::vector<WeightedMode>;

/// QUBO of the deflation penalty
///   sum_m beta_m phi^T (M phi_m)(M phi_m)^T phi
/// over the box grid.  Empty set gives an all-zero QUBO.
Qubo deflation_penalty(const DeflationSet& deflation, const Matrix& m,
                       const BinaryBox& box);

/// lambda-independent halves of the bisection objective
///   phi^T (H - lambda M + penalty) phi:
/// combine() forms H_part - lambda * M_part entrywise.
struct GevpQuboParts {
    Qubo h_part;  // includes the deflation penalty
    Qubo m_part;
};
GevpQuboParts gevp_qubo_parts(const Matrix& h, const Matrix& m,
                              const DeflationSet& deflation, const BinaryBox& box);
Qubo combine(const GevpQuboParts& parts, double lambda);

/// One-shot QUBO of the bisection objective at a fixed lambda.
Qubo gevp_objective(const Matrix& h, const Matrix& m, double lambda,
                    const DeflationSet& deflation, const BinaryBox& box);

}  // namespace qaefem

#endif
