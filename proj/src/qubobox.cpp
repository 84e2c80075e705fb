#include "qaefem/qubobox.hpp"

#include <cmath>

namespace qaefem {

double BinaryBox::weight(int k) const {
    switch (weighting) {
        case BitWeighting::paper:
            return std::ldexp(1.0, -k);
        case BitWeighting::standard:
            return bits == 1 ? 1.0 : std::ldexp(1.0, -(k + 1));
        case BitWeighting::normalized:
            return std::ldexp(1.0, -k) / (2.0 - std::ldexp(1.0, 1 - bits));
    }
    return 0.0;
}

void BinaryBox::validate() const {
    if (phi_min.size() != phi_max.size())
        throw LengthMismatch("box corner lengths differ");
    if (phi_min.empty()) throw LengthMismatch("empty box");
    if (bits < 1) throw ConfigError("box needs at least one bit per component");
    for (std::size_t i = 0; i < phi_min.size(); ++i)
        if (!(phi_max[i] > phi_min[i]))
            throw ConfigError("box upper corner must exceed lower corner");
}

Vector decode(const BinaryBox& box, const BitString& bits) {
    box.validate();
    if (bits.size() != box.dim())
        throw LengthMismatch("bitstring length does not match box dimension");
    std::size_t n = box.components();
    int d = box.bits;
    Vector phi(n);
    for (std::size_t j = 0; j < n; ++j) {
        double v = box.phi_min[j];
        for (int k = 0; k < d; ++k)
            if (bits[j * d + k]) v += box.step(j, k);
        phi[j] = v;
    }
    return phi;
}

double Qubo::energy(const BitString& q) const {
    if (q.size() != dim) throw LengthMismatch("bitstring length does not match QUBO");
    double e = offset;
    for (std::size_t i = 0; i < dim; ++i) {
        if (!q[i]) continue;
        double row = coeffs(i, i);
        for (std::size_t j = i + 1; j < dim; ++j)
            if (q[j]) row += coeffs(i, j);
        e += row;
    }
    return e;
}

double Qubo::max_abs_coeff() const { return max_abs(coeffs); }

nlohmann::json to_json(const Qubo& q) {
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t i = 0; i < q.dim; ++i)
        for (std::size_t j = i; j < q.dim; ++j)
            if (q.coeffs(i, j) != 0.0)
                entries.push_back({i, j, q.coeffs(i, j)});
    return {{"dim", q.dim}, {"offset", q.offset}, {"entries", entries}};
}

Qubo qubo_from_json(const nlohmann::json& j) {
    Qubo q;
    q.dim = j.at("dim").get<std::size_t>();
    q.offset = j.at("offset").get<double>();
    q.coeffs = Matrix(q.dim, q.dim);
    for (const auto& e : j.at("entries")) {
        std::size_t row = e.at(0).get<std::size_t>();
        std::size_t col = e.at(1).get<std::size_t>();
        if (row >= q.dim || col >= q.dim || row > col)
            throw ConfigError("QUBO entry outside the upper triangle");
        q.coeffs(row, col) = e.at(2).get<double>();
    }
    return q;
}

Qubo quadratic_form_to_qubo(const Matrix& a, const Vector& c, const BinaryBox& box) {
    box.validate();
    std::size_t n = box.components();
    if (a.rows() != n || a.cols() != n) throw DimensionMismatch("form shape vs box");
    if (c.size() != n) throw DimensionMismatch("affine term length vs box");
    int d = box.bits;

    Qubo q;
    q.dim = box.dim();
    q.coeffs = Matrix(q.dim, q.dim);

    // x = m + B q  =>  x^T A x + c^T x =
    //   m^T A m + c^T m  +  ((A + A^T) m + c)^T B q  +  q^T B^T A B q.
    const Vector& m = box.phi_min;
    Vector lin(n, 0.0);
    double off = dot(c, m);
    for (std::size_t i = 0; i < n; ++i) {
        double s = c[i];
        for (std::size_t j = 0; j < n; ++j) {
            s += (a(i, j) + a(j, i)) * m[j];
            off += m[i] * a(i, j) * m[j];
        }
        lin[i] = s;
    }
    q.offset = off;

    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) {
            std::size_t alpha = i * d + k;
            double bik = box.step(i, k);
            q.coeffs(alpha, alpha) = lin[i] * bik + a(i, i) * bik * bik;
            for (std::size_t j = 0; j < n; ++j) {
                double aij = a(i, j) + a(j, i);
                if (aij == 0.0) continue;
                for (int l = 0; l < d; ++l) {
                    std::size_t beta = j * d + l;
                    if (beta <= alpha) continue;  // folded once from above
                    q.coeffs(alpha, beta) += aij * bik * box.step(j, l);
                }
            }
        }
    }
    return q;
}

Qubo quad_to_qubo(const Matrix& a, const BinaryBox& box) {
    return quadratic_form_to_qubo(a, Vector(box.components(), 0.0), box);
}

Qubo deflation_penalty(const DeflationSet& deflation, const Matrix& m,
                       const BinaryBox& box) {
    std::size_t n = box.components();
    Matrix a_pen(n, n);
    for (const auto& mode : deflation) {
        if (mode.beta <= 0.0) throw ConfigError("deflation weight must be positive");
        if (mode.phi.size() != n) throw DimensionMismatch("deflated mode length");
        Vector u = matvec(m, mode.phi);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                a_pen(i, j) += mode.beta * u[i] * u[j];
    }
    return quad_to_qubo(a_pen, box);
}

GevpQuboParts gevp_qubo_parts(const Matrix& h, const Matrix& m,
                              const DeflationSet& deflation, const BinaryBox& box) {
    std::size_t n = box.components();
    if (h.rows() != n || m.rows() != n) throw DimensionMismatch("pencil shape vs box");
    Matrix h_eff = h;
    for (const auto& mode : deflation) {
        if (mode.beta <= 0.0) throw ConfigError("deflation weight must be positive");
        Vector u = matvec(m, mode.phi);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                h_eff(i, j) += mode.beta * u[i] * u[j];
    }
    return GevpQuboParts{quad_to_qubo(h_eff, box), quad_to_qubo(m, box)};
}

Qubo combine(const GevpQuboParts& parts, double lambda) {
    Qubo q = parts.h_part;
    for (std::size_t i = 0; i < q.dim; ++i)
        for (std::size_t j = i; j < q.dim; ++j)
            q.coeffs(i, j) -= lambda * parts.m_part.coeffs(i, j);
    q.offset -= lambda * parts.m_part.offset;
    return q;
}

Qubo gevp_objective(const Matrix& h, const Matrix& m, double lambda,
                    const DeflationSet& deflation, const BinaryBox& box) {
    return combine(gevp_qubo_parts(h, m, deflation, box), lambda);
}

}  // namespace qaefem
