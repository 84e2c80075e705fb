#include "qaefem/densela.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace qaefem {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
    a_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw DimensionMismatch("ragged initializer");
        a_.insert(a_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("matmul shape");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Vector matvec(const Matrix& a, const Vector& x) {
    if (a.cols() != x.size()) throw DimensionMismatch("matvec shape");
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch("matrix add shape");
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) + b(i, j);
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch("matrix sub shape");
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
    return c;
}

Matrix operator*(double c, const Matrix& a) {
    Matrix b(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) b(i, j) = c * a(i, j);
    return b;
}

Vector operator+(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("vector add length");
    Vector c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
    return c;
}

Vector operator-(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("vector sub length");
    Vector c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
    return c;
}

Vector operator*(double c, const Vector& a) {
    Vector b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) b[i] = c * a[i];
    return b;
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("dot length");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

Matrix outer(const Vector& a, const Vector& b) {
    Matrix m(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
    return m;
}

double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
}

double max_abs(const Matrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) s = std::max(s, std::abs(m(i, j)));
    return s;
}

Matrix cholesky_factor(const Matrix& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("cholesky needs square");
    std::size_t n = m.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= 0.0) throw NotPositiveDefinite("nonpositive pivot in Cholesky");
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

Vector forward_substitute(const Matrix& l, const Vector& b) {
    std::size_t n = l.rows();
    if (b.size() != n) throw DimensionMismatch("forward substitution length");
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t j = 0; j < i; ++j) s -= l(i, j) * x[j];
        x[i] = s / l(i, i);
    }
    return x;
}

Vector back_substitute_transposed(const Matrix& l, const Vector& b) {
    std::size_t n = l.rows();
    if (b.size() != n) throw DimensionMismatch("back substitution length");
    Vector x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= l(j, ii) * x[j];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

Vector solve_spd(const Matrix& a, const Vector& b) {
    Matrix l = cholesky_factor(a);
    return back_substitute_transposed(l, forward_substitute(l, b));
}

namespace {

// Cyclic Jacobi on a symmetric matrix.  Rotations are applied until every
// off-diagonal magnitude is at most tol; V accumulates the eigenvectors as
// columns.
void jacobi_eigen(Matrix& a, Matrix& v, double tol, int max_sweeps) {
    std::size_t n = a.rows();
    v = Matrix::identity(n);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (std::abs(apq) <= tol) continue;
                rotated = true;
                double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                double tau = s / (1.0 + c);
                double app = a(p, p), aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (i != p && i != q) {
                        double aip = a(i, p), aiq = a(i, q);
                        a(i, p) = aip - s * (aiq + tau * aip);
                        a(p, i) = a(i, p);
                        a(i, q) = aiq + s * (aip - tau * aiq);
                        a(q, i) = a(i, q);
                    }
                    double vip = v(i, p), viq = v(i, q);
                    v(i, p) = vip - s * (viq + tau * vip);
                    v(i, q) = viq + s * (vip - tau * viq);
                }
            }
        }
        if (!rotated) return;
    }
    throw NoConvergence("Jacobi sweeps exhausted");
}

void fix_sign(Vector& v) {
    std::size_t imax = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    if (v[imax] < 0.0)
        for (double& x : v) x = -x;
}

}  // namespace

std::vector<EigenPair> generalized_eigen(const Matrix& h, const Matrix& m,
                                         int max_sweeps) {
    if (h.rows() != h.cols() || m.rows() != m.cols() || h.rows() != m.rows())
        throw DimensionMismatch("pencil shape");
    std::size_t n = h.rows();
    Matrix l = cholesky_factor(m);

    // Reduce to the standard problem: Ht = L^-1 H L^-T.
    Matrix y(n, n);  // y = L^-1 H, built column by column
    for (std::size_t j = 0; j < n; ++j) {
        Vector col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = h(i, j);
        Vector sol = forward_substitute(l, col);
        for (std::size_t i = 0; i < n; ++i) y(i, j) = sol[i];
    }
    Matrix ht(n, n);  // ht = (L^-1 y^T)^T
    for (std::size_t j = 0; j < n; ++j) {
        Vector row(n);
        for (std::size_t i = 0; i < n; ++i) row[i] = y(j, i);
        Vector sol = forward_substitute(l, row);
        for (std::size_t i = 0; i < n; ++i) ht(j, i) = sol[i];
    }
    for (std::size_t i = 0; i < n; ++i)  // symmetrize roundoff
        for (std::size_t j = i + 1; j < n; ++j) {
            double v = 0.5 * (ht(i, j) + ht(j, i));
            ht(i, j) = v;
            ht(j, i) = v;
        }

    double tol = 1e-12 * frobenius_norm(ht);
    Matrix v;
    jacobi_eigen(ht, v, tol, max_sweeps);

    std::vector<EigenPair> pairs(n);
    for (std::size_t j = 0; j < n; ++j) {
        Vector yj(n);
        for (std::size_t i = 0; i < n; ++i) yj[i] = v(i, j);
        Vector phi = back_substitute_transposed(l, yj);
        // M-normalize; yj is unit in the transformed metric already, this
        // just scrubs rotation roundoff.
        double mn = std::sqrt(dot(phi, matvec(m, phi)));
        if (mn > 0.0)
            for (double& x : phi) x /= mn;
        fix_sign(phi);
        pairs[j] = EigenPair{ht(j, j), std::move(phi)};
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const EigenPair& a, const EigenPair& b) { return a.value < b.value; });
    return pairs;
}

double condition_number(const Matrix& a) {
    auto pairs = generalized_eigen(a, Matrix::identity(a.rows()));
    double lo = pairs.front().value;
    double hi = pairs.back().value;
    if (lo <= 1e-14 * std::max(hi, 1.0))
        throw SingularMatrix("condition number of a singular matrix");
    return hi / lo;
}

}  // namespace qaefem
