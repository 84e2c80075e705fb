#ifndef QAEFEM_DENSELA_HPP
#define QAEFEM_DENSELA_HPP

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "qaefem/common.hpp"

namespace qaefem {

/// Dense row-major matrix of doubles.
class Matrix {
  public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }

  private:
    std::size_t rows_, cols_;
    std::vector<double> a_;
};

Matrix transpose(const Matrix& m);
Matrix matmul(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, const Vector& x);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double c, const Matrix& a);
Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator*(double c, const Vector& a);
double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);
/// Outer product a b^T.
Matrix outer(const Vector& a, const Vector& b);
double frobenius_norm(const Matrix& m);
double max_abs(const Matrix& m);

struct EigenPair {
    double value;
    Vector vector;
};

/// Lower-triangular Cholesky factor L with M = L L^T.
/// Throws NotPositiveDefinite if a pivot is <= 0.
Matrix cholesky_factor(const Matrix& m);

/// Solve A x = b for symmetric positive definite A via Cholesky.
Vector solve_spd(const Matrix& a, const Vector& b);

/// Forward/back substitution against a lower-triangular factor.
Vector forward_substitute(const Matrix& l, const Vector& b);
Vector back_substitute_transposed(const Matrix& l, const Vector& b);

/// All eigenpairs of the symmetric-definite pencil H phi = lambda M phi,
/// ascending by eigenvalue.  M must be SPD.  The problem is reduced to a
/// single symmetric eigenproblem via the Cholesky factor of M and solved by
/// cyclic Jacobi rotations.  Returned vectors are M-orthonormal with the
/// largest-magnitude component positive.
std::vector<EigenPair> generalized_eigen(const Matrix& h, const Matrix& m,
                                         int max_sweeps = 100);

/// Spectral condition number lambda_max / lambda_min of a symmetric matrix
/// with positive eigenvalues.  Throws SingularMatrix when lambda_min is zero
/// to machine precision.
double condition_number(const Matrix& a);

}  // namespace qaefem

#endif
