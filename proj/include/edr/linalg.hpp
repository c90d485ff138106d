#ifndef EDR_LINALG_HPP
#define EDR_LINALG_HPP

#include "edr/matrix.hpp"

namespace edr {

/// Symmetric real matrix. Construction validates finiteness and symmetry
/// (entries must agree to 1e-10 relative) and then stores the exactly
/// symmetrized average, so downstream solvers can rely on A(i,j) == A(j,i).
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(Matrix m);

    std::size_t dim() const { return m_.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
    const Matrix& matrix() const { return m_; }

    double trace() const;

    static SymMatrix identity(std::size_t n) { return SymMatrix(Matrix::identity(n)); }

private:
    Matrix m_;
};

/// Eigenvalues sorted descending; eigenvector i is column i of `eigenvectors`.
/// Every column is normalized with its largest-magnitude entry positive, which
/// pins the otherwise arbitrary sign and makes results reproducible.
struct EigenDecomposition {
    Vector eigenvalues;
    Matrix eigenvectors;
};

/// Full eigendecomposition of a symmetric matrix. Householder reduction to
/// tridiagonal form followed by QL iteration with implicit shifts; a dense
/// symmetric problem of dimension up to a few hundred is well within its
/// comfort zone. Throws NumericalFailure if any eigenvalue fails to settle
/// within the iteration cap.
EigenDecomposition sym_eig(const SymMatrix& a);

/// Lower-triangular L with L*L^T = A. The pivot must stay above
/// 1e-12 * max diagonal of A; otherwise NotPositiveDefinite is thrown with
/// the failing pivot index.
Matrix cholesky(const SymMatrix& a);

/// Solves A w = lambda B w for symmetric A and SPD B by reducing to a
/// standard problem through B = L L^T. Eigenvalues come back descending and
/// the eigenvectors are B-orthonormal.
EigenDecomposition generalized_sym_eig(const SymMatrix& a, const SymMatrix& b);

/// Solve L y = b (L lower triangular, taken from `cholesky`).
Vector forward_substitute(const Matrix& l, const Vector& b);

/// Solve L^T x = b.
Vector back_substitute_transposed(const Matrix& l, const Vector& b);

}  // namespace edr

#endif  // EDR_LINALG_HPP
