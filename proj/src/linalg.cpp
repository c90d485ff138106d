#include "edr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "edr/errors.hpp"

namespace edr {

namespace {

constexpr int kMaxQlIterations = 50;

// Householder reduction of a symmetric matrix to tridiagonal form, with the
// orthogonal transform accumulated in place of the input. On return d holds
// the diagonal and e[i] the subdiagonal element between rows i and i+1.
void tridiagonalize(Matrix& a, Vector& d, Vector& e) {
    const std::size_t n = a.rows();
    for (std::size_t i = n - 1; i >= 1; --i) {
        const std::size_t l = i - 1;
        double h = 0.0;
        if (l > 0) {
            double scale = 0.0;
            for (std::size_t k = 0; k <= l; ++k) scale += std::abs(a(i, k));
            if (scale == 0.0) {
                e[i] = a(i, l);
            } else {
                for (std::size_t k = 0; k <= l; ++k) {
                    a(i, k) /= scale;
                    h += a(i, k) * a(i, k);
                }
                double f = a(i, l);
                double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                a(i, l) = f - g;
                f = 0.0;
                for (std::size_t j = 0; j <= l; ++j) {
                    a(j, i) = a(i, j) / h;
                    g = 0.0;
                    for (std::size_t k = 0; k <= j; ++k) g += a(j, k) * a(i, k);
                    for (std::size_t k = j + 1; k <= l; ++k) g += a(k, j) * a(i, k);
                    e[j] = g / h;
                    f += e[j] * a(i, j);
                }
                const double hh = f / (h + h);
                for (std::size_t j = 0; j <= l; ++j) {
                    f = a(i, j);
                    g = e[j] - hh * f;
                    e[j] = g;
                    for (std::size_t k = 0; k <= j; ++k) a(j, k) -= f * e[k] + g * a(i, k);
                }
            }
        } else {
            e[i] = a(i, l);
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (d[i] != 0.0) {
            for (std::size_t j = 0; j < i; ++j) {
                double g = 0.0;
                for (std::size_t k = 0; k < i; ++k) g += a(i, k) * a(k, j);
                for (std::size_t k = 0; k < i; ++k) a(k, j) -= g * a(k, i);
            }
        }
        d[i] = a(i, i);
        a(i, i) = 1.0;
        for (std::size_t j = 0; j < i; ++j) {
            a(j, i) = 0.0;
            a(i, j) = 0.0;
        }
    }
}

// QL iteration with implicit shifts on a tridiagonal matrix, rotations
// applied to the columns of z. d comes back holding the eigenvalues.
void ql_implicit(Vector& d, Vector& e, Matrix& z) {
    const std::size_t n = d.size();
    // Renumber the subdiagonal so e[i] sits between d[i] and d[i+1].
    for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;

    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m == l) break;
            if (iter++ == kMaxQlIterations)
                throw NumericalFailure("eigenvalue iteration did not converge after " +
                                           std::to_string(kMaxQlIterations) + " steps",
                                       kMaxQlIterations);
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0;
            double c = 1.0;
            double p = 0.0;
            bool underflow = false;
            for (std::size_t i = m; i-- > l;) {
                double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for (std::size_t k = 0; k < n; ++k) {
                    f = z(k, i + 1);
                    z(k, i + 1) = s * z(k, i) + c * f;
                    z(k, i) = c * z(k, i) - s * f;
                }
            }
            if (underflow) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        } while (m != l);
    }
}

// Flip eigenvector signs so the entry of largest magnitude in each column is
// positive (first such entry wins on exact ties).
void fix_column_signs(Matrix& v) {
    for (std::size_t j = 0; j < v.cols(); ++j) {
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < v.rows(); ++i) {
            const double m = std::abs(v(i, j));
            if (m > best) {
                best = m;
                arg = i;
            }
        }
        if (v(arg, j) < 0.0)
            for (std::size_t i = 0; i < v.rows(); ++i) v(i, j) = -v(i, j);
    }
}

EigenDecomposition sort_descending(Vector d, Matrix v) {
    const std::size_t n = d.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.eigenvalues[j] = d[order[j]];
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, j) = v(i, order[j]);
    }
    return out;
}

}  // namespace

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols())
        throw InvalidInput("symmetric matrix must be square, got " + std::to_string(m_.rows()) +
                           "x" + std::to_string(m_.cols()));
    if (!all_finite(m_)) throw InvalidInput("symmetric matrix has non-finite entries");
    for (std::size_t i = 0; i < m_.rows(); ++i)
        for (std::size_t j = i + 1; j < m_.cols(); ++j) {
            const double x = m_(i, j);
            const double y = m_(j, i);
            if (std::abs(x - y) > 1e-10 * std::max(1.0, std::abs(x)))
                throw InvalidInput("matrix is not symmetric at (" + std::to_string(i) + "," +
                                   std::to_string(j) + ")");
            const double avg = 0.5 * (x + y);
            m_(i, j) = avg;
            m_(j, i) = avg;
        }
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) t += m_(i, i);
    return t;
}

EigenDecomposition sym_eig(const SymMatrix& a) {
    const std::size_t n = a.dim();
    if (n == 0) throw InvalidInput("cannot decompose an empty matrix");
    Matrix work = a.matrix();
    Vector d(n, 0.0);
    Vector e(n, 0.0);
    tridiagonalize(work, d, e);
    ql_implicit(d, e, work);
    fix_column_signs(work);
    return sort_descending(std::move(d), std::move(work));
}

Matrix cholesky(const SymMatrix& a) {
    const std::size_t n = a.dim();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, a(i, i));
    const double pivot_floor = 1e-12 * max_diag;

    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        if (!(diag > pivot_floor))
            throw NotPositiveDefinite("matrix is not positive definite (pivot " +
                                          std::to_string(j) + " = " + std::to_string(diag) + ")",
                                      j);
        const double ljj = std::sqrt(diag);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

Vector forward_substitute(const Matrix& l, const Vector& b) {
    const std::size_t n = l.rows();
    if (b.size() != n) throw ShapeError("forward substitution: dimension mismatch");
    Vector y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    return y;
}

Vector back_substitute_transposed(const Matrix& l, const Vector& b) {
    const std::size_t n = l.rows();
    if (b.size() != n) throw ShapeError("back substitution: dimension mismatch");
    Vector x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
        x[i] = s / l(i, i);
    }
    return x;
}

EigenDecomposition generalized_sym_eig(const SymMatrix& a, const SymMatrix& b) {
    const std::size_t n = a.dim();
    if (b.dim() != n) throw ShapeError("generalized eigenproblem: dimension mismatch");
    const Matrix l = cholesky(b);

    // M = L^-1 A L^-T, one triangular solve per column for each factor.
    Matrix y(n, n);
    Vector col(n);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t i = 0; i < n; ++i) col[i] = a(i, c);
        const Vector sol = forward_substitute(l, col);
        for (std::size_t i = 0; i < n; ++i) y(i, c) = sol[i];
    }
    Matrix m(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t i = 0; i < n; ++i) col[i] = y(c, i);
        const Vector sol = forward_substitute(l, col);
        for (std::size_t i = 0; i < n; ++i) m(c, i) = sol[i];
    }
    // Rounding in the solves leaves M slightly asymmetric; average it out.
    Matrix msym(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) msym(i, j) = 0.5 * (m(i, j) + m(j, i));

    EigenDecomposition inner = sym_eig(SymMatrix(std::move(msym)));

    EigenDecomposition out;
    out.eigenvalues = std::move(inner.eigenvalues);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t i = 0; i < n; ++i) col[i] = inner.eigenvectors(i, c);
        const Vector w = back_substitute_transposed(l, col);
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, c) = w[i];
    }
    fix_column_signs(out.eigenvectors);
    return out;
}

}  // namespace edr
