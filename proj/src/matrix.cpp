#include "edr/matrix.hpp"

#include <cmath>
#include <cstdlib>

#include "edr/errors.hpp"

namespace edr {

Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw ShapeError("matrix product: " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " times " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto ci = c.row(i);
        auto ai = a.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = ai[k];
            if (aik == 0.0) continue;
            auto bk = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

Vector multiply(const Matrix& a, const Vector& x) {
    if (a.cols() != x.size()) throw ShapeError("matrix-vector product: dimension mismatch");
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), {x.data(), x.size()});
    return y;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

Vector column_means(const Matrix& x) {
    Vector mean(x.cols(), 0.0);
    if (x.rows() == 0) return mean;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto r = x.row(i);
        for (std::size_t j = 0; j < x.cols(); ++j) mean[j] += r[j];
    }
    for (double& m : mean) m /= static_cast<double>(x.rows());
    return mean;
}

bool all_finite(const Matrix& a) {
    for (double v : a.data())
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace edr
