#ifndef EDR_MATRIX_HPP
#define EDR_MATRIX_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace edr {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. Deliberately minimal: the library only
/// needs storage, element access and a few products, all with a fixed,
/// reproducible order of floating-point operations.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// C = A * B. Throws ShapeError on mismatched inner dimensions.
Matrix multiply(const Matrix& a, const Matrix& b);

/// y = A * x.
Vector multiply(const Matrix& a, const Vector& x);

Matrix transpose(const Matrix& a);

/// Largest absolute entry (0 for an empty matrix).
double max_abs(const Matrix& a);

double dot(std::span<const double> a, std::span<const double> b);

/// Euclidean norm of a vector.
double norm2(std::span<const double> v);

/// Column means of a row-major data matrix (one entry per column).
Vector column_means(const Matrix& x);

bool all_finite(const Matrix& a);

}  // namespace edr

#endif  // EDR_MATRIX_HPP
