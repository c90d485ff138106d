#include "edr/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edr/errors.hpp"

namespace edr {

namespace {

// Accumulates sum_i (x_i - center_i)(x_i - center_i)^T over the given rows,
// where center_i is looked up per row. Only the upper triangle is computed,
// then mirrored.
Matrix centered_outer_sum(const Matrix& x, const std::vector<std::size_t>& rows,
                          const Matrix& centers, const std::vector<std::size_t>& center_of) {
    const std::size_t p = x.cols();
    Matrix acc(p, p);
    Vector r(p);
    for (std::size_t idx = 0; idx < rows.size(); ++idx) {
        auto xi = x.row(rows[idx]);
        auto ci = centers.row(center_of[idx]);
        for (std::size_t j = 0; j < p; ++j) r[j] = xi[j] - ci[j];
        for (std::size_t a = 0; a < p; ++a) {
            const double ra = r[a];
            if (ra == 0.0) continue;
            auto row = acc.row(a);
            for (std::size_t b = a; b < p; ++b) row[b] += ra * r[b];
        }
    }
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a + 1; b < p; ++b) acc(b, a) = acc(a, b);
    return acc;
}

}  // namespace

CovarianceEstimate sample_covariance(const Matrix& x) {
    const std::size_t n = x.rows();
    if (n < 2) throw InsufficientData("covariance needs at least 2 samples, got " +
                                      std::to_string(n));
    if (!all_finite(x)) throw InvalidInput("covariance input has non-finite entries");

    Vector mean = column_means(x);
    Matrix centers(1, x.cols());
    for (std::size_t j = 0; j < x.cols(); ++j) centers(0, j) = mean[j];

    std::vector<std::size_t> rows(n);
    std::vector<std::size_t> center_of(n, 0);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;

    Matrix acc = centered_outer_sum(x, rows, centers, center_of);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& v : acc.data()) v *= inv_n;

    return CovarianceEstimate{SymMatrix(std::move(acc)), std::move(mean), n, 0.0};
}

SymMatrix shrinkage_target(const SymMatrix& c) {
    const std::size_t p = c.dim();
    Matrix t(p, p);
    const double mean_diag = c.trace() / static_cast<double>(p);
    for (std::size_t i = 0; i < p; ++i) t(i, i) = mean_diag;
    return SymMatrix(std::move(t));
}

SymMatrix shrink(const SymMatrix& c, double delta) {
    if (!(delta >= 0.0 && delta <= 1.0))
        throw InvalidParameter("shrinkage must lie in [0, 1], got " + std::to_string(delta));
    const std::size_t p = c.dim();
    const double mean_diag = c.trace() / static_cast<double>(p);
    Matrix s(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) s(i, j) = (1.0 - delta) * c(i, j);
        s(i, i) += delta * mean_diag;
    }
    return SymMatrix(std::move(s));
}

ScatterPair scatter_matrices(const Matrix& x, const std::vector<int>& y) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    if (y.size() != n) throw ShapeError("scatter: label count does not match row count");
    if (n == 0) throw InsufficientData("scatter: empty sample");
    if (!all_finite(x)) throw InvalidInput("scatter input has non-finite entries");

    int k = 0;
    for (int label : y) {
        if (label < 0) throw InvalidInput("labels must be non-negative");
        k = std::max(k, label + 1);
    }
    if (k < 2) throw InvalidParameter("scatter requires at least 2 classes, got " +
                                      std::to_string(k));

    std::vector<std::size_t> counts(k, 0);
    for (int label : y) ++counts[label];
    for (int c = 0; c < k; ++c)
        if (counts[c] < 2)
            throw InsufficientClassData("class " + std::to_string(c) + " has " +
                                            std::to_string(counts[c]) +
                                            " samples, need at least 2",
                                        c);

    Matrix class_means(k, p);
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = x.row(i);
        auto mi = class_means.row(y[i]);
        for (std::size_t j = 0; j < p; ++j) mi[j] += xi[j];
    }
    for (int c = 0; c < k; ++c) {
        auto mc = class_means.row(c);
        for (std::size_t j = 0; j < p; ++j) mc[j] /= static_cast<double>(counts[c]);
    }
    Vector overall_mean = column_means(x);

    std::vector<std::size_t> rows(n);
    std::vector<std::size_t> center_of(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i] = i;
        center_of[i] = static_cast<std::size_t>(y[i]);
    }
    Matrix within = centered_outer_sum(x, rows, class_means, center_of);

    // Between-class scatter with |C_k| weighting, so that within + between
    // recovers the total scatter exactly.
    Matrix between(p, p);
    Vector diff(p);
    for (int c = 0; c < k; ++c) {
        auto mc = class_means.row(c);
        for (std::size_t j = 0; j < p; ++j) diff[j] = mc[j] - overall_mean[j];
        const double w = static_cast<double>(counts[c]);
        for (std::size_t a = 0; a < p; ++a) {
            const double da = w * diff[a];
            for (std::size_t b = a; b < p; ++b) between(a, b) += da * diff[b];
        }
    }
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a + 1; b < p; ++b) between(b, a) = between(a, b);

    return ScatterPair{SymMatrix(std::move(within)), SymMatrix(std::move(between)),
                       std::move(class_means), std::move(counts), std::move(overall_mean)};
}

}  // namespace edr
