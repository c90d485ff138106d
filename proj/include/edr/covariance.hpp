#ifndef EDR_COVARIANCE_HPP
#define EDR_COVARIANCE_HPP

#include <cstddef>
#include <vector>

#include "edr/linalg.hpp"
#include "edr/matrix.hpp"

namespace edr {

/// Sample covariance together with the statistics it was computed from.
/// `shrinkage` records the blend weight applied toward the scaled-identity
/// target (0 for a plain estimate).
struct CovarianceEstimate {
    SymMatrix matrix;
    Vector mean;
    std::size_t n_samples = 0;
    double shrinkage = 0.0;
};

/// Within- and between-class scatter of a labeled sample, kept as raw
/// (unnormalized) sums. Row k of `class_means` is the mean of class k.
struct ScatterPair {
    SymMatrix within;
    SymMatrix between;
    Matrix class_means;
    std::vector<std::size_t> class_counts;
    Vector overall_mean;
};

/// Covariance with 1/N normalization: C = (1/N) sum_i (x_i - mean)(x_i - mean)^T.
/// Requires at least two rows.
CovarianceEstimate sample_covariance(const Matrix& x);

/// Scaled-identity shrinkage target: (trace(C)/p) * I.
SymMatrix shrinkage_target(const SymMatrix& c);

/// Convex blend delta * target + (1 - delta) * C with delta in [0, 1].
SymMatrix shrink(const SymMatrix& c, double delta);

/// Class scatter sums for labels in {0..K-1}; every class needs at least two
/// samples. K is taken as max(label) + 1.
ScatterPair scatter_matrices(const Matrix& x, const std::vector<int>& y);

}  // namespace edr

#endif  // EDR_COVARIANCE_HPP
