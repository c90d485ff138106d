#ifndef EDR_TRANSFORMS_HPP
#define EDR_TRANSFORMS_HPP

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "edr/covariance.hpp"
#include "edr/matrix.hpp"

namespace edr {

// ---------------------------------------------------------------------------
// Fitted models. All are immutable after fit and cheap to share.
// ---------------------------------------------------------------------------

/// Identity transform; only remembers the expected width.
struct RawModel {
    std::size_t p = 0;
};

/// Postprocessing: subtract the common mean, then project away the top
/// principal directions. Keeps the input dimension.
struct PpaModel {
    Vector mean;
    Matrix removed_directions;  // d_removed x p, rows orthonormal
    std::size_t d_removed() const { return removed_directions.rows(); }
};

struct PcaModel {
    Vector mean;
    Matrix components;  // d_kept x p, rows orthonormal
    Vector explained_variance;
    std::size_t d_kept() const { return components.rows(); }
};

/// Fisher discriminant directions. `weights` maps a p-vector to K-1
/// coordinates; the scatter pair that produced it is kept for diagnostics.
struct LdaModel {
    Matrix weights;  // p x (K-1)
    int class_count = 0;
    double shrinkage = 0.0;
    ScatterPair scatter;
};

/// Independent LDA per contiguous embedding block; outputs are concatenated
/// in block order, giving (K-1) * n_blocks coordinates.
struct PartitionedLdaModel {
    int n_blocks = 0;
    std::size_t block_size = 0;
    std::vector<LdaModel> blocks;
};

// ---------------------------------------------------------------------------
// Fit / transform operations. Rows whose embedding is exactly zero are
// treated as missing: they never contribute to fitted statistics but are
// still transformed like any other vector.
// ---------------------------------------------------------------------------

PpaModel ppa_fit(const Matrix& x, std::size_t d_remove);
Matrix ppa_transform(const PpaModel& model, const Matrix& x);

PcaModel pca_fit(const Matrix& x, std::size_t d_keep);
Matrix pca_transform(const PcaModel& model, const Matrix& x);

LdaModel lda_fit(const Matrix& x, const std::vector<int>& y, double delta);
Matrix lda_transform(const LdaModel& model, const Matrix& x);

PartitionedLdaModel plda_fit(const Matrix& x, const std::vector<int>& y, int n_blocks,
                             double delta);
Matrix plda_transform(const PartitionedLdaModel& model, const Matrix& x);

/// Valid block counts for a p-dimensional embedding with K classes: the
/// divisors of p whose block size p/n_b stays above K.
std::vector<int> valid_block_counts(std::size_t p, int class_count);

// ---------------------------------------------------------------------------
// Embedding diagnostics.
// ---------------------------------------------------------------------------

/// Norm of the mean embedding divided by the mean embedding norm, in [0, 1].
/// With `drop_zero_rows`, rows that are exactly zero are ignored; if nothing
/// remains (or every row is zero without the flag) EmptySet is thrown.
double mean_norm_ratio(const Matrix& x, bool drop_zero_rows);

struct EvrCurve {
    Vector ratios;  // descending, non-negative, sums to 1 (unless degenerate)
    bool degenerate = false;
};

/// Explained-variance ratios of the sample covariance spectrum, one entry per
/// attainable rank (min(N-1, p)); zero rows are excluded. Data with no
/// variance at all yields an all-zero curve with the degenerate flag set.
EvrCurve explained_variance_curve(const Matrix& x);

// ---------------------------------------------------------------------------
// Uniform handle over the five methods, used by the evaluation harness, the
// model files and the CLI.
// ---------------------------------------------------------------------------

enum class Method { raw, ppa, pca, lda, plda };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct MethodParams {
    std::size_t d = 1;     // ppa: directions removed; pca: components kept
    double delta = 0.0;    // lda/plda shrinkage
    int n_blocks = 1;      // plda
};

using AnyModel = std::variant<RawModel, PpaModel, PcaModel, LdaModel, PartitionedLdaModel>;

AnyModel fit_model(Method method, const MethodParams& params, const Matrix& x,
                   const std::vector<int>& y);
Matrix apply_model(const AnyModel& model, const Matrix& x);
std::size_t output_dimension(const AnyModel& model);
Method model_method(const AnyModel& model);

}  // namespace edr

#endif  // EDR_TRANSFORMS_HPP
