#include "edr/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edr/errors.hpp"
#include "edr/linalg.hpp"

namespace edr {

namespace {

bool is_zero_row(std::span<const double> row) {
    for (double v : row)
        if (v != 0.0) return false;
    return true;
}

std::vector<std::size_t> nonzero_row_indices(const Matrix& x) {
    std::vector<std::size_t> keep;
    keep.reserve(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        if (!is_zero_row(x.row(i))) keep.push_back(i);
    return keep;
}

Matrix select_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto src = x.row(rows[i]);
        auto dst = out.row(i);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
}

void require_width(const Matrix& x, std::size_t p, const char* what) {
    if (x.cols() != p)
        throw ShapeError(std::string(what) + ": expected " + std::to_string(p) +
                         " columns, got " + std::to_string(x.cols()));
}

// Top-d eigenvectors of the sample covariance, as rows.
Matrix principal_directions(const CovarianceEstimate& cov, std::size_t d) {
    const EigenDecomposition eig = sym_eig(cov.matrix);
    Matrix dirs(d, cov.matrix.dim());
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t j = 0; j < cov.matrix.dim(); ++j) dirs(r, j) = eig.eigenvectors(j, r);
    return dirs;
}

// Core LDA fit on rows that are already filtered; shared with the
// partitioned variant so a single-block partition is byte-identical to a
// plain fit.
LdaModel lda_fit_filtered(const Matrix& x, const std::vector<int>& y, double delta) {
    if (!(delta >= 0.0 && delta <= 1.0))
        throw InvalidParameter("shrinkage must lie in [0, 1], got " + std::to_string(delta));
    ScatterPair scatter = scatter_matrices(x, y);
    const int k = static_cast<int>(scatter.class_counts.size());
    if (x.cols() <= static_cast<std::size_t>(k))
        throw InvalidParameter("LDA needs feature dimension > class count (" +
                               std::to_string(x.cols()) + " <= " + std::to_string(k) + ")");

    const SymMatrix shrunk = shrink(scatter.within, delta);
    EigenDecomposition eig;
    try {
        eig = generalized_sym_eig(scatter.between, shrunk);
    } catch (const NotPositiveDefinite& e) {
        throw NotPositiveDefinite(std::string(e.what()) +
                                      "; within-class scatter is singular, increase shrinkage",
                                  e.pivot_index());
    }

    const std::size_t p = x.cols();
    const std::size_t out_dim = static_cast<std::size_t>(k - 1);
    Matrix weights(p, out_dim);
    for (std::size_t j = 0; j < out_dim; ++j)
        for (std::size_t i = 0; i < p; ++i) weights(i, j) = eig.eigenvectors(i, j);

    return LdaModel{std::move(weights), k, delta, std::move(scatter)};
}

}  // namespace

PpaModel ppa_fit(const Matrix& x, std::size_t d_remove) {
    const std::vector<std::size_t> keep = nonzero_row_indices(x);
    if (keep.size() < 2) throw InsufficientData("PPA needs at least 2 non-zero rows");
    if (d_remove >= std::min(keep.size(), x.cols()))
        throw InvalidParameter("cannot remove " + std::to_string(d_remove) +
                               " directions from " + std::to_string(x.cols()) +
                               "-dimensional data with " + std::to_string(keep.size()) +
                               " usable rows");
    const Matrix fit_rows = select_rows(x, keep);
    CovarianceEstimate cov = sample_covariance(fit_rows);
    Matrix dirs = d_remove > 0 ? principal_directions(cov, d_remove) : Matrix(0, x.cols());
    return PpaModel{std::move(cov.mean), std::move(dirs)};
}

Matrix ppa_transform(const PpaModel& model, const Matrix& x) {
    require_width(x, model.mean.size(), "ppa_transform");
    const std::size_t p = x.cols();
    Matrix out(x.rows(), p);
    Vector centered(p);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto xi = x.row(i);
        for (std::size_t j = 0; j < p; ++j) centered[j] = xi[j] - model.mean[j];
        for (std::size_t r = 0; r < model.d_removed(); ++r) {
            auto u = model.removed_directions.row(r);
            const double proj = dot(u, centered);
            for (std::size_t j = 0; j < p; ++j) centered[j] -= proj * u[j];
        }
        auto oi = out.row(i);
        std::copy(centered.begin(), centered.end(), oi.begin());
    }
    return out;
}

PcaModel pca_fit(const Matrix& x, std::size_t d_keep) {
    const std::vector<std::size_t> keep = nonzero_row_indices(x);
    if (keep.size() < 2) throw InsufficientData("PCA needs at least 2 non-zero rows");
    const std::size_t max_d = std::min(keep.size() - 1, x.cols());
    if (d_keep < 1 || d_keep > max_d)
        throw InvalidParameter("PCA dimension must lie in [1, " + std::to_string(max_d) +
                               "], got " + std::to_string(d_keep));
    const Matrix fit_rows = select_rows(x, keep);
    CovarianceEstimate cov = sample_covariance(fit_rows);
    const EigenDecomposition eig = sym_eig(cov.matrix);

    Matrix components(d_keep, x.cols());
    Vector explained(d_keep);
    for (std::size_t r = 0; r < d_keep; ++r) {
        explained[r] = eig.eigenvalues[r];
        for (std::size_t j = 0; j < x.cols(); ++j) components(r, j) = eig.eigenvectors(j, r);
    }
    return PcaModel{std::move(cov.mean), std::move(components), std::move(explained)};
}

Matrix pca_transform(const PcaModel& model, const Matrix& x) {
    require_width(x, model.mean.size(), "pca_transform");
    const std::size_t p = x.cols();
    const std::size_t d = model.d_kept();
    Matrix out(x.rows(), d);
    Vector centered(p);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto xi = x.row(i);
        for (std::size_t j = 0; j < p; ++j) centered[j] = xi[j] - model.mean[j];
        auto oi = out.row(i);
        for (std::size_t r = 0; r < d; ++r) oi[r] = dot(model.components.row(r), centered);
    }
    return out;
}

LdaModel lda_fit(const Matrix& x, const std::vector<int>& y, double delta) {
    if (y.size() != x.rows()) throw ShapeError("lda_fit: label count does not match row count");
    const std::vector<std::size_t> keep = nonzero_row_indices(x);
    std::vector<int> y_keep(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) y_keep[i] = y[keep[i]];
    return lda_fit_filtered(select_rows(x, keep), y_keep, delta);
}

Matrix lda_transform(const LdaModel& model, const Matrix& x) {
    require_width(x, model.weights.rows(), "lda_transform");
    return multiply(x, model.weights);
}

std::vector<int> valid_block_counts(std::size_t p, int class_count) {
    std::vector<int> valid;
    for (std::size_t nb = 1; nb <= p; ++nb)
        if (p % nb == 0 && p / nb > static_cast<std::size_t>(class_count))
            valid.push_back(static_cast<int>(nb));
    return valid;
}

PartitionedLdaModel plda_fit(const Matrix& x, const std::vector<int>& y, int n_blocks,
                             double delta) {
    if (y.size() != x.rows()) throw ShapeError("plda_fit: label count does not match row count");
    const std::size_t p = x.cols();
    int k = 0;
    for (int label : y) k = std::max(k, label + 1);

    const bool divides = n_blocks >= 1 && p % static_cast<std::size_t>(n_blocks) == 0;
    const std::size_t block = divides ? p / static_cast<std::size_t>(n_blocks) : 0;
    if (!divides || block <= static_cast<std::size_t>(k)) {
        std::string valid;
        for (int nb : valid_block_counts(p, k)) {
            if (!valid.empty()) valid += ", ";
            valid += std::to_string(nb);
        }
        throw InvalidParameter("invalid block count " + std::to_string(n_blocks) + " for p = " +
                               std::to_string(p) + " with " + std::to_string(k) +
                               " classes; valid counts: " + valid);
    }

    const std::vector<std::size_t> keep = nonzero_row_indices(x);
    const Matrix x_keep = select_rows(x, keep);
    std::vector<int> y_keep(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) y_keep[i] = y[keep[i]];

    PartitionedLdaModel model;
    model.n_blocks = n_blocks;
    model.block_size = block;
    model.blocks.reserve(n_blocks);
    for (int b = 0; b < n_blocks; ++b) {
        Matrix slice(x_keep.rows(), block);
        const std::size_t offset = static_cast<std::size_t>(b) * block;
        for (std::size_t i = 0; i < x_keep.rows(); ++i) {
            auto src = x_keep.row(i);
            auto dst = slice.row(i);
            for (std::size_t j = 0; j < block; ++j) dst[j] = src[offset + j];
        }
        try {
            model.blocks.push_back(lda_fit_filtered(slice, y_keep, delta));
        } catch (Error& e) {
            e.add_context("block " + std::to_string(b));
            throw;
        }
    }
    return model;
}

Matrix plda_transform(const PartitionedLdaModel& model, const Matrix& x) {
    const std::size_t p = model.block_size * static_cast<std::size_t>(model.n_blocks);
    require_width(x, p, "plda_transform");
    const std::size_t per_block = model.blocks.empty() ? 0 : model.blocks[0].weights.cols();
    Matrix out(x.rows(), per_block * model.blocks.size());
    for (std::size_t b = 0; b < model.blocks.size(); ++b) {
        const Matrix& w = model.blocks[b].weights;
        const std::size_t offset = b * model.block_size;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            auto xi = x.row(i);
            auto oi = out.row(i);
            for (std::size_t c = 0; c < per_block; ++c) {
                double s = 0.0;
                for (std::size_t j = 0; j < model.block_size; ++j)
                    s += xi[offset + j] * w(j, c);
                oi[b * per_block + c] = s;
            }
        }
    }
    return out;
}

double mean_norm_ratio(const Matrix& x, bool drop_zero_rows) {
    std::vector<std::size_t> rows;
    rows.reserve(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        if (!drop_zero_rows || !is_zero_row(x.row(i))) rows.push_back(i);
    if (rows.empty())
        throw EmptySet(drop_zero_rows ? "no non-zero embedding rows" : "no embedding rows");

    const std::size_t p = x.cols();
    Vector mean(p, 0.0);
    double norm_sum = 0.0;
    for (std::size_t i : rows) {
        auto xi = x.row(i);
        for (std::size_t j = 0; j < p; ++j) mean[j] += xi[j];
        norm_sum += norm2(xi);
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (double& m : mean) m *= inv;
    const double avg_norm = norm_sum * inv;
    if (avg_norm == 0.0) throw EmptySet("all embedding rows are zero");
    return std::min(norm2({mean.data(), mean.size()}) / avg_norm, 1.0);
}

EvrCurve explained_variance_curve(const Matrix& x) {
    const std::vector<std::size_t> keep = nonzero_row_indices(x);
    if (keep.size() < 2)
        throw InsufficientData("explained variance needs at least 2 non-zero rows");
    const Matrix fit_rows = select_rows(x, keep);
    const CovarianceEstimate cov = sample_covariance(fit_rows);
    const EigenDecomposition eig = sym_eig(cov.matrix);

    double total = 0.0;
    for (double v : eig.eigenvalues) total += v;

    const std::size_t len = std::min(keep.size() - 1, x.cols());
    EvrCurve curve;
    curve.ratios.assign(len, 0.0);

    // Identical rows leave only rounding residue on the diagonal; report that
    // as a degenerate spectrum rather than dividing by noise.
    const double scale = max_abs(fit_rows);
    if (total <= 1e-18 * std::max(1.0, scale * scale)) {
        curve.degenerate = true;
        return curve;
    }
    for (std::size_t i = 0; i < len; ++i)
        curve.ratios[i] = std::max(eig.eigenvalues[i], 0.0) / total;
    return curve;
}

std::string method_name(Method m) {
    switch (m) {
        case Method::raw: return "raw";
        case Method::ppa: return "ppa";
        case Method::pca: return "pca";
        case Method::lda: return "lda";
        case Method::plda: return "plda";
    }
    return "unknown";
}

Method method_from_name(const std::string& name) {
    if (name == "raw") return Method::raw;
    if (name == "ppa") return Method::ppa;
    if (name == "pca") return Method::pca;
    if (name == "lda") return Method::lda;
    if (name == "plda") return Method::plda;
    throw InvalidParameter("unknown method '" + name + "'");
}

AnyModel fit_model(Method method, const MethodParams& params, const Matrix& x,
                   const std::vector<int>& y) {
    switch (method) {
        case Method::raw: return RawModel{x.cols()};
        case Method::ppa: return ppa_fit(x, params.d);
        case Method::pca: return pca_fit(x, params.d);
        case Method::lda: return lda_fit(x, y, params.delta);
        case Method::plda: return plda_fit(x, y, params.n_blocks, params.delta);
    }
    throw InvalidParameter("unknown method");
}

Matrix apply_model(const AnyModel& model, const Matrix& x) {
    return std::visit(
        [&](const auto& m) -> Matrix {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, RawModel>) {
                require_width(x, m.p, "raw transform");
                return x;
            } else if constexpr (std::is_same_v<T, PpaModel>) {
                return ppa_transform(m, x);
            } else if constexpr (std::is_same_v<T, PcaModel>) {
                return pca_transform(m, x);
            } else if constexpr (std::is_same_v<T, LdaModel>) {
                return lda_transform(m, x);
            } else {
                return plda_transform(m, x);
            }
        },
        model);
}

std::size_t output_dimension(const AnyModel& model) {
    return std::visit(
        [](const auto& m) -> std::size_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, RawModel>) {
                return m.p;
            } else if constexpr (std::is_same_v<T, PpaModel>) {
                return m.mean.size();
            } else if constexpr (std::is_same_v<T, PcaModel>) {
                return m.d_kept();
            } else if constexpr (std::is_same_v<T, LdaModel>) {
                return m.weights.cols();
            } else {
                return m.blocks.empty() ? 0 : m.blocks[0].weights.cols() * m.blocks.size();
            }
        },
        model);
}

Method model_method(const AnyModel& model) {
    return std::visit(
        [](const auto& m) -> Method {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, RawModel>) {
                return Method::raw;
            } else if constexpr (std::is_same_v<T, PpaModel>) {
                return Method::ppa;
            } else if constexpr (std::is_same_v<T, PcaModel>) {
                return Method::pca;
            } else if constexpr (std::is_same_v<T, LdaModel>) {
                return Method::lda;
            } else {
                return Method::plda;
            }
        },
        model);
}

}  // namespace edr
