#include "edr/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <thread>

#include <json.hpp>

#include "edr/errors.hpp"

namespace edr {

namespace {

std::vector<std::size_t> indices_where(const std::vector<int>& fold_of, int fold, bool equal) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
        if ((fold_of[i] == fold) == equal) out.push_back(i);
    return out;
}

Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto src = x.row(rows[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

// Leak-free encoder for the non-embedding features: numeric columns are
// imputed with the training-fold median, categoricals one-hot encoded with
// categories learned on the training fold (unseen values map to all zeros).
class FeatureEncoder {
public:
    void fit(const LabeledDataset& ds, const std::vector<std::size_t>& train_rows) {
        const std::size_t q = ds.numeric_features.cols();
        medians_.assign(q, 0.0);
        for (std::size_t j = 0; j < q; ++j) {
            std::vector<double> values;
            values.reserve(train_rows.size());
            for (std::size_t i : train_rows) {
                const double v = ds.numeric_features(i, j);
                if (!std::isnan(v)) values.push_back(v);
            }
            if (values.empty()) continue;
            std::sort(values.begin(), values.end());
            const std::size_t m = values.size();
            medians_[j] = m % 2 == 1 ? values[m / 2]
                                     : 0.5 * (values[m / 2 - 1] + values[m / 2]);
        }
        const std::size_t c = ds.categorical_names.size();
        categories_.assign(c, {});
        for (std::size_t j = 0; j < c; ++j) {
            std::set<std::string> seen;
            for (std::size_t i : train_rows) seen.insert(ds.categorical_features[i][j]);
            int next = 0;
            for (const auto& v : seen) categories_[j][v] = next++;
        }
    }

    std::size_t width() const {
        std::size_t w = medians_.size();
        for (const auto& cats : categories_) w += cats.size();
        return w;
    }

    // Appends the encoded non-embedding features to the right of `base`.
    Matrix encode(const LabeledDataset& ds, const std::vector<std::size_t>& rows,
                  const Matrix& base) const {
        Matrix out(base.rows(), base.cols() + width());
        for (std::size_t i = 0; i < base.rows(); ++i) {
            auto src = base.row(i);
            auto dst = out.row(i);
            std::copy(src.begin(), src.end(), dst.begin());
            std::size_t col = base.cols();
            for (std::size_t j = 0; j < medians_.size(); ++j) {
                const double v = ds.numeric_features(rows[i], j);
                dst[col++] = std::isnan(v) ? medians_[j] : v;
            }
            for (std::size_t j = 0; j < categories_.size(); ++j) {
                const auto& cats = categories_[j];
                const auto it = cats.find(ds.categorical_features[rows[i]][j]);
                const std::size_t offset = col;
                col += cats.size();
                if (it != cats.end()) dst[offset + it->second] = 1.0;
            }
        }
        return out;
    }

private:
    std::vector<double> medians_;
    std::vector<std::map<std::string, int>> categories_;
};

double fold_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double fold_std(const std::vector<double>& v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size()));
}

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

}  // namespace

std::string feature_mode_name(FeatureMode mode) {
    return mode == FeatureMode::embeddings_only ? "embeddings-only" : "full-features";
}

FeatureMode feature_mode_from_name(const std::string& name) {
    if (name == "embeddings-only") return FeatureMode::embeddings_only;
    if (name == "full-features") return FeatureMode::full_features;
    throw InvalidParameter("unknown feature mode '" + name + "'");
}

FoldAssignment stratified_kfold(const std::vector<int>& y, int k, std::uint64_t seed) {
    if (k < 2) throw InvalidParameter("fold count must be at least 2, got " + std::to_string(k));
    if (y.empty()) throw InsufficientData("no labels to fold");

    int n_classes = 0;
    for (int label : y) {
        if (label < 0) throw InvalidInput("labels must be non-negative");
        n_classes = std::max(n_classes, label + 1);
    }
    std::vector<std::vector<std::size_t>> by_class(n_classes);
    for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
    for (int c = 0; c < n_classes; ++c)
        if (by_class[c].size() < static_cast<std::size_t>(k))
            throw InsufficientClassData("class " + std::to_string(c) + " has " +
                                            std::to_string(by_class[c].size()) +
                                            " samples, fewer than k = " + std::to_string(k),
                                        c);

    FoldAssignment fa;
    fa.fold_of.assign(y.size(), 0);
    fa.k = k;
    fa.seed = seed;
    std::mt19937_64 rng(seed);
    for (int c = 0; c < n_classes; ++c) {
        auto& idx = by_class[c];
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t pos = 0; pos < idx.size(); ++pos)
            fa.fold_of[idx[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
    }
    return fa;
}

void validate_params(Method method, const MethodParams& params, std::size_t p, int n_classes) {
    switch (method) {
        case Method::raw:
            return;
        case Method::ppa:
            if (params.d >= p)
                throw InvalidParameter("ppa: d must be below p = " + std::to_string(p) +
                                       ", got " + std::to_string(params.d));
            return;
        case Method::pca:
            if (params.d < 1 || params.d > p)
                throw InvalidParameter("pca: d must lie in [1, " + std::to_string(p) +
                                       "], got " + std::to_string(params.d));
            return;
        case Method::lda:
            if (!(params.delta >= 0.0 && params.delta <= 1.0))
                throw InvalidParameter("lda: shrinkage must lie in [0, 1], got " +
                                       std::to_string(params.delta));
            if (p <= static_cast<std::size_t>(n_classes))
                throw InvalidParameter("lda: needs p > number of classes (" + std::to_string(p) +
                                       " <= " + std::to_string(n_classes) + ")");
            return;
        case Method::plda: {
            if (!(params.delta >= 0.0 && params.delta <= 1.0))
                throw InvalidParameter("plda: shrinkage must lie in [0, 1], got " +
                                       std::to_string(params.delta));
            const bool divides =
                params.n_blocks >= 1 && p % static_cast<std::size_t>(params.n_blocks) == 0;
            if (!divides || p / static_cast<std::size_t>(params.n_blocks) <=
                                static_cast<std::size_t>(n_classes)) {
                std::string valid;
                for (int nb : valid_block_counts(p, n_classes)) {
                    if (!valid.empty()) valid += ", ";
                    valid += std::to_string(nb);
                }
                throw InvalidParameter("plda: invalid block count " +
                                       std::to_string(params.n_blocks) + " for p = " +
                                       std::to_string(p) + "; valid counts: " + valid);
            }
            return;
        }
    }
}

FoldResult run_fold(const LabeledDataset& dataset, const FoldAssignment& folds, int fold_index,
                    Method method, const MethodParams& params, const EvalConfig& config) {
    const std::vector<std::size_t> train_rows = indices_where(folds.fold_of, fold_index, false);
    const std::vector<std::size_t> val_rows = indices_where(folds.fold_of, fold_index, true);

    std::vector<int> y_train(train_rows.size());
    for (std::size_t i = 0; i < train_rows.size(); ++i) y_train[i] = dataset.labels[train_rows[i]];
    std::vector<int> y_val(val_rows.size());
    for (std::size_t i = 0; i < val_rows.size(); ++i) y_val[i] = dataset.labels[val_rows[i]];

    const Matrix x_train = take_rows(dataset.embedding, train_rows);
    const Matrix x_val = take_rows(dataset.embedding, val_rows);

    FoldResult result;
    result.transform = fit_model(method, params, x_train, y_train);
    Matrix f_train = apply_model(result.transform, x_train);
    Matrix f_val = apply_model(result.transform, x_val);

    if (config.mode == FeatureMode::full_features) {
        FeatureEncoder encoder;
        encoder.fit(dataset, train_rows);
        f_train = encoder.encode(dataset, train_rows, f_train);
        f_val = encoder.encode(dataset, val_rows, f_val);
    }

    result.probe = logreg_fit(f_train, y_train, config.probe);
    result.accuracy = accuracy(y_val, logreg_predict(result.probe, f_val));
    return result;
}

EvalReport cross_validate(const LabeledDataset& dataset, Method method,
                          const MethodParams& params, const EvalConfig& config) {
    if (dataset.n() == 0) throw InsufficientData("empty dataset");
    if (config.k_folds < 2 || config.k_folds > 20)
        throw InvalidParameter("fold count must lie in [2, 20], got " +
                               std::to_string(config.k_folds));
    validate_params(method, params, dataset.p(), dataset.class_count);

    const FoldAssignment folds = stratified_kfold(dataset.labels, config.k_folds, config.seed);

    EvalReport report;
    report.method = method;
    report.params = params;
    report.mode = config.mode;
    report.n_samples = dataset.n();
    report.p = dataset.p();
    report.n_classes = dataset.class_count;
    report.seed = config.seed;
    report.per_fold_accuracy.reserve(config.k_folds);
    for (int f = 0; f < config.k_folds; ++f) {
        try {
            report.per_fold_accuracy.push_back(
                run_fold(dataset, folds, f, method, params, config).accuracy);
        } catch (Error& e) {
            e.add_context("fold " + std::to_string(f));
            throw;
        }
    }
    report.mean_accuracy = fold_mean(report.per_fold_accuracy);
    report.std_accuracy = fold_std(report.per_fold_accuracy, report.mean_accuracy);
    return report;
}

std::vector<EvalReport> sweep(const LabeledDataset& dataset, Method method,
                              const std::vector<MethodParams>& grid, const EvalConfig& config,
                              int parallelism) {
    // All-or-nothing validation before any computation.
    for (std::size_t g = 0; g < grid.size(); ++g) {
        try {
            validate_params(method, grid[g], dataset.p(), dataset.class_count);
        } catch (Error& e) {
            e.add_context("grid point " + std::to_string(g));
            throw;
        }
    }
    if (grid.empty()) return {};

    std::vector<EvalReport> reports(grid.size());
    const int workers = std::max(1, std::min<int>(parallelism, static_cast<int>(grid.size())));
    if (workers == 1) {
        for (std::size_t g = 0; g < grid.size(); ++g)
            reports[g] = cross_validate(dataset, method, grid[g], config);
        return reports;
    }

    std::vector<std::exception_ptr> failures(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t g = next.fetch_add(1);
            if (g >= grid.size()) return;
            try {
                reports[g] = cross_validate(dataset, method, grid[g], config);
            } catch (...) {
                failures[g] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& failure : failures)
        if (failure) std::rethrow_exception(failure);
    return reports;
}

Diagnostics diagnostics_report(const LabeledDataset& dataset, std::size_t ppa_d) {
    Diagnostics d;
    d.n_samples = dataset.n();
    d.p = dataset.p();
    d.n_classes = dataset.class_count;
    d.class_counts.assign(std::max(dataset.class_count, 0), 0);
    for (int label : dataset.labels) ++d.class_counts[label];

    d.mean_norm_ratio = edr::mean_norm_ratio(dataset.embedding, /*drop_zero_rows=*/true);

    // Both spectra are computed on the non-zero rows only, so inserting
    // all-zero rows leaves the report unchanged.
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < dataset.n(); ++i) {
        bool zero = true;
        for (double v : dataset.embedding.row(i))
            if (v != 0.0) {
                zero = false;
                break;
            }
        if (!zero) live.push_back(i);
    }
    d.n_nonzero = live.size();
    const Matrix x = take_rows(dataset.embedding, live);

    EvrCurve before = explained_variance_curve(x);
    d.evr = std::move(before.ratios);
    d.evr_degenerate = before.degenerate;

    d.ppa_d = std::min({ppa_d, x.cols() - 1, x.rows() - 1});
    if (before.degenerate) {
        d.evr_after_ppa.assign(d.evr.size(), 0.0);
        d.evr_after_ppa_degenerate = true;
        return d;
    }
    const PpaModel model = ppa_fit(x, d.ppa_d);
    EvrCurve after = explained_variance_curve(ppa_transform(model, x));
    d.evr_after_ppa = std::move(after.ratios);
    d.evr_after_ppa_degenerate = after.degenerate;
    return d;
}

namespace {

// Parameters that are meaningful for a method; the others stay blank in CSV.
bool uses_d(Method m) { return m == Method::ppa || m == Method::pca; }
bool uses_delta(Method m) { return m == Method::lda || m == Method::plda; }
bool uses_blocks(Method m) { return m == Method::plda; }

}  // namespace

std::string reports_to_csv(const std::vector<EvalReport>& reports) {
    std::size_t k = reports.empty() ? 0 : reports[0].per_fold_accuracy.size();
    for (const auto& r : reports)
        if (r.per_fold_accuracy.size() != k)
            throw InvalidParameter("cannot mix fold counts in one report file");

    std::string out = "method,mode,d,delta,n_blocks,k_folds,n_samples,p,n_classes,seed";
    for (std::size_t f = 0; f < k; ++f) out += ",fold_" + std::to_string(f);
    out += ",mean_accuracy,std_accuracy\n";

    for (const auto& r : reports) {
        out += method_name(r.method);
        out += ',';
        out += feature_mode_name(r.mode);
        out += ',';
        if (uses_d(r.method)) out += std::to_string(r.params.d);
        out += ',';
        if (uses_delta(r.method)) out += format_double(r.params.delta);
        out += ',';
        if (uses_blocks(r.method)) out += std::to_string(r.params.n_blocks);
        out += ',' + std::to_string(k);
        out += ',' + std::to_string(r.n_samples);
        out += ',' + std::to_string(r.p);
        out += ',' + std::to_string(r.n_classes);
        out += ',' + std::to_string(r.seed);
        for (double acc : r.per_fold_accuracy) out += ',' + format_double(acc);
        out += ',' + format_double(r.mean_accuracy);
        out += ',' + format_double(r.std_accuracy);
        out += '\n';
    }
    return out;
}

std::string reports_to_json(const std::vector<EvalReport>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json j;
        j["method"] = method_name(r.method);
        j["mode"] = feature_mode_name(r.mode);
        nlohmann::json params = nlohmann::json::object();
        if (uses_d(r.method)) params["d"] = r.params.d;
        if (uses_delta(r.method)) params["delta"] = r.params.delta;
        if (uses_blocks(r.method)) params["n_blocks"] = r.params.n_blocks;
        j["params"] = std::move(params);
        j["per_fold_accuracy"] = r.per_fold_accuracy;
        j["mean_accuracy"] = r.mean_accuracy;
        j["std_accuracy"] = r.std_accuracy;
        j["n_samples"] = r.n_samples;
        j["p"] = r.p;
        j["n_classes"] = r.n_classes;
        j["seed"] = r.seed;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::string diagnostics_to_json(const Diagnostics& d) {
    nlohmann::json j;
    j["mean_norm_ratio"] = d.mean_norm_ratio;
    j["evr"] = d.evr;
    j["evr_after_ppa"] = d.evr_after_ppa;
    j["evr_degenerate"] = d.evr_degenerate;
    j["evr_after_ppa_degenerate"] = d.evr_after_ppa_degenerate;
    j["ppa_d"] = d.ppa_d;
    j["n_samples"] = d.n_samples;
    j["n_nonzero"] = d.n_nonzero;
    j["p"] = d.p;
    j["n_classes"] = d.n_classes;
    j["class_counts"] = d.class_counts;
    return j.dump(2) + "\n";
}

std::string diagnostics_to_csv(const Diagnostics& d) {
    std::string out = "component,evr,evr_after_ppa\n";
    for (std::size_t i = 0; i < d.evr.size(); ++i) {
        out += std::to_string(i);
        out += ',' + format_double(d.evr[i]);
        out += ',';
        if (i < d.evr_after_ppa.size()) out += format_double(d.evr_after_ppa[i]);
        out += '\n';
    }
    return out;
}

}  // namespace edr
