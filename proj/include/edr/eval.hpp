#ifndef EDR_EVAL_HPP
#define EDR_EVAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "edr/classifier.hpp"
#include "edr/data.hpp"
#include "edr/transforms.hpp"

namespace edr {

/// Fold index per sample. Per class, fold sizes differ by at most one and
/// the assignment is a pure function of (labels, k, seed).
struct FoldAssignment {
    std::vector<int> fold_of;
    int k = 0;
    std::uint64_t seed = 0;
};

FoldAssignment stratified_kfold(const std::vector<int>& y, int k, std::uint64_t seed);

enum class FeatureMode { embeddings_only, full_features };

std::string feature_mode_name(FeatureMode mode);
FeatureMode feature_mode_from_name(const std::string& name);

struct EvalConfig {
    int k_folds = 5;
    FeatureMode mode = FeatureMode::embeddings_only;
    std::uint64_t seed = 42;
    LogregConfig probe;
};

struct EvalReport {
    Method method = Method::raw;
    MethodParams params;
    FeatureMode mode = FeatureMode::embeddings_only;
    std::vector<double> per_fold_accuracy;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    std::size_t n_samples = 0;
    std::size_t p = 0;
    int n_classes = 0;
    std::uint64_t seed = 0;
};

/// Everything fitted inside one fold, exposed so callers can audit that
/// validation rows never influence the fitted parameters.
struct FoldResult {
    AnyModel transform;
    LogisticModel probe;
    double accuracy = 0.0;
};

/// Rejects parameters that are invalid for the method regardless of fold
/// sizes (dimension bounds, shrinkage domain, block divisibility).
void validate_params(Method method, const MethodParams& params, std::size_t p, int n_classes);

FoldResult run_fold(const LabeledDataset& dataset, const FoldAssignment& folds, int fold_index,
                    Method method, const MethodParams& params, const EvalConfig& config);

/// Stratified k-fold protocol: per fold, fit the transform and the probe on
/// the training split only and score the held-out split.
EvalReport cross_validate(const LabeledDataset& dataset, Method method,
                          const MethodParams& params, const EvalConfig& config);

/// One cross_validate per grid point, reported in grid order. All grid
/// points are validated before any work starts; `parallelism` only changes
/// the schedule, never the numbers.
std::vector<EvalReport> sweep(const LabeledDataset& dataset, Method method,
                              const std::vector<MethodParams>& grid, const EvalConfig& config,
                              int parallelism = 1);

struct Diagnostics {
    double mean_norm_ratio = 0.0;
    Vector evr;
    Vector evr_after_ppa;
    bool evr_degenerate = false;
    bool evr_after_ppa_degenerate = false;
    std::size_t ppa_d = 0;  // directions actually removed for the second curve
    std::size_t n_samples = 0;
    std::size_t n_nonzero = 0;
    std::size_t p = 0;
    int n_classes = 0;
    std::vector<std::size_t> class_counts;
};

/// Embedding anisotropy summary: dominance ratio of the common mean plus the
/// explained-variance spectrum before and after removing the top `ppa_d`
/// directions. Zero rows are ignored throughout.
Diagnostics diagnostics_report(const LabeledDataset& dataset, std::size_t ppa_d = 10);

/// CSV with one row per report; fixed column order
/// method,mode,d,delta,n_blocks,k_folds,n_samples,p,n_classes,seed,
/// fold_0..fold_{k-1},mean_accuracy,std_accuracy. Parameters a method does
/// not use are left empty. All reports must share the same fold count.
std::string reports_to_csv(const std::vector<EvalReport>& reports);
std::string reports_to_json(const std::vector<EvalReport>& reports);

std::string diagnostics_to_json(const Diagnostics& d);
std::string diagnostics_to_csv(const Diagnostics& d);

}  // namespace edr

#endif  // EDR_EVAL_HPP
