#ifndef EDR_DATA_HPP
#define EDR_DATA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "edr/matrix.hpp"

namespace edr {

/// Tabular sample with a designated embedding block. Numeric features may
/// hold NaN for missing cells; categorical features are raw strings. Labels
/// are contiguous integers starting at 0; `label_values[k]` is the original
/// string for class k.
struct LabeledDataset {
    Matrix embedding;         // n x p
    Matrix numeric_features;  // n x q (q may be 0)
    std::vector<std::vector<std::string>> categorical_features;  // n rows x c entries
    std::vector<int> labels;
    int class_count = 0;

    std::vector<std::string> embedding_names;
    std::vector<std::string> numeric_names;
    std::vector<std::string> categorical_names;
    std::string label_name = "label";
    std::vector<std::string> label_values;

    std::size_t n() const { return embedding.rows(); }
    std::size_t p() const { return embedding.cols(); }
};

/// Column layout expected in a CSV file. Embedding columns are discovered by
/// prefix + integer suffix and must cover 0..p-1 without gaps; columns not
/// named here (and not matching the prefix) are ignored.
struct CsvSchema {
    std::string embedding_prefix = "emb_";
    std::string label_column = "label";
    std::vector<std::string> numeric_columns;
    std::vector<std::string> categorical_columns;
};

LabeledDataset load_csv(const std::string& path, const CsvSchema& schema);

/// Writes the layout load_csv expects: embedding columns, numeric columns,
/// categorical columns, label. Floats carry 17 significant digits so a
/// round-trip reproduces every bit; NaN becomes an empty cell.
void write_csv(const LabeledDataset& dataset, const std::string& path);

/// Serialize to the same CSV layout in memory.
std::string dataset_to_csv(const LabeledDataset& dataset);

/// Synthetic embedding data mimicking averaged text embeddings: a dominant
/// common mean (scaled to hit target_R), a rapidly decaying spike spectrum,
/// class separation planted inside the spike subspace, and isotropic noise.
struct GeneratorConfig {
    std::size_t n = 2000;
    std::size_t p = 300;
    int class_count = 3;
    double target_r = 11.0 / 12.0;  // mean-vector dominance ratio, in [0, 1)
    std::size_t spike_dims = 10;
    double spike_decay = 0.7;       // amplitude ratio between consecutive spikes
    std::size_t signal_dims = 10;   // must be <= spike_dims
    double signal_strength = 0.12;  // norm of each class-mean offset
    double noise_sigma = 0.02;
    std::vector<double> class_priors;  // empty means uniform
    double zero_row_fraction = 0.0;
    std::uint64_t seed = 42;
};

LabeledDataset generate(const GeneratorConfig& config);

GeneratorConfig generator_config_from_json(const std::string& json_text);
std::string generator_config_to_json(const GeneratorConfig& config);

}  // namespace edr

#endif  // EDR_DATA_HPP
