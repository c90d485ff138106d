#include "edr/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "edr/csv.hpp"
#include "edr/errors.hpp"

namespace edr {

namespace {

double parse_double(const std::string& field, std::size_t row, std::size_t col) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value))
        throw ParseError("expected a finite number, got '" + field + "' (row " +
                             std::to_string(row) + ", column " + std::to_string(col) + ")",
                         row, col);
    return value;
}

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

}  // namespace

LabeledDataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const auto records = csv::parse(buffer.str());
    if (records.empty()) throw ParseError("'" + path + "': no header row");

    const auto& header = records[0];
    const std::size_t width = header.size();

    // Embedding columns: prefix + integer suffix, required to cover 0..p-1.
    std::map<std::size_t, std::size_t> emb_cols;  // embedding index -> column
    for (std::size_t c = 0; c < width; ++c) {
        const std::string& name = header[c];
        if (name.size() <= schema.embedding_prefix.size() ||
            name.compare(0, schema.embedding_prefix.size(), schema.embedding_prefix) != 0)
            continue;
        const std::string suffix = name.substr(schema.embedding_prefix.size());
        if (!std::all_of(suffix.begin(), suffix.end(),
                         [](unsigned char ch) { return std::isdigit(ch); }))
            continue;
        const std::size_t index = std::stoul(suffix);
        if (emb_cols.count(index))
            throw ParseError("duplicate embedding column '" + name + "'", 1, c + 1);
        emb_cols[index] = c;
    }
    if (emb_cols.empty())
        throw ParseError("no embedding columns with prefix '" + schema.embedding_prefix + "'");
    const std::size_t p = emb_cols.size();
    for (std::size_t i = 0; i < p; ++i)
        if (!emb_cols.count(i))
            throw ParseError("embedding columns are not contiguous: missing '" +
                             schema.embedding_prefix + std::to_string(i) + "'");

    auto find_column = [&](const std::string& name) -> std::size_t {
        for (std::size_t c = 0; c < width; ++c)
            if (header[c] == name) return c;
        throw ParseError("missing column '" + name + "'");
    };
    const std::size_t label_col = find_column(schema.label_column);
    std::vector<std::size_t> numeric_cols;
    for (const auto& name : schema.numeric_columns) numeric_cols.push_back(find_column(name));
    std::vector<std::size_t> categorical_cols;
    for (const auto& name : schema.categorical_columns)
        categorical_cols.push_back(find_column(name));

    const std::size_t n = records.size() - 1;
    LabeledDataset ds;
    ds.embedding = Matrix(n, p);
    ds.numeric_features = Matrix(n, numeric_cols.size());
    ds.categorical_features.assign(n, std::vector<std::string>(categorical_cols.size()));
    ds.labels.resize(n);
    for (std::size_t i = 0; i < p; ++i)
        ds.embedding_names.push_back(schema.embedding_prefix + std::to_string(i));
    ds.numeric_names = schema.numeric_columns;
    ds.categorical_names = schema.categorical_columns;
    ds.label_name = schema.label_column;

    std::vector<std::string> raw_labels(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto& rec = records[r + 1];
        const std::size_t row_1based = r + 2;
        if (rec.size() != width)
            throw ParseError("row " + std::to_string(row_1based) + " has " +
                                 std::to_string(rec.size()) + " fields, header has " +
                                 std::to_string(width),
                             row_1based, 0);
        for (std::size_t i = 0; i < p; ++i) {
            const std::size_t c = emb_cols[i];
            ds.embedding(r, i) = parse_double(rec[c], row_1based, c + 1);
        }
        for (std::size_t qi = 0; qi < numeric_cols.size(); ++qi) {
            const std::size_t c = numeric_cols[qi];
            ds.numeric_features(r, qi) = rec[c].empty()
                                             ? std::numeric_limits<double>::quiet_NaN()
                                             : parse_double(rec[c], row_1based, c + 1);
        }
        for (std::size_t ci = 0; ci < categorical_cols.size(); ++ci)
            ds.categorical_features[r][ci] = rec[categorical_cols[ci]];
        raw_labels[r] = rec[label_col];
    }

    // Classes are indexed by the sorted order of the distinct label strings.
    const std::set<std::string> distinct(raw_labels.begin(), raw_labels.end());
    ds.label_values.assign(distinct.begin(), distinct.end());
    ds.class_count = static_cast<int>(ds.label_values.size());
    std::map<std::string, int> to_index;
    for (int k = 0; k < ds.class_count; ++k) to_index[ds.label_values[k]] = k;
    for (std::size_t r = 0; r < n; ++r) ds.labels[r] = to_index[raw_labels[r]];
    return ds;
}

std::string dataset_to_csv(const LabeledDataset& dataset) {
    const std::size_t n = dataset.n();
    const std::size_t p = dataset.p();
    const std::size_t q = dataset.numeric_features.cols();

    std::string out;
    for (std::size_t i = 0; i < p; ++i) {
        if (i) out += ',';
        out += csv::escape_field(i < dataset.embedding_names.size()
                                     ? dataset.embedding_names[i]
                                     : "emb_" + std::to_string(i));
    }
    for (std::size_t i = 0; i < q; ++i)
        out += ',' + csv::escape_field(dataset.numeric_names[i]);
    for (const auto& name : dataset.categorical_names) out += ',' + csv::escape_field(name);
    if (p + q + dataset.categorical_names.size() > 0) out += ',';
    out += csv::escape_field(dataset.label_name);
    out += '\n';

    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < p; ++i) {
            if (i) out += ',';
            out += format_double(dataset.embedding(r, i));
        }
        for (std::size_t i = 0; i < q; ++i) {
            out += ',';
            const double v = dataset.numeric_features(r, i);
            if (!std::isnan(v)) out += format_double(v);
        }
        for (std::size_t i = 0; i < dataset.categorical_names.size(); ++i)
            out += ',' + csv::escape_field(dataset.categorical_features[r][i]);
        out += ',';
        out += csv::escape_field(dataset.label_values[dataset.labels[r]]);
        out += '\n';
    }
    return out;
}

void write_csv(const LabeledDataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << dataset_to_csv(dataset);
    if (!out) throw Error("write failed for '" + path + "'");
}

namespace {

void validate_config(const GeneratorConfig& c) {
    auto fail = [](const std::string& msg) { throw InvalidParameter("generator config: " + msg); };
    if (c.p < 1) fail("p must be positive");
    if (c.n < 2) fail("n must be at least 2");
    if (c.class_count < 2) fail("class count must be at least 2");
    if (!(c.target_r >= 0.0 && c.target_r < 1.0)) fail("target_r must lie in [0, 1)");
    if (c.spike_dims < 1 || c.spike_dims > c.p) fail("spike_dims must lie in [1, p]");
    if (c.signal_dims < 1 || c.signal_dims > c.spike_dims)
        fail("signal_dims must lie in [1, spike_dims]");
    if (!(c.spike_decay > 0.0 && c.spike_decay < 1.0)) fail("spike_decay must lie in (0, 1)");
    if (c.signal_strength < 0.0) fail("signal_strength must be non-negative");
    if (c.noise_sigma < 0.0) fail("noise_sigma must be non-negative");
    if (!(c.zero_row_fraction >= 0.0 && c.zero_row_fraction < 1.0))
        fail("zero_row_fraction must lie in [0, 1)");
    if (!c.class_priors.empty()) {
        if (c.class_priors.size() != static_cast<std::size_t>(c.class_count))
            fail("class_priors must have one entry per class");
        double sum = 0.0;
        for (double pr : c.class_priors) {
            if (pr < 0.0) fail("class priors must be non-negative");
            sum += pr;
        }
        if (std::abs(sum - 1.0) > 1e-9) fail("class priors must sum to 1");
    }
    const auto zeros = static_cast<std::size_t>(std::llround(
        c.zero_row_fraction * static_cast<double>(c.n)));
    if (zeros + 2 > c.n) fail("zero_row_fraction leaves fewer than 2 usable rows");
}

// Orthonormal rows via modified Gram-Schmidt over fresh gaussian draws.
Matrix random_orthonormal_rows(std::size_t count, std::size_t p, std::mt19937_64& rng,
                               std::normal_distribution<double>& gauss) {
    Matrix u(count, p);
    for (std::size_t r = 0; r < count; ++r) {
        auto ur = u.row(r);
        for (std::size_t j = 0; j < p; ++j) ur[j] = gauss(rng);
        for (std::size_t prev = 0; prev < r; ++prev) {
            const double proj = dot(u.row(prev), ur);
            auto up = u.row(prev);
            for (std::size_t j = 0; j < p; ++j) ur[j] -= proj * up[j];
        }
        const double len = norm2(ur);
        if (len < 1e-8) throw GenerationError("degenerate random directions; try another seed");
        for (std::size_t j = 0; j < p; ++j) ur[j] /= len;
    }
    return u;
}

}  // namespace

LabeledDataset generate(const GeneratorConfig& config) {
    validate_config(config);
    const std::size_t n = config.n;
    const std::size_t p = config.p;
    const int k = config.class_count;

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const Matrix spikes = random_orthonormal_rows(config.spike_dims, p, rng, gauss);

    // Per-class offsets inside the span of the first signal_dims spike
    // directions, each of norm signal_strength.
    Matrix class_shift(k, p);
    for (int c = 0; c < k; ++c) {
        Vector coef(config.signal_dims);
        for (double& v : coef) v = gauss(rng);
        const double len = norm2({coef.data(), coef.size()});
        if (len < 1e-12) throw GenerationError("degenerate class offset; try another seed");
        auto shift = class_shift.row(c);
        for (std::size_t j = 0; j < config.signal_dims; ++j) {
            const double w = config.signal_strength * coef[j] / len;
            auto uj = spikes.row(j);
            for (std::size_t t = 0; t < p; ++t) shift[t] += w * uj[t];
        }
    }

    Vector mean_dir(p);
    for (double& v : mean_dir) v = gauss(rng);
    {
        const double len = norm2({mean_dir.data(), mean_dir.size()});
        for (double& v : mean_dir) v /= len;
    }

    std::vector<double> cumulative(k);
    {
        double acc = 0.0;
        for (int c = 0; c < k; ++c) {
            acc += config.class_priors.empty() ? 1.0 / k : config.class_priors[c];
            cumulative[c] = acc;
        }
        cumulative[k - 1] = 1.0;
    }
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = unit(rng);
        int c = 0;
        while (r >= cumulative[c]) ++c;
        labels[i] = c;
    }

    const auto n_zero = static_cast<std::size_t>(
        std::llround(config.zero_row_fraction * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> is_zero(n, false);
    for (std::size_t i = 0; i < n_zero; ++i) is_zero[order[i]] = true;

    Matrix x(n, p);
    Vector spike_amp(config.spike_dims);
    for (std::size_t j = 0; j < config.spike_dims; ++j)
        spike_amp[j] = std::pow(config.spike_decay, static_cast<double>(j));
    for (std::size_t i = 0; i < n; ++i) {
        if (is_zero[i]) continue;
        auto xi = x.row(i);
        for (std::size_t j = 0; j < config.spike_dims; ++j) {
            const double g = spike_amp[j] * gauss(rng);
            auto uj = spikes.row(j);
            for (std::size_t t = 0; t < p; ++t) xi[t] += g * uj[t];
        }
        auto shift = class_shift.row(labels[i]);
        for (std::size_t t = 0; t < p; ++t) xi[t] += shift[t];
        for (std::size_t t = 0; t < p; ++t) xi[t] += config.noise_sigma * gauss(rng);
    }

    // Scale the common mean so the empirical ratio R hits the target exactly
    // (up to bisection resolution) on the non-zero rows.
    std::vector<std::size_t> live;
    live.reserve(n - n_zero);
    for (std::size_t i = 0; i < n; ++i)
        if (!is_zero[i]) live.push_back(i);

    Vector dots(live.size());
    Vector sqs(live.size());
    Vector wbar(p, 0.0);
    for (std::size_t idx = 0; idx < live.size(); ++idx) {
        auto xi = x.row(live[idx]);
        dots[idx] = dot({mean_dir.data(), p}, xi);
        sqs[idx] = dot(xi, xi);
        for (std::size_t t = 0; t < p; ++t) wbar[t] += xi[t];
    }
    const double inv_m = 1.0 / static_cast<double>(live.size());
    for (double& v : wbar) v *= inv_m;
    const double dbar = dot({mean_dir.data(), p}, {wbar.data(), p});
    const double qbar = dot({wbar.data(), p}, {wbar.data(), p});

    auto ratio_at = [&](double alpha) {
        double norm_sum = 0.0;
        for (std::size_t idx = 0; idx < live.size(); ++idx)
            norm_sum += std::sqrt(std::max(alpha * alpha + 2.0 * alpha * dots[idx] + sqs[idx], 0.0));
        const double mean_norm =
            std::sqrt(std::max(alpha * alpha + 2.0 * alpha * dbar + qbar, 0.0));
        return mean_norm / (norm_sum * inv_m);
    };

    const double r0 = ratio_at(0.0);
    if (r0 >= config.target_r)
        throw GenerationError("target_r " + std::to_string(config.target_r) +
                              " is below the unscaled ratio " + std::to_string(r0) +
                              "; achievable range is (" + std::to_string(r0) + ", 1)");
    double lo = 0.0;
    double hi = 1.0;
    while (ratio_at(hi) < config.target_r) {
        hi *= 2.0;
        if (hi > 1e18)
            throw GenerationError("cannot reach target_r " + std::to_string(config.target_r));
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (ratio_at(mid) < config.target_r) lo = mid;
        else hi = mid;
    }
    const double alpha = 0.5 * (lo + hi);
    for (std::size_t i : live) {
        auto xi = x.row(i);
        for (std::size_t t = 0; t < p; ++t) xi[t] += alpha * mean_dir[t];
    }

    LabeledDataset ds;
    ds.embedding = std::move(x);
    ds.numeric_features = Matrix(n, 0);
    ds.categorical_features.assign(n, {});
    ds.labels = std::move(labels);
    ds.class_count = k;
    for (std::size_t i = 0; i < p; ++i) ds.embedding_names.push_back("emb_" + std::to_string(i));
    for (int c = 0; c < k; ++c) ds.label_values.push_back(std::to_string(c));
    return ds;
}

GeneratorConfig generator_config_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("generator config: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("generator config must be a JSON object");

    static const std::set<std::string> known = {
        "n",          "p",           "k",           "target_r",        "spike_dims",
        "spike_decay", "signal_dims", "signal_strength", "noise_sigma", "class_priors",
        "zero_row_fraction", "seed"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!known.count(key)) throw ParseError("generator config: unknown field '" + key + "'");
    }

    GeneratorConfig c;
    try {
        if (j.contains("n")) c.n = j["n"].get<std::size_t>();
        if (j.contains("p")) c.p = j["p"].get<std::size_t>();
        if (j.contains("k")) c.class_count = j["k"].get<int>();
        if (j.contains("target_r")) c.target_r = j["target_r"].get<double>();
        if (j.contains("spike_dims")) c.spike_dims = j["spike_dims"].get<std::size_t>();
        if (j.contains("spike_decay")) c.spike_decay = j["spike_decay"].get<double>();
        if (j.contains("signal_dims")) c.signal_dims = j["signal_dims"].get<std::size_t>();
        if (j.contains("signal_strength"))
            c.signal_strength = j["signal_strength"].get<double>();
        if (j.contains("noise_sigma")) c.noise_sigma = j["noise_sigma"].get<double>();
        if (j.contains("class_priors"))
            c.class_priors = j["class_priors"].get<std::vector<double>>();
        if (j.contains("zero_row_fraction"))
            c.zero_row_fraction = j["zero_row_fraction"].get<double>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("generator config: ") + e.what());
    }
    return c;
}

std::string generator_config_to_json(const GeneratorConfig& config) {
    nlohmann::json j;
    j["n"] = config.n;
    j["p"] = config.p;
    j["k"] = config.class_count;
    j["target_r"] = config.target_r;
    j["spike_dims"] = config.spike_dims;
    j["spike_decay"] = config.spike_decay;
    j["signal_dims"] = config.signal_dims;
    j["signal_strength"] = config.signal_strength;
    j["noise_sigma"] = config.noise_sigma;
    if (!config.class_priors.empty()) j["class_priors"] = config.class_priors;
    j["zero_row_fraction"] = config.zero_row_fraction;
    j["seed"] = config.seed;
    return j.dump(2) + "\n";
}

}  // namespace edr
