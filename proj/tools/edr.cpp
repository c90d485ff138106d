// Command-line front end: dataset generation, embedding diagnostics, single
// evaluations, hyperparameter sweeps and model application. Every subcommand
// either writes all of its outputs or none of them.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edr/data.hpp"
#include "edr/errors.hpp"
#include "edr/eval.hpp"
#include "edr/model_io.hpp"
#include "edr/transforms.hpp"

namespace {

using namespace edr;

// Collects (path, content) pairs and publishes them together: first all
// temporaries are written, then all renames happen. An error while writing
// leaves no outputs behind.
class OutputSet {
public:
    void add(std::string path, std::string content) {
        files_.emplace_back(std::move(path), std::move(content));
    }

    void commit() {
        std::vector<std::string> temps;
        try {
            for (const auto& [path, content] : files_) {
                const std::string tmp = path + ".tmp";
                std::ofstream out(tmp, std::ios::binary);
                if (!out) throw Error("cannot write '" + tmp + "'");
                out << content;
                out.close();
                if (!out) throw Error("write failed for '" + tmp + "'");
                temps.push_back(tmp);
            }
        } catch (...) {
            for (const auto& tmp : temps) std::filesystem::remove(tmp);
            throw;
        }
        for (const auto& [path, content] : files_) {
            (void)content;
            std::filesystem::rename(path + ".tmp", path);
        }
    }

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

struct SchemaFlags {
    std::string embedding_prefix = "emb_";
    std::string label = "label";
    std::vector<std::string> numeric;
    std::vector<std::string> categorical;

    CsvSchema to_schema() const {
        return CsvSchema{embedding_prefix, label, numeric, categorical};
    }
};

void add_schema_flags(CLI::App* cmd, SchemaFlags& schema) {
    cmd->add_option("--schema-embedding-prefix", schema.embedding_prefix,
                    "Prefix of the embedding columns (suffixes 0..p-1)")
        ->capture_default_str();
    cmd->add_option("--schema-label", schema.label, "Name of the label column")
        ->capture_default_str();
    cmd->add_option("--schema-numeric", schema.numeric,
                    "Numeric feature columns (repeat or comma-separate)")
        ->delimiter(',');
    cmd->add_option("--schema-categorical", schema.categorical,
                    "Categorical feature columns (repeat or comma-separate)")
        ->delimiter(',');
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Grid specs: "<param>=<start>..<end>:<step>", "<param>=v1,v2,...", or
// "nb=divisors". The parameter must belong to the chosen method.
std::vector<MethodParams> parse_grid(const std::string& spec, Method method,
                                     const MethodParams& base, std::size_t p, int n_classes) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
        throw InvalidParameter("grid spec '" + spec + "' must look like name=start..end:step, "
                               "name=v1,v2,... or nb=divisors");
    const std::string name = spec.substr(0, eq);
    const std::string body = spec.substr(eq + 1);

    const bool axis_d = name == "d";
    const bool axis_delta = name == "delta";
    const bool axis_nb = name == "nb";
    if (!axis_d && !axis_delta && !axis_nb)
        throw InvalidParameter("unknown grid parameter '" + name + "'");
    if (axis_d && method != Method::ppa && method != Method::pca)
        throw InvalidParameter("parameter d applies to ppa/pca only");
    if (axis_delta && method != Method::lda && method != Method::plda)
        throw InvalidParameter("parameter delta applies to lda/plda only");
    if (axis_nb && method != Method::plda)
        throw InvalidParameter("parameter nb applies to plda only");

    std::vector<double> values;
    if (axis_nb && body == "divisors") {
        for (int nb : valid_block_counts(p, n_classes)) values.push_back(nb);
    } else if (body.find("..") != std::string::npos) {
        const auto dots = body.find("..");
        const auto colon = body.find(':', dots);
        if (colon == std::string::npos)
            throw InvalidParameter("range grid needs a step: '" + spec + "'");
        double start = 0.0, end = 0.0, step = 0.0;
        try {
            start = std::stod(body.substr(0, dots));
            end = std::stod(body.substr(dots + 2, colon - dots - 2));
            step = std::stod(body.substr(colon + 1));
        } catch (const std::exception&) {
            throw InvalidParameter("cannot parse grid range '" + spec + "'");
        }
        if (step <= 0.0 || end < start)
            throw InvalidParameter("grid range must increase: '" + spec + "'");
        for (int i = 0;; ++i) {
            const double v = start + i * step;
            if (v > end + step * 1e-9) break;
            values.push_back(v);
        }
    } else {
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                values.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw InvalidParameter("cannot parse grid value '" + item + "'");
            }
        }
        if (values.empty()) throw InvalidParameter("empty grid list '" + spec + "'");
    }

    std::vector<MethodParams> grid;
    grid.reserve(values.size());
    for (double v : values) {
        MethodParams params = base;
        if (axis_d) params.d = static_cast<std::size_t>(std::llround(v));
        if (axis_delta) params.delta = v;
        if (axis_nb) params.n_blocks = static_cast<int>(std::llround(v));
        grid.push_back(params);
    }
    return grid;
}

std::string describe_params(Method method, const MethodParams& params) {
    switch (method) {
        case Method::raw: return "";
        case Method::ppa:
        case Method::pca: return " d=" + std::to_string(params.d);
        case Method::lda: {
            char buf[32];
            std::snprintf(buf, sizeof(buf), " delta=%g", params.delta);
            return buf;
        }
        case Method::plda: {
            char buf[48];
            std::snprintf(buf, sizeof(buf), " nb=%d delta=%g", params.n_blocks, params.delta);
            return buf;
        }
    }
    return "";
}

int run(int argc, char** argv) {
    CLI::App app{"Linear dimensionality reduction for embedding features in "
                 "tabular classification"};
    app.require_subcommand(1);

    // --- generate ---------------------------------------------------------
    auto* gen = app.add_subcommand("generate", "Write a synthetic embedding dataset as CSV");
    std::string gen_config_path;
    std::string gen_output;
    std::uint64_t gen_seed = 0;
    bool gen_seed_set = false;
    gen->add_option("--config", gen_config_path, "Generator config JSON (defaults when omitted)");
    gen->add_option("--output", gen_output, "Output CSV path")->required();
    gen->add_option("--seed", gen_seed, "Override the config seed")
        ->each([&](const std::string&) { gen_seed_set = true; });

    // --- analyze ----------------------------------------------------------
    auto* ana = app.add_subcommand("analyze", "Embedding diagnostics (writes <output>.json and "
                                              "<output>.csv with the EVR curves)");
    std::string ana_input, ana_output;
    std::size_t ana_ppa_d = 10;
    SchemaFlags ana_schema;
    ana->add_option("--input", ana_input, "Dataset CSV")->required();
    ana->add_option("--output", ana_output, "Output stem")->required();
    ana->add_option("--ppa-d", ana_ppa_d, "Directions removed for the post-PPA curve")
        ->capture_default_str();
    add_schema_flags(ana, ana_schema);

    // --- shared evaluate/sweep flags ---------------------------------------
    struct EvalFlags {
        std::string input, output;
        std::string method = "raw";
        std::size_t d = 1;
        double delta = 0.0;
        int nb = 1;
        std::string mode = "embeddings-only";
        int k_folds = 5;
        std::uint64_t seed = 42;
        SchemaFlags schema;
    };
    auto add_eval_flags = [](CLI::App* cmd, EvalFlags& f) {
        cmd->add_option("--input", f.input, "Dataset CSV")->required();
        cmd->add_option("--output", f.output, "Output stem")->required();
        cmd->add_option("--method", f.method, "raw, ppa, pca, lda or plda")
            ->capture_default_str();
        cmd->add_option("--d", f.d, "Dimensions (ppa: removed, pca: kept)")
            ->capture_default_str();
        cmd->add_option("--delta", f.delta, "Shrinkage in [0,1] (lda/plda)")
            ->capture_default_str();
        cmd->add_option("--nb", f.nb, "Block count (plda)")->capture_default_str();
        cmd->add_option("--mode", f.mode, "embeddings-only or full-features")
            ->capture_default_str();
        cmd->add_option("--k-folds", f.k_folds, "Cross-validation folds")->capture_default_str();
        cmd->add_option("--seed", f.seed, "Fold-assignment seed")->capture_default_str();
        add_schema_flags(cmd, f.schema);
    };

    auto* eva = app.add_subcommand("evaluate", "Cross-validate one configuration (writes "
                                               "<output>.csv and <output>.json)");
    EvalFlags eva_flags;
    add_eval_flags(eva, eva_flags);

    auto* swp = app.add_subcommand("sweep", "Cross-validate a parameter grid (writes "
                                            "<output>.csv and <output>.json)");
    EvalFlags swp_flags;
    std::string swp_grid;
    int swp_parallelism = 1;
    add_eval_flags(swp, swp_flags);
    swp->add_option("--grid", swp_grid,
                    "Axis spec: d=0..20:2, delta=0.0..1.0:0.05, d=1,2,5,10 or nb=divisors")
        ->required();
    swp->add_option("--parallelism", swp_parallelism, "Worker threads for grid points")
        ->capture_default_str();

    // --- transform ---------------------------------------------------------
    auto* tra = app.add_subcommand("transform", "Replace embedding columns by reduced ones "
                                                "(writes <output>.csv, and <output>.model.json "
                                                "when fitting)");
    std::string tra_input, tra_output, tra_model;
    std::string tra_method;
    std::size_t tra_d = 1;
    double tra_delta = 0.0;
    int tra_nb = 1;
    SchemaFlags tra_schema;
    tra->add_option("--input", tra_input, "Dataset CSV")->required();
    tra->add_option("--output", tra_output, "Output stem")->required();
    tra->add_option("--model", tra_model, "Apply a previously saved model JSON");
    tra->add_option("--method", tra_method, "Fit this method on the input instead");
    tra->add_option("--d", tra_d, "Dimensions (ppa/pca)");
    tra->add_option("--delta", tra_delta, "Shrinkage (lda/plda)");
    tra->add_option("--nb", tra_nb, "Block count (plda)");
    add_schema_flags(tra, tra_schema);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (gen->parsed()) {
        GeneratorConfig config;
        if (!gen_config_path.empty())
            config = generator_config_from_json(read_file(gen_config_path));
        if (gen_seed_set) config.seed = gen_seed;
        const LabeledDataset ds = generate(config);
        OutputSet out;
        out.add(gen_output, dataset_to_csv(ds));
        out.commit();
        const double realized = mean_norm_ratio(ds.embedding, true);
        std::printf("generated %zu rows, p=%zu, k=%d, realized R=%.4f -> %s\n", ds.n(), ds.p(),
                    ds.class_count, realized, gen_output.c_str());
        return 0;
    }

    if (ana->parsed()) {
        const LabeledDataset ds = load_csv(ana_input, ana_schema.to_schema());
        const Diagnostics diag = diagnostics_report(ds, ana_ppa_d);
        OutputSet out;
        out.add(ana_output + ".json", diagnostics_to_json(diag));
        out.add(ana_output + ".csv", diagnostics_to_csv(diag));
        out.commit();
        std::printf("n=%zu (non-zero %zu), p=%zu, k=%d, R=%.4f\n", diag.n_samples, diag.n_nonzero,
                    diag.p, diag.n_classes, diag.mean_norm_ratio);
        return 0;
    }

    auto run_eval = [&](const EvalFlags& f, const std::string* grid_spec, int parallelism) {
        const LabeledDataset ds = load_csv(f.input, f.schema.to_schema());
        const Method method = method_from_name(f.method);
        MethodParams base;
        base.d = f.d;
        base.delta = f.delta;
        base.n_blocks = f.nb;
        EvalConfig config;
        config.k_folds = f.k_folds;
        config.mode = feature_mode_from_name(f.mode);
        config.seed = f.seed;

        std::vector<EvalReport> reports;
        if (grid_spec) {
            const auto grid = parse_grid(*grid_spec, method, base, ds.p(), ds.class_count);
            reports = sweep(ds, method, grid, config, parallelism);
        } else {
            reports.push_back(cross_validate(ds, method, base, config));
        }
        OutputSet out;
        out.add(f.output + ".csv", reports_to_csv(reports));
        out.add(f.output + ".json", reports_to_json(reports));
        out.commit();
        for (const auto& r : reports)
            std::printf("method=%s%s mean=%.4f std=%.4f\n", method_name(r.method).c_str(),
                        describe_params(r.method, r.params).c_str(), r.mean_accuracy,
                        r.std_accuracy);
    };

    if (eva->parsed()) {
        run_eval(eva_flags, nullptr, 1);
        return 0;
    }
    if (swp->parsed()) {
        run_eval(swp_flags, &swp_grid, swp_parallelism);
        return 0;
    }

    if (tra->parsed()) {
        if (tra_model.empty() == tra_method.empty())
            throw InvalidParameter("transform needs exactly one of --model or --method");
        const LabeledDataset ds = load_csv(tra_input, tra_schema.to_schema());

        AnyModel model;
        bool fitted = false;
        if (!tra_model.empty()) {
            model = load_model(tra_model);
        } else {
            const Method method = method_from_name(tra_method);
            MethodParams params;
            params.d = tra_d;
            params.delta = tra_delta;
            params.n_blocks = tra_nb;
            validate_params(method, params, ds.p(), ds.class_count);
            model = fit_model(method, params, ds.embedding, ds.labels);
            fitted = true;
        }

        LabeledDataset reduced = ds;
        reduced.embedding = apply_model(model, ds.embedding);
        reduced.embedding_names.clear();
        for (std::size_t i = 0; i < reduced.embedding.cols(); ++i)
            reduced.embedding_names.push_back("red_" + std::to_string(i));

        OutputSet out;
        out.add(tra_output + ".csv", dataset_to_csv(reduced));
        if (fitted) out.add(tra_output + ".model.json", model_to_json(model));
        out.commit();
        std::printf("reduced %zu -> %zu columns (%s)\n", ds.p(), reduced.embedding.cols(),
                    method_name(model_method(model)).c_str());
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const NotPositiveDefinite& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
