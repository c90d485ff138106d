#include "edr/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "edr/errors.hpp"

namespace edr {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json matrix_to_json(const Matrix& m) {
    json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["data"] = m.data();
    return j;
}

Matrix matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != rows * cols) throw ParseError("matrix data size does not match shape");
    Matrix m(rows, cols);
    m.data() = std::move(data);
    return m;
}

json scatter_to_json(const ScatterPair& s) {
    json j;
    j["within"] = matrix_to_json(s.within.matrix());
    j["between"] = matrix_to_json(s.between.matrix());
    j["class_means"] = matrix_to_json(s.class_means);
    j["class_counts"] = s.class_counts;
    j["overall_mean"] = s.overall_mean;
    return j;
}

ScatterPair scatter_from_json(const json& j) {
    ScatterPair s{SymMatrix(matrix_from_json(j.at("within"))),
                  SymMatrix(matrix_from_json(j.at("between"))),
                  matrix_from_json(j.at("class_means")),
                  j.at("class_counts").get<std::vector<std::size_t>>(),
                  j.at("overall_mean").get<Vector>()};
    return s;
}

json lda_to_json(const LdaModel& m) {
    json j;
    j["weights"] = matrix_to_json(m.weights);
    j["k"] = m.class_count;
    j["delta"] = m.shrinkage;
    j["scatter"] = scatter_to_json(m.scatter);
    return j;
}

LdaModel lda_from_json(const json& j) {
    return LdaModel{matrix_from_json(j.at("weights")), j.at("k").get<int>(),
                    j.at("delta").get<double>(), scatter_from_json(j.at("scatter"))};
}

}  // namespace

std::string model_to_json(const AnyModel& model) {
    json j;
    j["format_version"] = kFormatVersion;
    j["method"] = method_name(model_method(model));
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, RawModel>) {
                j["p"] = m.p;
                j["params"] = json::object();
            } else if constexpr (std::is_same_v<T, PpaModel>) {
                j["p"] = m.mean.size();
                j["params"] = {{"d", m.d_removed()}};
                j["mean"] = m.mean;
                j["removed_directions"] = matrix_to_json(m.removed_directions);
            } else if constexpr (std::is_same_v<T, PcaModel>) {
                j["p"] = m.mean.size();
                j["params"] = {{"d", m.d_kept()}};
                j["mean"] = m.mean;
                j["components"] = matrix_to_json(m.components);
                j["explained_variance"] = m.explained_variance;
            } else if constexpr (std::is_same_v<T, LdaModel>) {
                j["p"] = m.weights.rows();
                j["params"] = {{"k", m.class_count}, {"delta", m.shrinkage}};
                j["lda"] = lda_to_json(m);
            } else {
                j["p"] = m.block_size * static_cast<std::size_t>(m.n_blocks);
                j["params"] = {{"n_blocks", m.n_blocks},
                               {"block_size", m.block_size},
                               {"k", m.blocks.empty() ? 0 : m.blocks[0].class_count},
                               {"delta", m.blocks.empty() ? 0.0 : m.blocks[0].shrinkage}};
                json blocks = json::array();
                for (const auto& b : m.blocks) blocks.push_back(lda_to_json(b));
                j["blocks"] = std::move(blocks);
            }
        },
        model);
    return j.dump(2) + "\n";
}

AnyModel model_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
    try {
        if (j.at("format_version").get<int>() != kFormatVersion)
            throw ParseError("unsupported model format version");
        const Method method = method_from_name(j.at("method").get<std::string>());
        switch (method) {
            case Method::raw:
                return RawModel{j.at("p").get<std::size_t>()};
            case Method::ppa: {
                PpaModel m{j.at("mean").get<Vector>(),
                           matrix_from_json(j.at("removed_directions"))};
                if (m.removed_directions.rows() > 0 &&
                    m.removed_directions.cols() != m.mean.size())
                    throw ParseError("ppa model: direction width does not match mean");
                return m;
            }
            case Method::pca: {
                PcaModel m{j.at("mean").get<Vector>(), matrix_from_json(j.at("components")),
                           j.at("explained_variance").get<Vector>()};
                if (m.components.cols() != m.mean.size())
                    throw ParseError("pca model: component width does not match mean");
                if (m.explained_variance.size() != m.components.rows())
                    throw ParseError("pca model: variance count does not match components");
                return m;
            }
            case Method::lda:
                return lda_from_json(j.at("lda"));
            case Method::plda: {
                PartitionedLdaModel m;
                m.n_blocks = j.at("params").at("n_blocks").get<int>();
                m.block_size = j.at("params").at("block_size").get<std::size_t>();
                for (const auto& b : j.at("blocks")) m.blocks.push_back(lda_from_json(b));
                if (m.blocks.size() != static_cast<std::size_t>(m.n_blocks))
                    throw ParseError("plda model: block count mismatch");
                for (const auto& b : m.blocks)
                    if (b.weights.rows() != m.block_size)
                        throw ParseError("plda model: block width mismatch");
                return m;
            }
        }
        throw ParseError("unknown model method");
    } catch (const json::exception& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
}

void save_model(const AnyModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << model_to_json(model);
    if (!out) throw Error("write failed for '" + path + "'");
}

AnyModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return model_from_json(buffer.str());
}

std::string logistic_model_to_json(const LogisticModel& model) {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "logistic_regression";
    j["weights"] = matrix_to_json(model.weights);
    j["bias"] = model.bias;
    j["feature_means"] = model.feature_means;
    j["feature_scales"] = model.feature_scales;
    j["l2"] = model.l2;
    j["converged"] = model.converged;
    j["n_iter"] = model.n_iter;
    return j.dump(2) + "\n";
}

LogisticModel logistic_model_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("probe model file: ") + e.what());
    }
    try {
        if (j.at("kind").get<std::string>() != "logistic_regression")
            throw ParseError("not a logistic regression model file");
        LogisticModel m;
        m.weights = matrix_from_json(j.at("weights"));
        m.bias = j.at("bias").get<Vector>();
        m.feature_means = j.at("feature_means").get<Vector>();
        m.feature_scales = j.at("feature_scales").get<Vector>();
        m.l2 = j.at("l2").get<double>();
        m.converged = j.at("converged").get<bool>();
        m.n_iter = j.at("n_iter").get<int>();
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("probe model file: ") + e.what());
    }
}

}  // namespace edr
