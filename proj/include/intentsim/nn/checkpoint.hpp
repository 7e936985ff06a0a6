#pragma once

// Versioned JSON checkpoints: model kind, dimensions, temperature, and one
// record per tensor (name, shape, row-major float64 data). nlohmann::json
// round-trips doubles exactly.

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "intentsim/error.hpp"
#include "intentsim/nn/model.hpp"
#include "intentsim/version.hpp"

namespace intentsim {

inline nlohmann::json checkpoint_to_json(const ModelParams& params) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = model_kind_name(params.kind);
    j["fold_ego"] = params.fold_ego;
    j["temperature"] = params.temperature;
    j["dims"] = {{"feature", params.dims.feature},
                 {"gcn_hidden", params.dims.gcn_hidden},
                 {"embed", params.dims.embed},
                 {"gru_hidden", params.dims.gru_hidden},
                 {"classes", params.dims.classes},
                 {"horizon", params.dims.horizon}};
    j["tensors"] = nlohmann::json::array();
    std::vector<TensorView> views;
    const_cast<ModelParams&>(params).collect(views);
    for (const auto& v : views) {
        nlohmann::json data = nlohmann::json::array();
        // views are column-major Eigen buffers; emit row-major
        for (long r = 0; r < v.rows; ++r)
            for (long c = 0; c < v.cols; ++c) data.push_back(v.data[c * v.rows + r]);
        j["tensors"].push_back({{"name", v.name},
                                {"rows", v.rows},
                                {"cols", v.cols},
                                {"data", std::move(data)}});
    }
    return j;
}

inline ModelParams checkpoint_from_json(const nlohmann::json& j) {
    try {
        if (j.at("schema_version").get<int>() != kSchemaVersion)
            throw ConfigError("unsupported checkpoint schema version");
        ModelDims dims;
        dims.feature = j.at("dims").at("feature").get<int>();
        dims.gcn_hidden = j.at("dims").at("gcn_hidden").get<int>();
        dims.embed = j.at("dims").at("embed").get<int>();
        dims.gru_hidden = j.at("dims").at("gru_hidden").get<int>();
        dims.classes = j.at("dims").at("classes").get<int>();
        dims.horizon = j.at("dims").at("horizon").get<int>();
        ModelParams params = make_model(
            model_kind_from_name(j.at("kind").get<std::string>()), dims,
            j.value("fold_ego", false), 0, 1.0);
        params.temperature = j.at("temperature").get<double>();

        std::vector<TensorView> views;
        params.collect(views);
        const auto& tensors = j.at("tensors");
        if (tensors.size() != views.size())
            throw ConfigError("checkpoint tensor count mismatch");
        for (std::size_t t = 0; t < views.size(); ++t) {
            const auto& jt = tensors[t];
            TensorView& v = views[t];
            if (jt.at("name").get<std::string>() != v.name ||
                jt.at("rows").get<long>() != v.rows ||
                jt.at("cols").get<long>() != v.cols)
                throw ConfigError("checkpoint tensor mismatch at " + v.name);
            const auto& data = jt.at("data");
            if (static_cast<long>(data.size()) != v.size)
                throw ConfigError("checkpoint tensor size mismatch at " + v.name);
            long i = 0;
            for (long r = 0; r < v.rows; ++r)
                for (long c = 0; c < v.cols; ++c)
                    v.data[c * v.rows + r] = data[i++].get<double>();
        }
        return params;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed checkpoint: ") + e.what());
    }
}

inline void save_checkpoint(const ModelParams& params, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw SimError("cannot write checkpoint: " + path);
    out << checkpoint_to_json(params).dump() << "\n";
}

inline ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid checkpoint JSON: ") + e.what());
    }
    return checkpoint_from_json(j);
}

}  // namespace intentsim
