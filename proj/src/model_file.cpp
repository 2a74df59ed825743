#include "smp/model_file.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

using nlohmann::json;

namespace smp {

void save_trained_model(const std::string& path, const cv::TrainedModel& model) {
    json j;
    j["version"] = 1;
    j["kind"] = cv::model_kind_name(model.kind);
    j["state"] = json::parse(model.state.to_json_string());
    j["model"] = json::parse(model.kind == cv::ModelKind::Gbdt
                                 ? model.gbdt_model.to_json_string()
                                 : model.mlp_model.to_json_string());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << j.dump() << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

cv::TrainedModel load_trained_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const json j = json::parse(ss.str());
    if (j.at("version").get<int>() != 1)
        throw std::runtime_error(path + ": unsupported model file version");

    cv::TrainedModel model;
    model.kind = cv::model_kind_from_name(j.at("kind").get<std::string>());
    model.state = feat::TransformState::from_json_string(j.at("state").dump());
    if (model.kind == cv::ModelKind::Gbdt)
        model.gbdt_model = gbdt::GbdtModel::from_json_string(j.at("model").dump());
    else
        model.mlp_model = mlp::MlpModel::from_json_string(j.at("model").dump());
    return model;
}

}  // namespace smp
