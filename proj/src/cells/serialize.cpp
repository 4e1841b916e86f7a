#include "pitl/cells/serialize.hpp"

#include <fstream>

#include "pitl/errors.hpp"

namespace pitl {

namespace {

constexpr const char* kFormat = "pitl.model";
constexpr int kVersion = 1;

nlohmann::json tensor_to_json(const Tensor2D& t) {
  return {{"rows", t.rows()}, {"cols", t.cols()}, {"data", t.values()}};
}

Tensor2D tensor_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != rows * cols) {
    throw ParseError("tensor declares " + std::to_string(rows) + "x" + std::to_string(cols) + " but holds " +
                     std::to_string(data.size()) + " values");
  }
  return Tensor2D(rows, cols, std::move(data));
}

nlohmann::json layer_params(const Layer& layer) {
  nlohmann::json params = nlohmann::json::object();
  for (const Param& p : layer.params()) params[p.name] = tensor_to_json(p.value);
  return {{"params", params}};
}

void load_params(Layer& layer, const nlohmann::json& j, const std::string& where) {
  const auto& params = j.at("params");
  if (params.size() != layer.params().size()) {
    throw ParseError(where + ": expected " + std::to_string(layer.params().size()) + " parameters, found " +
                     std::to_string(params.size()));
  }
  for (Param& p : layer.params()) {
    if (!params.contains(p.name)) throw ParseError(where + ": missing parameter '" + p.name + "'");
    Tensor2D v = tensor_from_json(params.at(p.name));
    if (!v.same_shape(p.value)) {
      throw ParseError(where + ": parameter '" + p.name + "' has shape " + v.shape_str() + ", expected " +
                       p.value.shape_str());
    }
    p.value = std::move(v);
    p.zero_grad();
  }
}

}  // namespace

nlohmann::json spec_to_json(const ModelSpec& spec) {
  nlohmann::json layers = nlohmann::json::array();
  for (const LayerSpec& l : spec.layers) {
    layers.push_back({{"kind", to_string(l.kind)},
                      {"width", l.width},
                      {"activation", to_string(l.activation)},
                      {"frozen", l.frozen}});
  }
  return {{"input_width", spec.input_width}, {"output_width", spec.output_width}, {"layers", layers}};
}

ModelSpec spec_from_json(const nlohmann::json& doc) {
  ModelSpec spec;
  spec.input_width = doc.at("input_width").get<std::size_t>();
  spec.output_width = doc.value("output_width", std::size_t{1});
  for (const auto& l : doc.at("layers")) {
    LayerSpec ls;
    ls.kind = parse_cell_kind(l.at("kind").get<std::string>());
    ls.width = l.at("width").get<std::size_t>();
    ls.activation = parse_activation(l.value("activation", std::string("tanh")));
    ls.frozen = l.value("frozen", false);
    spec.layers.push_back(ls);
  }
  spec.validate();
  return spec;
}

nlohmann::json model_to_json(const Model& model) {
  nlohmann::json layers = nlohmann::json::array();
  for (const Layer& l : model.layers()) layers.push_back(layer_params(l));
  return {{"format", kFormat},
          {"version", kVersion},
          {"spec", spec_to_json(model.spec())},
          {"layers", layers},
          {"head", layer_params(model.head())}};
}

Model model_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != kFormat) throw ParseError("not a model document");
    if (doc.at("version").get<int>() != kVersion) throw ParseError("unsupported model document version");
    const ModelSpec spec = spec_from_json(doc.at("spec"));
    Model model(spec, 0);
    const auto& layers = doc.at("layers");
    if (layers.size() != model.layers().size()) throw ParseError("layer count does not match spec");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      load_params(model.layers()[i], layers[i], "layer " + std::to_string(i));
    }
    load_params(model.head(), doc.at("head"), "head");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write model file " + path.string());
  out << model_to_json(model).dump(1) << '\n';
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file " + path.string());
  try {
    return model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace pitl
