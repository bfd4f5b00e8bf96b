// SPDX-License-Identifier: Apache-2.0
#include "sew/serialize.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "sew/error.hpp"

namespace sew {
namespace {

using nlohmann::json;

json params_to_json(const std::vector<const Parameter*>& params) {
  json arr = json::array();
  for (const Parameter* p : params) {
    arr.push_back({{"name", p->name},
                   {"rows", p->value.rows()},
                   {"cols", p->value.cols()},
                   {"data", std::vector<double>(p->value.data().begin(), p->value.data().end())}});
  }
  return arr;
}

void params_from_json(const json& arr, const std::vector<Parameter*>& params, const std::string& block) {
  if (!arr.is_array() || arr.size() != params.size()) {
    throw IngestionError("model file: block '" + block + "' has " + std::to_string(arr.size()) +
                         " parameters, expected " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const json& j = arr[i];
    Parameter& p = *params[i];
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    if (rows != p.value.rows() || cols != p.value.cols()) {
      throw IngestionError("model file: parameter '" + j.at("name").get<std::string>() + "' has shape " +
                           std::to_string(rows) + "x" + std::to_string(cols) + ", expected " + p.value.shape());
    }
    p.value = Matrix(rows, cols, j.at("data").get<std::vector<double>>());
    if (!p.value.all_finite()) throw IngestionError("model file: parameter '" + p.name + "' is not finite");
    p.zero_grad();
  }
}

json mlp_to_json(const Mlp& mlp) {
  std::vector<const Parameter*> params;
  mlp.collect(params);
  return {{"input_dim", mlp.input_dim()}, {"layer_sizes", mlp.spec().layer_sizes}, {"params", params_to_json(params)}};
}

Mlp mlp_from_json(const json& j, const std::string& name) {
  MlpSpec spec{j.at("layer_sizes").get<std::vector<std::size_t>>()};
  Mlp mlp(spec, j.at("input_dim").get<std::size_t>(), 0, name);
  std::vector<Parameter*> params;
  mlp.collect(params);
  params_from_json(j.at("params"), params, name);
  return mlp;
}

json regressor_to_json(const GruRegressor& r) {
  std::vector<const Parameter*> params;
  r.collect(params);
  return {{"input_dim", r.input_dim()},
          {"num_layers", r.spec().num_layers},
          {"hidden", r.spec().hidden},
          {"output", r.spec().output},
          {"params", params_to_json(params)}};
}

GruRegressor regressor_from_json(const json& j) {
  GruRegressorSpec spec{j.at("num_layers").get<std::size_t>(), j.at("hidden").get<std::size_t>(),
                        j.at("output").get<std::size_t>()};
  GruRegressor r(spec, j.at("input_dim").get<std::size_t>(), 0);
  std::vector<Parameter*> params;
  r.collect(params);
  params_from_json(j.at("params"), params, "regressor");
  return r;
}

}  // namespace

std::string model_to_json(const SewModel& model, const std::string& manifest_id) {
  json blocks;
  blocks["w_encoder"] = mlp_to_json(model.w_encoder);
  if (!model.deployment) {
    if (model.s_decoder1) blocks["s_decoder1"] = mlp_to_json(*model.s_decoder1);
    if (model.s_encoder) blocks["s_encoder"] = mlp_to_json(*model.s_encoder);
    if (model.s_decoder2) blocks["s_decoder2"] = mlp_to_json(*model.s_decoder2);
  }
  blocks["regressor"] = regressor_to_json(model.regressor);

  json doc = {{"format", "sew-model"},
              {"version", kModelFormatVersion},
              {"kind", model.deployment ? "deployment" : "full"},
              {"ablation", std::string(ablation_name(model.ablation))},
              {"d1", model.d1},
              {"d2", model.d2},
              {"latent_dim", model.latent_dim},
              {"blocks", blocks}};
  if (!manifest_id.empty()) doc["manifest"] = manifest_id;
  if (model.weak_scaler) {
    doc["weak_scaler"] = {{"mean", model.weak_scaler->mean}, {"stddev", model.weak_scaler->stddev}};
  }
  return doc.dump(1);
}

SewModel model_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format") != "sew-model") throw IngestionError("not a sew model file");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw IngestionError("unsupported model format version " + std::to_string(version));
    }
    SewModel m;
    m.deployment = doc.at("kind") == "deployment";
    m.ablation = parse_ablation(doc.at("ablation").get<std::string>());
    m.d1 = doc.at("d1").get<std::size_t>();
    m.d2 = doc.at("d2").get<std::size_t>();
    m.latent_dim = doc.at("latent_dim").get<std::size_t>();
    const json& blocks = doc.at("blocks");
    m.w_encoder = mlp_from_json(blocks.at("w_encoder"), "w_encoder");
    if (!m.deployment) {
      if (blocks.contains("s_decoder1")) m.s_decoder1 = mlp_from_json(blocks["s_decoder1"], "s_decoder1");
      if (blocks.contains("s_encoder")) m.s_encoder = mlp_from_json(blocks["s_encoder"], "s_encoder");
      if (blocks.contains("s_decoder2")) m.s_decoder2 = mlp_from_json(blocks["s_decoder2"], "s_decoder2");
    }
    m.regressor = regressor_from_json(blocks.at("regressor"));
    if (doc.contains("weak_scaler")) {
      FeatureScaler s{doc["weak_scaler"].at("mean").get<std::vector<double>>(),
                      doc["weak_scaler"].at("stddev").get<std::vector<double>>()};
      if (s.mean.size() != m.d2 || s.stddev.size() != m.d2) {
        throw IngestionError("model file: weak_scaler does not match d2");
      }
      m.weak_scaler = std::move(s);
    }
    if (m.w_encoder.input_dim() != m.d2 || m.w_encoder.output_dim() != m.latent_dim ||
        m.regressor.input_dim() != m.latent_dim) {
      throw IngestionError("model file: block dimensions are inconsistent");
    }
    return m;
  } catch (const json::exception& e) {
    throw IngestionError(std::string("model file: ") + e.what());
  }
}

void save_model(const SewModel& model, const std::filesystem::path& path, const std::string& manifest_id) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << model_to_json(model, manifest_id) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

SewModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace sew
