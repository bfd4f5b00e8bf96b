// SPDX-License-Identifier: Apache-2.0
#include "sew/networks.hpp"

#include <cmath>

#include "sew/error.hpp"

namespace sew {
namespace {

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-bound, bound);
  return m;
}

std::string join_sizes(const std::vector<std::size_t>& sizes) {
  std::string s = "[";
  for (std::size_t i = 0; i < sizes.size(); ++i) s += (i ? "," : "") + std::to_string(sizes[i]);
  return s + "]";
}

}  // namespace

void MlpSpec::validate() const {
  if (layer_sizes.empty()) throw ConfigError("mlp spec needs at least one layer");
  for (const std::size_t w : layer_sizes)
    if (w == 0) throw ConfigError("mlp spec " + join_sizes(layer_sizes) + " has a zero width");
}

Linear::Linear(std::size_t in, std::size_t out, Rng& rng, const std::string& name) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight = Parameter(name + ".weight", uniform_matrix(out, in, bound, rng));
  bias = Parameter(name + ".bias", uniform_matrix(out, 1, bound, rng));
}

Var Linear::forward(Tape& tape, Var x) const {
  return add_bias(matmul(tape.param(weight), x), tape.param(bias));
}

Mlp::Mlp(MlpSpec spec, std::size_t input_dim, std::uint64_t seed, const std::string& name)
    : spec_(std::move(spec)), input_dim_(input_dim) {
  spec_.validate();
  if (input_dim == 0) throw ConfigError("mlp input dimension must be >= 1");
  Rng rng(seed);
  std::size_t in = input_dim;
  for (std::size_t i = 0; i < spec_.layer_sizes.size(); ++i) {
    const std::size_t out = spec_.layer_sizes[i];
    layers_.emplace_back(in, out, rng, name + ".layer" + std::to_string(i));
    in = out;
  }
}

Var Mlp::forward(Tape& tape, Var x) const {
  if (x.rows() != input_dim_) {
    throw DimensionError("mlp expects " + std::to_string(input_dim_) + " input rows, got " +
                         x.value().shape());
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i].forward(tape, x);
    if (i + 1 < layers_.size()) x = tanh(x);
  }
  return x;
}

void Mlp::collect(std::vector<Parameter*>& out) {
  for (Linear& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
}

void Mlp::collect(std::vector<const Parameter*>& out) const {
  for (const Linear& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
}

Mlp build_mlp(const MlpSpec& spec, std::size_t input_dim, std::uint64_t seed) {
  return Mlp(spec, input_dim, seed);
}

GruCell::GruCell(std::size_t input_dim, std::size_t hidden, Rng& rng, const std::string& name) {
  const double in_bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double h_bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  const auto gate = [&](Parameter& w, Parameter& u, Parameter& b, const char* tag) {
    w = Parameter(name + ".w_" + tag, uniform_matrix(hidden, input_dim, in_bound, rng));
    u = Parameter(name + ".u_" + tag, uniform_matrix(hidden, hidden, h_bound, rng));
    b = Parameter(name + ".b_" + tag, uniform_matrix(hidden, 1, in_bound, rng));
  };
  gate(w_z, u_z, b_z, "z");
  gate(w_r, u_r, b_r, "r");
  gate(w_h, u_h, b_h, "h");
}

Var GruCell::forward(Tape& tape, Var x, Var h_prev) const {
  if (x.rows() != input_dim() || h_prev.rows() != hidden() || x.cols() != h_prev.cols()) {
    throw DimensionError("gru cell (" + std::to_string(hidden()) + "x" + std::to_string(input_dim()) +
                         ") cannot take x " + x.value().shape() + " with h " + h_prev.value().shape());
  }
  const auto affine = [&](const Parameter& w, const Parameter& u, const Parameter& b, Var h) {
    return add_bias(elementwise_add(matmul(tape.param(w), x), matmul(tape.param(u), h)), tape.param(b));
  };
  const Var z = sigmoid(affine(w_z, u_z, b_z, h_prev));
  const Var r = sigmoid(affine(w_r, u_r, b_r, h_prev));
  const Var candidate = tanh(affine(w_h, u_h, b_h, elementwise_mul(r, h_prev)));
  const Var keep = scalar_add(scalar_mul(z, -1.0), 1.0);
  return elementwise_add(elementwise_mul(keep, h_prev), elementwise_mul(z, candidate));
}

void GruCell::collect(std::vector<Parameter*>& out) {
  for (Parameter* p : {&w_z, &u_z, &b_z, &w_r, &u_r, &b_r, &w_h, &u_h, &b_h}) out.push_back(p);
}

void GruCell::collect(std::vector<const Parameter*>& out) const {
  for (const Parameter* p : {&w_z, &u_z, &b_z, &w_r, &u_r, &b_r, &w_h, &u_h, &b_h}) out.push_back(p);
}

void GruRegressorSpec::validate() const {
  if (num_layers < 1) throw ConfigError("gru regressor needs at least one layer");
  if (hidden < 1) throw ConfigError("gru regressor hidden width must be >= 1");
  if (output < 1) throw ConfigError("gru regressor output width must be >= 1");
}

GruRegressor::GruRegressor(GruRegressorSpec spec, std::size_t input_dim, std::uint64_t seed)
    : spec_(spec), input_dim_(input_dim) {
  spec_.validate();
  if (input_dim == 0) throw ConfigError("gru regressor input dimension must be >= 1");
  Rng rng(seed);
  std::size_t in = input_dim;
  for (std::size_t i = 0; i < spec_.num_layers; ++i) {
    cells_.emplace_back(in, spec_.hidden, rng, "regressor.gru" + std::to_string(i));
    in = spec_.hidden;
  }
  output_ = Linear(spec_.hidden, spec_.output, rng, "regressor.out");
}

Var GruRegressor::forward(Tape& tape, Var latent) const {
  if (latent.rows() != input_dim_) {
    throw DimensionError("regressor expects " + std::to_string(input_dim_) + " input rows, got " +
                         latent.value().shape());
  }
  const Var h0 = tape.constant(Matrix(spec_.hidden, latent.cols()));
  Var x = latent;
  for (const GruCell& cell : cells_) x = cell.forward(tape, x, h0);
  return output_.forward(tape, x);
}

void GruRegressor::collect(std::vector<Parameter*>& out) {
  for (GruCell& c : cells_) c.collect(out);
  out.push_back(&output_.weight);
  out.push_back(&output_.bias);
}

void GruRegressor::collect(std::vector<const Parameter*>& out) const {
  for (const GruCell& c : cells_) c.collect(out);
  out.push_back(&output_.weight);
  out.push_back(&output_.bias);
}

std::string_view ablation_name(Ablation a) {
  switch (a) {
    case Ablation::kFull: return "full";
    case Ablation::kNoSd2: return "no_sd2";
    case Ablation::kNoCca: return "no_cca";
    case Ablation::kNoSd1: return "no_sd1";
    case Ablation::kNoCcaSd1: return "no_cca_sd1";
    case Ablation::kUnimodal: return "unimodal";
  }
  return "full";
}

std::string_view ablation_label(Ablation a) {
  switch (a) {
    case Ablation::kFull: return "full";
    case Ablation::kNoSd2: return "-S_D2";
    case Ablation::kNoCca: return "-CCA";
    case Ablation::kNoSd1: return "-S_D1";
    case Ablation::kNoCcaSd1: return "-(CCA&S_D1)";
    case Ablation::kUnimodal: return "unimodal";
  }
  return "full";
}

Ablation parse_ablation(std::string_view name) {
  for (const Ablation a : kAllAblations)
    if (name == ablation_name(a) || name == ablation_label(a)) return a;
  throw ConfigError("unknown ablation '" + std::string(name) +
                    "' (expected full, no_sd2, no_cca, no_sd1, no_cca_sd1 or unimodal)");
}

BlockSet blocks_for(Ablation a) {
  switch (a) {
    case Ablation::kFull: return {true, true, true, true};
    case Ablation::kNoSd2: return {true, true, false, true};
    case Ablation::kNoCca: return {true, true, true, false};
    case Ablation::kNoSd1: return {false, true, true, true};
    case Ablation::kNoCcaSd1: return {false, true, true, false};
    case Ablation::kUnimodal: return {false, false, false, false};
  }
  return {};
}

ModalityPreset modality_preset(std::string_view name, std::size_t latent_dim) {
  if (latent_dim == 0) throw ConfigError("latent dimension must be >= 1");
  if (name == "audio") return {{{108, latent_dim}}, {{108, 88}}};
  if (name == "video_geo") return {{{512, 256, latent_dim}}, {{256, 512, 632}}};
  if (name == "video_app") return {{{latent_dim}}, {{168}}};
  throw ConfigError("unknown modality preset '" + std::string(name) +
                    "' (expected audio, video_geo or video_app)");
}

std::size_t preset_latent_dim(std::string_view strong, std::string_view weak) {
  return (strong == "video_app" || weak == "video_app") ? 168 : 128;
}

std::size_t preset_feature_dim(std::string_view name) {
  if (name == "audio") return 88;
  if (name == "video_geo") return 632;
  if (name == "video_app") return 168;
  throw ConfigError("unknown modality preset '" + std::string(name) + "'");
}

std::vector<Parameter*> SewModel::parameters() {
  std::vector<Parameter*> out;
  w_encoder.collect(out);
  if (s_decoder1) s_decoder1->collect(out);
  if (s_encoder) s_encoder->collect(out);
  if (s_decoder2) s_decoder2->collect(out);
  regressor.collect(out);
  return out;
}

std::vector<const Parameter*> SewModel::parameters() const {
  std::vector<const Parameter*> out;
  w_encoder.collect(out);
  if (s_decoder1) s_decoder1->collect(out);
  if (s_encoder) s_encoder->collect(out);
  if (s_decoder2) s_decoder2->collect(out);
  regressor.collect(out);
  return out;
}

Matrix SewModel::predict(const Matrix& m_w) const {
  if (m_w.rows() != d2) {
    throw DimensionError("predict expects " + std::to_string(d2) + " weaker-modality rows, got " + m_w.shape());
  }
  Tape tape(/*recording=*/false);
  const Var x = tape.constant(m_w);
  return regressor.forward(tape, w_encoder.forward(tape, x)).value();
}

Matrix SewModel::predict_raw(const Matrix& raw_m_w) const {
  return weak_scaler ? predict(weak_scaler->apply(raw_m_w)) : predict(raw_m_w);
}

SewModel assemble_sew(const SewArchitecture& arch, std::size_t d1, std::size_t d2, std::uint64_t seed) {
  if (d1 == 0 || d2 == 0) throw ConfigError("modality dimensions must be >= 1");
  arch.weak_encoder.validate();
  arch.regressor.validate();
  const BlockSet blocks = blocks_for(arch.ablation);

  SewModel m;
  m.d1 = d1;
  m.d2 = d2;
  m.ablation = arch.ablation;
  m.latent_dim = arch.weak_encoder.output_dim();
  m.w_encoder = Mlp(arch.weak_encoder, d2, derive_seed(seed, "w_encoder"), "w_encoder");

  if (blocks.s_encoder) {
    arch.strong_encoder.validate();
    if (arch.strong_encoder.output_dim() != m.latent_dim) {
      throw ConfigError("latent dimension mismatch: weak encoder outputs " + std::to_string(m.latent_dim) +
                        ", strong encoder outputs " + std::to_string(arch.strong_encoder.output_dim()));
    }
    m.s_encoder = Mlp(arch.strong_encoder, d1, derive_seed(seed, "s_encoder"), "s_encoder");
  }
  if (blocks.s_decoder1 || blocks.s_decoder2) {
    arch.strong_decoder.validate();
    if (arch.strong_decoder.output_dim() != d1) {
      throw ConfigError("strong decoder outputs " + std::to_string(arch.strong_decoder.output_dim()) +
                        " features but the stronger modality has " + std::to_string(d1));
    }
  }
  if (blocks.s_decoder1) {
    m.s_decoder1 = Mlp(arch.strong_decoder, m.latent_dim, derive_seed(seed, "s_decoder1"), "s_decoder1");
  }
  if (blocks.s_decoder2) {
    m.s_decoder2 = Mlp(arch.strong_decoder, m.latent_dim, derive_seed(seed, "s_decoder2"), "s_decoder2");
  }
  m.regressor = GruRegressor(arch.regressor, m.latent_dim, derive_seed(seed, "regressor"));
  return m;
}

}  // namespace sew
