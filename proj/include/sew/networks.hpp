// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sew/autodiff.hpp"
#include "sew/rng.hpp"
#include "sew/scaler.hpp"

namespace sew {

/// Widths of successive linear layers; tanh between layers, none after the last.
struct MlpSpec {
  std::vector<std::size_t> layer_sizes;

  void validate() const;
  std::size_t output_dim() const { return layer_sizes.back(); }
  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

/// y = W x + b with W (out x in), initialised uniform in +-1/sqrt(in).
struct Linear {
  Linear() = default;
  Linear(std::size_t in, std::size_t out, Rng& rng, const std::string& name);

  Var forward(Tape& tape, Var x) const;
  std::size_t input_dim() const { return weight.value.cols(); }
  std::size_t output_dim() const { return weight.value.rows(); }

  Parameter weight;
  Parameter bias;
};

class Mlp {
 public:
  Mlp() = default;
  Mlp(MlpSpec spec, std::size_t input_dim, std::uint64_t seed, const std::string& name = "mlp");

  /// (input_dim x batch) -> (output_dim x batch)
  Var forward(Tape& tape, Var x) const;

  const MlpSpec& spec() const { return spec_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return spec_.output_dim(); }
  std::vector<Linear>& layers() { return layers_; }
  const std::vector<Linear>& layers() const { return layers_; }
  void collect(std::vector<Parameter*>& out);
  void collect(std::vector<const Parameter*>& out) const;

 private:
  MlpSpec spec_;
  std::size_t input_dim_ = 0;
  std::vector<Linear> layers_;
};

Mlp build_mlp(const MlpSpec& spec, std::size_t input_dim, std::uint64_t seed);

/// Standard GRU cell:
///   z  = sigmoid(W_z x + U_z h + b_z)
///   r  = sigmoid(W_r x + U_r h + b_r)
///   h~ = tanh(W_h x + U_h (r . h) + b_h)
///   h' = (1 - z) . h + z . h~
struct GruCell {
  GruCell() = default;
  GruCell(std::size_t input_dim, std::size_t hidden, Rng& rng, const std::string& name);

  Var forward(Tape& tape, Var x, Var h_prev) const;
  std::size_t input_dim() const { return w_z.value.cols(); }
  std::size_t hidden() const { return w_z.value.rows(); }
  void collect(std::vector<Parameter*>& out);
  void collect(std::vector<const Parameter*>& out) const;

  Parameter w_z, u_z, b_z;
  Parameter w_r, u_r, b_r;
  Parameter w_h, u_h, b_h;
};

struct GruRegressorSpec {
  std::size_t num_layers = 4;
  std::size_t hidden = 120;
  std::size_t output = 1;

  void validate() const;
  friend bool operator==(const GruRegressorSpec&, const GruRegressorSpec&) = default;
};

/// Stacked single-time-step GRU cells (zero initial state per sample)
/// followed by a linear output layer.
class GruRegressor {
 public:
  GruRegressor() = default;
  GruRegressor(GruRegressorSpec spec, std::size_t input_dim, std::uint64_t seed);

  Var forward(Tape& tape, Var latent) const;

  const GruRegressorSpec& spec() const { return spec_; }
  std::size_t input_dim() const { return input_dim_; }
  std::vector<GruCell>& cells() { return cells_; }
  const std::vector<GruCell>& cells() const { return cells_; }
  Linear& output_layer() { return output_; }
  const Linear& output_layer() const { return output_; }
  void collect(std::vector<Parameter*>& out);
  void collect(std::vector<const Parameter*>& out) const;

 private:
  GruRegressorSpec spec_;
  std::size_t input_dim_ = 0;
  std::vector<GruCell> cells_;
  Linear output_;
};

/// Which auxiliary blocks and loss terms a training variant keeps.
enum class Ablation { kFull, kNoSd2, kNoCca, kNoSd1, kNoCcaSd1, kUnimodal };

inline constexpr Ablation kAllAblations[] = {Ablation::kFull,  Ablation::kNoSd2,    Ablation::kNoCca,
                                             Ablation::kNoSd1, Ablation::kNoCcaSd1, Ablation::kUnimodal};

/// Config spelling: full, no_sd2, no_cca, no_sd1, no_cca_sd1, unimodal.
std::string_view ablation_name(Ablation a);
/// Results-table spelling: full, -S_D2, -CCA, -S_D1, -(CCA&S_D1), unimodal.
std::string_view ablation_label(Ablation a);
Ablation parse_ablation(std::string_view name);

struct BlockSet {
  bool s_decoder1 = false;
  bool s_encoder = false;
  bool s_decoder2 = false;
  bool cca = false;
};
BlockSet blocks_for(Ablation a);

struct SewArchitecture {
  MlpSpec weak_encoder;    // W_E: d2 -> d
  MlpSpec strong_encoder;  // S_E: d1 -> d
  MlpSpec strong_decoder;  // S_D1 and S_D2: d -> d1
  GruRegressorSpec regressor;
  Ablation ablation = Ablation::kFull;
};

/// The per-modality layer presets. The encoder's last width is the latent
/// dimension, which the caller chooses (168 with video-appearance, else 128).
struct ModalityPreset {
  MlpSpec encoder;
  MlpSpec decoder;
};
/// name: audio, video_geo or video_app.
ModalityPreset modality_preset(std::string_view name, std::size_t latent_dim);
std::size_t preset_latent_dim(std::string_view strong, std::string_view weak);
std::size_t preset_feature_dim(std::string_view name);

/// W_E, S_D1, S_E, S_D2 and R. Blocks removed by the ablation are empty.
struct SewModel {
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  std::size_t latent_dim = 0;
  Ablation ablation = Ablation::kFull;
  bool deployment = false;

  Mlp w_encoder;
  std::optional<Mlp> s_decoder1;
  std::optional<Mlp> s_encoder;
  std::optional<Mlp> s_decoder2;
  GruRegressor regressor;
  /// Standardisation of raw weaker-modality features, fitted on training data.
  std::optional<FeatureScaler> weak_scaler;

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

  /// W_E -> R on already standardised weaker features (d2 x n) -> 1 x n.
  Matrix predict(const Matrix& m_w) const;
  /// Applies weak_scaler (if any) first.
  Matrix predict_raw(const Matrix& raw_m_w) const;
};

/// Builds every block the ablation keeps. Each block draws its weights from
/// its own seed stream, so W_E and R initialise identically across variants.
SewModel assemble_sew(const SewArchitecture& arch, std::size_t d1, std::size_t d2, std::uint64_t seed);

}  // namespace sew
