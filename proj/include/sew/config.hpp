// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "sew/data.hpp"
#include "sew/dcca.hpp"
#include "sew/metrics.hpp"
#include "sew/networks.hpp"
#include "sew/optim.hpp"

namespace sew {

/// Every hyperparameter of a run. Defaults are the published settings:
/// alpha = beta = gamma = 1, K = 10, SGD lr 0.001 / momentum 0.7, batch 32.
struct SewConfig {
  // loss weights
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;

  // alignment
  std::size_t k = 10;
  double r1 = 1e-4;
  double r2 = 1e-4;
  std::size_t cca_batch_size = 0;  // 0: align on the training minibatch itself

  // optimisation
  double lr = 0.001;
  double momentum = 0.7;
  double weight_decay = 1e-4;
  double clip_norm = 0.0;  // 0: no clipping
  std::size_t batch_size = 32;
  std::size_t epochs = 50;
  std::size_t patience = 10;  // 0: never stop early
  std::uint64_t seed = 0;

  // architecture
  std::string strong_modality;  // preset name, optional
  std::string weak_modality;    // preset name, optional
  std::size_t latent_dim = 0;   // 0: derived from the encoder specs / presets
  MlpSpec weak_encoder;         // empty: taken from weak_modality preset
  MlpSpec strong_encoder;
  MlpSpec strong_decoder;
  std::size_t gru_layers = 4;
  std::size_t gru_hidden = 120;
  Ablation ablation = Ablation::kFull;

  // evaluation
  VarianceEstimator ccc_estimator = VarianceEstimator::kPopulation;

  // data
  std::filesystem::path data_dir;
  CsvSchema schema;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  SgdOptions sgd() const { return {lr, momentum, weight_decay}; }
  CcaOptions cca() const { return {k, r1, r2}; }
  /// Resolves presets and explicit specs into concrete layer lists.
  SewArchitecture architecture() const;
};

/// Parses `key = value` lines ('#' starts a comment). Relative data_dir is
/// resolved against base_dir. Unknown keys and malformed values raise
/// ConfigError naming the key and line.
SewConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
SewConfig load_config(const std::filesystem::path& path);

/// Same `key = value` format for the synthetic generator's fields
/// (latent_dim, d1, d2, noise_strong, noise_weak, weak_info_loss,
/// mixing_depth, label_noise, n_samples, n_dev, seed).
SyntheticSpec parse_synthetic_spec(const std::string& text);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);

/// Canonical text form of a config; parse_config(config_to_text(c)) == c.
std::string config_to_text(const SewConfig& config);

}  // namespace sew
