// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sew/matrix.hpp"
#include "sew/scaler.hpp"

namespace sew {

/// Paired stronger/weaker features and labels for b samples (one per column).
struct ModalityBatch {
  /// Throws DimensionError unless all widths agree, IngestionError if a label
  /// falls outside [-1, 1].
  ModalityBatch(Matrix m_s, Matrix m_w, Matrix labels);

  std::size_t size() const { return labels.cols(); }

  Matrix m_s;     // d1 x b
  Matrix m_w;     // d2 x b
  Matrix labels;  // 1 x b
};

/// A whole split. Same invariants as ModalityBatch.
struct Dataset {
  Dataset() = default;
  Dataset(Matrix strong, Matrix weak, Matrix labels);

  std::size_t size() const { return labels.cols(); }
  std::size_t strong_dim() const { return strong.rows(); }
  std::size_t weak_dim() const { return weak.rows(); }
  ModalityBatch gather(std::span<const std::size_t> indices) const;

  Matrix strong;
  Matrix weak;
  Matrix labels;
};

struct SyntheticSpec {
  std::size_t latent_dim = 8;
  std::size_t d1 = 32;
  std::size_t d2 = 16;
  double noise_strong = 0.1;
  double noise_weak = 1.0;
  double weak_info_loss = 0.5;  // fraction of latent coordinates hidden from the weaker view
  std::size_t mixing_depth = 2;  // tanh layers before the final linear map
  double label_noise = 0.0;      // annotation noise on training labels only, clipped to [-1, 1]
  std::size_t n_samples = 4000;  // training samples
  std::size_t n_dev = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticData {
  Dataset train;
  Dataset dev;
  std::vector<std::size_t> hidden_coordinates;  // latent coordinates the weaker view lacks
  std::string description;
};

/// Shared latent z ~ N(0, I); label = tanh(w.z) for a random unit w; each
/// view is a random tanh mixing of (a masked copy of) z plus Gaussian noise.
/// Training labels optionally carry clipped Gaussian annotation noise; dev
/// labels are always the clean tanh(w.z). Deterministic in spec.seed.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

struct CsvSchema {
  double frame_step_seconds = 0.04;
  double shift_seconds = 2.4;
};

/// Reads a CSV with one frame per row into a (columns x frames) matrix.
/// A first row with any non-numeric cell is treated as a header.
/// Throws IngestionError with the line number on ragged or non-numeric rows.
Matrix read_csv_matrix(const std::filesystem::path& path);

/// Writes a (columns x frames) matrix as one row per frame with a header row
/// "<prefix>0,<prefix>1,...". Values use %.17g so they read back exactly.
void write_csv_matrix(const std::filesystem::path& path, const Matrix& m, const std::string& prefix);

struct ShiftedLabels {
  Matrix labels;       // 1 x pairs; labels[t] is the original label t + offset
  std::size_t offset = 0;
  std::size_t pairs = 0;
};

/// Pairs feature frame t with label frame t + round(shift/step).
/// Throws ConfigError unless shift is a whole number of frames (within 1e-9).
ShiftedLabels shift_labels(const Matrix& labels, double shift_seconds, double frame_step_seconds);

/// Frame offset implied by a shift; same validation as shift_labels.
std::size_t shift_offset(double shift_seconds, double frame_step_seconds);

struct AlignedTable {
  Matrix features;  // d x pairs
  Matrix labels;    // 1 x pairs
  std::size_t offset = 0;
};

/// Reads features and labels, checks the frame counts agree, then applies the
/// label shift and drops trailing feature frames that have no label.
AlignedTable load_csv(const std::filesystem::path& features_path, const std::filesystem::path& labels_path,
                      const CsvSchema& schema);

/// Applies the same shift to two feature matrices that share a label track.
Dataset align_modalities(const Matrix& strong, const Matrix& weak, const Matrix& labels, const CsvSchema& schema);

/// Minibatch stream over a dataset. Each epoch is a (seeded) permutation cut
/// into batch_size chunks; a trailing chunk smaller than 2 is dropped.
class Batcher {
 public:
  Batcher(const Dataset& data, std::size_t batch_size, std::uint64_t seed, bool shuffle);

  std::size_t batches_per_epoch() const;
  std::vector<std::vector<std::size_t>> epoch_indices(std::size_t epoch) const;

  void start_epoch(std::size_t epoch);
  std::optional<ModalityBatch> next();

 private:
  const Dataset* data_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  bool shuffle_;
  std::vector<std::vector<std::size_t>> current_;
  std::size_t cursor_ = 0;
};

}  // namespace sew
