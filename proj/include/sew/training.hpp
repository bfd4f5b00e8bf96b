// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sew/config.hpp"
#include "sew/data.hpp"
#include "sew/error.hpp"
#include "sew/metrics.hpp"
#include "sew/networks.hpp"

namespace sew {

/// Raised when training diverges; the message carries epoch, batch and the
/// loss components seen so far.
class TrainingError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// e1..e4: translation, autoencoding, alignment (-rho) and prediction errors.
/// Terms the ablation removes are absent.
struct LossComponents {
  std::optional<double> e1;
  std::optional<double> e2;
  std::optional<double> e3;
  double e4 = 0.0;
  double total = 0.0;
  bool cca_skipped = false;  // alignment dropped for this batch (conditioning)
};

struct SewLoss {
  Var total;
  LossComponents components;
};

/// total = alpha e1 + beta e2 + gamma e3 + e4 on `tape`. Terms with zero
/// weight are reported but left out of the graph. If `cca_batch` is given the
/// alignment term is computed on it instead of `batch`.
/// Throws ConfigError if the ablation needs a block the model lacks.
SewLoss sew_loss(Tape& tape, const SewModel& model, const ModalityBatch& batch, const SewConfig& config,
                 const ModalityBatch* cca_batch = nullptr);

struct EpochReport {
  std::size_t epoch = 0;  // 1-based
  std::optional<double> e1;
  std::optional<double> e2;
  std::optional<double> e3;
  double e4 = 0.0;
  double dev_ccc = 0.0;
  double dev_acc = 0.0;
  std::size_t cca_skipped = 0;
};

struct TrainResult {
  SewModel model;  // parameters of the best dev-CCC epoch
  std::vector<EpochReport> history;
  std::size_t best_epoch = 0;  // 0: no epoch run
  double best_dev_ccc = 0.0;
};

using EpochCallback = std::function<void(const EpochReport&)>;

/// Minibatch SGD on sew_loss over standardised features. The dev split is
/// scored after every epoch through the deployment path only (weaker
/// features -> W_E -> R). Deterministic in config.seed.
TrainResult train(const SewConfig& config, const Dataset& train_set, const Dataset& dev_set,
                  const EpochCallback& on_epoch = {});

/// Scores a model on raw weaker-modality features; never touches M_S.
EvalResult evaluate(const SewModel& model, const Matrix& raw_weak, const Matrix& labels,
                    VarianceEstimator estimator = VarianceEstimator::kPopulation);

/// Copy holding only W_E, R and the weaker-feature scaler.
SewModel export_deployment(const SewModel& model);

struct AblationRow {
  Ablation ablation = Ablation::kFull;
  std::vector<double> ccc;  // per seed
  std::vector<double> acc;
  std::vector<TrainResult> runs;
  double median_ccc() const;
  double median_acc() const;
};

/// Trains the six variants (full, -S_D2, -CCA, -S_D1, -(CCA&S_D1), unimodal)
/// over the same seeds. Variants run concurrently when `parallel` is set.
std::vector<AblationRow> run_ablation_suite(const SewConfig& config, const Dataset& train_set, const Dataset& dev_set,
                                            const std::vector<std::uint64_t>& seeds, bool parallel = true);

double median(std::vector<double> values);

/// "epoch,e1,e2,e3,e4,dev_ccc,dev_acc" with absent components left empty.
std::string metrics_csv(const std::vector<EpochReport>& history);
/// "variant,ccc,acc" with one row per ablation (medians over seeds).
std::string ablation_csv(const std::vector<AblationRow>& rows);
/// Aligned plain-text rendering of the same table.
std::string ablation_text(const std::vector<AblationRow>& rows);

}  // namespace sew
