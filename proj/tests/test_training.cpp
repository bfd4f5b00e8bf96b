// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "sew/error.hpp"
#include "sew/training.hpp"
#include "support/fd.hpp"
#include "support/random.hpp"

using sew::Matrix;
using sew::Parameter;
using sew::Tape;
using sew::testing::random_matrix;

namespace {

sew::SewConfig tiny_config(sew::Ablation a = sew::Ablation::kFull) {
  sew::SewConfig c;
  c.weak_encoder = sew::MlpSpec{{5, 2}};
  c.strong_encoder = sew::MlpSpec{{6, 2}};
  c.strong_decoder = sew::MlpSpec{{6, 4}};
  c.gru_layers = 2;
  c.gru_hidden = 3;
  c.k = 2;
  c.r1 = c.r2 = 1e-3;
  c.ablation = a;
  return c;
}

sew::ModalityBatch tiny_batch(std::uint64_t seed, std::size_t p = 8) {
  sew::Rng rng(seed);
  return {random_matrix(4, p, rng), random_matrix(3, p, rng), sew::testing::random_uniform(1, p, rng, -1, 1)};
}

sew::SewModel tiny_model(const sew::SewConfig& c, std::uint64_t seed) {
  return sew::assemble_sew(c.architecture(), 4, 3, seed);
}

sew::Dataset small_dataset(std::uint64_t seed, std::size_t n) {
  sew::SyntheticSpec spec;
  spec.latent_dim = 3;
  spec.d1 = 4;
  spec.d2 = 3;
  spec.n_samples = n;
  spec.n_dev = 40;
  spec.seed = seed;
  return sew::generate_synthetic(spec).train;
}

double loss_value(const sew::SewModel& m, const sew::ModalityBatch& b, const sew::SewConfig& c) {
  Tape t(false);
  return sew::sew_loss(t, m, b, c).total.value().scalar();
}

}  // namespace

TEST(SewLoss, TotalIsWeightedSumOfComponents) {
  sew::SewConfig c = tiny_config();
  c.alpha = 0.5;
  c.beta = 2.0;
  c.gamma = 0.25;
  const sew::SewModel m = tiny_model(c, 1);
  Tape t;
  const sew::SewLoss l = sew::sew_loss(t, m, tiny_batch(2), c);
  ASSERT_TRUE(l.components.e1 && l.components.e2 && l.components.e3);
  EXPECT_NEAR(l.total.value().scalar(),
              0.5 * *l.components.e1 + 2.0 * *l.components.e2 + 0.25 * *l.components.e3 + l.components.e4, 1e-12);
  EXPECT_GE(*l.components.e1, 0.0);
  EXPECT_GE(*l.components.e2, 0.0);
  EXPECT_GE(l.components.e4, 0.0);
}

TEST(SewLoss, UnimodalIsPredictionErrorOnly) {
  const sew::SewConfig c = tiny_config(sew::Ablation::kUnimodal);
  const sew::SewModel m = tiny_model(c, 1);
  Tape t;
  const sew::SewLoss l = sew::sew_loss(t, m, tiny_batch(3), c);
  EXPECT_FALSE(l.components.e1 || l.components.e2 || l.components.e3);
  EXPECT_EQ(l.total.value().scalar(), l.components.e4);
}

TEST(SewLoss, AblationsReportOnlyTheirTerms) {
  const auto present = [](sew::Ablation a) {
    const sew::SewConfig c = tiny_config(a);
    Tape t;
    const sew::LossComponents lc = sew::sew_loss(t, tiny_model(c, 1), tiny_batch(4), c).components;
    return std::tuple{lc.e1.has_value(), lc.e2.has_value(), lc.e3.has_value()};
  };
  EXPECT_EQ(present(sew::Ablation::kFull), std::tuple(true, true, true));
  EXPECT_EQ(present(sew::Ablation::kNoSd2), std::tuple(true, false, true));
  EXPECT_EQ(present(sew::Ablation::kNoCca), std::tuple(true, true, false));
  EXPECT_EQ(present(sew::Ablation::kNoSd1), std::tuple(false, true, true));
  EXPECT_EQ(present(sew::Ablation::kNoCcaSd1), std::tuple(false, true, false));
}

TEST(SewLoss, ZeroWeightsTouchOnlyWeakerPath) {
  sew::SewConfig c = tiny_config();
  c.alpha = c.beta = c.gamma = 0.0;
  const sew::SewModel m = tiny_model(c, 1);
  const sew::ModalityBatch b = tiny_batch(5);
  Tape t;
  const sew::SewLoss l = sew::sew_loss(t, m, b, c);
  EXPECT_EQ(l.total.value().scalar(), l.components.e4);
  const sew::Gradients g = t.backward(l.total);
  std::vector<const Parameter*> strong;
  m.s_encoder->collect(strong);
  m.s_decoder1->collect(strong);
  m.s_decoder2->collect(strong);
  for (const Parameter* p : strong) EXPECT_FALSE(g.contains(*p)) << p->name;
  std::vector<const Parameter*> weak;
  m.w_encoder.collect(weak);
  for (const Parameter* p : weak) EXPECT_TRUE(g.contains(*p)) << p->name;
}

TEST(SewLoss, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const sew::SewConfig c = tiny_config();
    sew::SewModel m = tiny_model(c, seed);
    const sew::ModalityBatch b = tiny_batch(seed + 100);
    const auto f = [&](Tape& t) { return sew::sew_loss(t, m, b, c).total; };
    const sew::testing::GradCheck gc = sew::testing::check_gradients(f, m.parameters());
    EXPECT_GE(gc.fraction_below(1e-4), 0.99) << "seed " << seed << " max " << gc.max_rel;
  }
}

TEST(SewLoss, RejectsDeploymentModelsAndMissingBlocks) {
  const sew::SewConfig c = tiny_config();
  sew::SewModel m = tiny_model(c, 1);
  Tape t;
  EXPECT_THROW(sew::sew_loss(t, sew::export_deployment(m), tiny_batch(1), c), sew::ConfigError);
  m.s_decoder1.reset();
  EXPECT_THROW(sew::sew_loss(t, m, tiny_batch(1), c), sew::ConfigError);
}

TEST(SewLoss, IllConditionedAlignmentIsSkipped) {
  sew::SewConfig c = tiny_config();
  c.r1 = c.r2 = 0.0;
  const sew::SewModel m = tiny_model(c, 1);
  // Identical samples: zero covariance, so CCA cannot be formed.
  sew::Rng rng(3);
  const Matrix s = random_matrix(4, 1, rng), w = random_matrix(3, 1, rng);
  Matrix ms(4, 8), mw(3, 8);
  for (std::size_t j = 0; j < 8; ++j) {
    for (std::size_t i = 0; i < 4; ++i) ms(i, j) = s(i, 0);
    for (std::size_t i = 0; i < 3; ++i) mw(i, j) = w(i, 0);
  }
  Tape t;
  const sew::SewLoss l = sew::sew_loss(t, m, {ms, mw, Matrix(1, 8, 0.1)}, c);
  EXPECT_TRUE(l.components.cca_skipped);
  EXPECT_FALSE(l.components.e3);
}

TEST(Train, ZeroEpochsReturnsInitialModel) {
  sew::SewConfig c = tiny_config();
  c.epochs = 0;
  const sew::Dataset d = small_dataset(1, 100);
  const sew::TrainResult r = sew::train(c, d, d);
  EXPECT_TRUE(r.history.empty());
  EXPECT_EQ(r.best_epoch, 0u);
  const sew::SewModel init = tiny_model(c, c.seed);
  EXPECT_EQ(r.model.w_encoder.layers()[0].weight.value, init.w_encoder.layers()[0].weight.value);
}

TEST(Train, DeterministicHistories) {
  sew::SewConfig c = tiny_config();
  c.epochs = 3;
  c.lr = 0.01;
  const sew::Dataset d = small_dataset(2, 200);
  const sew::Dataset dev = small_dataset(3, 100);
  const sew::TrainResult a = sew::train(c, d, dev);
  const sew::TrainResult b = sew::train(c, d, dev);
  EXPECT_EQ(sew::metrics_csv(a.history), sew::metrics_csv(b.history));
  EXPECT_EQ(a.model.regressor.output_layer().weight.value, b.model.regressor.output_layer().weight.value);
  c.seed = 1;
  EXPECT_NE(sew::metrics_csv(sew::train(c, d, dev).history), sew::metrics_csv(a.history));
}

// With the auxiliary losses switched off, the full model's weaker path must
// follow the unimodal trajectory exactly.
TEST(Train, ZeroWeightsReproduceUnimodal) {
  sew::SewConfig full = tiny_config();
  full.alpha = full.beta = full.gamma = 0.0;
  full.epochs = 3;
  full.lr = 0.01;
  sew::SewConfig uni = full;
  uni.ablation = sew::Ablation::kUnimodal;
  const sew::Dataset d = small_dataset(4, 200);
  const sew::Dataset dev = small_dataset(5, 100);
  const sew::TrainResult a = sew::train(full, d, dev);
  const sew::TrainResult b = sew::train(uni, d, dev);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].e4, b.history[i].e4);
    EXPECT_EQ(a.history[i].dev_ccc, b.history[i].dev_ccc);
  }
}

TEST(Train, HistoryInvariants) {
  sew::SewConfig c = tiny_config();
  c.epochs = 4;
  c.lr = 0.01;
  const sew::Dataset d = small_dataset(6, 200);
  const sew::TrainResult r = sew::train(c, d, small_dataset(7, 100));
  ASSERT_EQ(r.history.size(), 4u);
  for (std::size_t i = 0; i < r.history.size(); ++i) {
    const sew::EpochReport& e = r.history[i];
    EXPECT_EQ(e.epoch, i + 1);
    EXPECT_GE(*e.e1, 0.0);
    EXPECT_GE(*e.e2, 0.0);
    EXPECT_GE(e.e4, 0.0);
    EXPECT_LE(std::abs(e.dev_ccc), 1.0 + 1e-12);
    EXPECT_GE(e.dev_acc, 0.0);
    EXPECT_LE(e.dev_acc, 100.0);
  }
  double best = -2.0;
  for (const sew::EpochReport& e : r.history) best = std::max(best, e.dev_ccc);
  EXPECT_EQ(r.best_dev_ccc, best);
  EXPECT_EQ(r.history[r.best_epoch - 1].dev_ccc, best);
}

TEST(Train, DivergenceReportsContext) {
  sew::SewConfig c = tiny_config();
  c.epochs = 50;
  c.lr = 1e6;
  c.momentum = 0.9;
  c.patience = 0;
  const sew::Dataset d = small_dataset(8, 200);
  try {
    sew::train(c, d, d);
    FAIL() << "expected divergence";
  } catch (const sew::TrainingError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("epoch"), std::string::npos) << msg;
    EXPECT_NE(msg.find("batch"), std::string::npos) << msg;
  }
}

TEST(Train, DeploymentPathIgnoresStrongerModality) {
  sew::SewConfig c = tiny_config();
  c.epochs = 2;
  const sew::Dataset d = small_dataset(9, 150);
  const sew::TrainResult r = sew::train(c, d, d);
  const sew::EvalResult a = sew::evaluate(r.model, d.weak, d.labels);
  const sew::EvalResult b = sew::evaluate(sew::export_deployment(r.model), d.weak, d.labels);
  EXPECT_EQ(a.ccc, b.ccc);
  EXPECT_EQ(a.binary_accuracy, b.binary_accuracy);
}

TEST(Ablation, TableHasSixRowsInOrder) {
  sew::SewConfig c = tiny_config();
  c.epochs = 1;
  const sew::Dataset d = small_dataset(10, 120);
  const std::vector<sew::AblationRow> rows = sew::run_ablation_suite(c, d, d, {0, 1}, false);
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(rows[i].ablation, sew::kAllAblations[i]);
    EXPECT_EQ(rows[i].ccc.size(), 2u);
  }
  const std::string csv = sew::ablation_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "variant,ccc,acc");
  for (const char* label : {"full", "-S_D2", "-CCA", "-S_D1", "-(CCA&S_D1)", "unimodal"})
    EXPECT_NE(csv.find(std::string("\n") + label + ","), std::string::npos) << label;
  // Parallel and serial execution agree.
  const std::vector<sew::AblationRow> par = sew::run_ablation_suite(c, d, d, {0, 1}, true);
  EXPECT_EQ(sew::ablation_csv(par), csv);
}

TEST(Ablation, StrippedModelEqualsUnimodal) {
  sew::SewConfig c = tiny_config();
  c.epochs = 2;
  c.lr = 0.01;
  const sew::Dataset d = small_dataset(11, 150);
  const auto rows = sew::run_ablation_suite(c, d, d, {3}, false);
  // -(CCA&S_D1) keeps S_E/S_D2, but nothing links them to W_E or R.
  EXPECT_EQ(rows[4].ccc, rows[5].ccc);
}

TEST(Median, OddEven) {
  EXPECT_EQ(sew::median({3, 1, 2}), 2.0);
  EXPECT_EQ(sew::median({4, 1, 2, 3}), 2.5);
}

TEST(MetricsCsv, EmptyFieldsForAbsentTerms) {
  sew::EpochReport r;
  r.epoch = 1;
  r.e4 = 0.5;
  r.dev_ccc = 0.25;
  r.dev_acc = 60;
  EXPECT_EQ(sew::metrics_csv({r}), "epoch,e1,e2,e3,e4,dev_ccc,dev_acc\n1,,,,0.500000,0.250000,60.0000\n");
}
