// SPDX-License-Identifier: Apache-2.0
#include "sew/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <numeric>
#include <sstream>

#include "sew/dcca.hpp"
#include "sew/error.hpp"
#include "sew/log.hpp"
#include "sew/optim.hpp"
#include "sew/rng.hpp"

namespace sew {
namespace {

void require_blocks(const SewModel& model, Ablation ablation) {
  const BlockSet need = blocks_for(ablation);
  const auto missing = [&](bool needed, bool present, const char* block) {
    if (needed && !present) {
      throw ConfigError("ablation '" + std::string(ablation_name(ablation)) + "' uses block " + block +
                        ", which the model does not have");
    }
  };
  missing(need.s_decoder1, model.s_decoder1.has_value(), "S_D1");
  missing(need.s_encoder, model.s_encoder.has_value(), "S_E");
  missing(need.s_decoder2, model.s_decoder2.has_value(), "S_D2");
  if (model.deployment) throw ConfigError("cannot train a deployment model");
}

std::string describe(const LossComponents& c) {
  std::ostringstream os;
  const auto opt = [&os](const char* name, const std::optional<double>& v) {
    os << ' ' << name << '=';
    if (v) os << *v;
    else os << '-';
  };
  opt("e1", c.e1);
  opt("e2", c.e2);
  opt("e3", c.e3);
  os << " e4=" << c.e4;
  return os.str();
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  count = std::min(count, n);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

struct Sums {
  double e1 = 0.0, e2 = 0.0, e3 = 0.0, e4 = 0.0;
  std::size_t n1 = 0, n2 = 0, n3 = 0, n4 = 0;

  void add(const LossComponents& c) {
    if (c.e1) e1 += *c.e1, ++n1;
    if (c.e2) e2 += *c.e2, ++n2;
    if (c.e3) e3 += *c.e3, ++n3;
    e4 += c.e4;
    ++n4;
  }
  static std::optional<double> mean(double s, std::size_t n) {
    return n ? std::optional<double>(s / static_cast<double>(n)) : std::nullopt;
  }
};

}  // namespace

SewLoss sew_loss(Tape& tape, const SewModel& model, const ModalityBatch& batch, const SewConfig& config,
                 const ModalityBatch* cca_batch) {
  require_blocks(model, config.ablation);
  const BlockSet blocks = blocks_for(config.ablation);
  LossComponents comp;

  const Var m_w = tape.constant(batch.m_w);
  const Var m_sw = model.w_encoder.forward(tape, m_w);
  const Var l4 = mse_loss(model.regressor.forward(tape, m_sw), batch.labels);
  comp.e4 = l4.value().scalar();

  std::vector<Var> weighted;
  if (blocks.s_decoder1) {
    const Var l1 = mse_loss(model.s_decoder1->forward(tape, m_sw), batch.m_s);
    comp.e1 = l1.value().scalar();
    if (config.alpha != 0.0) weighted.push_back(scalar_mul(l1, config.alpha));
  }
  std::optional<Var> m_ss;
  if (blocks.s_encoder) m_ss = model.s_encoder->forward(tape, tape.constant(batch.m_s));
  if (blocks.s_decoder2) {
    const Var l2 = mse_loss(model.s_decoder2->forward(tape, *m_ss), batch.m_s);
    comp.e2 = l2.value().scalar();
    if (config.beta != 0.0) weighted.push_back(scalar_mul(l2, config.beta));
  }
  if (blocks.cca) {
    try {
      Var view_s = *m_ss;
      Var view_w = m_sw;
      if (cca_batch != nullptr) {
        view_s = model.s_encoder->forward(tape, tape.constant(cca_batch->m_s));
        view_w = model.w_encoder.forward(tape, tape.constant(cca_batch->m_w));
      }
      const Var l3 = cca_alignment_loss(view_s, view_w, config.cca());
      comp.e3 = l3.value().scalar();
      if (config.gamma != 0.0) weighted.push_back(scalar_mul(l3, config.gamma));
    } catch (const ConditioningError& e) {
      comp.cca_skipped = true;
      log::info("skipping alignment term for this batch: ", e.what());
    }
  }

  Var total = l4;
  for (const Var& term : weighted) total = elementwise_add(term, total);
  comp.total = total.value().scalar();
  return {total, comp};
}

EvalResult evaluate(const SewModel& model, const Matrix& raw_weak, const Matrix& labels,
                    VarianceEstimator estimator) {
  const Matrix pred = model.predict_raw(raw_weak);
  return evaluate_predictions(labels.data(), pred.data(), estimator);
}

TrainResult train(const SewConfig& config, const Dataset& train_set, const Dataset& dev_set,
                  const EpochCallback& on_epoch) {
  config.validate();
  const std::size_t d1 = train_set.strong_dim();
  const std::size_t d2 = train_set.weak_dim();
  if (dev_set.weak_dim() != d2) {
    throw ConfigError("dev split has " + std::to_string(dev_set.weak_dim()) + " weaker features, training split has " +
                      std::to_string(d2));
  }

  const FeatureScaler strong_scaler = FeatureScaler::fit(train_set.strong);
  const FeatureScaler weak_scaler = FeatureScaler::fit(train_set.weak);
  const Dataset data(strong_scaler.apply(train_set.strong), weak_scaler.apply(train_set.weak), train_set.labels);

  TrainResult result;
  SewModel model = assemble_sew(config.architecture(), d1, d2, config.seed);
  model.weak_scaler = weak_scaler;
  result.model = model;
  if (config.epochs == 0) return result;

  std::vector<Parameter*> params = model.parameters();
  SgdState sgd(config.sgd(), params);
  Batcher batcher(data, config.batch_size, derive_seed(config.seed, "batches"), /*shuffle=*/true);
  Rng pool_rng(derive_seed(config.seed, "cca_pool"));

  result.best_dev_ccc = -std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    batcher.start_epoch(epoch - 1);
    Sums sums;
    std::size_t skipped = 0;
    std::size_t batch_index = 0;
    while (auto batch = batcher.next()) {
      ++batch_index;
      std::optional<ModalityBatch> pool;
      if (config.cca_batch_size > 0 && blocks_for(config.ablation).cca) {
        pool = data.gather(sample_without_replacement(data.size(), config.cca_batch_size, pool_rng));
      }
      LossComponents comp;
      try {
        Tape tape;
        SewLoss loss = sew_loss(tape, model, *batch, config, pool ? &*pool : nullptr);
        comp = loss.components;
        const Gradients grads = tape.backward(loss.total);
        grads.store_into(params);
        if (config.clip_norm > 0.0) clip_grad_norm(params, config.clip_norm);
        sgd_step(params, sgd);
      } catch (const NumericError& e) {
        std::ostringstream os;
        os << "training diverged at epoch " << epoch << ", batch " << batch_index << ":" << describe(comp) << " ("
           << e.what() << ")";
        throw TrainingError(os.str());
      }
      skipped += comp.cca_skipped ? 1 : 0;
      sums.add(comp);
    }

    const EvalResult dev = evaluate(model, dev_set.weak, dev_set.labels, config.ccc_estimator);
    EpochReport report{epoch,
                       Sums::mean(sums.e1, sums.n1),
                       Sums::mean(sums.e2, sums.n2),
                       Sums::mean(sums.e3, sums.n3),
                       sums.e4 / static_cast<double>(std::max<std::size_t>(sums.n4, 1)),
                       dev.ccc,
                       dev.binary_accuracy,
                       skipped};
    if (skipped > 0) log::warn("epoch ", epoch, ": alignment term skipped on ", skipped, " batches");
    log::info("epoch ", epoch, " e4=", report.e4, " dev_ccc=", report.dev_ccc, " dev_acc=", report.dev_acc);
    result.history.push_back(report);
    if (on_epoch) on_epoch(report);

    if (dev.ccc > result.best_dev_ccc) {
      result.best_dev_ccc = dev.ccc;
      result.best_epoch = epoch;
      result.model = model;
      since_best = 0;
    } else if (config.patience > 0 && ++since_best >= config.patience) {
      log::info("early stop after epoch ", epoch, " (best ", result.best_epoch, ")");
      break;
    }
  }
  return result;
}

SewModel export_deployment(const SewModel& model) {
  if (model.w_encoder.layers().empty()) throw ContractError("export: model has no weaker-modality encoder W_E");
  if (model.regressor.cells().empty()) throw ContractError("export: model has no regressor R");
  SewModel out;
  out.d1 = model.d1;
  out.d2 = model.d2;
  out.latent_dim = model.latent_dim;
  out.ablation = model.ablation;
  out.deployment = true;
  out.w_encoder = model.w_encoder;
  out.regressor = model.regressor;
  out.weak_scaler = model.weak_scaler;
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double AblationRow::median_ccc() const { return median(ccc); }
double AblationRow::median_acc() const { return median(acc); }

std::vector<AblationRow> run_ablation_suite(const SewConfig& config, const Dataset& train_set, const Dataset& dev_set,
                                            const std::vector<std::uint64_t>& seeds, bool parallel) {
  if (seeds.empty()) throw ConfigError("ablation suite needs at least one seed");
  const auto run_variant = [&](Ablation ablation) {
    AblationRow row;
    row.ablation = ablation;
    for (const std::uint64_t seed : seeds) {
      SewConfig c = config;
      c.ablation = ablation;
      c.seed = seed;
      TrainResult r = train(c, train_set, dev_set);
      const EvalResult best = evaluate(r.model, dev_set.weak, dev_set.labels, c.ccc_estimator);
      row.ccc.push_back(best.ccc);
      row.acc.push_back(best.binary_accuracy);
      row.runs.push_back(std::move(r));
    }
    return row;
  };

  std::vector<AblationRow> rows;
  if (parallel) {
    std::vector<std::future<AblationRow>> jobs;
    for (const Ablation a : kAllAblations) jobs.push_back(std::async(std::launch::async, run_variant, a));
    for (auto& j : jobs) rows.push_back(j.get());
  } else {
    for (const Ablation a : kAllAblations) rows.push_back(run_variant(a));
  }
  return rows;
}

namespace {

std::string fmt(double v, const char* f = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

}  // namespace

std::string metrics_csv(const std::vector<EpochReport>& history) {
  std::string out = "epoch,e1,e2,e3,e4,dev_ccc,dev_acc\n";
  for (const EpochReport& r : history) {
    out += std::to_string(r.epoch) + ',' + fmt(r.e1) + ',' + fmt(r.e2) + ',' + fmt(r.e3) + ',' + fmt(r.e4) + ',' +
           fmt(r.dev_ccc) + ',' + fmt(r.dev_acc, "%.4f") + '\n';
  }
  return out;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out = "variant,ccc,acc\n";
  for (const AblationRow& r : rows) {
    out += std::string(ablation_label(r.ablation)) + ',' + fmt(r.median_ccc(), "%.4f") + ',' +
           fmt(r.median_acc(), "%.2f") + '\n';
  }
  return out;
}

std::string ablation_text(const std::vector<AblationRow>& rows) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-14s %8s %8s\n", "variant", "CCC", "Acc");
  out += line;
  for (const AblationRow& r : rows) {
    std::snprintf(line, sizeof(line), "%-14s %8.4f %8.2f\n", std::string(ablation_label(r.ablation)).c_str(),
                  r.median_ccc(), r.median_acc());
    out += line;
  }
  return out;
}

}  // namespace sew
