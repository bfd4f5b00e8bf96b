// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <mutex>
#include <optional>
#include <sstream>

#include "sew/config.hpp"
#include "sew/data.hpp"
#include "sew/error.hpp"
#include "sew/rng.hpp"
#include "sew/serialize.hpp"
#include "sew/training.hpp"

namespace sew::cli {
namespace fs = std::filesystem;
namespace {

constexpr const char* kSplitFiles[] = {"train_strong.csv", "train_weak.csv", "train_labels.csv",
                                       "dev_strong.csv",   "dev_weak.csv",   "dev_labels.csv"};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::uint64_t dataset_fingerprint(const fs::path& dir) {
  std::uint64_t h = fnv1a("");
  for (const char* name : kSplitFiles) h = fnv1a(read_file(dir / name), fnv1a(name, h));
  return h;
}

struct Splits {
  Dataset train;
  Dataset dev;
};

Splits load_splits(const fs::path& dir, const CsvSchema& schema) {
  const auto load = [&](const std::string& prefix) {
    return align_modalities(read_csv_matrix(dir / (prefix + "_strong.csv")), read_csv_matrix(dir / (prefix + "_weak.csv")),
                            read_csv_matrix(dir / (prefix + "_labels.csv")), schema);
  };
  return {load("train"), load("dev")};
}

/// Resolved config + dataset fingerprint, written before any training.
std::string write_manifest(const fs::path& out_dir, const std::string& config_path, const SewConfig& config,
                           const std::string& command) {
  const std::string config_text = config_to_text(config);
  const std::uint64_t data_hash = dataset_fingerprint(config.data_dir);
  const std::string id = hex(fnv1a(config_text, fnv1a(command, data_hash)));
  const nlohmann::json manifest = {{"manifest_id", id},
                                   {"command", command},
                                   {"config_path", config_path},
                                   {"config", config_text},
                                   {"dataset_dir", config.data_dir.generic_string()},
                                   {"dataset_fingerprint", hex(data_hash)},
                                   {"output_dir", out_dir.generic_string()},
                                   {"created", timestamp()}};
  write_file(out_dir / "manifest.json", manifest.dump(1) + "\n");
  return id;
}

std::string gnuplot_metrics(const std::vector<EpochReport>& history) {
  std::ostringstream os;
  os << "# epoch e4 dev_ccc dev_acc\n";
  for (const EpochReport& r : history) os << r.epoch << ' ' << r.e4 << ' ' << r.dev_ccc << ' ' << r.dev_acc << '\n';
  return os.str();
}

// --- gen-data -------------------------------------------------------------------

struct GenDataArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_samples, n_dev, latent_dim, d1, d2, mixing_depth;
  std::optional<double> noise_strong, noise_weak, weak_info_loss, label_noise;
};

int cmd_gen_data(const GenDataArgs& a, std::ostream& out) {
  SyntheticSpec spec = a.config.empty() ? SyntheticSpec{} : load_synthetic_spec(a.config);
  if (a.seed) spec.seed = *a.seed;
  if (a.n_samples) spec.n_samples = *a.n_samples;
  if (a.n_dev) spec.n_dev = *a.n_dev;
  if (a.latent_dim) spec.latent_dim = *a.latent_dim;
  if (a.d1) spec.d1 = *a.d1;
  if (a.d2) spec.d2 = *a.d2;
  if (a.mixing_depth) spec.mixing_depth = *a.mixing_depth;
  if (a.noise_strong) spec.noise_strong = *a.noise_strong;
  if (a.noise_weak) spec.noise_weak = *a.noise_weak;
  if (a.weak_info_loss) spec.weak_info_loss = *a.weak_info_loss;
  if (a.label_noise) spec.label_noise = *a.label_noise;

  const SyntheticData data = generate_synthetic(spec);
  const fs::path dir(a.out);
  make_dir(dir);
  write_csv_matrix(dir / "train_strong.csv", data.train.strong, "s");
  write_csv_matrix(dir / "train_weak.csv", data.train.weak, "w");
  write_csv_matrix(dir / "train_labels.csv", data.train.labels, "label");
  write_csv_matrix(dir / "dev_strong.csv", data.dev.strong, "s");
  write_csv_matrix(dir / "dev_weak.csv", data.dev.weak, "w");
  write_csv_matrix(dir / "dev_labels.csv", data.dev.labels, "label");

  const nlohmann::json manifest = {{"generator", "synthetic"},
                                   {"latent_dim", spec.latent_dim},
                                   {"d1", spec.d1},
                                   {"d2", spec.d2},
                                   {"noise_strong", spec.noise_strong},
                                   {"noise_weak", spec.noise_weak},
                                   {"weak_info_loss", spec.weak_info_loss},
                                   {"mixing_depth", spec.mixing_depth},
                                   {"label_noise", spec.label_noise},
                                   {"n_samples", spec.n_samples},
                                   {"n_dev", spec.n_dev},
                                   {"seed", spec.seed},
                                   {"hidden_coordinates", data.hidden_coordinates},
                                   {"description", data.description},
                                   {"fingerprint", hex(dataset_fingerprint(dir))}};
  write_file(dir / "dataset.json", manifest.dump(1) + "\n");

  // Starter run config: synthetic labels are already aligned, so no shift.
  SewConfig run;
  run.data_dir = ".";
  run.schema.shift_seconds = 0.0;
  const std::size_t latent = spec.latent_dim * 2;
  run.latent_dim = latent;
  run.weak_encoder = MlpSpec{{2 * spec.d2, latent}};
  run.strong_encoder = MlpSpec{{2 * spec.d1, latent}};
  run.strong_decoder = MlpSpec{{2 * spec.d1, spec.d1}};
  run.k = std::min<std::size_t>(run.k, latent);
  run.gru_layers = 2;
  run.gru_hidden = 32;
  write_file(dir / "run.cfg", "# generated by sew gen-data\n" + config_to_text(run));

  out << "wrote synthetic dataset to " << dir.generic_string() << " (" << spec.n_samples << " train, " << spec.n_dev
      << " dev): " << data.description << '\n';
  return 0;
}

// --- train / ablate ------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::string data;
  bool gnuplot = false;
};

SewConfig resolve_config(const RunArgs& a) {
  SewConfig c = load_config(a.config);
  if (a.seed) c.seed = *a.seed;
  if (a.epochs) c.epochs = *a.epochs;
  if (!a.data.empty()) c.data_dir = a.data;
  if (c.data_dir.empty()) throw ConfigError("config key 'data_dir' is not set (or pass --data)");
  c.validate();
  return c;
}

int cmd_train(const RunArgs& a, std::ostream& out) {
  const SewConfig config = resolve_config(a);
  const fs::path dir(a.out);
  make_dir(dir);
  const std::string id = write_manifest(dir, a.config, config, "train");
  const Splits splits = load_splits(config.data_dir, config.schema);

  const TrainResult result = train(config, splits.train, splits.dev);
  write_file(dir / "metrics.csv", "# manifest=" + id + "\n" + metrics_csv(result.history));
  save_model(result.model, dir / "model.json", id);
  if (a.gnuplot) write_file(dir / "metrics.dat", gnuplot_metrics(result.history));
  out << "trained " << ablation_name(config.ablation) << " for " << result.history.size() << " epochs; best epoch "
      << result.best_epoch << " dev CCC " << std::fixed << std::setprecision(4) << result.best_dev_ccc << '\n';
  return 0;
}

struct AblateArgs {
  RunArgs run;
  std::size_t seeds = 1;
  bool serial = false;
};

int cmd_ablate(const AblateArgs& a, std::ostream& out) {
  const SewConfig config = resolve_config(a.run);
  if (a.seeds == 0) throw ConfigError("--seeds must be >= 1");
  const fs::path dir(a.run.out);
  make_dir(dir);
  const std::string id = write_manifest(dir, a.run.config, config, "ablate");
  const Splits splits = load_splits(config.data_dir, config.schema);

  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < a.seeds; ++i) seeds.push_back(config.seed + i);
  const std::vector<AblationRow> rows = run_ablation_suite(config, splits.train, splits.dev, seeds, !a.serial);

  for (const AblationRow& row : rows) {
    const fs::path sub = dir / std::string(ablation_name(row.ablation));
    make_dir(sub);
    for (std::size_t i = 0; i < row.runs.size(); ++i) {
      write_file(sub / ("metrics_seed" + std::to_string(seeds[i]) + ".csv"),
                 "# manifest=" + id + "\n" + metrics_csv(row.runs[i].history));
    }
  }
  write_file(dir / "ablation.csv", "# manifest=" + id + "\n" + ablation_csv(rows));
  const std::string table = ablation_text(rows);
  write_file(dir / "ablation.txt", table);
  if (a.run.gnuplot) {
    std::ostringstream dat;
    dat << "# index variant ccc acc\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      dat << i << " \"" << ablation_label(rows[i].ablation) << "\" " << rows[i].median_ccc() << ' '
          << rows[i].median_acc() << '\n';
    }
    write_file(dir / "ablation.dat", dat.str());
  }
  out << table;
  return 0;
}

// --- eval / export ---------------------------------------------------------------

struct EvalArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string model, weak, labels, truth, pred, strong;
  std::optional<double> shift_seconds, frame_step;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  if (!a.strong.empty()) {
    throw ContractError("eval runs the deployment path and takes only weaker-modality features; drop --strong");
  }
  EvalResult result;
  if (!a.truth.empty() || !a.pred.empty()) {
    if (a.truth.empty() || a.pred.empty()) throw ConfigError("--truth and --pred must be given together");
    const Matrix truth = read_csv_matrix(a.truth);
    const Matrix pred = read_csv_matrix(a.pred);
    if (truth.rows() != 1 || pred.rows() != 1) throw IngestionError("--truth and --pred must be single-column CSVs");
    result = evaluate_predictions(truth.data(), pred.data());
  } else {
    if (a.model.empty() || a.weak.empty() || a.labels.empty()) {
      throw ConfigError("eval needs --model, --weak and --labels (or --truth and --pred)");
    }
    CsvSchema schema;
    VarianceEstimator estimator = VarianceEstimator::kPopulation;
    if (!a.config.empty()) {
      const SewConfig c = load_config(a.config);
      schema = c.schema;
      estimator = c.ccc_estimator;
    }
    if (a.shift_seconds) schema.shift_seconds = *a.shift_seconds;
    if (a.frame_step) schema.frame_step_seconds = *a.frame_step;
    const SewModel model = load_model(a.model);
    const AlignedTable table = load_csv(a.weak, a.labels, schema);
    result = evaluate(model, table.features, table.labels, estimator);
  }
  std::ostringstream row;
  row << std::fixed << std::setprecision(4) << result.ccc << ',' << std::setprecision(2) << result.binary_accuracy
      << ',' << result.n;
  out << "ccc,acc,n\n" << row.str() << '\n';
  if (result.degenerate) out << "# degenerate input: zero CCC denominator\n";
  if (!a.out.empty()) write_file(a.out, "ccc,acc,n\n" + row.str() + "\n");
  return 0;
}

int cmd_export(const std::string& model_path, const std::string& out_path, std::ostream& out) {
  const SewModel full = load_model(model_path);
  const SewModel deployed = export_deployment(full);
  save_model(deployed, out_path);
  out << "wrote deployment model (W_E + R) to " << out_path << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"sew: train a weaker-modality model with help from a stronger modality"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic paired-modality dataset");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--config", gen.config, "Synthetic spec file (key = value)");
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--n-samples", gen.n_samples, "Training samples");
  gen_cmd->add_option("--n-dev", gen.n_dev, "Development samples");
  gen_cmd->add_option("--latent-dim", gen.latent_dim, "Shared latent dimension");
  gen_cmd->add_option("--d1", gen.d1, "Stronger-modality dimension");
  gen_cmd->add_option("--d2", gen.d2, "Weaker-modality dimension");
  gen_cmd->add_option("--mixing-depth", gen.mixing_depth, "tanh mixing layers");
  gen_cmd->add_option("--noise-strong", gen.noise_strong, "Stronger-modality noise std");
  gen_cmd->add_option("--noise-weak", gen.noise_weak, "Weaker-modality noise std");
  gen_cmd->add_option("--weak-info-loss", gen.weak_info_loss, "Fraction of latent hidden from the weaker view");
  gen_cmd->add_option("--label-noise", gen.label_noise, "Gaussian noise std on training labels");

  const auto add_run_opts = [](CLI::App* cmd, RunArgs& r) {
    cmd->add_option("--config", r.config, "Run config file")->required();
    cmd->add_option("--out", r.out, "Output directory")->required();
    cmd->add_option("--seed", r.seed, "Override the config seed");
    cmd->add_option("--epochs", r.epochs, "Override the config epoch count");
    cmd->add_option("--data", r.data, "Override the config data_dir");
    cmd->add_flag("--gnuplot", r.gnuplot, "Also write gnuplot-friendly .dat files");
  };
  RunArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train one variant; writes metrics.csv and model.json");
  add_run_opts(train_cmd, train_args);

  AblateArgs ablate_args;
  auto* ablate_cmd = app.add_subcommand("ablate", "Train all six ablation variants; writes ablation.csv");
  add_run_opts(ablate_cmd, ablate_args.run);
  ablate_cmd->add_option("--seeds", ablate_args.seeds, "Number of consecutive seeds (medians are reported)");
  ablate_cmd->add_flag("--serial", ablate_args.serial, "Run variants one after another");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score a model on weaker-modality data, or two label CSVs");
  eval_cmd->add_option("--model", eval.model, "Model file (full or deployment)");
  eval_cmd->add_option("--weak", eval.weak, "Weaker-modality feature CSV");
  eval_cmd->add_option("--labels", eval.labels, "Label CSV");
  eval_cmd->add_option("--strong", eval.strong, "Not accepted: deployment needs no stronger modality");
  eval_cmd->add_option("--truth", eval.truth, "Single-column CSV of true labels");
  eval_cmd->add_option("--pred", eval.pred, "Single-column CSV of predictions");
  eval_cmd->add_option("--config", eval.config, "Run config (label shift, CCC estimator)");
  eval_cmd->add_option("--out", eval.out, "Write the result row to this CSV");
  eval_cmd->add_option("--seed", eval.seed, "Unused; accepted for interface symmetry");
  eval_cmd->add_option("--shift-seconds", eval.shift_seconds, "Label shift in seconds");
  eval_cmd->add_option("--frame-step", eval.frame_step, "Frame step in seconds");

  std::string export_model, export_out, export_config;
  std::optional<std::uint64_t> export_seed;
  auto* export_cmd = app.add_subcommand("export", "Strip a trained model down to W_E + R");
  export_cmd->add_option("--model", export_model, "Trained model file")->required();
  export_cmd->add_option("--out", export_out, "Deployment model file")->required();
  export_cmd->add_option("--config", export_config, "Unused; accepted for interface symmetry");
  export_cmd->add_option("--seed", export_seed, "Unused; accepted for interface symmetry");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*gen_cmd) return cmd_gen_data(gen, out);
    if (*train_cmd) return cmd_train(train_args, out);
    if (*ablate_cmd) return cmd_ablate(ablate_args, out);
    if (*eval_cmd) return cmd_eval(eval, out);
    if (*export_cmd) return cmd_export(export_model, export_out, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace sew::cli
