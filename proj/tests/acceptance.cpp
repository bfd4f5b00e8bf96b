// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Every tolerance and runtime budget is a constant below.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "sew/config.hpp"
#include "sew/dcca.hpp"
#include "sew/kernels.hpp"
#include "sew/metrics.hpp"
#include "sew/serialize.hpp"
#include "sew/training.hpp"
#include "support/fd.hpp"
#include "support/random.hpp"

namespace fs = std::filesystem;
using sew::Matrix;
using sew::Parameter;
using sew::Tape;
using sew::Var;
using sew::testing::random_matrix;

namespace {

// AC1
constexpr double kGradRelTol = 1e-4;
constexpr double kGradPassFraction = 0.99;
constexpr int kGradSeeds = 10;
constexpr double kGradBudgetS = 30;
// AC2
constexpr double kCcaTol = 1e-8;
constexpr int kCcaInstances = 20;
constexpr double kCcaBudgetS = 10;
// AC3
constexpr double kCccTol = 1e-12;
constexpr double kCccBudgetS = 1;
// AC4 / AC5. Calibrated once on seeds 0-4 with the shipped configs: median
// dev CCC full 0.2320, unimodal 0.2106 (gap 0.0214). Frozen at about half.
constexpr double kMinSewMargin = 0.01;
constexpr int kAblationSeeds = 5;
constexpr double kAblationBudgetS = 600;
// AC6
constexpr double kExportTol = 1e-12;
constexpr std::size_t kExportSamples = 1000;
constexpr double kExportBudgetS = 5;
// AC7
constexpr double kShiftBudgetS = 1;
// AC8
constexpr double kDeterminismBudgetS = 120;

const fs::path kConfigDir = fs::path(SEW_SOURCE_DIR) / "configs";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void report(const char* id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    o.pass = false;
    o.detail += fmt(" [over runtime budget %.0f s]", budget_s);
  }
  if (!o.pass) ++failures;
  std::printf("%s %s %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

// ---------------------------------------------------------------- AC1

Outcome gradient_correctness() {
  sew::SewConfig c;
  c.weak_encoder = sew::MlpSpec{{4, 2}};
  c.strong_encoder = sew::MlpSpec{{4, 2}};
  c.strong_decoder = sew::MlpSpec{{4, 4}};
  c.gru_layers = 2;
  c.gru_hidden = 3;
  c.k = 2;

  const char* names[] = {"translation", "autoencoding", "alignment", "prediction", "combined"};
  std::vector<std::vector<double>> errors(5);
  for (int seed = 0; seed < kGradSeeds; ++seed) {
    sew::SewModel m = sew::assemble_sew(c.architecture(), 4, 3, static_cast<std::uint64_t>(seed));
    sew::Rng rng(static_cast<std::uint64_t>(seed) + 1000);
    const sew::ModalityBatch b(random_matrix(4, 8, rng), random_matrix(3, 8, rng),
                               sew::testing::random_uniform(1, 8, rng, -1, 1));
    const auto params = [](auto&... blocks) {
      std::vector<Parameter*> out;
      (blocks.collect(out), ...);
      return out;
    };
    const std::vector<std::pair<sew::testing::LossFn, std::vector<Parameter*>>> cases = {
        {[&](Tape& t) { return sew::mse_loss(m.s_decoder1->forward(t, m.w_encoder.forward(t, t.constant(b.m_w))), b.m_s); },
         params(m.w_encoder, *m.s_decoder1)},
        {[&](Tape& t) { return sew::mse_loss(m.s_decoder2->forward(t, m.s_encoder->forward(t, t.constant(b.m_s))), b.m_s); },
         params(*m.s_encoder, *m.s_decoder2)},
        {[&](Tape& t) {
           return sew::cca_alignment_loss(m.s_encoder->forward(t, t.constant(b.m_s)),
                                          m.w_encoder.forward(t, t.constant(b.m_w)), c.cca());
         },
         params(*m.s_encoder, m.w_encoder)},
        {[&](Tape& t) { return sew::mse_loss(m.regressor.forward(t, m.w_encoder.forward(t, t.constant(b.m_w))), b.labels); },
         params(m.w_encoder, m.regressor)},
        {[&](Tape& t) { return sew::sew_loss(t, m, b, c).total; }, m.parameters()},
    };
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const sew::testing::GradCheck gc = sew::testing::check_gradients(cases[i].first, cases[i].second);
      errors[i].insert(errors[i].end(), gc.rel_errors.begin(), gc.rel_errors.end());
    }
  }
  Outcome o{true, ""};
  for (std::size_t i = 0; i < 5; ++i) {
    const auto ok = std::count_if(errors[i].begin(), errors[i].end(), [](double e) { return e < kGradRelTol; });
    const double frac = static_cast<double>(ok) / static_cast<double>(errors[i].size());
    o.pass = o.pass && frac >= kGradPassFraction;
    const double worst = *std::max_element(errors[i].begin(), errors[i].end());
    o.detail += fmt("%s%s %.4f of %zu (max %.1e)", i ? ", " : "", names[i], frac, errors[i].size(), worst);
  }
  o.detail += fmt(" entries below rel %.0e (need >= %.2f)", kGradRelTol, kGradPassFraction);
  return o;
}

// ---------------------------------------------------------------- AC2

double rho(const Matrix& s, const Matrix& w, std::size_t k) {
  Tape t(false);
  return sew::cca_correlation(t.constant(s), t.constant(w), {k, 0.0, 0.0}).value().scalar();
}

Outcome cca_oracle_equivalence() {
  double worst_oracle = 0, worst_identity = 0, worst_invariance = 0;
  for (int i = 0; i < kCcaInstances; ++i) {
    sew::Rng rng(static_cast<std::uint64_t>(i) + 77);
    const std::size_t d = 1 + static_cast<std::size_t>(i) % 6;
    const std::size_t p = 500;
    const std::size_t k = 1 + rng.below(d);
    const Matrix z = random_matrix(d, p, rng);
    const Matrix s = sew::kernels::matmul(random_matrix(d, d, rng), z) + random_matrix(d, p, rng, 0.7);
    const Matrix w = sew::kernels::matmul(random_matrix(d, d, rng), z) + random_matrix(d, p, rng, 1.3);

    const std::vector<double> oc = sew::classical_cca_oracle(s, w, k);
    const double r = rho(s, w, k);
    worst_oracle = std::max(worst_oracle, std::abs(r - std::accumulate(oc.begin(), oc.end(), 0.0)));
    worst_identity = std::max(worst_identity, std::abs(rho(s, s, d) - static_cast<double>(d)));
    const Matrix a = random_matrix(d, d, rng) + 3.0 * Matrix::identity(d);
    worst_invariance = std::max(worst_invariance, std::abs(rho(sew::kernels::matmul(a, s), w, k) - r));
    worst_invariance = std::max(worst_invariance, std::abs(rho(s, sew::kernels::matmul(a, w), k) - r));
  }
  const bool pass = worst_oracle < kCcaTol && worst_identity < kCcaTol && worst_invariance < kCcaTol;
  return {pass, fmt("%d instances, max |rho - oracle| %.2e, max |rho(x,x) - K| %.2e, max invariance gap %.2e (tol %.0e)",
                    kCcaInstances, worst_oracle, worst_identity, worst_invariance, kCcaTol)};
}

// ---------------------------------------------------------------- AC3

Outcome ccc_suite() {
  using V = std::vector<double>;
  const V x{0.3, -0.1, 0.8, -0.6, 0.2};
  bool pass = std::abs(sew::ccc(x, x) - 1.0) <= kCccTol;
  pass = pass && std::abs(sew::ccc(V{1, 2, 3}, V{3, 2, 1}) + 1.0) <= kCccTol;
  pass = pass && sew::ccc(V(8, 0.0), V(8, 1.0)) == 0.0;
  double worst = 0;
  sew::Rng rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(200);
    V a(n);
    for (double& v : a) v = rng.normal() * rng.uniform(0.1, 3.0);
    const double c = rng.uniform(-3, 3);
    V b(a);
    for (double& v : b) v += c;
    double mean = 0, var = 0;
    for (double v : a) mean += v;
    mean /= static_cast<double>(n);
    for (double v : a) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    worst = std::max(worst, std::abs(sew::ccc(a, b) - 2 * var / (2 * var + c * c)));
  }
  pass = pass && worst <= kCccTol;
  return {pass, fmt("identity, reversal and constant-gap cases; 100 shifted copies max error %.2e (tol %.0e)", worst,
                    kCccTol)};
}

// ---------------------------------------------------------------- AC4 / AC5

struct AblationRuns {
  std::vector<double> full, unimodal, stripped;
};

AblationRuns run_synthetic_ablation() {
  const sew::SyntheticData data = sew::generate_synthetic(sew::load_synthetic_spec(kConfigDir / "synthetic_data.cfg"));
  const sew::SewConfig base = sew::load_config(kConfigDir / "synthetic.cfg");
  AblationRuns out;
  for (int seed = 0; seed < kAblationSeeds; ++seed) {
    for (auto [ablation, dest] : {std::pair{sew::Ablation::kFull, &out.full},
                                  std::pair{sew::Ablation::kUnimodal, &out.unimodal},
                                  std::pair{sew::Ablation::kNoCcaSd1, &out.stripped}}) {
      sew::SewConfig c = base;
      c.seed = static_cast<std::uint64_t>(seed);
      c.ablation = ablation;
      dest->push_back(sew::train(c, data.train, data.dev).best_dev_ccc);
    }
  }
  return out;
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += fmt("%s%.4f", s.empty() ? "" : " ", x);
  return s;
}

// ---------------------------------------------------------------- AC6

Outcome export_fidelity(const fs::path& scratch) {
  sew::SyntheticSpec spec;
  spec.n_samples = 400;
  spec.n_dev = kExportSamples;
  const sew::SyntheticData data = sew::generate_synthetic(spec);
  sew::SewConfig c = sew::load_config(kConfigDir / "synthetic.cfg");
  c.epochs = 2;
  const sew::TrainResult trained = sew::train(c, data.train, data.dev);

  sew::save_model(sew::export_deployment(trained.model), scratch / "deploy.json");
  const sew::SewModel loaded = sew::load_model(scratch / "deploy.json");
  const Matrix want = trained.model.predict_raw(data.dev.weak);
  const Matrix got = loaded.predict_raw(data.dev.weak);
  const double diff = sew::max_abs_diff(want, got);
  const bool stripped = !loaded.s_encoder && !loaded.s_decoder1 && !loaded.s_decoder2;

  // Deployment evaluation through the CLI with only weaker-modality files.
  sew::write_csv_matrix(scratch / "weak.csv", data.dev.weak, "w");
  sew::write_csv_matrix(scratch / "labels.csv", data.dev.labels, "label");
  std::ostringstream out, err;
  const int code = sew::cli::run({"eval", "--model", (scratch / "deploy.json").string(), "--weak",
                                  (scratch / "weak.csv").string(), "--labels", (scratch / "labels.csv").string(),
                                  "--shift-seconds", "0"},
                                 out, err);
  const sew::EvalResult direct = sew::evaluate(trained.model, data.dev.weak, data.dev.labels);
  const std::string expect_row = fmt("%.4f,%.2f,%zu", direct.ccc, direct.binary_accuracy, direct.n);
  const bool cli_ok = code == 0 && out.str().find(expect_row) != std::string::npos;
  return {diff <= kExportTol && stripped && cli_ok,
          fmt("%zu samples, max |full - exported| %.2e (tol %.0e), S_* blocks absent: %s, weaker-only CLI eval: %s",
              want.cols(), diff, kExportTol, stripped ? "yes" : "no", cli_ok ? expect_row.c_str() : err.str().c_str())};
}

// ---------------------------------------------------------------- AC7

Outcome label_shift(const fs::path& scratch) {
  const std::size_t n = 500;
  std::ofstream f(scratch / "features.csv"), l(scratch / "labels.csv");
  for (std::size_t t = 0; t < n; ++t) {
    f << t << ',' << -static_cast<double>(t) << '\n';
    l << static_cast<double>(t) / 1000.0 << '\n';
  }
  f.close();
  l.close();
  const sew::AlignedTable table = sew::load_csv(scratch / "features.csv", scratch / "labels.csv", {0.04, 2.4});
  bool paired = table.features.cols() == n - 60 && table.labels.cols() == n - 60;
  for (std::size_t t = 0; paired && t < table.features.cols(); ++t) {
    const auto frame = static_cast<std::size_t>(table.features(0, t));
    paired = frame == t && std::abs(table.labels(0, t) - static_cast<double>(t + 60) / 1000.0) < 1e-15;
  }
  const bool pass = table.offset == 60 && paired && sew::shift_labels(Matrix(1, 100), 2.4, 0.04).pairs == 40;
  return {pass, fmt("offset %zu frames, %zu pairs from %zu frames, frame t paired with label t+60: %s", table.offset,
                    table.features.cols(), n, paired ? "yes" : "no")};
}

// ---------------------------------------------------------------- AC8

Outcome determinism(const fs::path& scratch) {
  std::ostringstream out, err;
  const auto cli = [&](std::vector<std::string> args) {
    if (sew::cli::run(args, out, err) != 0) throw std::runtime_error(err.str());
  };
  cli({"gen-data", "--config", (kConfigDir / "synthetic_data.cfg").string(), "--out", (scratch / "data").string()});
  const fs::path cfg = kConfigDir / "synthetic.cfg";
  cli({"train", "--config", cfg.string(), "--data", (scratch / "data").string(), "--out", (scratch / "a").string()});
  cli({"train", "--config", cfg.string(), "--data", (scratch / "data").string(), "--out", (scratch / "b").string()});
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = slurp(scratch / "a/metrics.csv");
  const std::string b = slurp(scratch / "b/metrics.csv");
  const auto lines = std::count(a.begin(), a.end(), '\n');
  return {!a.empty() && a == b, fmt("two runs of configs/synthetic.cfg, metrics.csv %s (%ld lines)",
                                    a == b ? "byte-identical" : "DIFFER", static_cast<long>(lines))};
}

}  // namespace

int main() {
  const fs::path scratch = sew::testing::scratch_dir("acceptance");

  report("AC1", "gradient correctness", kGradBudgetS, gradient_correctness);
  report("AC2", "CCA oracle equivalence", kCcaBudgetS, cca_oracle_equivalence);
  report("AC3", "CCC unit suite", kCccBudgetS, ccc_suite);

  AblationRuns runs;
  report("AC4", "SEW beats unimodal on synthetic data", kAblationBudgetS, [&] {
    runs = run_synthetic_ablation();
    const double full = sew::median(runs.full), uni = sew::median(runs.unimodal), stripped = sew::median(runs.stripped);
    const bool pass = full > uni + kMinSewMargin && full >= stripped;
    return Outcome{pass, fmt("median dev CCC full %.4f, unimodal %.4f, -(CCA&S_D1) %.4f; need full > unimodal + %.2f "
                             "and full >= -(CCA&S_D1) [full: %s | unimodal: %s]",
                             full, uni, stripped, kMinSewMargin, list(runs.full).c_str(), list(runs.unimodal).c_str())};
  });
  report("AC5", "ablation neutrality", kAblationBudgetS, [&] {
    if (runs.unimodal.empty()) return Outcome{false, "AC4 runs unavailable"};
    const auto [lo, hi] = std::minmax_element(runs.unimodal.begin(), runs.unimodal.end());
    bool pass = true;
    for (double v : runs.stripped) pass = pass && v >= *lo && v <= *hi;
    const double med = sew::median(runs.stripped);
    return Outcome{pass, fmt("-(CCA&S_D1) per-seed CCC [%s] (median %.4f) within unimodal range [%.4f, %.4f]",
                             list(runs.stripped).c_str(), med, *lo, *hi)};
  });
  report("AC6", "deployment export fidelity", kExportBudgetS, [&] { return export_fidelity(scratch); });
  report("AC7", "label-shift arithmetic", kShiftBudgetS, [&] { return label_shift(scratch); });
  report("AC8", "determinism", kDeterminismBudgetS, [&] { return determinism(scratch); });

  std::printf("%s: %d of 8 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
