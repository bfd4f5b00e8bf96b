// SPDX-License-Identifier: Apache-2.0
#include "sew/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "sew/error.hpp"

namespace sew {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, std::size_t line, const char* expected) {
  throw ConfigError("config line " + std::to_string(line) + ": key '" + key + "' has invalid value '" + value +
                    "' (expected " + expected + ")");
}

double to_double(const std::string& key, const std::string& v, std::size_t line) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, line, "a number");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v, std::size_t line) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, line, "a non-negative integer");
  return out;
}

MlpSpec to_spec(const std::string& key, const std::string& v, std::size_t line) {
  MlpSpec spec;
  if (v.empty()) return spec;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    spec.layer_sizes.push_back(static_cast<std::size_t>(to_uint(key, item, line)));
  }
  return spec;
}

std::string spec_text(const MlpSpec& spec) {
  std::string s;
  for (std::size_t i = 0; i < spec.layer_sizes.size(); ++i) s += (i ? "," : "") + std::to_string(spec.layer_sizes[i]);
  return s;
}

std::string num_text(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

/// Calls fn(key, value, line) for every `key = value` line; '#' starts a comment.
void for_each_entry(const std::string& text, const char* what,
                    const std::function<void(const std::string&, const std::string&, std::size_t)>& fn) {
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string body = trim(raw);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(std::string(what) + " line " + std::to_string(line) + ": expected 'key = value', got '" + body +
                        "'");
    }
    fn(trim(body.substr(0, eq)), trim(body.substr(eq + 1)), line);
  }
}

std::string read_text(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw IoError(std::string("cannot open ") + what + " " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

using Setter = std::function<void(SewConfig&, const std::string& key, const std::string& value, std::size_t line)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    const auto real = [&t](const char* name, double SewConfig::*field) {
      t[name] = [field](SewConfig& c, const std::string& k, const std::string& v, std::size_t l) {
        c.*field = to_double(k, v, l);
      };
    };
    const auto count = [&t](const char* name, std::size_t SewConfig::*field) {
      t[name] = [field](SewConfig& c, const std::string& k, const std::string& v, std::size_t l) {
        c.*field = static_cast<std::size_t>(to_uint(k, v, l));
      };
    };
    const auto spec = [&t](const char* name, MlpSpec SewConfig::*field) {
      t[name] = [field](SewConfig& c, const std::string& k, const std::string& v, std::size_t l) {
        c.*field = to_spec(k, v, l);
      };
    };
    real("alpha", &SewConfig::alpha);
    real("beta", &SewConfig::beta);
    real("gamma", &SewConfig::gamma);
    count("k", &SewConfig::k);
    real("r1", &SewConfig::r1);
    real("r2", &SewConfig::r2);
    count("cca_batch_size", &SewConfig::cca_batch_size);
    real("lr", &SewConfig::lr);
    real("momentum", &SewConfig::momentum);
    real("weight_decay", &SewConfig::weight_decay);
    real("clip_norm", &SewConfig::clip_norm);
    count("batch_size", &SewConfig::batch_size);
    count("epochs", &SewConfig::epochs);
    count("patience", &SewConfig::patience);
    t["seed"] = [](SewConfig& c, const std::string& k, const std::string& v, std::size_t l) { c.seed = to_uint(k, v, l); };
    t["strong_modality"] = [](SewConfig& c, const std::string&, const std::string& v, std::size_t) { c.strong_modality = v; };
    t["weak_modality"] = [](SewConfig& c, const std::string&, const std::string& v, std::size_t) { c.weak_modality = v; };
    count("latent_dim", &SewConfig::latent_dim);
    spec("weak_encoder", &SewConfig::weak_encoder);
    spec("strong_encoder", &SewConfig::strong_encoder);
    spec("strong_decoder", &SewConfig::strong_decoder);
    count("gru_layers", &SewConfig::gru_layers);
    count("gru_hidden", &SewConfig::gru_hidden);
    t["ablation"] = [](SewConfig& c, const std::string&, const std::string& v, std::size_t) { c.ablation = parse_ablation(v); };
    t["ccc_estimator"] = [](SewConfig& c, const std::string& k, const std::string& v, std::size_t l) {
      if (v == "population") c.ccc_estimator = VarianceEstimator::kPopulation;
      else if (v == "sample") c.ccc_estimator = VarianceEstimator::kSample;
      else bad_value(k, v, l, "population or sample");
    };
    t["data_dir"] = [](SewConfig& c, const std::string&, const std::string& v, std::size_t) { c.data_dir = v; };
    t["frame_step_seconds"] = [](SewConfig& c, const std::string& k, const std::string& v, std::size_t l) {
      c.schema.frame_step_seconds = to_double(k, v, l);
    };
    t["shift_seconds"] = [](SewConfig& c, const std::string& k, const std::string& v, std::size_t l) {
      c.schema.shift_seconds = to_double(k, v, l);
    };
    return t;
  }();
  return table;
}

}  // namespace

SewArchitecture SewConfig::architecture() const {
  SewArchitecture arch;
  std::size_t latent = latent_dim;
  if (latent == 0 && !weak_modality.empty() && !strong_modality.empty()) {
    latent = preset_latent_dim(strong_modality, weak_modality);
  }
  if (latent == 0 && !weak_encoder.layer_sizes.empty()) latent = weak_encoder.output_dim();
  if (latent == 0) throw ConfigError("cannot determine latent_dim: set latent_dim, weak_encoder or modality presets");

  const auto pick = [latent](const MlpSpec& explicit_spec, const std::string& preset, bool encoder, const char* key) {
    if (!explicit_spec.layer_sizes.empty()) return explicit_spec;
    if (preset.empty()) throw ConfigError(std::string("config needs '") + key + "' or a modality preset");
    const ModalityPreset p = modality_preset(preset, latent);
    return encoder ? p.encoder : p.decoder;
  };
  arch.weak_encoder = pick(weak_encoder, weak_modality, true, "weak_encoder");
  arch.regressor = GruRegressorSpec{gru_layers, gru_hidden, 1};
  arch.ablation = ablation;
  if (ablation != Ablation::kUnimodal) {
    arch.strong_encoder = pick(strong_encoder, strong_modality, true, "strong_encoder");
    arch.strong_decoder = pick(strong_decoder, strong_modality, false, "strong_decoder");
  }
  if (arch.weak_encoder.output_dim() != latent) {
    throw ConfigError("latent_dim " + std::to_string(latent) + " does not match weak_encoder output " +
                      std::to_string(arch.weak_encoder.output_dim()));
  }
  return arch;
}

void SewConfig::validate() const {
  if (alpha < 0.0 || beta < 0.0 || gamma < 0.0) throw ConfigError("alpha, beta and gamma must be >= 0");
  if (k < 1) throw ConfigError("k must be >= 1");
  if (r1 < 0.0 || r2 < 0.0) throw ConfigError("r1 and r2 must be >= 0");
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (clip_norm < 0.0) throw ConfigError("clip_norm must be >= 0");
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (cca_batch_size == 1) throw ConfigError("cca_batch_size must be 0 or >= 2");
  const SewArchitecture arch = architecture();
  arch.regressor.validate();
  if (blocks_for(ablation).cca && k > arch.weak_encoder.output_dim()) {
    throw ConfigError("k = " + std::to_string(k) + " exceeds the latent dimension " +
                      std::to_string(arch.weak_encoder.output_dim()));
  }
  shift_offset(schema.shift_seconds, schema.frame_step_seconds);
}

SewConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  SewConfig c;
  const auto& table = setters();
  for_each_entry(text, "config", [&](const std::string& key, const std::string& value, std::size_t line) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("config line " + std::to_string(line) + ": unknown key '" + key + "'");
    it->second(c, key, value, line);
  });
  if (!c.data_dir.empty() && c.data_dir.is_relative() && !base_dir.empty()) c.data_dir = base_dir / c.data_dir;
  return c;
}

SewConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text(path, "config"), path.parent_path());
}

SyntheticSpec parse_synthetic_spec(const std::string& text) {
  SyntheticSpec spec;
  for_each_entry(text, "synthetic spec", [&](const std::string& key, const std::string& v, std::size_t line) {
    const auto count = [&] { return static_cast<std::size_t>(to_uint(key, v, line)); };
    if (key == "latent_dim") spec.latent_dim = count();
    else if (key == "d1") spec.d1 = count();
    else if (key == "d2") spec.d2 = count();
    else if (key == "noise_strong") spec.noise_strong = to_double(key, v, line);
    else if (key == "noise_weak") spec.noise_weak = to_double(key, v, line);
    else if (key == "weak_info_loss") spec.weak_info_loss = to_double(key, v, line);
    else if (key == "mixing_depth") spec.mixing_depth = count();
    else if (key == "label_noise") spec.label_noise = to_double(key, v, line);
    else if (key == "n_samples") spec.n_samples = count();
    else if (key == "n_dev") spec.n_dev = count();
    else if (key == "seed") spec.seed = to_uint(key, v, line);
    else throw ConfigError("synthetic spec line " + std::to_string(line) + ": unknown key '" + key + "'");
  });
  return spec;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
  return parse_synthetic_spec(read_text(path, "synthetic spec"));
}

std::string config_to_text(const SewConfig& c) {
  std::ostringstream os;
  os << "alpha = " << num_text(c.alpha) << '\n'
     << "beta = " << num_text(c.beta) << '\n'
     << "gamma = " << num_text(c.gamma) << '\n'
     << "k = " << c.k << '\n'
     << "r1 = " << num_text(c.r1) << '\n'
     << "r2 = " << num_text(c.r2) << '\n'
     << "cca_batch_size = " << c.cca_batch_size << '\n'
     << "lr = " << num_text(c.lr) << '\n'
     << "momentum = " << num_text(c.momentum) << '\n'
     << "weight_decay = " << num_text(c.weight_decay) << '\n'
     << "clip_norm = " << num_text(c.clip_norm) << '\n'
     << "batch_size = " << c.batch_size << '\n'
     << "epochs = " << c.epochs << '\n'
     << "patience = " << c.patience << '\n'
     << "seed = " << c.seed << '\n'
     << "strong_modality = " << c.strong_modality << '\n'
     << "weak_modality = " << c.weak_modality << '\n'
     << "latent_dim = " << c.latent_dim << '\n'
     << "weak_encoder = " << spec_text(c.weak_encoder) << '\n'
     << "strong_encoder = " << spec_text(c.strong_encoder) << '\n'
     << "strong_decoder = " << spec_text(c.strong_decoder) << '\n'
     << "gru_layers = " << c.gru_layers << '\n'
     << "gru_hidden = " << c.gru_hidden << '\n'
     << "ablation = " << ablation_name(c.ablation) << '\n'
     << "ccc_estimator = " << (c.ccc_estimator == VarianceEstimator::kPopulation ? "population" : "sample") << '\n'
     << "data_dir = " << c.data_dir.generic_string() << '\n'
     << "frame_step_seconds = " << num_text(c.schema.frame_step_seconds) << '\n'
     << "shift_seconds = " << num_text(c.schema.shift_seconds) << '\n';
  return os.str();
}

}  // namespace sew
