// SPDX-License-Identifier: Apache-2.0
#include "sew/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sew/error.hpp"
#include "sew/kernels.hpp"
#include "sew/rng.hpp"

namespace sew {

// --- batches and datasets ---------------------------------------------------

namespace {

void check_widths(const Matrix& m_s, const Matrix& m_w, const Matrix& labels) {
  if (labels.rows() != 1) throw DimensionError("labels must be a single row, got " + labels.shape());
  if (m_s.cols() != labels.cols() || m_w.cols() != labels.cols()) {
    throw DimensionError("batch widths disagree: strong " + m_s.shape() + ", weak " + m_w.shape() + ", labels " +
                         labels.shape());
  }
  for (std::size_t i = 0; i < labels.cols(); ++i) {
    const double v = labels(0, i);
    if (!(v >= -1.0 && v <= 1.0)) {
      throw IngestionError("label " + std::to_string(i) + " = " + std::to_string(v) + " is outside [-1, 1]");
    }
  }
}

}  // namespace

ModalityBatch::ModalityBatch(Matrix s, Matrix w, Matrix l)
    : m_s(std::move(s)), m_w(std::move(w)), labels(std::move(l)) {
  check_widths(m_s, m_w, labels);
}

Dataset::Dataset(Matrix s, Matrix w, Matrix l) : strong(std::move(s)), weak(std::move(w)), labels(std::move(l)) {
  check_widths(strong, weak, labels);
}

ModalityBatch Dataset::gather(std::span<const std::size_t> indices) const {
  return ModalityBatch(strong.gather_columns(indices), weak.gather_columns(indices), labels.gather_columns(indices));
}

// --- scaler -------------------------------------------------------------------

FeatureScaler FeatureScaler::fit(const Matrix& features) {
  if (features.cols() == 0) throw ConfigError("cannot fit a scaler on zero samples");
  FeatureScaler s;
  s.mean.resize(features.rows());
  s.stddev.resize(features.rows());
  const double n = static_cast<double>(features.cols());
  for (std::size_t r = 0; r < features.rows(); ++r) {
    const auto row = features.row(r);
    const double mean = std::accumulate(row.begin(), row.end(), 0.0) / n;
    double var = 0.0;
    for (const double v : row) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    s.mean[r] = mean;
    s.stddev[r] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Matrix FeatureScaler::apply(const Matrix& features) const {
  if (features.rows() != mean.size()) {
    throw DimensionError("scaler fitted on " + std::to_string(mean.size()) + " features, got " + features.shape());
  }
  Matrix out = features;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (double& v : out.row(r)) v = (v - mean[r]) / stddev[r];
  return out;
}

// --- synthetic data -----------------------------------------------------------

void SyntheticSpec::validate() const {
  if (n_samples < 100) throw ConfigError("synthetic: n_samples must be >= 100, got " + std::to_string(n_samples));
  if (n_dev < 2) throw ConfigError("synthetic: n_dev must be >= 2");
  if (latent_dim == 0 || d1 == 0 || d2 == 0) throw ConfigError("synthetic: dimensions must be >= 1");
  if (!(weak_info_loss >= 0.0 && weak_info_loss <= 1.0)) {
    throw ConfigError("synthetic: weak_info_loss must lie in [0, 1]");
  }
  if (!(noise_strong >= 0.0) || !(noise_weak >= 0.0)) throw ConfigError("synthetic: noise levels must be >= 0");
  if (noise_weak < noise_strong) throw ConfigError("synthetic: noise_weak must be >= noise_strong");
  if (!(label_noise >= 0.0)) throw ConfigError("synthetic: label_noise must be >= 0");
}

namespace {

struct Mixing {
  std::vector<Matrix> hidden;  // latent x latent
  Matrix out;                  // dim x latent

  Mixing(std::size_t latent, std::size_t dim, std::size_t depth, Rng& rng) {
    const double scale = 1.5 / std::sqrt(static_cast<double>(latent));
    for (std::size_t l = 0; l < depth; ++l) {
      Matrix a(latent, latent);
      for (double& v : a.data()) v = scale * rng.normal();
      hidden.push_back(std::move(a));
    }
    out = Matrix(dim, latent);
    const double out_scale = 1.0 / std::sqrt(static_cast<double>(latent));
    for (double& v : out.data()) v = out_scale * rng.normal();
  }

  Matrix apply(const Matrix& z) const {
    Matrix h = z;
    for (const Matrix& a : hidden) h = kernels::tanh(kernels::matmul(a, h));
    return kernels::matmul(out, h);
  }
};

struct Generator {
  const SyntheticSpec& spec;
  Matrix label_direction;  // 1 x latent
  std::vector<std::size_t> hidden;
  Mixing strong;
  Mixing weak;

  Dataset draw(std::size_t n, Rng& rng) const {
    Matrix z(spec.latent_dim, n);
    for (double& v : z.data()) v = rng.normal();
    Matrix labels = kernels::matmul(label_direction, z);
    for (double& v : labels.data()) v = std::tanh(v);

    Matrix z_weak = z;
    for (const std::size_t c : hidden)
      for (double& v : z_weak.row(c)) v = 0.0;

    Matrix xs = strong.apply(z);
    for (double& v : xs.data()) v += spec.noise_strong * rng.normal();
    Matrix xw = weak.apply(z_weak);
    for (double& v : xw.data()) v += spec.noise_weak * rng.normal();
    return Dataset(std::move(xs), std::move(xw), std::move(labels));
  }
};

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng structure(derive_seed(spec.seed, "synthetic.structure"));

  Matrix w(1, spec.latent_dim);
  double norm = 0.0;
  for (double& v : w.data()) {
    v = structure.normal();
    norm += v * v;
  }
  w *= 1.0 / std::sqrt(norm);

  std::vector<std::size_t> coords(spec.latent_dim);
  std::iota(coords.begin(), coords.end(), 0);
  structure.shuffle(std::span<std::size_t>(coords));
  const auto n_hidden = static_cast<std::size_t>(std::lround(spec.weak_info_loss * static_cast<double>(spec.latent_dim)));
  std::vector<std::size_t> hidden(coords.begin(), coords.begin() + static_cast<std::ptrdiff_t>(n_hidden));
  std::sort(hidden.begin(), hidden.end());

  Mixing strong(spec.latent_dim, spec.d1, spec.mixing_depth, structure);
  Mixing weak(spec.latent_dim, spec.d2, spec.mixing_depth, structure);
  const Generator gen{spec, std::move(w), hidden, std::move(strong), std::move(weak)};

  Rng train_rng(derive_seed(spec.seed, "synthetic.train"));
  Rng dev_rng(derive_seed(spec.seed, "synthetic.dev"));
  SyntheticData out{gen.draw(spec.n_samples, train_rng), gen.draw(spec.n_dev, dev_rng), hidden, {}};
  if (spec.label_noise > 0.0) {
    Rng noise_rng(derive_seed(spec.seed, "synthetic.label_noise"));
    for (double& v : out.train.labels.data()) v = std::clamp(v + spec.label_noise * noise_rng.normal(), -1.0, 1.0);
  }

  std::ostringstream os;
  os << "latent " << spec.latent_dim << " -> strong " << spec.d1 << " (noise " << spec.noise_strong << "), weak "
     << spec.d2 << " (noise " << spec.noise_weak << ", " << hidden.size() << " latent coordinates hidden), "
     << "tanh mixing depth " << spec.mixing_depth << ", label = tanh(w.z)";
  if (spec.label_noise > 0.0) os << ", train label noise " << spec.label_noise;
  out.description = os.str();
  return out;
}

// --- CSV ----------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_number(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

Matrix read_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> values;
  std::size_t width = 0;
  std::size_t frames = 0;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    std::vector<double> row;
    row.reserve(cells.size());
    std::optional<std::size_t> bad;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = parse_number(cells[c]);
      if (!v) {
        bad = c;
        break;
      }
      row.push_back(*v);
    }
    if (bad) {
      if (first_content) {  // header
        first_content = false;
        width = cells.size();
        continue;
      }
      throw IngestionError(path.string() + ": line " + std::to_string(line_no) + ": non-numeric cell '" +
                           std::string(cells[*bad]) + "' in column " + std::to_string(*bad + 1));
    }
    if (width == 0) width = row.size();
    first_content = false;
    if (row.size() != width) {
      throw IngestionError(path.string() + ": line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                           " columns, found " + std::to_string(row.size()));
    }
    values.insert(values.end(), row.begin(), row.end());
    ++frames;
  }
  if (frames == 0) throw IngestionError(path.string() + ": no data rows");
  return Matrix(frames, width, std::move(values)).transpose();
}

void write_csv_matrix(const std::filesystem::path& path, const Matrix& m, const std::string& prefix) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (f == nullptr) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (m.rows() == 1) std::fprintf(f, "%s", prefix.c_str());
    else std::fprintf(f, "%s%s%zu", r ? "," : "", prefix.c_str(), r);
  }
  std::fputc('\n', f);
  for (std::size_t c = 0; c < m.cols(); ++c) {
    for (std::size_t r = 0; r < m.rows(); ++r) std::fprintf(f, "%s%.17g", r ? "," : "", m(r, c));
    std::fputc('\n', f);
  }
  const bool failed = std::ferror(f) != 0;
  std::fclose(f);
  if (failed) throw IoError("failed writing " + path.string());
}

std::size_t shift_offset(double shift_seconds, double frame_step_seconds) {
  if (!(frame_step_seconds > 0.0)) throw ConfigError("frame_step_seconds must be > 0");
  if (!(shift_seconds >= 0.0)) throw ConfigError("shift_seconds must be >= 0");
  const double frames = std::round(shift_seconds / frame_step_seconds);
  if (std::abs(shift_seconds - frames * frame_step_seconds) > 1e-9) {
    std::ostringstream os;
    os << "label shift " << shift_seconds << " s is not a whole number of " << frame_step_seconds << " s frames";
    throw ConfigError(os.str());
  }
  return static_cast<std::size_t>(frames);
}

ShiftedLabels shift_labels(const Matrix& labels, double shift_seconds, double frame_step_seconds) {
  if (labels.rows() != 1) throw DimensionError("labels must be a single row, got " + labels.shape());
  ShiftedLabels out;
  out.offset = shift_offset(shift_seconds, frame_step_seconds);
  const std::size_t n = labels.cols();
  if (out.offset >= n) {
    throw IngestionError("label shift of " + std::to_string(out.offset) + " frames leaves no pairs out of " +
                         std::to_string(n) + " frames");
  }
  out.pairs = n - out.offset;
  out.labels = labels.columns(out.offset, out.pairs);
  return out;
}

AlignedTable load_csv(const std::filesystem::path& features_path, const std::filesystem::path& labels_path,
                      const CsvSchema& schema) {
  const Matrix features = read_csv_matrix(features_path);
  const Matrix labels = read_csv_matrix(labels_path);
  if (labels.rows() != 1) {
    throw IngestionError(labels_path.string() + ": expected a single label column, found " +
                         std::to_string(labels.rows()));
  }
  if (features.cols() != labels.cols()) {
    throw IngestionError("frame count mismatch: " + features_path.string() + " has " +
                         std::to_string(features.cols()) + " frames, " + labels_path.string() + " has " +
                         std::to_string(labels.cols()));
  }
  ShiftedLabels shifted = shift_labels(labels, schema.shift_seconds, schema.frame_step_seconds);
  return {features.columns(0, shifted.pairs), std::move(shifted.labels), shifted.offset};
}

Dataset align_modalities(const Matrix& strong, const Matrix& weak, const Matrix& labels, const CsvSchema& schema) {
  if (strong.cols() != labels.cols() || weak.cols() != labels.cols()) {
    throw IngestionError("frame count mismatch: strong " + std::to_string(strong.cols()) + ", weak " +
                         std::to_string(weak.cols()) + ", labels " + std::to_string(labels.cols()));
  }
  ShiftedLabels shifted = shift_labels(labels, schema.shift_seconds, schema.frame_step_seconds);
  return Dataset(strong.columns(0, shifted.pairs), weak.columns(0, shifted.pairs), std::move(shifted.labels));
}

// --- batching -----------------------------------------------------------------

Batcher::Batcher(const Dataset& data, std::size_t batch_size, std::uint64_t seed, bool shuffle)
    : data_(&data), batch_size_(batch_size), seed_(seed), shuffle_(shuffle) {
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2 (covariances need two samples)");
  if (data.size() == 0) throw ConfigError("cannot batch an empty dataset");
}

std::size_t Batcher::batches_per_epoch() const {
  const std::size_t n = data_->size();
  return n / batch_size_ + (n % batch_size_ >= 2 ? 1 : 0);
}

std::vector<std::vector<std::size_t>> Batcher::epoch_indices(std::size_t epoch) const {
  std::vector<std::size_t> order(data_->size());
  std::iota(order.begin(), order.end(), 0);
  if (shuffle_) {
    Rng rng(mix_seed(seed_ ^ mix_seed(epoch + 1)));
    rng.shuffle(std::span<std::size_t>(order));
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size_) {
    const std::size_t end = std::min(order.size(), start + batch_size_);
    if (end - start < 2) break;
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

void Batcher::start_epoch(std::size_t epoch) {
  current_ = epoch_indices(epoch);
  cursor_ = 0;
}

std::optional<ModalityBatch> Batcher::next() {
  if (cursor_ >= current_.size()) return std::nullopt;
  return data_->gather(current_[cursor_++]);
}

}  // namespace sew
