// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include "sew/matrix.hpp"
#include "sew/rng.hpp"

namespace sew::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = scale * rng.normal();
  return m;
}

inline Matrix random_uniform(std::size_t rows, std::size_t cols, Rng& rng, double lo, double hi) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(lo, hi);
  return m;
}

/// Fresh scratch directory under SEW_TEST_TMP (or the system temp dir).
inline std::filesystem::path scratch_dir(const std::string& name) {
  const char* env = std::getenv("SEW_TEST_TMP");
  const std::filesystem::path root = env ? std::filesystem::path(env) : std::filesystem::temp_directory_path() / "sew_tests";
  const std::filesystem::path dir = root / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace sew::testing
