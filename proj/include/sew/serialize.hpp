// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "sew/networks.hpp"

namespace sew {

inline constexpr int kModelFormatVersion = 1;

/// JSON document with layer specs, ablation, scaler and every parameter
/// matrix. Deployment models carry only w_encoder and regressor blocks.
/// Doubles are written in shortest round-trip form, so load(save(m)) is exact.
/// `manifest_id`, when non-empty, is recorded so the file can be traced back
/// to the run manifest that produced it.
std::string model_to_json(const SewModel& model, const std::string& manifest_id = {});
SewModel model_from_json(const std::string& text);

void save_model(const SewModel& model, const std::filesystem::path& path, const std::string& manifest_id = {});
SewModel load_model(const std::filesystem::path& path);

}  // namespace sew
