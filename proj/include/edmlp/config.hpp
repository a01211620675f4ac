#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "edmlp/decision.hpp"
#include "edmlp/metrics.hpp"
#include "edmlp/nnet.hpp"
#include "edmlp/scg.hpp"
#include "edmlp/synth.hpp"

namespace edmlp {

enum class Protocol { Loocv, Holdout, CutoutHoldout };

std::string_view to_string(Protocol protocol);

// Resolved experiment configuration. See README.md for the JSON schema.
// Relative manifest paths are resolved against the config file's directory.
struct ExperimentConfig {
  Protocol protocol = Protocol::Loocv;
  // One entry normally; several when the config holds a "sweep" list.
  std::vector<MlpStructure> structures;
  LossPair losses;
  std::size_t n_realizations = 1;
  std::uint64_t master_seed = 0;
  TrainOptions training;
  std::filesystem::path train_manifest;
  std::filesystem::path test_manifest;
  std::size_t side = 0;  // 0: take the side of the first image
  std::size_t per_class_train = 720;
  std::size_t per_class_test = 50;
  DAxes d_axes = DAxes::SensitivitySpecificity;
  std::optional<SynthParams> synth;
};

/// Throws ConfigError with the offending key on schema violations. Unknown
/// keys are ignored, so a run summary is itself a valid config.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of a resolved config (absolute paths, all defaults filled).
nlohmann::json to_json(const ExperimentConfig& config);

MlpStructure parse_structure(const nlohmann::json& doc);
nlohmann::json to_json(const MlpStructure& structure);

/// "L12,L21" -> LossPair.
LossPair parse_losses(const std::string& text);

}  // namespace edmlp
