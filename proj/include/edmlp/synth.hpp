#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "edmlp/dataset.hpp"

namespace edmlp {

// Two-class texture generator standing in for real cutouts.
//
// Every cutout starts from white Gaussian noise smoothed by a periodic
// Gaussian blur. Non-dysplastic cutouts use blur width side / 16; dysplastic
// ones divide that width by (1 + class_contrast), raising the spatial
// frequency, and pass their intensities through a power curve with exponent
// 1 + 1.5 * class_contrast, which skews the histogram toward dark values.
// Independent pixel noise of SD noise_sd is added before 8-bit quantization.
// With class_contrast = 0 both classes are identically distributed.
struct SynthParams {
  std::size_t n_cases_per_class = 10;
  std::size_t cutouts_min = 3;
  std::size_t cutouts_max = 7;
  std::size_t side = 64;
  double class_contrast = 1.0;
  double noise_sd = 0.02;
  std::uint64_t seed = 0;

  /// side must be 64, 128 or 256; contrast in [0, 1]; 1 <= min <= max.
  void validate() const;
};

struct SynthCase {
  std::string case_id;
  Label label = Label::NonDysplastic;
  std::vector<RgbImage> images;
};

/// Raw 8-bit cutouts. Cases alternate dysplastic / non-dysplastic and are
/// named case_000, case_001, ...; each cutout draws from its own derived
/// seed, so contrast changes at a fixed seed reuse the same noise.
std::vector<SynthCase> generate_raw(const SynthParams& params);

/// generate_raw followed by the standard preprocessing. Cutout ids follow
/// load_manifest's "<case_id>/<index>" scheme, so generating in memory and
/// loading the written manifest give identical case sets.
CaseSet generate(const SynthParams& params);

/// Writes PNG files under out_dir/images and out_dir/manifest.json; returns
/// the manifest path.
std::filesystem::path write_synthetic(const SynthParams& params, const std::filesystem::path& out_dir);

}  // namespace edmlp
