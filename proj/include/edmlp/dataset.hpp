#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "edmlp/image_io.hpp"
#include "edmlp/types.hpp"

namespace edmlp {

/// Default cutout side lengths. 64 is an additional small size used for
/// quick synthetic runs.
inline constexpr std::size_t kPhase2Side = 256;
inline constexpr std::size_t kPhase1Side = 128;

struct RawCutout {
  RgbImage image;
  std::string case_id;
  Label label = Label::NonDysplastic;
};

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> values;  // row-major
};

// A preprocessed cutout. Intensities lie in [0, 1] and are stored
// row-major, which is also the flattening order fed to the network.
struct Cutout {
  std::vector<double> pixels;
  std::size_t side = 0;
  std::string case_id;
  std::string cutout_id;  // unique across a CaseSet; shared by rotations
  Label label = Label::NonDysplastic;
  Rotation rotation = Rotation::R0;

  double at(std::size_t row, std::size_t col) const { return pixels[row * side + col]; }
};

struct Case {
  std::string case_id;
  Label label = Label::NonDysplastic;
  std::vector<Cutout> cutouts;
};

/// Immutable collection of cases. Construction validates that case ids are
/// unique, every case has at least one cutout, cutouts carry their case's
/// id and label, and all cutouts share one side length.
class CaseSet {
public:
  CaseSet() = default;
  explicit CaseSet(std::vector<Case> cases);

  const std::vector<Case>& cases() const { return cases_; }
  const Case& operator[](std::size_t i) const { return cases_[i]; }
  std::size_t size() const { return cases_.size(); }
  bool empty() const { return cases_.empty(); }
  std::size_t side() const { return side_; }
  std::size_t input_width() const { return side_ * side_; }
  std::size_t total_cutouts() const;
  std::size_t count_cases(Label label) const;

  /// Cases whose ids are not in `excluded`, in original order.
  CaseSet without(std::span<const std::string> excluded) const;

private:
  std::vector<Case> cases_;
  std::size_t side_ = 0;
};

/// Rec. 601 luma, Y = round(0.299 R + 0.587 G + 0.114 B), rounding half up.
/// Computed in integer arithmetic so the rounding is exact.
std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b);
GrayImage to_grayscale(const RgbImage& image);
GrayImage to_grayscale(const RawCutout& raw);

/// Per-image min-max scaling to [0, 1]. A constant image maps to all zeros.
std::vector<double> normalize(const GrayImage& gray);
std::vector<double> normalize(std::span<const double> values);

/// Grayscale + normalize. Throws DataError for non-square input or a side
/// other than `expected_side` (0 accepts any square side).
Cutout preprocess(const RawCutout& raw, std::string cutout_id, std::size_t expected_side = 0);

/// Quarter turn clockwise: pixel (r, c) moves to (c, side - 1 - r).
Cutout rotate90(const Cutout& cutout);
std::array<Cutout, 4> augment_rotations(const Cutout& cutout);
/// Every cutout expanded to its four rotations, in input order.
std::vector<Cutout> augment_all(std::span<const Cutout> cutouts);

/// Row-major copy of the pixels, length side * side.
std::vector<double> flatten(const Cutout& cutout);

struct ManifestEntry {
  std::string case_id;
  Label label = Label::NonDysplastic;
  std::vector<std::string> cutouts;  // paths relative to the manifest
};

std::vector<ManifestEntry> read_manifest_entries(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);

/// Loads and preprocesses every cutout a manifest lists. `side` fixes the
/// required cutout side; 0 takes the side of the first image. No
/// augmentation is applied.
CaseSet load_manifest(const std::filesystem::path& path, std::size_t side = 0);

}  // namespace edmlp
