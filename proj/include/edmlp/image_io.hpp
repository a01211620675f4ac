#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace edmlp {

// 8-bit RGB image, interleaved row-major (r, g, b, r, g, b, ...).
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;

  std::size_t pixel_count() const { return width * height; }
};

/// Reads a PNG (any 8/16-bit gray or color layout, alpha dropped) or a
/// binary PGM/PPM (P5/P6, maxval 255). Gray sources are expanded to equal
/// channels. Throws IoError for unreadable files and DataError for
/// unsupported or corrupt content.
RgbImage read_image(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const RgbImage& image);
void write_png_gray(const std::filesystem::path& path, std::size_t width, std::size_t height,
                    std::span<const std::uint8_t> values);

}  // namespace edmlp
