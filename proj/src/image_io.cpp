#include "edmlp/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "edmlp/types.hpp"

namespace edmlp {
namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RgbImage decode_png(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw DataError("corrupt PNG " + path.string() + ": " + img.message);
  }
  // Alpha is dropped by compositing onto black; cutouts are opaque in practice.
  img.format = PNG_FORMAT_RGB;
  RgbImage out;
  out.width = img.width;
  out.height = img.height;
  out.rgb.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.rgb.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw DataError("corrupt PNG " + path.string() + ": " + msg);
  }
  return out;
}

// Binary PNM reader (P5 gray, P6 color), maxval 255 only.
RgbImage decode_pnm(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  std::size_t pos = 2;
  auto fail = [&](const std::string& why) { return DataError("bad PNM " + path.string() + ": " + why); };
  auto next_int = [&]() -> std::size_t {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw fail("truncated header");
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) v = v * 10 + (bytes[pos++] - '0');
    return v;
  };
  const bool color = bytes[1] == '6';
  RgbImage out;
  out.width = next_int();
  out.height = next_int();
  const std::size_t maxval = next_int();
  if (maxval != 255) throw fail("only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw fail("missing header terminator");
  ++pos;
  const std::size_t channels = color ? 3 : 1;
  const std::size_t need = out.width * out.height * channels;
  if (bytes.size() - pos < need) throw fail("truncated pixel data");
  out.rgb.resize(out.width * out.height * 3);
  for (std::size_t i = 0; i < out.width * out.height; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      out.rgb[3 * i + c] = bytes[pos + i * channels + (color ? c : 0)];
    }
  }
  return out;
}

void write_png_impl(const std::filesystem::path& path, std::size_t width, std::size_t height,
                    png_uint_32 format, const std::uint8_t* data) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = format;
  if (!png_image_write_to_file(&img, path.string().c_str(), 0, data, 0, nullptr)) {
    throw IoError("cannot write PNG " + path.string() + ": " + img.message);
  }
}

}  // namespace

RgbImage read_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("missing image file: " + path.string());
  const auto bytes = read_bytes(path);
  static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngMagic, 8) == 0) return decode_png(bytes, path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) return decode_pnm(bytes, path);
  throw DataError("unsupported image format (expected PNG, P5 or P6): " + path.string());
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  write_png_impl(path, image.width, image.height, PNG_FORMAT_RGB, image.rgb.data());
}

void write_png_gray(const std::filesystem::path& path, std::size_t width, std::size_t height,
                    std::span<const std::uint8_t> values) {
  if (values.size() != width * height) throw DimensionError("gray buffer does not match image size");
  write_png_impl(path, width, height, PNG_FORMAT_GRAY, values.data());
}

}  // namespace edmlp
