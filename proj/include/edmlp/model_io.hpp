#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "edmlp/nnet.hpp"

namespace edmlp {

// Binary model format, all integers and doubles little-endian:
//
//   magic      8 bytes  "EDMLPNN\0"
//   version    u32      kModelFormatVersion
//   cost       u32      0 = mse, 1 = cross_entropy
//   seed       u64
//   input      u64      input width
//   n_hidden   u64
//   hidden     u64 x n_hidden
//   output     u64      output width
//   n_params   u64
//   params     f64 x n_params, layer by layer, weights (row-major) then biases
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> encode_model(const MlpModel& model);
MlpModel decode_model(const std::vector<std::uint8_t>& bytes);

void save_model(const std::filesystem::path& path, const MlpModel& model);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace edmlp
