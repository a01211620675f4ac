#pragma once

#include <filesystem>
#include <string>

#include "edmlp/synth.hpp"

namespace edmlp::test {

// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::path(EDMLP_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline SynthParams tiny_synth(std::uint64_t seed, double contrast = 1.0) {
  SynthParams p;
  p.n_cases_per_class = 3;
  p.cutouts_min = 2;
  p.cutouts_max = 3;
  p.side = 64;
  p.class_contrast = contrast;
  p.noise_sd = 0.02;
  p.seed = seed;
  return p;
}

}  // namespace edmlp::test
