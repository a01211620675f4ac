#include "edmlp/synth.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "edmlp/random.hpp"
#include "edmlp/seeds.hpp"

namespace edmlp {
namespace {

constexpr double kMidGray = 0.5;
constexpr double kSpread = 0.18;
constexpr double kGammaGain = 1.5;

// Separable Gaussian blur with wrap-around borders, in place.
void periodic_blur(std::vector<double>& img, std::size_t side, double sigma) {
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
    const double v = std::exp(-0.5 * static_cast<double>(k * k) / (sigma * sigma));
    kernel[static_cast<std::size_t>(k + radius)] = v;
    sum += v;
  }
  for (double& v : kernel) v /= sum;

  const auto n = static_cast<std::ptrdiff_t>(side);
  auto wrap = [n](std::ptrdiff_t i) { return static_cast<std::size_t>(((i % n) + n) % n); };
  std::vector<double> tmp(img.size());
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    for (std::ptrdiff_t c = 0; c < n; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] * img[static_cast<std::size_t>(r) * side + wrap(c + k)];
      }
      tmp[static_cast<std::size_t>(r) * side + static_cast<std::size_t>(c)] = acc;
    }
  }
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    for (std::ptrdiff_t c = 0; c < n; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] * tmp[wrap(r + k) * side + static_cast<std::size_t>(c)];
      }
      img[static_cast<std::size_t>(r) * side + static_cast<std::size_t>(c)] = acc;
    }
  }
}

RgbImage texture(const SynthParams& p, Label label, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = p.side * p.side;
  std::vector<double> field(n);
  for (double& v : field) v = standard_normal(rng);

  const bool dysplastic = label == Label::Dysplastic;
  const double base_sigma = static_cast<double>(p.side) / 16.0;
  periodic_blur(field, p.side, dysplastic ? base_sigma / (1.0 + p.class_contrast) : base_sigma);

  double mean = 0.0;
  for (double v : field) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : field) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));

  const double gamma = dysplastic ? 1.0 + kGammaGain * p.class_contrast : 1.0;
  RgbImage img{p.side, p.side, std::vector<std::uint8_t>(3 * n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = std::clamp(kMidGray + kSpread * (field[i] - mean) / sd, 0.0, 1.0);
    double v = std::pow(t, gamma);
    if (p.noise_sd > 0.0) v += p.noise_sd * standard_normal(rng);
    const auto q = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
    img.rgb[3 * i] = img.rgb[3 * i + 1] = img.rgb[3 * i + 2] = q;
  }
  return img;
}

}  // namespace

void SynthParams::validate() const {
  if (side != 64 && side != 128 && side != 256) throw ConfigError("synthetic side must be 64, 128 or 256");
  if (!(class_contrast >= 0.0 && class_contrast <= 1.0)) throw ConfigError("class_contrast must lie in [0, 1]");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) throw ConfigError("noise_sd must be non-negative");
  if (cutouts_min < 1 || cutouts_max < cutouts_min) throw ConfigError("need 1 <= cutouts_min <= cutouts_max");
  if (n_cases_per_class < 1) throw ConfigError("n_cases_per_class must be positive");
}

std::vector<SynthCase> generate_raw(const SynthParams& params) {
  params.validate();
  std::vector<SynthCase> cases;
  const std::size_t n_cases = 2 * params.n_cases_per_class;
  for (std::size_t ci = 0; ci < n_cases; ++ci) {
    SynthCase c;
    c.case_id = fmt::format("case_{:03}", ci);
    c.label = ci % 2 == 0 ? Label::Dysplastic : Label::NonDysplastic;
    Rng count_rng(derive_seed(params.seed, {ci, 0}));
    const std::size_t n_cutouts =
        params.cutouts_min + uniform_index(count_rng, params.cutouts_max - params.cutouts_min + 1);
    for (std::size_t k = 0; k < n_cutouts; ++k) {
      c.images.push_back(texture(params, c.label, derive_seed(params.seed, {ci, k + 1})));
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

CaseSet generate(const SynthParams& params) {
  std::vector<Case> cases;
  for (auto& raw : generate_raw(params)) {
    Case c{raw.case_id, raw.label, {}};
    for (std::size_t k = 0; k < raw.images.size(); ++k) {
      c.cutouts.push_back(preprocess(RawCutout{std::move(raw.images[k]), raw.case_id, raw.label},
                                     raw.case_id + "/" + std::to_string(k), params.side));
    }
    cases.push_back(std::move(c));
  }
  return CaseSet(std::move(cases));
}

std::filesystem::path write_synthetic(const SynthParams& params, const std::filesystem::path& out_dir) {
  const auto image_dir = out_dir / "images";
  std::error_code ec;
  std::filesystem::create_directories(image_dir, ec);
  if (ec) throw IoError("cannot create " + image_dir.string() + ": " + ec.message());

  std::vector<ManifestEntry> entries;
  for (const auto& c : generate_raw(params)) {
    ManifestEntry e{c.case_id, c.label, {}};
    for (std::size_t k = 0; k < c.images.size(); ++k) {
      const auto name = fmt::format("{}_{}.png", c.case_id, k);
      write_png(image_dir / name, c.images[k]);
      e.cutouts.push_back("images/" + name);
    }
    entries.push_back(std::move(e));
  }
  const auto manifest = out_dir / "manifest.json";
  write_manifest(manifest, entries);
  return manifest;
}

}  // namespace edmlp
