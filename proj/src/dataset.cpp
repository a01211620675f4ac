#include "edmlp/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_set>

#include <json.hpp>

namespace edmlp {

std::string_view to_string(Label label) {
  return label == Label::Dysplastic ? "dysplastic" : "non_dysplastic";
}

Label parse_label(std::string_view text) {
  if (text == "dysplastic") return Label::Dysplastic;
  if (text == "non_dysplastic") return Label::NonDysplastic;
  throw DataError("unknown label '" + std::string(text) + "' (expected dysplastic or non_dysplastic)");
}

std::string_view to_string(Rotation rotation) {
  switch (rotation) {
    case Rotation::R0: return "R0";
    case Rotation::R90: return "R90";
    case Rotation::R180: return "R180";
    case Rotation::R270: return "R270";
  }
  return "?";
}

// ---------------------------------------------------------------- CaseSet

CaseSet::CaseSet(std::vector<Case> cases) : cases_(std::move(cases)) {
  std::unordered_set<std::string> ids;
  std::unordered_set<std::string> cutout_ids;
  for (const auto& c : cases_) {
    if (!ids.insert(c.case_id).second) throw DataError("duplicate case: " + c.case_id);
    if (c.cutouts.empty()) throw DataError("case without cutouts: " + c.case_id);
    for (const auto& cut : c.cutouts) {
      if (cut.case_id != c.case_id || cut.label != c.label) {
        throw DataError("cutout " + cut.cutout_id + " disagrees with its case " + c.case_id);
      }
      if (!cutout_ids.insert(cut.cutout_id).second) throw DataError("duplicate cutout id: " + cut.cutout_id);
      if (side_ == 0) side_ = cut.side;
      if (cut.side != side_ || cut.pixels.size() != cut.side * cut.side) {
        throw DataError("cutout " + cut.cutout_id + " has side " + std::to_string(cut.side) + ", expected " +
                        std::to_string(side_));
      }
    }
  }
}

std::size_t CaseSet::total_cutouts() const {
  std::size_t n = 0;
  for (const auto& c : cases_) n += c.cutouts.size();
  return n;
}

std::size_t CaseSet::count_cases(Label label) const {
  return static_cast<std::size_t>(
      std::count_if(cases_.begin(), cases_.end(), [&](const Case& c) { return c.label == label; }));
}

CaseSet CaseSet::without(std::span<const std::string> excluded) const {
  std::vector<Case> kept;
  for (const auto& c : cases_) {
    if (std::find(excluded.begin(), excluded.end(), c.case_id) == excluded.end()) kept.push_back(c);
  }
  return CaseSet(std::move(kept));
}

// ---------------------------------------------------------- preprocessing

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const unsigned weighted = 299u * r + 587u * g + 114u * b;
  return static_cast<std::uint8_t>((weighted + 500u) / 1000u);
}

GrayImage to_grayscale(const RgbImage& image) {
  GrayImage out{image.width, image.height, std::vector<std::uint8_t>(image.pixel_count())};
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = luma(image.rgb[3 * i], image.rgb[3 * i + 1], image.rgb[3 * i + 2]);
  }
  return out;
}

GrayImage to_grayscale(const RawCutout& raw) { return to_grayscale(raw.image); }

std::vector<double> normalize(std::span<const double> values) {
  if (values.empty()) throw DataError("cannot normalize an empty image");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo;
  const double range = *hi - *lo;
  std::vector<double> out(values.size(), 0.0);
  if (range > 0.0) {
    std::transform(values.begin(), values.end(), out.begin(), [&](double v) { return (v - min) / range; });
  }
  return out;
}

std::vector<double> normalize(const GrayImage& gray) {
  std::vector<double> wide(gray.values.begin(), gray.values.end());
  return normalize(wide);
}

Cutout preprocess(const RawCutout& raw, std::string cutout_id, std::size_t expected_side) {
  const auto& img = raw.image;
  if (img.width != img.height) {
    throw DataError("cutout " + cutout_id + " is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                    ", cutouts must be square");
  }
  if (expected_side != 0 && img.width != expected_side) {
    throw DataError("cutout " + cutout_id + " has side " + std::to_string(img.width) + ", configured side is " +
                    std::to_string(expected_side));
  }
  Cutout out;
  out.pixels = normalize(to_grayscale(raw));
  out.side = img.width;
  out.case_id = raw.case_id;
  out.cutout_id = std::move(cutout_id);
  out.label = raw.label;
  return out;
}

// ------------------------------------------------------------ augmentation

Cutout rotate90(const Cutout& cutout) {
  const std::size_t n = cutout.side;
  if (cutout.pixels.size() != n * n) throw DataError("rotation requires a square cutout: " + cutout.cutout_id);
  Cutout out = cutout;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) out.pixels[c * n + (n - 1 - r)] = cutout.pixels[r * n + c];
  }
  out.rotation = static_cast<Rotation>((static_cast<int>(cutout.rotation) + 1) % 4);
  return out;
}

std::array<Cutout, 4> augment_rotations(const Cutout& cutout) {
  std::array<Cutout, 4> out;
  out[0] = cutout;
  out[0].rotation = Rotation::R0;
  for (std::size_t k = 1; k < 4; ++k) out[k] = rotate90(out[k - 1]);
  return out;
}

std::vector<Cutout> augment_all(std::span<const Cutout> cutouts) {
  std::vector<Cutout> out;
  out.reserve(cutouts.size() * 4);
  for (const auto& c : cutouts) {
    for (auto& r : augment_rotations(c)) out.push_back(std::move(r));
  }
  return out;
}

std::vector<double> flatten(const Cutout& cutout) { return cutout.pixels; }

// ---------------------------------------------------------------- manifest

std::vector<ManifestEntry> read_manifest_entries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("malformed manifest " + path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw DataError("malformed manifest " + path.string() + ": top level must be a list of cases");

  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const std::string where = "manifest entry " + std::to_string(i);
    if (!item.is_object() || !item.contains("case_id") || !item.contains("label") || !item.contains("cutouts")) {
      throw DataError(where + ": expected {case_id, label, cutouts}");
    }
    if (!item["case_id"].is_string() || !item["label"].is_string() || !item["cutouts"].is_array()) {
      throw DataError(where + ": wrong field types");
    }
    ManifestEntry e;
    e.case_id = item["case_id"].get<std::string>();
    try {
      e.label = parse_label(item["label"].get<std::string>());
    } catch (const DataError& err) {
      throw DataError(where + " (" + e.case_id + "): " + err.what());
    }
    for (const auto& p : item["cutouts"]) {
      if (!p.is_string()) throw DataError(where + " (" + e.case_id + "): cutout paths must be strings");
      e.cutouts.push_back(p.get<std::string>());
    }
    if (e.cutouts.empty()) throw DataError(where + " (" + e.case_id + "): case lists no cutouts");
    if (!seen.insert(e.case_id).second) throw DataError("duplicate case: " + e.case_id);
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& e : entries) {
    doc.push_back({{"case_id", e.case_id}, {"label", std::string(to_string(e.label))}, {"cutouts", e.cutouts}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  out << doc.dump(2) << '\n';
}

CaseSet load_manifest(const std::filesystem::path& path, std::size_t side) {
  const auto entries = read_manifest_entries(path);
  const auto base = path.parent_path();
  std::vector<Case> cases;
  cases.reserve(entries.size());
  for (const auto& e : entries) {
    Case c{e.case_id, e.label, {}};
    for (std::size_t k = 0; k < e.cutouts.size(); ++k) {
      const auto file = base / e.cutouts[k];
      RawCutout raw{read_image(file), e.case_id, e.label};
      Cutout cut;
      try {
        cut = preprocess(raw, e.case_id + "/" + std::to_string(k), side);
      } catch (const DataError& err) {
        throw DataError(std::string(err.what()) + " [" + file.string() + "]");
      }
      if (side == 0) side = cut.side;
      c.cutouts.push_back(std::move(cut));
    }
    cases.push_back(std::move(c));
  }
  return CaseSet(std::move(cases));
}

}  // namespace edmlp
