#include <doctest.h>

#include <fstream>
#include <random>

#include "edmlp/dataset.hpp"
#include "edmlp/image_io.hpp"
#include "test_util.hpp"

using namespace edmlp;

namespace {

Cutout random_cutout(std::mt19937_64& rng, std::size_t side, std::string id = "c/0") {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Cutout c;
  c.side = side;
  c.pixels.resize(side * side);
  for (auto& v : c.pixels) v = u(rng);
  c.case_id = "c";
  c.cutout_id = std::move(id);
  c.label = Label::Dysplastic;
  return c;
}

RgbImage solid(std::size_t w, std::size_t h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  RgbImage img{w, h, {}};
  for (std::size_t i = 0; i < w * h; ++i) img.rgb.insert(img.rgb.end(), {r, g, b});
  return img;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
  std::ofstream f(path, std::ios::binary);
  f << "P6\n# comment\n" << img.width << ' ' << img.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
}

Case make_case(const std::string& id, Label label, std::size_t n, std::size_t side = 4) {
  Case c{id, label, {}};
  for (std::size_t k = 0; k < n; ++k) {
    Cutout cut;
    cut.side = side;
    cut.pixels.assign(side * side, 0.0);
    cut.case_id = id;
    cut.cutout_id = id + "/" + std::to_string(k);
    cut.label = label;
    c.cutouts.push_back(cut);
  }
  return c;
}

}  // namespace

TEST_CASE("labels round trip") {
  CHECK(parse_label(to_string(Label::Dysplastic)) == Label::Dysplastic);
  CHECK(parse_label("non_dysplastic") == Label::NonDysplastic);
  CHECK_THROWS_AS(parse_label("benign"), DataError);
}

TEST_CASE("luma uses integer Rec. 601 weights") {
  CHECK(luma(255, 255, 255) == 255);
  CHECK(luma(0, 0, 0) == 0);
  CHECK(luma(255, 0, 0) == 76);   // 76.245
  CHECK(luma(0, 255, 0) == 150);  // 149.685
  CHECK(luma(0, 0, 255) == 29);   // 29.07
  CHECK(luma(10, 20, 30) == 18);  // 18.15
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> u(0, 255);
  for (int i = 0; i < 2000; ++i) {
    const int r = u(rng), g = u(rng), b = u(rng);
    const int expect = (299 * r + 587 * g + 114 * b + 500) / 1000;
    REQUIRE(luma(std::uint8_t(r), std::uint8_t(g), std::uint8_t(b)) == expect);
  }
}

TEST_CASE("min-max normalization") {
  const std::vector<double> v{2.0, 4.0, 6.0};
  CHECK(normalize(v) == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(normalize(std::vector<double>{3.0, 3.0}) == std::vector<double>{0.0, 0.0});
  CHECK_THROWS_AS(normalize(std::vector<double>{}), DataError);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(37);
    for (auto& e : x) e = u(rng);
    const auto y = normalize(x);
    REQUIRE(*std::min_element(y.begin(), y.end()) == 0.0);
    REQUIRE(*std::max_element(y.begin(), y.end()) == 1.0);
  }
}

TEST_CASE("preprocess checks shape") {
  RawCutout raw{solid(4, 4, 10, 20, 30), "a", Label::Dysplastic};
  raw.image.rgb[0] = 200;
  const auto c = preprocess(raw, "a/0");
  CHECK(c.side == 4);
  CHECK(c.pixels.size() == 16);
  CHECK(c.pixels[0] == 1.0);
  CHECK(c.pixels[1] == 0.0);
  CHECK(c.label == Label::Dysplastic);
  CHECK(c.cutout_id == "a/0");
  CHECK_THROWS_AS(preprocess(RawCutout{solid(4, 3, 1, 1, 1), "a", Label::Dysplastic}, "x"), DataError);
  CHECK_THROWS_AS(preprocess(raw, "a/0", 8), DataError);
}

TEST_CASE("quarter turn moves (r, c) to (c, side - 1 - r)") {
  std::mt19937_64 rng(3);
  const auto c = random_cutout(rng, 5);
  const auto r = rotate90(c);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) REQUIRE(r.at(j, 4 - i) == c.at(i, j));
  }
  CHECK(r.rotation == Rotation::R90);
  CHECK(r.cutout_id == c.cutout_id);
  CHECK(r.label == c.label);
}

TEST_CASE("four quarter turns are the identity") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    const auto c = random_cutout(rng, 1 + i % 9);
    const auto back = rotate90(rotate90(rotate90(rotate90(c))));
    REQUIRE(back.pixels == c.pixels);
    REQUIRE(back.rotation == Rotation::R0);
  }
}

TEST_CASE("augmentation quadruples and keeps the originals first") {
  std::mt19937_64 rng(5);
  std::vector<Cutout> in;
  for (int i = 0; i < 13; ++i) in.push_back(random_cutout(rng, 6, "c/" + std::to_string(i)));
  const auto out = augment_all(in);
  REQUIRE(out.size() == 4 * in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    CHECK(out[4 * i].pixels == in[i].pixels);
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(out[4 * i + k].rotation == static_cast<Rotation>(k));
      CHECK(out[4 * i + k].cutout_id == in[i].cutout_id);
    }
  }
  CHECK(flatten(in[0]) == in[0].pixels);
}

TEST_CASE("case set validation") {
  CHECK_NOTHROW(CaseSet({make_case("a", Label::Dysplastic, 2), make_case("b", Label::NonDysplastic, 1)}));
  CHECK_THROWS_AS(CaseSet({make_case("a", Label::Dysplastic, 2), make_case("a", Label::NonDysplastic, 1)}), DataError);
  CHECK_THROWS_AS(CaseSet({make_case("a", Label::Dysplastic, 0)}), DataError);
  auto mixed = make_case("a", Label::Dysplastic, 2);
  mixed.cutouts[1].label = Label::NonDysplastic;
  CHECK_THROWS_AS(CaseSet({mixed}), DataError);
  CHECK_THROWS_AS(CaseSet({make_case("a", Label::Dysplastic, 1, 4), make_case("b", Label::Dysplastic, 1, 5)}),
                  DataError);

  const CaseSet set({make_case("a", Label::Dysplastic, 2), make_case("b", Label::NonDysplastic, 3),
                     make_case("c", Label::NonDysplastic, 1)});
  CHECK(set.total_cutouts() == 6);
  CHECK(set.count_cases(Label::NonDysplastic) == 2);
  CHECK(set.input_width() == 16);
  const std::vector<std::string> drop{"b"};
  const auto rest = set.without(drop);
  REQUIRE(rest.size() == 2);
  CHECK(rest[0].case_id == "a");
  CHECK(rest[1].case_id == "c");
}

TEST_CASE("image files") {
  const auto dir = test::scratch("dataset_images");
  RgbImage img{3, 2, {}};
  for (int i = 0; i < 18; ++i) img.rgb.push_back(std::uint8_t(i * 13));
  write_png(dir / "a.png", img);
  const auto back = read_image(dir / "a.png");
  CHECK(back.width == 3);
  CHECK(back.height == 2);
  CHECK(back.rgb == img.rgb);

  write_ppm(dir / "b.ppm", img);
  CHECK(read_image(dir / "b.ppm").rgb == img.rgb);

  const std::vector<std::uint8_t> gray{0, 128, 255, 7};
  write_png_gray(dir / "g.png", 2, 2, gray);
  const auto g = read_image(dir / "g.png");
  CHECK(g.rgb == std::vector<std::uint8_t>{0, 0, 0, 128, 128, 128, 255, 255, 255, 7, 7, 7});

  CHECK_THROWS_AS(read_image(dir / "missing.png"), IoError);
  std::ofstream(dir / "junk.png") << "not an image";
  CHECK_THROWS_AS(read_image(dir / "junk.png"), DataError);
}

TEST_CASE("manifest loading") {
  const auto dir = test::scratch("dataset_manifest");
  std::filesystem::create_directories(dir / "img");
  std::vector<ManifestEntry> entries;
  for (int c = 0; c < 2; ++c) {
    ManifestEntry e{"case" + std::to_string(c), c == 0 ? Label::Dysplastic : Label::NonDysplastic, {}};
    for (int k = 0; k < 3; ++k) {
      auto img = solid(8, 8, 10, 10, 10);
      img.rgb[3 * k] = 250;
      const auto name = "img/" + e.case_id + "_" + std::to_string(k) + ".png";
      write_png(dir / name, img);
      e.cutouts.push_back(name);
    }
    entries.push_back(e);
  }
  write_manifest(dir / "manifest.json", entries);
  const auto read = read_manifest_entries(dir / "manifest.json");
  REQUIRE(read.size() == 2);
  CHECK(read[1].cutouts == entries[1].cutouts);

  const auto set = load_manifest(dir / "manifest.json");
  CHECK(set.size() == 2);
  CHECK(set.side() == 8);
  CHECK(set[0].label == Label::Dysplastic);
  CHECK(set[1].cutouts[2].cutout_id == "case1/2");
  CHECK(set[0].cutouts[1].pixels[1] == 1.0);
  CHECK_THROWS_AS(load_manifest(dir / "manifest.json", 16), DataError);
  CHECK_THROWS_AS(load_manifest(dir / "nope.json"), IoError);

  std::ofstream(dir / "bad.json") << R"([{"case_id": "x", "label": "maybe", "cutouts": ["img/case0_0.png"]}])";
  CHECK_THROWS_AS(load_manifest(dir / "bad.json"), DataError);
  std::ofstream(dir / "missing.json") << R"([{"case_id": "x", "label": "dysplastic", "cutouts": ["img/zz.png"]}])";
  CHECK_THROWS_AS(load_manifest(dir / "missing.json"), IoError);
  std::ofstream(dir / "broken.json") << "[{";
  CHECK_THROWS_AS(load_manifest(dir / "broken.json"), DataError);
}
