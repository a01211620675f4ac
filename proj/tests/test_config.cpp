#include <doctest.h>

#include <fstream>

#include "edmlp/config.hpp"
#include "test_util.hpp"

using namespace edmlp;
using nlohmann::json;

TEST_CASE("defaults and overrides") {
  const auto doc = json::parse(R"({
    "structure": {"hidden_layers": [20, 20], "cost": "mse"},
    "losses": {"lambda_21": 2},
    "n_realizations": 5,
    "master_seed": 18446744073709551615,
    "manifests": {"train": "data/m.json"},
    "training": {"max_epochs": 50, "split": [0.6, 0.2, 0.2]},
    "d_axes": "predictive",
    "unknown_key": true
  })");
  const auto c = parse_config(doc, "/base");
  CHECK(c.protocol == Protocol::Loocv);
  REQUIRE(c.structures.size() == 1);
  CHECK(c.structures[0].hidden_layers == std::vector<std::size_t>{20, 20});
  CHECK(c.structures[0].cost == CostFunction::MeanSquaredError);
  CHECK(c.structures[0].input_width == 0);
  CHECK(c.losses.lambda_12 == 1.0);
  CHECK(c.losses.lambda_21 == 2.0);
  CHECK(c.master_seed == 18446744073709551615ull);
  CHECK(c.train_manifest == std::filesystem::path("/base/data/m.json"));
  CHECK(c.test_manifest.empty());
  CHECK(c.training.max_epochs == 50);
  CHECK(c.training.val_patience == 6);
  CHECK(c.training.split.train == 0.6);
  CHECK(c.d_axes == DAxes::PredictiveValues);
  CHECK_FALSE(c.synth.has_value());
}

TEST_CASE("canonical JSON parses back to the same config") {
  const auto doc = json::parse(R"({
    "protocol": "cutout_holdout",
    "sweep": [{"input_width": 64, "hidden_layers": [5]}, {"input_width": 64, "hidden_layers": [3, 3], "cost": "mse"}],
    "manifests": {"train": "/x/a.json", "test": "/x/b.json"},
    "cutout_holdout": {"per_class_train": 10, "per_class_test": 4},
    "synth": {"class_contrast": 0.5, "seed": 3}
  })");
  const auto c = parse_config(doc, "/");
  const auto again = parse_config(to_json(c), "/elsewhere");
  CHECK(to_json(again) == to_json(c));
  CHECK(again.structures.size() == 2);
  CHECK(again.per_class_train == 10);
  REQUIRE(again.synth.has_value());
  CHECK(again.synth->class_contrast == 0.5);
}

TEST_CASE("schema violations name the key") {
  const auto check_bad = [](const char* text, const char* key) {
    CAPTURE(text);
    try {
      parse_config(json::parse(text), "/");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(key) != std::string::npos);
    }
  };
  check_bad(R"({"protocol": "kfold"})", "kfold");
  check_bad(R"({"n_realizations": -1})", "n_realizations");
  check_bad(R"({"n_realizations": "5"})", "n_realizations");
  check_bad(R"({"structure": {"hidden_layers": []}})", "hidden_layers");
  check_bad(R"({"structure": {"hidden_layers": [4, 0]}})", "hidden_layers");
  check_bad(R"({"losses": {"lambda_21": 0}})", "lambda");
  check_bad(R"({"training": {"split": [0.5, 0.5]}})", "split");
  check_bad(R"({"synth": {"side": 100}})", "side");
  check_bad(R"({"d_axes": "roc"})", "d_axes");
  check_bad(R"([1, 2])", "object");
}

TEST_CASE("loading from disk") {
  const auto dir = test::scratch("config");
  std::ofstream(dir / "c.json") << R"({"manifests": {"train": "m.json"}})";
  CHECK(load_config(dir / "c.json").train_manifest == std::filesystem::absolute(dir / "m.json"));
  std::ofstream(dir / "bad.json") << "{";
  CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
  CHECK_THROWS_AS(load_config(dir / "none.json"), IoError);
}

TEST_CASE("loss pair parsing") {
  const auto l = parse_losses("1,2.5");
  CHECK(l.lambda_12 == 1.0);
  CHECK(l.lambda_21 == 2.5);
  CHECK_THROWS_AS(parse_losses("1"), ConfigError);
  CHECK_THROWS_AS(parse_losses("1,x"), ConfigError);
  CHECK_THROWS_AS(parse_losses("1,0"), ConfigError);
}
