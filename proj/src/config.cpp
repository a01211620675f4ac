#include "edmlp/config.hpp"

#include <fstream>

#include <fmt/format.h>

namespace edmlp {
namespace {

using nlohmann::json;

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

template <typename T>
T get_as(const json& v, const std::string& where) {
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError("");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("config key '{}' has the wrong type or value: {}", where, v.dump()));
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& dst, const std::string& prefix) {
  if (const json* v = find(obj, key)) dst = get_as<T>(*v, prefix + key);
}

Protocol parse_protocol(const std::string& text) {
  if (text == "loocv") return Protocol::Loocv;
  if (text == "holdout") return Protocol::Holdout;
  if (text == "cutout_holdout") return Protocol::CutoutHoldout;
  throw ConfigError("unknown protocol '" + text + "' (expected loocv, holdout or cutout_holdout)");
}

SynthParams parse_synth(const json& obj) {
  if (!obj.is_object()) throw ConfigError("config key 'synth' must be an object");
  SynthParams p;
  read_opt(obj, "n_cases_per_class", p.n_cases_per_class, "synth.");
  read_opt(obj, "cutouts_min", p.cutouts_min, "synth.");
  read_opt(obj, "cutouts_max", p.cutouts_max, "synth.");
  read_opt(obj, "side", p.side, "synth.");
  read_opt(obj, "class_contrast", p.class_contrast, "synth.");
  read_opt(obj, "noise_sd", p.noise_sd, "synth.");
  read_opt(obj, "seed", p.seed, "synth.");
  p.validate();
  return p;
}

json synth_to_json(const SynthParams& p) {
  return {{"n_cases_per_class", p.n_cases_per_class}, {"cutouts_min", p.cutouts_min}, {"cutouts_max", p.cutouts_max},
          {"side", p.side}, {"class_contrast", p.class_contrast}, {"noise_sd", p.noise_sd}, {"seed", p.seed}};
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return std::filesystem::absolute(path.is_absolute() ? path : base / path).lexically_normal();
}

}  // namespace

std::string_view to_string(Protocol protocol) {
  switch (protocol) {
    case Protocol::Loocv: return "loocv";
    case Protocol::Holdout: return "holdout";
    case Protocol::CutoutHoldout: return "cutout_holdout";
  }
  return "?";
}

MlpStructure parse_structure(const json& doc) {
  if (!doc.is_object()) throw ConfigError("a structure must be an object");
  MlpStructure s;
  read_opt(doc, "input_width", s.input_width, "structure.");
  const json* hidden = find(doc, "hidden_layers");
  if (!hidden || !hidden->is_array() || hidden->empty()) {
    throw ConfigError("structure.hidden_layers must be a nonempty list of widths");
  }
  for (const auto& w : *hidden) s.hidden_layers.push_back(get_as<std::size_t>(w, "structure.hidden_layers"));
  if (const json* c = find(doc, "cost")) s.cost = parse_cost(get_as<std::string>(*c, "structure.cost"));
  for (auto w : s.hidden_layers) {
    if (w == 0) throw ConfigError("structure.hidden_layers widths must be positive");
  }
  return s;
}

json to_json(const MlpStructure& s) {
  return {{"input_width", s.input_width}, {"hidden_layers", s.hidden_layers}, {"cost", std::string(to_string(s.cost))}};
}

LossPair parse_losses(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError("losses must be given as L12,L21");
  LossPair l;
  try {
    std::size_t used = 0;
    l.lambda_12 = std::stod(text.substr(0, comma), &used);
    if (used != comma) throw ConfigError("");
    const auto rest = text.substr(comma + 1);
    l.lambda_21 = std::stod(rest, &used);
    if (used != rest.size()) throw ConfigError("");
  } catch (const std::exception&) {
    throw ConfigError("cannot parse losses '" + text + "' (expected L12,L21)");
  }
  l.validate();
  return l;
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;

  if (const json* p = find(doc, "protocol")) c.protocol = parse_protocol(get_as<std::string>(*p, "protocol"));

  if (const json* sweep = find(doc, "sweep")) {
    if (!sweep->is_array() || sweep->empty()) throw ConfigError("config key 'sweep' must be a nonempty list of structures");
    for (const auto& s : *sweep) c.structures.push_back(parse_structure(s));
  } else if (const json* s = find(doc, "structure")) {
    c.structures.push_back(parse_structure(*s));
  }

  if (const json* l = find(doc, "losses")) {
    if (!l->is_object()) throw ConfigError("config key 'losses' must be an object");
    read_opt(*l, "lambda_12", c.losses.lambda_12, "losses.");
    read_opt(*l, "lambda_21", c.losses.lambda_21, "losses.");
  }
  c.losses.validate();

  read_opt(doc, "n_realizations", c.n_realizations, "");
  read_opt(doc, "master_seed", c.master_seed, "");
  read_opt(doc, "side", c.side, "");

  if (const json* t = find(doc, "training")) {
    if (!t->is_object()) throw ConfigError("config key 'training' must be an object");
    read_opt(*t, "max_epochs", c.training.max_epochs, "training.");
    read_opt(*t, "grad_tol", c.training.grad_tol, "training.");
    read_opt(*t, "val_patience", c.training.val_patience, "training.");
    if (const json* sp = find(*t, "split")) {
      if (!sp->is_array() || sp->size() != 3) throw ConfigError("training.split must be [train, val, test]");
      c.training.split = {get_as<double>((*sp)[0], "training.split"), get_as<double>((*sp)[1], "training.split"),
                          get_as<double>((*sp)[2], "training.split")};
    }
  }
  c.training.validate();

  if (const json* m = find(doc, "manifests")) {
    if (!m->is_object()) throw ConfigError("config key 'manifests' must be an object");
    std::string train, test;
    read_opt(*m, "train", train, "manifests.");
    read_opt(*m, "test", test, "manifests.");
    c.train_manifest = resolve(base_dir, train);
    c.test_manifest = resolve(base_dir, test);
  }

  if (const json* h = find(doc, "cutout_holdout")) {
    if (!h->is_object()) throw ConfigError("config key 'cutout_holdout' must be an object");
    read_opt(*h, "per_class_train", c.per_class_train, "cutout_holdout.");
    read_opt(*h, "per_class_test", c.per_class_test, "cutout_holdout.");
  }

  if (const json* a = find(doc, "d_axes")) {
    const auto text = get_as<std::string>(*a, "d_axes");
    if (text == "se_sp") {
      c.d_axes = DAxes::SensitivitySpecificity;
    } else if (text == "predictive") {
      c.d_axes = DAxes::PredictiveValues;
    } else {
      throw ConfigError("d_axes must be se_sp or predictive");
    }
  }

  if (const json* s = find(doc, "synth")) c.synth = parse_synth(*s);
  if (c.n_realizations < 1) throw ConfigError("n_realizations must be at least 1");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc, std::filesystem::absolute(path).parent_path());
}

json to_json(const ExperimentConfig& c) {
  json doc;
  doc["protocol"] = std::string(to_string(c.protocol));
  if (c.structures.size() == 1) {
    doc["structure"] = to_json(c.structures.front());
  } else if (!c.structures.empty()) {
    doc["sweep"] = json::array();
    for (const auto& s : c.structures) doc["sweep"].push_back(to_json(s));
  }
  doc["losses"] = {{"lambda_12", c.losses.lambda_12}, {"lambda_21", c.losses.lambda_21}};
  doc["n_realizations"] = c.n_realizations;
  doc["master_seed"] = c.master_seed;
  doc["side"] = c.side;
  doc["training"] = {{"max_epochs", c.training.max_epochs},
                     {"grad_tol", c.training.grad_tol},
                     {"val_patience", c.training.val_patience},
                     {"split", {c.training.split.train, c.training.split.val, c.training.split.test}}};
  doc["manifests"] = {{"train", c.train_manifest.string()}, {"test", c.test_manifest.string()}};
  doc["cutout_holdout"] = {{"per_class_train", c.per_class_train}, {"per_class_test", c.per_class_test}};
  doc["d_axes"] = c.d_axes == DAxes::SensitivitySpecificity ? "se_sp" : "predictive";
  if (c.synth) doc["synth"] = synth_to_json(*c.synth);
  return doc;
}

}  // namespace edmlp
