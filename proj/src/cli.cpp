#include "edmlp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "edmlp/complexity.hpp"
#include "edmlp/config.hpp"
#include "edmlp/evaluation.hpp"
#include "edmlp/image_io.hpp"
#include "edmlp/model_io.hpp"
#include "edmlp/report.hpp"
#include "edmlp/seeds.hpp"

namespace edmlp {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kExitCodeHelp =
    "Exit codes: 0 success, 1 internal error, 2 usage error, 3 invalid config,\n"
    "4 I/O error (missing or unreadable input, unwritable output),\n"
    "5 data or model error (bad images, dimension mismatch, undefined metric).";

struct CommonArgs {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string losses;
  CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool need_config) {
  auto* c = cmd->add_option("-c,--config", args.config, "experiment config (JSON)");
  if (need_config) c->required();
  cmd->add_option("-o,--out", args.out, "output directory")->required();
  args.seed_opt = cmd->add_option("--seed", args.seed, "override master_seed");
  cmd->add_option("-j,--jobs", args.jobs, "worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--losses", args.losses, "override losses as L12,L21");
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text) || !f.flush()) throw IoError("cannot write " + path.string());
}

fs::path make_out_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + out);
  return dir;
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  return ss.str();
}

ExperimentConfig load_experiment(const CommonArgs& args, Protocol protocol) {
  auto config = load_config(args.config);
  config.protocol = protocol;
  if (args.seed_opt && args.seed_opt->count() > 0) config.master_seed = args.seed;
  if (!args.losses.empty()) config.losses = parse_losses(args.losses);
  if (config.structures.empty()) throw ConfigError("config has neither 'structure' nor 'sweep'");
  if (config.train_manifest.empty()) throw ConfigError("config is missing 'manifests.train'");
  if (protocol != Protocol::Loocv && config.test_manifest.empty()) {
    throw ConfigError("config is missing 'manifests.test'");
  }
  return config;
}

ExperimentOptions experiment_options(const ExperimentConfig& config, std::size_t jobs) {
  ExperimentOptions opts;
  opts.train = config.training;
  opts.losses = config.losses;
  opts.n_realizations = config.n_realizations;
  opts.master_seed = config.master_seed;
  opts.jobs = jobs;
  opts.axes = config.d_axes;
  return opts;
}

void fill_input_width(ExperimentConfig& config, const CaseSet& cases) {
  for (auto& s : config.structures) {
    if (s.input_width == 0) s.input_width = cases.input_width();
    if (s.input_width != cases.input_width()) {
      throw DimensionError(fmt::format("structure {} expects {} inputs but the images have {} pixels", s.describe(),
                                       s.input_width, cases.input_width()));
    }
  }
}

json seeds_json(std::uint64_t master, std::size_t realization, std::size_t fold) {
  const auto s = fold_seeds(master, realization, fold);
  return {{"realization", realization}, {"fold", fold}, {"init", s.init}, {"balance", s.balance}, {"split", s.split}};
}

void write_summary(const fs::path& dir, const ExperimentConfig& config, const std::string& command, json seeds) {
  auto doc = to_json(config);
  doc["command"] = command;
  doc["derived_seeds"] = std::move(seeds);
  write_file(dir / "run_summary.json", doc.dump(2) + "\n");
}

fs::path structure_dir(const fs::path& out, const ExperimentConfig& config, std::size_t k) {
  if (config.structures.size() == 1) return out;
  auto name = config.structures[k].describe();
  std::replace(name.begin(), name.end(), '/', '_');
  return make_out_dir((out / fmt::format("{:02}_{}", k, name)).string());
}

void write_sweep(const fs::path& out, const ExperimentConfig& config, std::span<const AggregateReport> reports) {
  if (config.structures.size() < 2) return;
  write_file(out / "sweep.csv", render([&](std::ostream& s) {
               s << "structure,n_realizations,mean_accuracy,sd_accuracy,max_accuracy,mean_se,mean_sp,mean_d\n";
               for (std::size_t k = 0; k < reports.size(); ++k) {
                 const auto& a = reports[k];
                 s << fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", config.structures[k].describe(),
                                  a.n_realizations, a.mean_accuracy, a.sd_accuracy, a.max_accuracy,
                                  a.mean_sensitivity, a.mean_specificity, a.mean_d);
               }
             }));
}

void print_aggregate(std::ostream& out, const MlpStructure& s, const AggregateReport& a) {
  out << fmt::format("{}: accuracy {:.4f} +/- {:.4f} (max {:.4f}), Se {:.4f}, Sp {:.4f}, D {:.4f}\n", s.describe(),
                     a.mean_accuracy, a.sd_accuracy, a.max_accuracy, a.mean_sensitivity, a.mean_specificity, a.mean_d);
}

int cmd_loocv(const CommonArgs& args, std::ostream& out) {
  auto config = load_experiment(args, Protocol::Loocv);
  const auto cases = load_manifest(config.train_manifest, config.side);
  fill_input_width(config, cases);
  const auto opts = experiment_options(config, args.jobs);
  const auto dir = make_out_dir(args.out);

  std::vector<AggregateReport> reports;
  for (std::size_t k = 0; k < config.structures.size(); ++k) {
    const auto& structure = config.structures[k];
    const auto result = loocv(cases, structure, opts);
    const auto sdir = structure_dir(dir, config, k);
    write_file(sdir / "decisions.csv", render([&](std::ostream& s) { write_decisions_csv(s, result.realizations); }));
    write_file(sdir / "realizations.csv",
               render([&](std::ostream& s) { write_realizations_csv(s, result.realizations); }));
    write_file(sdir / "aggregate.csv", render([&](std::ostream& s) { write_aggregate_csv(s, result.aggregate); }));
    write_file(sdir / "folds.csv", render([&](std::ostream& s) {
                 s << "realization,held_out_case,training_vectors,epochs,stop_reason\n";
                 for (const auto& r : result.realizations) {
                   for (const auto& f : r.folds) {
                     s << fmt::format("{},{},{},{},{}\n", r.realization_index, f.held_out_case, f.training_vectors,
                                      f.epochs, to_string(f.stop_reason));
                   }
                 }
               }));
    print_aggregate(out, structure, result.aggregate);
    reports.push_back(result.aggregate);
  }
  write_sweep(dir, config, reports);

  json seeds = json::array();
  for (std::size_t r = 0; r < config.n_realizations; ++r) {
    for (std::size_t f = 0; f < cases.size(); ++f) seeds.push_back(seeds_json(config.master_seed, r, f));
  }
  write_summary(dir, config, "loocv", std::move(seeds));
  return kExitOk;
}

int cmd_holdout(const CommonArgs& args, std::ostream& out) {
  auto config = load_experiment(args, Protocol::Holdout);
  const auto train_cases = load_manifest(config.train_manifest, config.side);
  const auto test_cases = load_manifest(config.test_manifest, train_cases.side());
  fill_input_width(config, train_cases);
  const auto opts = experiment_options(config, args.jobs);
  const auto dir = make_out_dir(args.out);

  std::vector<AggregateReport> reports;
  for (std::size_t k = 0; k < config.structures.size(); ++k) {
    const auto& structure = config.structures[k];
    const auto result = best_by_d(train_cases, test_cases, structure, opts);
    const auto sdir = structure_dir(dir, config, k);
    write_file(sdir / "decisions.csv", render([&](std::ostream& s) { write_decisions_csv(s, result.realizations); }));
    write_file(sdir / "realizations.csv",
               render([&](std::ostream& s) { write_realizations_csv(s, result.realizations); }));
    write_file(sdir / "aggregate.csv", render([&](std::ostream& s) { write_aggregate_csv(s, result.aggregate); }));
    write_file(sdir / "best.csv", render([&](std::ostream& s) {
                 const auto& b = result.best();
                 write_metrics_header(s, true);
                 write_metrics_row(s, b.realization_index, {b.cm, b.rates, b.merit});
               }));
    save_model(sdir / "best_model.bin", result.model);
    print_aggregate(out, structure, result.aggregate);
    out << fmt::format("  best realization {} with D {:.4f}\n", result.best_index, result.best().merit.d);
    reports.push_back(result.aggregate);
  }
  write_sweep(dir, config, reports);

  json seeds = json::array();
  for (std::size_t r = 0; r < config.n_realizations; ++r) seeds.push_back(seeds_json(config.master_seed, r, 0));
  write_summary(dir, config, "holdout", std::move(seeds));
  return kExitOk;
}

std::vector<Cutout> all_cutouts(const CaseSet& cases) {
  std::vector<Cutout> out;
  for (const auto& c : cases.cases()) out.insert(out.end(), c.cutouts.begin(), c.cutouts.end());
  return out;
}

int cmd_cutout_holdout(const CommonArgs& args, std::ostream& out) {
  auto config = load_experiment(args, Protocol::CutoutHoldout);
  const auto train_cases = load_manifest(config.train_manifest, config.side);
  const auto test_cases = load_manifest(config.test_manifest, train_cases.side());
  fill_input_width(config, train_cases);
  const auto opts = experiment_options(config, args.jobs);
  const auto train_pool = all_cutouts(train_cases);
  const auto test_pool = all_cutouts(test_cases);
  const auto dir = make_out_dir(args.out);

  std::vector<AggregateReport> reports;
  for (std::size_t k = 0; k < config.structures.size(); ++k) {
    const auto& structure = config.structures[k];
    const auto result =
        cutout_holdout_eval(train_pool, test_pool, structure, opts, config.per_class_train, config.per_class_test);
    const auto sdir = structure_dir(dir, config, k);
    write_file(sdir / "holdout.csv", render([&](std::ostream& s) { write_holdout_csv(s, result); }));
    write_file(sdir / "aggregate.csv", render([&](std::ostream& s) { write_aggregate_csv(s, result.aggregate); }));
    print_aggregate(out, structure, result.aggregate);
    reports.push_back(result.aggregate);
  }
  write_sweep(dir, config, reports);

  json seeds = json::array();
  for (std::size_t r = 0; r < config.n_realizations; ++r) {
    auto s = seeds_json(config.master_seed, r, 0);
    s["sample"] = derive_seed(config.master_seed, {r, 0, stream::kSample});
    seeds.push_back(std::move(s));
  }
  write_summary(dir, config, "cutout_holdout", std::move(seeds));
  return kExitOk;
}

int cmd_train(const CommonArgs& args, std::ostream& out) {
  auto config = load_experiment(args, Protocol::Loocv);
  if (config.structures.size() != 1) throw ConfigError("train needs exactly one structure, not a sweep");
  const auto cases = load_manifest(config.train_manifest, config.side);
  fill_input_width(config, cases);
  const auto dir = make_out_dir(args.out);

  const auto seeds = fold_seeds(config.master_seed, 0, 0);
  const auto result = train_on_cases(cases, config.structures.front(), config.training, seeds);
  save_model(dir / "model.bin", result.model);
  write_file(dir / "training_log.csv", render([&](std::ostream& s) { write_training_log(s, result.history); }));
  auto doc = to_json(config);
  doc["command"] = "train";
  doc["derived_seeds"] = json::array({seeds_json(config.master_seed, 0, 0)});
  write_file(dir / "run_summary.json", doc.dump(2) + "\n");
  out << fmt::format("trained {} for {} epochs ({}), best validation cost {:.6g} at epoch {}\n",
                     config.structures.front().describe(), result.history.epochs.size(),
                     to_string(result.history.stop_reason), result.history.best_val_cost, result.history.best_epoch);
  return kExitOk;
}

struct SynthArgs {
  std::string config;
  std::string out;
  SynthParams params;
  CLI::Option* seed_opt = nullptr;
  std::uint64_t seed = 0;
};

int cmd_synth(SynthArgs& args, std::ostream& out) {
  SynthParams params = args.params;
  if (!args.config.empty()) {
    const auto config = load_config(args.config);
    if (!config.synth) throw ConfigError("config has no 'synth' section");
    params = *config.synth;
  }
  if (args.seed_opt->count() > 0) params.seed = args.seed;
  params.validate();
  const auto manifest = write_synthetic(params, make_out_dir(args.out));
  out << manifest.string() << '\n';
  return kExitOk;
}

struct ClassifyArgs {
  std::string config;
  std::string model;
  std::vector<std::string> images;
  std::string losses;
};

int cmd_classify(const ClassifyArgs& args, std::ostream& out) {
  const auto model = load_model(args.model);
  LossPair losses;
  if (!args.config.empty()) losses = load_config(args.config).losses;
  if (!args.losses.empty()) losses = parse_losses(args.losses);
  const auto side = static_cast<std::size_t>(std::lround(std::sqrt(double(model.structure().input_width))));
  if (side * side != model.structure().input_width) {
    throw DimensionError("model input width is not a square image");
  }
  out << "image,p_dysplastic,p_non_dysplastic,decision\n";
  for (const auto& path : args.images) {
    RawCutout raw{read_image(path), "input", Label::NonDysplastic};
    Cutout cutout;
    try {
      cutout = preprocess(raw, path, side);
    } catch (const DataError& e) {
      throw DataError(std::string(e.what()) + " (" + path + ")");
    }
    const auto p = model.forward(cutout.pixels);
    out << fmt::format("{},{:.6f},{:.6f},{}\n", path, p.dysplastic, p.non_dysplastic,
                       to_string(classify_cutout(p, losses)));
  }
  return kExitOk;
}

struct FlopsArgs {
  std::string config;
  std::size_t input_width = 0;
  std::vector<std::size_t> hidden;
  std::string cost = "ce";
};

int cmd_flops(const FlopsArgs& args, std::ostream& out) {
  std::vector<MlpStructure> structures;
  if (!args.config.empty()) {
    structures = load_config(args.config).structures;
    if (structures.empty()) throw ConfigError("config has neither 'structure' nor 'sweep'");
  } else if (!args.hidden.empty()) {
    if (args.input_width == 0) throw ConfigError("--hidden needs --input-width");
    structures.push_back({args.input_width, args.hidden, 2, parse_cost(args.cost)});
  } else {
    structures = {{65536, {50, 50}, 2, CostFunction::CrossEntropy},
                  {65536, {100, 100, 100, 100}, 2, CostFunction::MeanSquaredError},
                  {65536, {150, 150, 150}, 2, CostFunction::CrossEntropy}};
  }
  for (auto& s : structures) {
    if (s.input_width == 0) s.input_width = args.input_width;
    if (s.input_width == 0) throw ConfigError("structure " + s.describe() + " needs input_width to count FLOPs");
    s.validate();
  }
  print_flops_table(out, structures);
  return kExitOk;
}

struct ReportArgs {
  std::string decisions;
  std::vector<std::size_t> confusion;
  std::string d_axes = "se_sp";
};

int cmd_report(const ReportArgs& args, std::ostream& out) {
  const DAxes axes = args.d_axes == "predictive" ? DAxes::PredictiveValues : DAxes::SensitivitySpecificity;
  if (!args.confusion.empty()) {
    if (args.confusion.size() != 4) throw ConfigError("--confusion takes TP,TN,FP,FN");
    const ConfusionMatrix cm{args.confusion[0], args.confusion[1], args.confusion[2], args.confusion[3]};
    write_metrics_header(out, false);
    write_metrics_row(out, summarize(cm, axes));
    return kExitOk;
  }
  if (args.decisions.empty()) throw ConfigError("report needs --decisions or --confusion");
  std::ifstream in(args.decisions);
  if (!in) throw IoError("cannot open " + args.decisions);
  const auto by_realization = read_decisions_csv(in);
  std::vector<RealizationResult> results;
  write_metrics_header(out, true);
  for (const auto& [r, cm] : by_realization) {
    const auto row = summarize(cm, axes);
    write_metrics_row(out, r, row);
    RealizationResult rr;
    rr.realization_index = r;
    rr.cm = cm;
    rr.rates = row.rates;
    rr.merit = row.merit;
    results.push_back(std::move(rr));
  }
  write_aggregate_csv(out, aggregate(results));
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"MLP dysplasia classification toolkit", "edmlp"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);
  app.set_version_flag("--version", "edmlp 1.0.0");

  CommonArgs loocv_args, holdout_args, cutout_args, train_args;
  auto* loocv_cmd = app.add_subcommand("loocv", "leave-one-case-out cross-validation");
  add_common(loocv_cmd, loocv_args, true);
  auto* holdout_cmd = app.add_subcommand("holdout", "train on one case set, keep the best network by D on another");
  add_common(holdout_cmd, holdout_args, true);
  auto* cutout_cmd = app.add_subcommand("cutout-holdout", "cutout-level holdout with sampled class-balanced pools");
  add_common(cutout_cmd, cutout_args, true);
  auto* train_cmd = app.add_subcommand("train", "train one network on all cases and save it");
  add_common(train_cmd, train_args, true);

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic two-class cutout corpus with a manifest");
  synth_cmd->add_option("-c,--config", synth_args.config, "take parameters from the config's 'synth' section");
  synth_cmd->add_option("-o,--out", synth_args.out, "output directory")->required();
  synth_args.seed_opt = synth_cmd->add_option("--seed", synth_args.seed, "generator seed");
  synth_cmd->add_option("--cases-per-class", synth_args.params.n_cases_per_class);
  synth_cmd->add_option("--cutouts-min", synth_args.params.cutouts_min);
  synth_cmd->add_option("--cutouts-max", synth_args.params.cutouts_max);
  synth_cmd->add_option("--side", synth_args.params.side, "64, 128 or 256");
  synth_cmd->add_option("--contrast", synth_args.params.class_contrast, "class texture contrast, 0 = no signal");
  synth_cmd->add_option("--noise", synth_args.params.noise_sd, "pixel noise SD on the [0,1] scale");

  ClassifyArgs classify_args;
  auto* classify_cmd = app.add_subcommand("classify", "classify cutout images with a saved network");
  classify_cmd->add_option("-m,--model", classify_args.model, "model file")->required();
  classify_cmd->add_option("-i,--image", classify_args.images, "PNG or PPM/PGM cutout")->required();
  classify_cmd->add_option("-c,--config", classify_args.config, "take decision losses from this config");
  classify_cmd->add_option("--losses", classify_args.losses, "decision losses L12,L21 (overrides the config)");

  FlopsArgs flops_args;
  auto* flops_cmd = app.add_subcommand("flops", "floating-point operations of one forward pass");
  flops_cmd->add_option("-c,--config", flops_args.config, "count the config's structures");
  flops_cmd->add_option("--input-width", flops_args.input_width, "inputs, also fills structures that omit it");
  flops_cmd->add_option("--hidden", flops_args.hidden, "hidden widths, e.g. 150,150,150")->delimiter(',');
  flops_cmd->add_option("--cost", flops_args.cost, "mse or ce");

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "metrics from a decisions CSV or a confusion matrix");
  report_cmd->add_option("--decisions", report_args.decisions, "decisions.csv from loocv or holdout");
  report_cmd->add_option("--confusion", report_args.confusion, "TP,TN,FP,FN")->delimiter(',');
  report_cmd->add_option("--d-axes", report_args.d_axes, "se_sp or predictive")
      ->check(CLI::IsMember({"se_sp", "predictive"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*loocv_cmd) return cmd_loocv(loocv_args, out);
    if (*holdout_cmd) return cmd_holdout(holdout_args, out);
    if (*cutout_cmd) return cmd_cutout_holdout(cutout_args, out);
    if (*train_cmd) return cmd_train(train_args, out);
    if (*synth_cmd) return cmd_synth(synth_args, out);
    if (*classify_cmd) return cmd_classify(classify_args, out);
    if (*flops_cmd) return cmd_flops(flops_args, out);
    if (*report_cmd) return cmd_report(report_args, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace edmlp
