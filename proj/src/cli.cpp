#include "l2m/cli.hpp"

#include "l2m/baselines.hpp"
#include "l2m/dataset.hpp"
#include "l2m/hmc.hpp"
#include "l2m/posterior.hpp"
#include "l2m/predictive.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

namespace l2m::cli {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kMethods = {"l2m", "ensemble", "mc-dropout", "swag", "rpf", "hmc"};

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string absolute_or_empty(const std::string& path) {
  return path.empty() ? path : fs::absolute(path).lexically_normal().string();
}

json base_manifest(const std::string& command, const json& options, const std::string& started) {
  return json{{"tool", "l2m"},
              {"version", kToolVersion},
              {"command", command},
              {"options", options},
              {"prng", "mt19937_64; splitmix64 stream split; Box-Muller normals"},
              {"started_at", started}};
}

void finish_manifest(json& manifest, const fs::path& path, std::vector<std::string> outputs) {
  manifest["outputs"] = std::move(outputs);
  manifest["finished_at"] = utc_now();
  write_json_atomic(path, manifest);
}

template <typename T>
void overlay(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

// --- option (de)serialization ---------------------------------------------

void to_json(json& j, const GenDataOptions& o) {
  j = json{{"n", o.n},
           {"x_low", o.x_low},
           {"x_high", o.x_high},
           {"noise_sigma", o.noise_sigma},
           {"seed", o.seed},
           {"out_dir", o.out_dir}};
}

void from_json(const json& j, GenDataOptions& o) {
  overlay(j, "n", o.n);
  overlay(j, "x_low", o.x_low);
  overlay(j, "x_high", o.x_high);
  overlay(j, "noise_sigma", o.noise_sigma);
  overlay(j, "seed", o.seed);
  overlay(j, "out_dir", o.out_dir);
}

void to_json(json& j, const TrainCommandOptions& o) {
  j = json{{"data", o.data},
           {"model", o.model},
           {"train", o.train},
           {"name", o.name},
           {"out_dir", o.out_dir}};
}

void from_json(const json& j, TrainCommandOptions& o) {
  overlay(j, "data", o.data);
  if (j.contains("model")) l2m::from_json(j.at("model"), o.model);
  if (j.contains("train")) l2m::from_json(j.at("train"), o.train);
  overlay(j, "seed", o.train.seed);
  overlay(j, "name", o.name);
  overlay(j, "out_dir", o.out_dir);
}

void to_json(json& j, const UqOptions& o) {
  j = json{{"method", o.method},
           {"data", o.data},
           {"checkpoint", o.checkpoint},
           {"samples", o.samples},
           {"seed", o.seed},
           {"eps", o.eps},
           {"grid_low", o.grid_low},
           {"grid_high", o.grid_high},
           {"grid_points", o.grid_points},
           {"add_noise_sigma", o.add_noise_sigma},
           {"members", o.members},
           {"swag_start", o.swag_start},
           {"swag_every", o.swag_every},
           {"rpf_beta", o.rpf_beta},
           {"rpf_members", o.rpf_members},
           {"rpf_bootstrap", o.rpf_bootstrap},
           {"hmc", o.hmc},
           {"hmc_noise_sigma", o.hmc_noise_sigma},
           {"hmc_prior_precision", o.hmc_prior_precision},
           {"model", o.model},
           {"train", o.train},
           {"out_dir", o.out_dir}};
}

void from_json(const json& j, UqOptions& o) {
  overlay(j, "method", o.method);
  overlay(j, "data", o.data);
  overlay(j, "checkpoint", o.checkpoint);
  overlay(j, "samples", o.samples);
  overlay(j, "seed", o.seed);
  overlay(j, "eps", o.eps);
  overlay(j, "grid_low", o.grid_low);
  overlay(j, "grid_high", o.grid_high);
  overlay(j, "grid_points", o.grid_points);
  overlay(j, "add_noise_sigma", o.add_noise_sigma);
  overlay(j, "members", o.members);
  overlay(j, "swag_start", o.swag_start);
  overlay(j, "swag_every", o.swag_every);
  overlay(j, "rpf_beta", o.rpf_beta);
  overlay(j, "rpf_members", o.rpf_members);
  overlay(j, "rpf_bootstrap", o.rpf_bootstrap);
  if (j.contains("hmc")) l2m::from_json(j.at("hmc"), o.hmc);
  overlay(j, "hmc_noise_sigma", o.hmc_noise_sigma);
  overlay(j, "hmc_prior_precision", o.hmc_prior_precision);
  if (j.contains("model")) l2m::from_json(j.at("model"), o.model);
  if (j.contains("train")) l2m::from_json(j.at("train"), o.train);
  overlay(j, "out_dir", o.out_dir);
}

void to_json(json& j, const CompareOptions& o) {
  j = json{{"inputs", o.inputs}, {"inner", o.inner}, {"outer", o.outer}, {"out_dir", o.out_dir}};
}

void from_json(const json& j, CompareOptions& o) {
  overlay(j, "inputs", o.inputs);
  overlay(j, "inner", o.inner);
  overlay(j, "outer", o.outer);
  overlay(j, "out_dir", o.out_dir);
}

// --- commands --------------------------------------------------------------

json run_gen_data(const GenDataOptions& opts) {
  const std::string started = utc_now();
  GenDataOptions o = opts;
  o.out_dir = absolute_or_empty(o.out_dir);
  const RegressionDataset data = generate_cubic(o.n, o.x_low, o.x_high, o.noise_sigma, o.seed);
  const fs::path out(o.out_dir);
  const fs::path csv = out / "data.csv";
  write_text_atomic(csv, dataset_csv(data));

  json manifest = base_manifest("gen-data", o, started);
  manifest["seeds"] = {{"dataset", o.seed}};
  manifest["dataset"] = data.meta;
  finish_manifest(manifest, out / "gen-data_manifest.json", {csv.string()});
  return manifest;
}

json run_train(const TrainCommandOptions& opts) {
  const std::string started = utc_now();
  TrainCommandOptions o = opts;
  if (o.data.empty()) throw UsageError("train: --data is required");
  o.data = absolute_or_empty(o.data);
  o.out_dir = absolute_or_empty(o.out_dir);

  const RegressionDataset data = load_dataset_csv(o.data);
  const TrainResult result = train(data, o.model, o.train);

  const fs::path out(o.out_dir);
  const fs::path ckpt_path = out / (o.name + ".json");
  save_checkpoint(ckpt_path, Checkpoint{o.model, o.train, result.theta_map, result.state});
  fs::path params_path = ckpt_path;
  params_path.replace_extension();
  params_path += "_params.csv";
  const fs::path loss_path = out / (o.name + "_loss.csv");
  write_text_atomic(loss_path, loss_csv(result.loss_history));

  json manifest = base_manifest("train", o, started);
  manifest["seeds"] = {{"init", o.train.seed}};
  manifest["dataset"] = {{"path", o.data}, {"n", data.size()}};
  manifest["final_loss"] = result.loss_history.back();
  finish_manifest(manifest, out / (o.name + "_train_manifest.json"),
                  {ckpt_path.string(), params_path.string(), loss_path.string()});
  return manifest;
}

json run_uq(const UqOptions& opts) {
  const std::string started = utc_now();
  UqOptions o = opts;
  if (std::find(kMethods.begin(), kMethods.end(), o.method) == kMethods.end()) {
    throw UsageError("uq: unknown method '" + o.method + "'");
  }
  if (o.data.empty()) throw UsageError("uq: --data is required");
  o.data = absolute_or_empty(o.data);
  o.checkpoint = absolute_or_empty(o.checkpoint);
  o.out_dir = absolute_or_empty(o.out_dir);

  const RegressionDataset data = load_dataset_csv(o.data);
  const Vector<double> grid = eval_grid(o.grid_low, o.grid_high, o.grid_points);
  std::optional<Checkpoint> ckpt;
  if (!o.checkpoint.empty()) ckpt = load_checkpoint(o.checkpoint);
  if (!ckpt && (o.method == "l2m" || o.method == "mc-dropout")) {
    throw UsageError("uq " + o.method + ": --checkpoint is required");
  }

  // Networks trained here use the checkpoint's architecture/config when present.
  const MLPConfig model = ckpt ? ckpt->model : o.model;
  TrainConfig train_cfg = ckpt ? ckpt->train : o.train;
  train_cfg.seed = o.seed;

  const fs::path out(o.out_dir);
  std::vector<std::string> outputs;
  json details;
  PredictiveSummary summary;

  if (o.method == "l2m") {
    Vector<double> v_hat;
    try {
      v_hat = second_moment(ckpt->state);
    } catch (const UsageError&) {
      throw UsageError("uq l2m: optimizer moments absent (checkpoint has t = 0)");
    }
    const L2MPosterior post = build_l2m(ckpt->theta, v_hat, ckpt->state.hyper.weight_decay, o.eps);
    const fs::path post_path = out / "l2m_posterior.json";
    save_posterior(post_path, post,
                   {{"checkpoint", o.checkpoint}, {"adam_t", ckpt->state.t}, {"seed", o.seed}});
    outputs.push_back(post_path.string());
    outputs.push_back((out / "l2m_posterior_params.csv").string());
    summary = mc_predictive(post, ckpt->model, grid, o.samples, o.seed, "l2m");
    details = {{"weight_decay", post.weight_decay},
               {"eps", post.eps},
               {"precision_formula", "v_hat + 1/weight_decay + eps"},
               {"adam_t", ckpt->state.t}};
  } else if (o.method == "ensemble") {
    const EnsembleState state = train_ensemble(data, model, train_cfg, o.members, o.seed);
    summary = ensemble_predict(state, grid);
    details = {{"members", o.members}, {"base_seed", o.seed}, {"std_divisor", "M"}};
  } else if (o.method == "mc-dropout") {
    summary = mc_dropout_predict(ckpt->theta, ckpt->model, grid, o.samples, o.seed);
    details = {{"dropout_rate", ckpt->model.dropout_rate}};
  } else if (o.method == "swag") {
    const SWAGRun run = swag_collect(data, model, train_cfg, o.swag_every, o.swag_start);
    const DiagonalGaussian<double> post = swag_posterior(run.state);
    const fs::path post_path = out / "swag_posterior.json";
    save_posterior(post_path, post, {{"snapshots", run.state.snapshots()}, {"seed", o.seed}});
    outputs.push_back(post_path.string());
    outputs.push_back((out / "swag_posterior_params.csv").string());
    summary = mc_predictive(post, model, grid, o.samples, o.seed, "swag");
    details = {{"snapshots", run.state.snapshots()},
               {"swag_start", o.swag_start},
               {"swag_every", o.swag_every}};
  } else if (o.method == "rpf") {
    const auto pairs =
        rpf_ensemble(data, model, train_cfg, o.rpf_beta, o.rpf_members, o.seed, o.rpf_bootstrap);
    summary = rpf_ensemble_predict(pairs, model, grid);
    summary.seed = o.seed;
    details = {{"beta", o.rpf_beta}, {"members", o.rpf_members}, {"bootstrap", o.rpf_bootstrap}};
  } else {
    const ParamVector initial = ckpt ? ckpt->theta : train(data, model, train_cfg).theta_map;
    HMCConfig hmc = o.hmc;
    hmc.seed = o.seed;
    const LogDensity log_post =
        network_log_posterior(data, model, o.hmc_noise_sigma, o.hmc_prior_precision);
    const HMCResult result = hmc_sample(log_post, initial, hmc);
    summary = samples_predict(result.samples, model, grid, "hmc", o.seed);
    details = {{"hmc", hmc},
               {"noise_sigma", o.hmc_noise_sigma},
               {"prior_precision", o.hmc_prior_precision},
               {"acceptance_rate", result.diagnostics.acceptance_rate()},
               {"non_finite_proposals", result.diagnostics.non_finite},
               {"initial", ckpt ? "checkpoint" : "trained"}};
  }
  if (o.add_noise_sigma > 0.0) summary = with_observation_noise(std::move(summary), o.add_noise_sigma);

  const fs::path summary_path = out / (o.method + ".csv");
  const fs::path bands_path = out / (o.method + "_bands.csv");
  const fs::path sidecar_path = out / (o.method + "_config.json");
  write_text_atomic(summary_path, summary_csv(summary));
  write_text_atomic(bands_path, band_csv(band_table(summary)));
  write_json_atomic(sidecar_path, json{{"method", o.method},
                                       {"options", o},
                                       {"model", model},
                                       {"train", train_cfg},
                                       {"samples_used", summary.samples_used},
                                       {"details", details}});
  outputs.insert(outputs.begin(), {summary_path.string(), bands_path.string(), sidecar_path.string()});

  json manifest = base_manifest("uq", o, started);
  manifest["method"] = o.method;
  manifest["seeds"] = {{"uq", o.seed}, {"train", train_cfg.seed}};
  manifest["dataset"] = {{"path", o.data}, {"n", data.size()}};
  manifest["grid"] = {{"low", o.grid_low}, {"high", o.grid_high}, {"points", o.grid_points}};
  finish_manifest(manifest, out / ("uq_" + o.method + "_manifest.json"), outputs);
  return manifest;
}

json run_compare(const CompareOptions& opts) {
  const std::string started = utc_now();
  CompareOptions o = opts;
  if (o.inputs.size() < 2) throw UsageError("compare: need at least two method outputs");
  o.out_dir = absolute_or_empty(o.out_dir);

  std::vector<std::pair<std::string, PredictiveSummary>> runs;
  std::map<std::string, int> seen;
  for (std::string& input : o.inputs) {
    std::string label, path = input;
    if (const auto eq = input.find('='); eq != std::string::npos) {
      label = input.substr(0, eq);
      path = input.substr(eq + 1);
    }
    path = absolute_or_empty(path);
    input = label.empty() ? path : label + "=" + path;
    PredictiveSummary s = load_summary_csv(path);
    if (label.empty()) label = s.method;
    if (const int n = seen[label]++; n > 0) label += "#" + std::to_string(n + 1);
    if (!runs.empty() && s.grid != runs.front().second.grid) {
      throw UsageError("compare: " + path + " uses a different grid");
    }
    runs.emplace_back(label, std::move(s));
  }

  CsvTable merged{{"x"}, {}};
  for (const auto& [label, s] : runs) {
    merged.header.push_back(label + "_mean");
    merged.header.push_back(label + "_std");
  }
  const Vector<double>& grid = runs.front().second.grid;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    std::vector<double> row{grid[i]};
    for (const auto& [label, s] : runs) {
      row.push_back(s.mean[i]);
      row.push_back(s.std[i]);
    }
    merged.rows.push_back(std::move(row));
  }

  json methods = json::object();
  for (const auto& [label, s] : runs) {
    const RegionStats stats = region_stats(s, o.inner, o.outer);
    methods[label] = {{"inner_mean_std", stats.inner_mean_std},
                      {"outer_mean_std", stats.outer_mean_std},
                      {"ratio", stats.ratio ? json(*stats.ratio) : json("undefined")}};
  }
  const json summary{{"inner", o.inner}, {"outer", o.outer}, {"methods", methods}};

  const fs::path out(o.out_dir);
  const fs::path merged_path = out / "compare.csv";
  const fs::path summary_path = out / "compare_summary.json";
  write_text_atomic(merged_path, to_csv(merged));
  write_json_atomic(summary_path, summary);

  json manifest = base_manifest("compare", o, started);
  manifest["seeds"] = json::object();
  finish_manifest(manifest, out / "compare_manifest.json",
                  {merged_path.string(), summary_path.string()});
  return manifest;
}

json replay(const json& manifest, const std::string& out_dir) {
  const std::string command = manifest.at("command").get<std::string>();
  json options = manifest.at("options");
  if (!out_dir.empty()) options["out_dir"] = out_dir;
  if (command == "gen-data") return run_gen_data(options.get<GenDataOptions>());
  if (command == "train") return run_train(options.get<TrainCommandOptions>());
  if (command == "uq") return run_uq(options.get<UqOptions>());
  if (command == "compare") return run_compare(options.get<CompareOptions>());
  throw UsageError("replay: unknown command '" + command + "'");
}

// --- command line ----------------------------------------------------------

namespace {

// --config is read before parsing so explicit flags override its values.
json prescan_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    std::string path;
    if (arg == "--config" && i + 1 < argc) path = argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) path = arg.substr(9);
    if (!path.empty()) {
      json doc = read_json(path);
      // A manifest works as a config too.
      if (doc.contains("options") && doc.contains("command")) return doc.at("options");
      return doc;
    }
  }
  return json::object();
}

void add_common(CLI::App* sub, std::uint64_t& seed, std::string& out_dir) {
  sub->add_option("--seed", seed, "Random seed");
  sub->add_option("--out-dir", out_dir, "Output directory");
  sub->add_option("--config", "JSON config; explicit flags take precedence");
}

void add_model_flags(CLI::App* sub, MLPConfig& m) {
  sub->add_option("--hidden-layers", m.hidden_layers, "Hidden layer count");
  sub->add_option("--hidden-units", m.hidden_units, "Units per hidden layer");
  sub->add_option("--dropout-rate", m.dropout_rate, "Dropout rate used in training");
}

void add_train_flags(CLI::App* sub, TrainConfig& t) {
  sub->add_option("--epochs", t.epochs, "Full-batch AdamW steps");
  sub->add_option("--lr", t.lr, "Learning rate");
  sub->add_option("--weight-decay", t.weight_decay, "Decoupled weight decay (lambda)");
  sub->add_option("--beta1", t.beta1);
  sub->add_option("--beta2", t.beta2);
  sub->add_option("--eps-opt", t.eps_opt, "Adam denominator epsilon");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"L2M: Laplace posteriors from the optimizer's second moment"};
  app.require_subcommand(0, 1);
  std::string from_manifest;
  app.add_option("--from-manifest", from_manifest, "Replay a run manifest");

  json config;
  try {
    config = prescan_config(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "l2m: error: " << e.what() << "\n";
    return 2;
  }

  GenDataOptions gen;
  TrainCommandOptions tr;
  UqOptions uq;
  CompareOptions cmp;
  std::string replay_manifest, replay_out;

  auto* gen_cmd = app.add_subcommand("gen-data", "Generate the cubic toy dataset");
  auto* train_cmd = app.add_subcommand("train", "Train the MLP and checkpoint AdamW moments");
  auto* uq_cmd = app.add_subcommand("uq", "Posterior predictive bands for one method");
  auto* cmp_cmd = app.add_subcommand("compare", "Merge method outputs and score uncertainty ordering");
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a manifest");

  try {
    from_json(config, gen);
    from_json(config, tr);
    from_json(config, uq);
    from_json(config, cmp);
  } catch (const std::exception& e) {
    std::cerr << "l2m: error: bad config: " << e.what() << "\n";
    return 2;
  }

  add_common(gen_cmd, gen.seed, gen.out_dir);
  gen_cmd->add_option("--n", gen.n, "Number of points");
  gen_cmd->add_option("--x-low", gen.x_low);
  gen_cmd->add_option("--x-high", gen.x_high);
  gen_cmd->add_option("--noise-sigma", gen.noise_sigma, "Observation noise std");

  add_common(train_cmd, tr.train.seed, tr.out_dir);
  train_cmd->add_option("--data", tr.data, "Dataset CSV (x,y)");
  train_cmd->add_option("--name", tr.name, "Checkpoint base name");
  add_model_flags(train_cmd, tr.model);
  add_train_flags(train_cmd, tr.train);

  add_common(uq_cmd, uq.seed, uq.out_dir);
  uq_cmd->add_option("method", uq.method, "Method")->required()->check(CLI::IsMember(kMethods));
  uq_cmd->add_option("--data", uq.data, "Dataset CSV (x,y)");
  uq_cmd->add_option("--checkpoint", uq.checkpoint, "Checkpoint JSON from `train`");
  uq_cmd->add_option("--samples", uq.samples, "Posterior samples");
  uq_cmd->add_option("--eps", uq.eps, "L2M damping added to the precision");
  uq_cmd->add_option("--grid-low", uq.grid_low);
  uq_cmd->add_option("--grid-high", uq.grid_high);
  uq_cmd->add_option("--grid-points", uq.grid_points);
  uq_cmd->add_option("--add-noise-sigma", uq.add_noise_sigma,
                     "Add observation noise to the reported std (0 = off)");
  uq_cmd->add_option("--members", uq.members, "Ensemble size");
  uq_cmd->add_option("--swag-start", uq.swag_start, "First SWAG collection epoch");
  uq_cmd->add_option("--swag-every", uq.swag_every, "SWAG collection period");
  uq_cmd->add_option("--rpf-beta", uq.rpf_beta, "Prior network scale");
  uq_cmd->add_option("--rpf-members", uq.rpf_members, "RPF ensemble size");
  uq_cmd->add_flag("!--no-bootstrap", uq.rpf_bootstrap, "Train RPF members on the full dataset");
  uq_cmd->add_option("--hmc-step-size", uq.hmc.step_size);
  uq_cmd->add_option("--hmc-leapfrog", uq.hmc.leapfrog_steps);
  uq_cmd->add_option("--hmc-samples", uq.hmc.num_samples);
  uq_cmd->add_option("--hmc-burn-in", uq.hmc.burn_in);
  uq_cmd->add_option("--hmc-noise-sigma", uq.hmc_noise_sigma);
  uq_cmd->add_option("--hmc-prior-precision", uq.hmc_prior_precision);
  add_model_flags(uq_cmd, uq.model);
  add_train_flags(uq_cmd, uq.train);

  std::uint64_t compare_seed = 0;  // accepted for uniformity; compare is deterministic
  add_common(cmp_cmd, compare_seed, cmp.out_dir);
  cmp_cmd->add_option("--inputs", cmp.inputs, "Summary CSVs, optionally label=path")->expected(1, -1);
  cmp_cmd->add_option("--inner", cmp.inner, "In-data region |x| <= inner");
  cmp_cmd->add_option("--outer", cmp.outer, "Extrapolation region |x| >= outer");

  replay_cmd->add_option("--manifest", replay_manifest, "Manifest JSON")->required();
  replay_cmd->add_option("--out-dir", replay_out, "Redirect outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (!from_manifest.empty()) {
      replay(read_json(from_manifest), app.got_subcommand(replay_cmd) ? replay_out : "");
    } else if (app.got_subcommand(gen_cmd)) {
      run_gen_data(gen);
    } else if (app.got_subcommand(train_cmd)) {
      run_train(tr);
    } else if (app.got_subcommand(uq_cmd)) {
      run_uq(uq);
    } else if (app.got_subcommand(cmp_cmd)) {
      run_compare(cmp);
    } else if (app.got_subcommand(replay_cmd)) {
      replay(read_json(replay_manifest), replay_out);
    } else {
      std::cerr << "l2m: error: no subcommand given (see --help)\n";
      return 2;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "l2m: error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "l2m: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace l2m::cli
