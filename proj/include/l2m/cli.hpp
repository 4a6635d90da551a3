#pragma once

#include "l2m/adamw.hpp"
#include "l2m/hmc.hpp"
#include "l2m/io.hpp"
#include "l2m/mlp.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace l2m::cli {

inline constexpr const char* kToolVersion = "0.1.0";

struct GenDataOptions {
  long n = 20;
  double x_low = -4.0;
  double x_high = 4.0;
  double noise_sigma = 3.0;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

struct TrainCommandOptions {
  std::string data;
  MLPConfig model;
  TrainConfig train;
  std::string name = "checkpoint";
  std::string out_dir = ".";
};

struct UqOptions {
  std::string method;  // l2m | ensemble | mc-dropout | swag | rpf | hmc
  std::string data;
  std::string checkpoint;
  long samples = 500;
  std::uint64_t seed = 0;
  double eps = 1e-8;
  double grid_low = -6.0;
  double grid_high = 6.0;
  long grid_points = 200;
  double add_noise_sigma = 0.0;  // 0 = epistemic only
  int members = 5;
  long swag_start = 4000;
  long swag_every = 1;
  double rpf_beta = 1.0;
  int rpf_members = 5;
  bool rpf_bootstrap = true;
  HMCConfig hmc{0.005, 30, 500, 500, 0};
  double hmc_noise_sigma = 3.0;
  double hmc_prior_precision = 0.1;
  // Used by methods that train their own networks when no checkpoint is given.
  MLPConfig model;
  TrainConfig train;
  std::string out_dir = ".";
};

struct CompareOptions {
  std::vector<std::string> inputs;  // "path" or "label=path"
  double inner = 2.0;
  double outer = 4.5;
  std::string out_dir = ".";
};

void to_json(json& j, const GenDataOptions& o);
void from_json(const json& j, GenDataOptions& o);
void to_json(json& j, const TrainCommandOptions& o);
void from_json(const json& j, TrainCommandOptions& o);
void to_json(json& j, const UqOptions& o);
void from_json(const json& j, UqOptions& o);
void to_json(json& j, const CompareOptions& o);
void from_json(const json& j, CompareOptions& o);

// Each command writes its outputs plus a manifest and returns the manifest.
json run_gen_data(const GenDataOptions& o);
json run_train(const TrainCommandOptions& o);
json run_uq(const UqOptions& o);
json run_compare(const CompareOptions& o);

// Re-executes a manifest's command with its recorded options. A non-empty
// `out_dir` redirects the outputs.
json replay(const json& manifest, const std::string& out_dir = "");

// Full command-line entry point. Returns the process exit code.
int main(int argc, char** argv);

}  // namespace l2m::cli
