#pragma once

#include "l2m/adamw.hpp"
#include "l2m/dataset.hpp"
#include "l2m/hmc.hpp"
#include "l2m/mlp.hpp"
#include "l2m/posterior.hpp"
#include "l2m/predictive.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace l2m {

using json = nlohmann::json;

// 17 significant digits; parses back to the same double.
std::string format_double(double value);

std::string read_text(const std::filesystem::path& path);
// Writes to a sibling temp file, then renames over `path`.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

json read_json(const std::filesystem::path& path);
void write_json_atomic(const std::filesystem::path& path, const json& doc);

// Numeric CSV with a fixed header. Throws IoError if the header differs.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text, const std::vector<std::string>& expected_header);

// Dataset: header `x,y`.
std::string dataset_csv(const RegressionDataset& data);
RegressionDataset load_dataset_csv(const std::filesystem::path& path);

// Predictive summary: header `x,mean,std`.
std::string summary_csv(const PredictiveSummary& summary);
PredictiveSummary load_summary_csv(const std::filesystem::path& path);

// Bands: header `x,mean,lo1,hi1,lo2,hi2,lo3,hi3` for ks = (1, 2, 3).
std::string band_csv(const BandTable& table);

// Loss history: header `epoch,loss`.
std::string loss_csv(const std::vector<double>& losses);

void to_json(json& j, const MLPConfig& c);
void from_json(const json& j, MLPConfig& c);
void to_json(json& j, const TrainConfig& c);
void from_json(const json& j, TrainConfig& c);
void to_json(json& j, const HMCConfig& c);
void from_json(const json& j, HMCConfig& c);
void to_json(json& j, const DatasetMeta& m);
void from_json(const json& j, DatasetMeta& m);

// Trained network plus frozen optimizer moments. On disk: a JSON document
// and a CSV `index,theta,m,v` next to it.
struct Checkpoint {
  MLPConfig model;
  TrainConfig train;
  ParamVector theta;
  AdamState<double> state;
};

void save_checkpoint(const std::filesystem::path& json_path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& json_path);

// Posterior artifact: JSON metadata plus CSV `index,mean,std`.
void save_posterior(const std::filesystem::path& json_path, const DiagonalGaussian<double>& post,
                    const json& lineage);
DiagonalGaussian<double> load_posterior(const std::filesystem::path& json_path);

}  // namespace l2m
