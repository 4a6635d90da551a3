#include "l2m/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <system_error>

namespace l2m {

namespace fs = std::filesystem;

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw IoError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_json_atomic(const fs::path& path, const json& doc) {
  write_text_atomic(path, doc.dump(2) + "\n");
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

CsvTable parse_csv(const std::string& text, const std::vector<std::string>& expected_header) {
  std::istringstream in(text);
  std::string line;
  CsvTable table;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw IoError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split(line);
  if (table.header != expected_header) throw IoError("unexpected CSV header: " + line);
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != expected_header.size()) {
      throw IoError("CSV line " + std::to_string(line_no) + ": wrong column count");
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || end != c.c_str() + c.size() || errno == ERANGE) {
        throw IoError("CSV line " + std::to_string(line_no) + ": bad number '" + c + "'");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string dataset_csv(const RegressionDataset& data) {
  CsvTable t{{"x", "y"}, {}};
  for (Eigen::Index i = 0; i < data.size(); ++i) t.rows.push_back({data.xs[i], data.ys[i]});
  return to_csv(t);
}

RegressionDataset load_dataset_csv(const fs::path& path) {
  const CsvTable t = parse_csv(read_text(path), {"x", "y"});
  RegressionDataset data;
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  data.xs.resize(n);
  data.ys.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    data.xs[i] = t.rows[static_cast<std::size_t>(i)][0];
    data.ys[i] = t.rows[static_cast<std::size_t>(i)][1];
  }
  data.meta.n = n;
  data.validate();
  return data;
}

std::string summary_csv(const PredictiveSummary& s) {
  CsvTable t{{"x", "mean", "std"}, {}};
  for (Eigen::Index i = 0; i < s.grid.size(); ++i) t.rows.push_back({s.grid[i], s.mean[i], s.std[i]});
  return to_csv(t);
}

PredictiveSummary load_summary_csv(const fs::path& path) {
  const CsvTable t = parse_csv(read_text(path), {"x", "mean", "std"});
  PredictiveSummary s;
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  s.grid.resize(n);
  s.mean.resize(n);
  s.std.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = t.rows[static_cast<std::size_t>(i)];
    s.grid[i] = r[0];
    s.mean[i] = r[1];
    s.std[i] = r[2];
  }
  s.method = path.stem().string();
  return s;
}

std::string band_csv(const BandTable& table) {
  CsvTable t{{"x", "mean"}, {}};
  for (double k : table.ks) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", k);
    t.header.push_back(std::string("lo") + buf);
    t.header.push_back(std::string("hi") + buf);
  }
  for (Eigen::Index i = 0; i < table.rows.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(table.rows.cols()));
    for (Eigen::Index c = 0; c < table.rows.cols(); ++c) row[static_cast<std::size_t>(c)] = table.rows(i, c);
    t.rows.push_back(std::move(row));
  }
  return to_csv(t);
}

std::string loss_csv(const std::vector<double>& losses) {
  CsvTable t{{"epoch", "loss"}, {}};
  for (std::size_t i = 0; i < losses.size(); ++i) {
    t.rows.push_back({static_cast<double>(i + 1), losses[i]});
  }
  return to_csv(t);
}

void to_json(json& j, const MLPConfig& c) {
  j = json{{"input_dim", c.input_dim},       {"hidden_layers", c.hidden_layers},
           {"hidden_units", c.hidden_units}, {"output_dim", c.output_dim},
           {"activation", "relu"},           {"dropout_rate", c.dropout_rate}};
}

void from_json(const json& j, MLPConfig& c) {
  c.input_dim = j.value("input_dim", c.input_dim);
  c.hidden_layers = j.value("hidden_layers", c.hidden_layers);
  c.hidden_units = j.value("hidden_units", c.hidden_units);
  c.output_dim = j.value("output_dim", c.output_dim);
  if (j.value("activation", std::string("relu")) != "relu") {
    throw ConfigError("unsupported activation: " + j.at("activation").dump());
  }
  c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"epochs", c.epochs}, {"lr", c.lr},       {"weight_decay", c.weight_decay},
           {"beta1", c.beta1},   {"beta2", c.beta2}, {"eps_opt", c.eps_opt},
           {"seed", c.seed}};
}

void from_json(const json& j, TrainConfig& c) {
  c.epochs = j.value("epochs", c.epochs);
  c.lr = j.value("lr", c.lr);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.eps_opt = j.value("eps_opt", c.eps_opt);
  c.seed = j.value("seed", c.seed);
}

void to_json(json& j, const HMCConfig& c) {
  j = json{{"step_size", c.step_size},
           {"leapfrog_steps", c.leapfrog_steps},
           {"num_samples", c.num_samples},
           {"burn_in", c.burn_in},
           {"seed", c.seed}};
}

void from_json(const json& j, HMCConfig& c) {
  c.step_size = j.value("step_size", c.step_size);
  c.leapfrog_steps = j.value("leapfrog_steps", c.leapfrog_steps);
  c.num_samples = j.value("num_samples", c.num_samples);
  c.burn_in = j.value("burn_in", c.burn_in);
  c.seed = j.value("seed", c.seed);
}

void to_json(json& j, const DatasetMeta& m) {
  j = json{{"n", m.n},
           {"x_low", m.x_low},
           {"x_high", m.x_high},
           {"noise_sigma", m.noise_sigma},
           {"seed", m.seed}};
}

void from_json(const json& j, DatasetMeta& m) {
  m.n = j.value("n", m.n);
  m.x_low = j.value("x_low", m.x_low);
  m.x_high = j.value("x_high", m.x_high);
  m.noise_sigma = j.value("noise_sigma", m.noise_sigma);
  m.seed = j.value("seed", m.seed);
}

namespace {

fs::path sibling_csv(const fs::path& json_path, const std::string& suffix) {
  fs::path p = json_path;
  p.replace_extension();
  p += suffix;
  return p;
}

}  // namespace

void save_checkpoint(const fs::path& json_path, const Checkpoint& ckpt) {
  const fs::path csv_path = sibling_csv(json_path, "_params.csv");
  CsvTable t{{"index", "theta", "m", "v"}, {}};
  for (Eigen::Index i = 0; i < ckpt.theta.size(); ++i) {
    t.rows.push_back({static_cast<double>(i), ckpt.theta[i], ckpt.state.m[i], ckpt.state.v[i]});
  }
  write_text_atomic(csv_path, to_csv(t));
  const AdamHyper<double>& h = ckpt.state.hyper;
  json doc{{"format", "l2m-checkpoint/1"},
           {"model", ckpt.model},
           {"train", ckpt.train},
           {"adam",
            {{"t", ckpt.state.t},
             {"lr", h.lr},
             {"beta1", h.beta1},
             {"beta2", h.beta2},
             {"eps", h.eps},
             {"weight_decay", h.weight_decay}}},
           {"param_count", ckpt.theta.size()},
           {"params_file", csv_path.filename().string()}};
  write_json_atomic(json_path, doc);
}

Checkpoint load_checkpoint(const fs::path& json_path) {
  const json doc = read_json(json_path);
  if (doc.value("format", std::string()) != "l2m-checkpoint/1") {
    throw IoError(json_path.string() + " is not an l2m checkpoint");
  }
  Checkpoint ckpt;
  ckpt.model = doc.at("model").get<MLPConfig>();
  ckpt.train = doc.at("train").get<TrainConfig>();
  const json& a = doc.at("adam");
  ckpt.state.t = a.at("t").get<long>();
  ckpt.state.hyper = AdamHyper<double>{a.at("lr").get<double>(), a.at("beta1").get<double>(),
                                       a.at("beta2").get<double>(), a.at("eps").get<double>(),
                                       a.at("weight_decay").get<double>()};
  const fs::path csv_path = json_path.parent_path() / doc.at("params_file").get<std::string>();
  const CsvTable t = parse_csv(read_text(csv_path), {"index", "theta", "m", "v"});
  const auto n = doc.at("param_count").get<Eigen::Index>();
  if (static_cast<Eigen::Index>(t.rows.size()) != n || n != ckpt.model.param_count()) {
    throw IoError("checkpoint parameter count does not match its model");
  }
  ckpt.theta.resize(n);
  ckpt.state.m.resize(n);
  ckpt.state.v.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = t.rows[static_cast<std::size_t>(i)];
    ckpt.theta[i] = r[1];
    ckpt.state.m[i] = r[2];
    ckpt.state.v[i] = r[3];
  }
  return ckpt;
}

void save_posterior(const fs::path& json_path, const DiagonalGaussian<double>& post,
                    const json& lineage) {
  const fs::path csv_path = sibling_csv(json_path, "_params.csv");
  CsvTable t{{"index", "mean", "std"}, {}};
  for (Eigen::Index i = 0; i < post.size(); ++i) {
    t.rows.push_back({static_cast<double>(i), post.mean[i], post.std[i]});
  }
  write_text_atomic(csv_path, to_csv(t));
  json doc{{"format", "l2m-posterior/1"},
           {"weight_decay", post.weight_decay},
           {"eps", post.eps},
           {"dims", post.size()},
           {"precision_formula", "v_hat + 1/weight_decay + eps"},
           {"lineage", lineage},
           {"params_file", csv_path.filename().string()}};
  write_json_atomic(json_path, doc);
}

DiagonalGaussian<double> load_posterior(const fs::path& json_path) {
  const json doc = read_json(json_path);
  if (doc.value("format", std::string()) != "l2m-posterior/1") {
    throw IoError(json_path.string() + " is not an l2m posterior");
  }
  const fs::path csv_path = json_path.parent_path() / doc.at("params_file").get<std::string>();
  const CsvTable t = parse_csv(read_text(csv_path), {"index", "mean", "std"});
  DiagonalGaussian<double> post;
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  if (n != doc.at("dims").get<Eigen::Index>()) throw IoError("posterior dims mismatch");
  post.mean.resize(n);
  post.std.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    post.mean[i] = t.rows[static_cast<std::size_t>(i)][1];
    post.std[i] = t.rows[static_cast<std::size_t>(i)][2];
  }
  post.weight_decay = doc.at("weight_decay").get<double>();
  post.eps = doc.at("eps").get<double>();
  return post;
}

}  // namespace l2m
