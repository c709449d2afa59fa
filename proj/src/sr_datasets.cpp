#include "helix/sr_datasets.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "helix/errors.hpp"
#include "helix/rng.hpp"

namespace helix {

namespace {

constexpr std::uint64_t kInputsTag = 0x696e70ull;
constexpr std::uint64_t kNoiseTag = 0x6e6f69ull;

void fill_split(const ExprPtr& truth, const DatasetSpec& spec, std::uint64_t split_tag, int count,
                Eigen::MatrixXd& x, Eigen::VectorXd& y) {
  const int dims = static_cast<int>(spec.input_ranges.size());
  x.resize(count, dims);
  y.resize(count);
  Rng inputs(derive_seed(spec.rng_seed, {kInputsTag, split_tag}));
  Rng noise(derive_seed(spec.rng_seed, {kNoiseTag, split_tag}));

  Eigen::MatrixXd probe(1, dims);
  for (int row = 0; row < count; ++row) {
    double value = 0.0;
    bool ok = false;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      for (int c = 0; c < dims; ++c) {
        probe(0, c) = inputs.uniform(spec.input_ranges[static_cast<std::size_t>(c)].first,
                                     spec.input_ranges[static_cast<std::size_t>(c)].second);
      }
      const Eigen::VectorXd out = eval_expression(truth, probe, spec.true_params);
      if (std::isfinite(out[0])) {
        value = out[0];
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw NonFiniteGroundTruthError("dataset '" + spec.name +
                                      "': ground truth stayed non-finite after 1000 redraws");
    }
    x.row(row) = probe.row(0);
    // Noise comes from its own stream so sigma = 0 and sigma > 0 runs see
    // identical inputs.
    const double eps = noise.gaussian();
    y[row] = value + spec.noise_sigma * eps;
  }
}

}  // namespace

Dataset generate_dataset(const DatasetSpec& spec) {
  if (spec.input_ranges.empty()) throw ConfigError("dataset spec has no input ranges");
  for (const auto& [lo, hi] : spec.input_ranges) {
    if (!(lo < hi)) throw ConfigError("dataset input range is empty");
  }
  if (spec.n_train < 1 || spec.n_test < 0) throw ConfigError("dataset sample counts invalid");
  const ExprPtr truth = parse_expression(spec.expression);

  Dataset out;
  fill_split(truth, spec, 1, spec.n_train, out.train_x, out.train_y);
  fill_split(truth, spec, 2, spec.n_test, out.test_x, out.test_y);
  return out;
}

DatasetSpec example_dataset_spec(const std::string& which) {
  DatasetSpec spec;
  spec.name = which;
  spec.n_train = 128;
  spec.n_test = 128;
  spec.noise_sigma = 0.0;
  spec.rng_seed = 20240915;

  if (which == "reaction-kinetics") {
    // Decay rate of a species concentration: dA/dt = -k * A^n over (t, A).
    spec.expression = "(* (neg p0) (pow (var 1) p1))";
    spec.true_params = Eigen::Vector2d(0.35, 1.4);
    spec.input_ranges = {{0.0, 10.0}, {0.1, 2.0}};
  } else if (which == "logistic-growth") {
    // dP/dt = r * P * (1 - P / K) over (t, P).
    spec.expression = "(* p0 (* (var 1) (- 1 (/ (var 1) p1))))";
    spec.true_params = Eigen::Vector2d(0.8, 1.0);
    spec.input_ranges = {{0.0, 20.0}, {0.05, 0.95}};
  } else if (which == "driven-oscillator") {
    // dv/dt = -k x - c v + A sin(w t) over (t, x, v).
    spec.expression =
        "(+ (- (* (neg p0) (var 1)) (* p1 (var 2))) (* p2 (sin (* p3 (var 0)))))";
    spec.true_params = Eigen::Vector4d(1.5, 0.3, 0.7, 1.2);
    spec.input_ranges = {{0.0, 12.0}, {-1.5, 1.5}, {-2.0, 2.0}};
  } else if (which == "stress-strain") {
    // sigma(eps, T) = E eps exp(-a (T - 300) / 100) + b sqrt(eps).
    spec.expression =
        "(+ (* (* p0 (var 0)) (exp (neg (* p1 (/ (- (var 1) 300) 100))))) (* p2 (sqrt (var 0))))";
    spec.true_params = Eigen::Vector3d(2.0, 0.5, 0.3);
    spec.input_ranges = {{0.0, 0.2}, {250.0, 450.0}};
  } else {
    throw ConfigError("unknown example dataset '" + which + "'");
  }
  return spec;
}

namespace {

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(const std::filesystem::path& file, const Eigen::MatrixXd& x,
               const Eigen::VectorXd& y) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  for (Eigen::Index c = 0; c < x.cols(); ++c) out << "x" << c << ",";
  out << "y\n";
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) out << shortest(x(r, c)) << ",";
    out << shortest(y[r]) << "\n";
  }
}

void read_csv(const std::filesystem::path& file, Eigen::MatrixXd& x, Eigen::VectorXd& y) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(file.string() + " is empty");
  Eigen::Index cols = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ','));
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (static_cast<Eigen::Index>(row.size()) != cols + 1) {
      throw IoError(file.string() + " has a ragged row");
    }
    rows.push_back(std::move(row));
  }
  x.resize(static_cast<Eigen::Index>(rows.size()), cols);
  y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      x(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
    }
    y[static_cast<Eigen::Index>(r)] = rows[r].back();
  }
}

}  // namespace

void save_dataset(const std::filesystem::path& dir, const DatasetSpec& spec,
                  const Dataset& data) {
  std::filesystem::create_directories(dir);
  write_csv(dir / "train.csv", data.train_x, data.train_y);
  write_csv(dir / "test.csv", data.test_x, data.test_y);

  nlohmann::json sidecar = {
      {"name", spec.name},
      {"expression", spec.expression},
      {"params", std::vector<double>(spec.true_params.data(),
                                     spec.true_params.data() + spec.true_params.size())},
      {"input_ranges", nlohmann::json::array()},
      {"n_train", spec.n_train},
      {"n_test", spec.n_test},
      {"noise_sigma", spec.noise_sigma},
      {"seed", spec.rng_seed},
  };
  for (const auto& [lo, hi] : spec.input_ranges) {
    sidecar["input_ranges"].push_back(nlohmann::json::array({lo, hi}));
  }
  std::ofstream out(dir / "spec.json");
  if (!out) throw IoError("cannot write " + (dir / "spec.json").string());
  out << sidecar.dump(2) << "\n";
}

std::pair<DatasetSpec, Dataset> load_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "spec.json");
  if (!in) throw IoError("cannot read " + (dir / "spec.json").string());
  nlohmann::json sidecar;
  try {
    in >> sidecar;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptLogError("spec.json in " + dir.string() + " unparseable: " + e.what());
  }

  DatasetSpec spec;
  spec.name = sidecar.at("name").get<std::string>();
  spec.expression = sidecar.at("expression").get<std::string>();
  const auto params = sidecar.at("params").get<std::vector<double>>();
  spec.true_params = Eigen::Map<const Eigen::VectorXd>(params.data(),
                                                       static_cast<Eigen::Index>(params.size()));
  for (const auto& pair : sidecar.at("input_ranges")) {
    spec.input_ranges.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
  }
  spec.n_train = sidecar.at("n_train").get<int>();
  spec.n_test = sidecar.at("n_test").get<int>();
  spec.noise_sigma = sidecar.at("noise_sigma").get<double>();
  spec.rng_seed = sidecar.at("seed").get<std::uint64_t>();

  Dataset data;
  read_csv(dir / "train.csv", data.train_x, data.train_y);
  read_csv(dir / "test.csv", data.test_x, data.test_y);
  return {spec, data};
}

}  // namespace helix
