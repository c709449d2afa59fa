#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "helix/expression.hpp"

namespace helix {

// A synthetic regression problem: inputs drawn uniformly per column,
// targets from a ground-truth expression plus optional Gaussian noise.
struct DatasetSpec {
  std::string name;
  std::string expression;  // prefix form, parsed on use
  Eigen::VectorXd true_params;
  std::vector<std::pair<double, double>> input_ranges;
  int n_train = 128;
  int n_test = 128;
  double noise_sigma = 0.0;
  std::uint64_t rng_seed = 0;
};

struct Dataset {
  Eigen::MatrixXd train_x;
  Eigen::VectorXd train_y;
  Eigen::MatrixXd test_x;
  Eigen::VectorXd test_y;
};

// Train/test and input/noise use separate derived RNG streams, so changing
// noise_sigma changes targets but never the inputs, and test never leaks
// into train. A sample whose ground-truth value is non-finite is redrawn,
// up to 1000 times before NonFiniteGroundTruthError.
Dataset generate_dataset(const DatasetSpec& spec);

// Built-in example problems: "reaction-kinetics", "logistic-growth",
// "driven-oscillator", "stress-strain". Functional forms are this
// project's own choices.
DatasetSpec example_dataset_spec(const std::string& which);

// CSV files (train.csv / test.csv with x0..xd,y headers) plus a spec.json
// sidecar carrying the generator settings.
void save_dataset(const std::filesystem::path& dir, const DatasetSpec& spec,
                  const Dataset& data);
std::pair<DatasetSpec, Dataset> load_dataset(const std::filesystem::path& dir);

}  // namespace helix
