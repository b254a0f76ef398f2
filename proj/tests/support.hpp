// Copyright 2026 The csong Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include "csong/acoustic.hpp"
#include "csong/lexicon.hpp"
#include "csong/random.hpp"

namespace csong::testing {

inline const Inventory& inventory() {
  static const Inventory inv = default_inventory();
  return inv;
}

/// Model trained by the ctest fixture (`csong model train`).
inline const AcousticModel& toy_model() {
  static const AcousticModel model = load_model(CSONG_TOY_MODEL);
  return model;
}

inline std::filesystem::path data_dir() { return CSONG_DATA_DIR; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::path(CSONG_SCRATCH_DIR) / name;
  std::filesystem::create_directories(dir);
  return dir;
}

inline Eigen::VectorXd random_signal(Eigen::Index n, std::uint64_t seed, double amplitude = 0.3) {
  Rng rng(seed);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.uniform(-amplitude, amplitude);
  return x;
}

/// |a - b| / max(|a|, |b|, floor).
inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// A small model with random weights, for shape and gradient tests.
inline AcousticModel random_model(std::uint64_t seed, int num_pdfs = 37) {
  AcousticModel m;
  m.seed = seed;
  Rng rng(seed);
  const int in = m.input_dim();
  m.input_mean = Eigen::RowVectorXd::Zero(in);
  m.input_inv_std = Eigen::RowVectorXd::Constant(in, 0.05);
  const int dims[] = {in, 16, 16, num_pdfs};
  for (int l = 0; l < 3; ++l) {
    DenseLayer layer;
    layer.weight.resize(dims[l + 1], dims[l]);
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i)
      layer.weight.data()[i] = rng.uniform(-0.5, 0.5);
    layer.bias = Eigen::VectorXd::Zero(dims[l + 1]);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = rng.uniform(-0.1, 0.1);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

}  // namespace csong::testing
