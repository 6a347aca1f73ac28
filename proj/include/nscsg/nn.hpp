// Copyright 2026 The nscsg Authors
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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "nscsg/error.hpp"

namespace nscsg {

// Affine layer y = W x + b with W stored row-major as out x in.
struct DenseLayer {
  std::vector<std::vector<double>> weights;
  std::vector<double> bias;

  int in_dim() const { return weights.empty() ? 0 : weights[0].size(); }
  int out_dim() const { return weights.size(); }
};

// Feed-forward network: ReLU on every layer except the last.
struct FeedForwardNet {
  std::vector<DenseLayer> layers;

  int input_dim() const { return layers.empty() ? 0 : layers[0].in_dim(); }
  int output_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }
};

inline void ValidateNet(const FeedForwardNet& net) {
  if (net.layers.empty()) Fail(ErrorKind::kModel, "network has no layers");
  for (int l = 0; l < static_cast<int>(net.layers.size()); ++l) {
    const DenseLayer& layer = net.layers[l];
    if (layer.weights.empty() || layer.weights[0].empty()) {
      Fail(ErrorKind::kDimension, "layer " + std::to_string(l) + " is empty");
    }
    for (const auto& row : layer.weights) {
      if (static_cast<int>(row.size()) != layer.in_dim()) {
        Fail(ErrorKind::kDimension,
             "layer " + std::to_string(l) + " has ragged weight rows");
      }
      for (double w : row) {
        if (!std::isfinite(w)) {
          Fail(ErrorKind::kModel,
               "layer " + std::to_string(l) + " has a non-finite weight");
        }
      }
    }
    if (static_cast<int>(layer.bias.size()) != layer.out_dim()) {
      Fail(ErrorKind::kDimension, "layer " + std::to_string(l) +
                                      ": bias size " +
                                      std::to_string(layer.bias.size()) +
                                      " != output size " +
                                      std::to_string(layer.out_dim()));
    }
    if (l > 0 && layer.in_dim() != net.layers[l - 1].out_dim()) {
      Fail(ErrorKind::kDimension,
           "layer " + std::to_string(l) + " expects input size " +
               std::to_string(layer.in_dim()) + " but layer " +
               std::to_string(l - 1) + " produces " +
               std::to_string(net.layers[l - 1].out_dim()));
    }
  }
}

inline std::vector<double> nn_forward(const FeedForwardNet& net,
                                      const std::vector<double>& input) {
  std::vector<double> x = input;
  const int num_layers = net.layers.size();
  for (int l = 0; l < num_layers; ++l) {
    const DenseLayer& layer = net.layers[l];
    if (static_cast<int>(x.size()) != layer.in_dim()) {
      Fail(ErrorKind::kDimension,
           "layer " + std::to_string(l) + " expects input size " +
               std::to_string(layer.in_dim()) + ", got " +
               std::to_string(x.size()));
    }
    std::vector<double> y(layer.out_dim());
    for (int r = 0; r < layer.out_dim(); ++r) {
      double acc = layer.bias[r];
      const auto& row = layer.weights[r];
      for (int c = 0; c < layer.in_dim(); ++c) acc += row[c] * x[c];
      y[r] = (l + 1 < num_layers) ? std::max(0.0, acc) : acc;
    }
    x = std::move(y);
  }
  return x;
}

// Index of the largest entry; ties go to the lowest index.
inline int ArgMax(const std::vector<double>& scores) {
  if (scores.empty()) Fail(ErrorKind::kDimension, "argmax of empty vector");
  int best = 0;
  for (int i = 1; i < static_cast<int>(scores.size()); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

inline FeedForwardNet NetFromJson(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("layers") || !j["layers"].is_array()) {
    Fail(ErrorKind::kModel, "network JSON needs a \"layers\" array");
  }
  FeedForwardNet net;
  try {
    for (const auto& jl : j["layers"]) {
      DenseLayer layer;
      layer.weights = jl.at("weights").get<std::vector<std::vector<double>>>();
      layer.bias = jl.at("bias").get<std::vector<double>>();
      net.layers.push_back(std::move(layer));
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kModel, std::string("malformed network JSON: ") + e.what());
  }
  ValidateNet(net);
  return net;
}

inline nlohmann::json NetToJson(const FeedForwardNet& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : net.layers) {
    layers.push_back({{"weights", layer.weights}, {"bias", layer.bias}});
  }
  return {{"layers", layers}};
}

inline FeedForwardNet LoadNet(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kModel, "cannot open network file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kModel, path + ": " + e.what());
  }
  return NetFromJson(j);
}

// Seeded network with the given layer sizes (sizes[0] inputs). Weights are
// drawn from raw mt19937_64 output so the result is identical on every
// standard library.
inline FeedForwardNet RandomNet(const std::vector<int>& sizes,
                                std::uint64_t seed) {
  if (sizes.size() < 2) Fail(ErrorKind::kDimension, "need at least 2 sizes");
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double scale) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return scale * (2.0 * u - 1.0);
  };
  FeedForwardNet net;
  for (size_t l = 1; l < sizes.size(); ++l) {
    DenseLayer layer;
    const double scale = std::sqrt(6.0 / (sizes[l - 1] + sizes[l]));
    layer.weights.assign(sizes[l], std::vector<double>(sizes[l - 1]));
    for (auto& row : layer.weights) {
      for (double& w : row) w = uniform(scale);
    }
    layer.bias.resize(sizes[l]);
    for (double& b : layer.bias) b = uniform(0.1);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

}  // namespace nscsg
