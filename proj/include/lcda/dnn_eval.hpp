/*
 * Copyright 2026 The lcda-cim Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcda/design_space.hpp"

namespace lcda {

/// Images stored as N x C x H x W doubles, roughly zero-centred.
struct Dataset {
  int height = 0;
  int width = 0;
  int channels = 0;
  int num_classes = 0;
  std::vector<double> images;
  std::vector<int> labels;

  size_t size() const { return labels.size(); }
  size_t image_size() const { return static_cast<size_t>(height) * width * channels; }
  std::span<const double> image(size_t i) const {
    return {images.data() + i * image_size(), image_size()};
  }
};

/// Procedural image-classification task. Each class is a texture (stripes at
/// four orientations, checker, rings, blob, gradient, cross, dots) drawn with
/// a random phase, frequency jitter and colour, plus Gaussian pixel noise.
struct SyntheticSpec {
  int num_classes = 4;
  int image_size = 8;
  int train_size = 512;
  int test_size = 256;
  double pixel_noise = 0.35;
  uint64_t seed = 0;

  bool operator==(const SyntheticSpec&) const = default;
};

struct DatasetSplit {
  Dataset train;
  Dataset test;
};

DatasetSplit make_synthetic(const SyntheticSpec& spec);

/// Reads the CIFAR-10 binary batch layout: per record one label byte then
/// 3072 pixel bytes (1024 red, 1024 green, 1024 blue, row-major 32x32).
/// max_records = 0 reads the whole file.
Dataset load_cifar10_binary(const std::string& path, size_t max_records = 0);

struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 1;
  int height = 0;  // input spatial size
  int width = 0;
  bool pool = false;
  std::vector<double> weights;  // out x (in * k * k), row-major
  std::vector<double> bias;
};

struct DenseLayer {
  int in_features = 0;
  int out_features = 0;
  bool relu = true;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> bias;
};

/// ReLU conv stack (stride 1, same padding, optional 2x2 max-pool) followed by
/// dense layers and a softmax cross-entropy head.
struct Network {
  InputShape input;
  std::vector<ConvLayer> convs;
  std::vector<DenseLayer> dense;

  int64_t parameter_count() const;
  int flatten_size() const;
  /// (height, width, channels) produced by conv stage `i`, pooling included.
  InputShape conv_output_shape(size_t i) const;
  int num_classes() const { return dense.empty() ? 0 : dense.back().out_features; }
};

class SpatialCollapse : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// He-normal weights seeded by `seed`, zero biases.
Network build_network(const Rollout& rollout, const Backbone& backbone, uint64_t seed);

/// Same shape as the network's trainable tensors.
struct Gradients {
  std::vector<std::vector<double>> conv_w, conv_b, dense_w, dense_b;

  explicit Gradients(const Network& net);
  void scale(double factor);
};

/// Mean softmax cross-entropy over `indices`; accumulates the gradient of that
/// mean into `grad` when non-null.
double loss_and_gradient(const Network& net, const Dataset& data,
                         std::span<const size_t> indices, Gradients* grad);

/// Logits for one image.
std::vector<double> forward(const Network& net, std::span<const double> image);

/// Fraction of correctly classified samples, in [0, 1].
double accuracy(const Network& net, const Dataset& data);
size_t correct_count(const Network& net, const Dataset& data);

/// Multiplicative device variation: w' = w * (1 + eps), eps ~ N(0, sigma^2),
/// drawn independently per weight. Biases stay exact.
struct NoiseModel {
  double sigma = 0.1;

  bool operator==(const NoiseModel&) const = default;
};

/// Copy of `net` with one fresh perturbation applied to every weight. When
/// `factors` is non-null it receives the (1 + eps) multipliers per tensor.
/// sigma = 0 draws nothing and leaves every weight unchanged.
Network perturb(const Network& net, const NoiseModel& noise, std::mt19937_64& rng,
                std::vector<std::vector<double>>* factors = nullptr);

struct TrainOptions {
  int epochs = 10;
  double learning_rate = 0.05;
  int batch_size = 32;
  uint64_t seed = 0;

  bool operator==(const TrainOptions&) const = default;
};

struct TrainStats {
  std::vector<double> epoch_loss;  // mean perturbed-forward loss per epoch
};

/// Mini-batch gradient descent where each batch is evaluated with freshly
/// perturbed weights and the gradient is chained back to the clean weights.
/// sigma = 0 reduces to plain training with identical arithmetic.
Network train_noise_injection(Network net, const Dataset& data, const NoiseModel& noise,
                              const TrainOptions& options, TrainStats* stats = nullptr);

struct EvalResult {
  double clean_accuracy = 0.0;
  double mc_mean_accuracy = 0.0;
  double mc_std = 0.0;
  int num_samples = 0;
  uint64_t seed = 0;
};

/// Monte Carlo accuracy under device variation: one perturbation of all
/// weights per sample, evaluated on the full dataset.
EvalResult mc_accuracy(const Network& net, const Dataset& data, const NoiseModel& noise,
                       int num_samples, uint64_t seed);

}  // namespace lcda
