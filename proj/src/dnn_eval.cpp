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
#include "lcda/dnn_eval.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace lcda {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using Vec = Eigen::VectorXd;

constexpr double kPi = 3.14159265358979323846;

// --- synthetic data -------------------------------------------------------

// Pattern value in [-1, 1] for class `cls` at pixel (y, x) of an s x s image.
double pattern(int cls, double y, double x, double s, double phase, double freq) {
  const double cy = (s - 1) / 2.0;
  const double cx = (s - 1) / 2.0;
  switch (cls % 10) {
    case 0:  // horizontal stripes
      return std::sin(freq * y + phase);
    case 1:  // vertical stripes
      return std::sin(freq * x + phase);
    case 2:  // diagonal stripes
      return std::sin(freq * (x + y) / std::sqrt(2.0) + phase);
    case 3:  // anti-diagonal stripes
      return std::sin(freq * (x - y) / std::sqrt(2.0) + phase);
    case 4:  // checkerboard
      return std::sin(freq * x + phase) * std::sin(freq * y + phase);
    case 5: {  // rings
      const double r = std::hypot(y - cy, x - cx);
      return std::sin(freq * r + phase);
    }
    case 6: {  // centred blob
      const double r2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
      return 2.0 * std::exp(-r2 / (0.08 * s * s)) - 1.0;
    }
    case 7:  // corner gradient
      return (x + y) / (s - 1) - 1.0;
    case 8: {  // cross
      const double d = std::min(std::abs(y - cy), std::abs(x - cx));
      return d < 1.0 ? 1.0 : -0.5;
    }
    default: {  // dot lattice
      return std::cos(freq * x + phase) + std::cos(freq * y + phase) > 1.0 ? 1.0 : -0.5;
    }
  }
}

Dataset synth_split(const SyntheticSpec& spec, int count, std::mt19937_64& rng) {
  Dataset d;
  d.height = d.width = spec.image_size;
  d.channels = 3;
  d.num_classes = spec.num_classes;
  d.images.resize(static_cast<size_t>(count) * d.image_size());
  d.labels.resize(static_cast<size_t>(count));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double s = spec.image_size;
  for (int n = 0; n < count; ++n) {
    const int cls = n % spec.num_classes;
    d.labels[static_cast<size_t>(n)] = cls;
    const double phase = 2.0 * kPi * unit(rng);
    const double freq = (1.4 + 0.4 * unit(rng)) * 8.0 / s;
    double colour[3];
    for (double& c : colour) c = 0.3 + 0.7 * unit(rng);
    double* img = d.images.data() + static_cast<size_t>(n) * d.image_size();
    for (int ch = 0; ch < 3; ++ch) {
      for (int y = 0; y < spec.image_size; ++y) {
        for (int x = 0; x < spec.image_size; ++x) {
          const double v = colour[ch] * pattern(cls, y, x, s, phase, freq);
          img[(ch * spec.image_size + y) * spec.image_size + x] = v + spec.pixel_noise * gauss(rng);
        }
      }
    }
  }
  return d;
}

}  // namespace

DatasetSplit make_synthetic(const SyntheticSpec& spec) {
  if (spec.num_classes < 2 || spec.num_classes > 10 || spec.image_size < 2 ||
      spec.train_size < 1 || spec.test_size < 1) {
    throw std::invalid_argument("synthetic dataset: need 2-10 classes, size >= 2, nonempty splits");
  }
  std::mt19937_64 rng(spec.seed);
  DatasetSplit split;
  split.train = synth_split(spec, spec.train_size, rng);
  split.test = synth_split(spec, spec.test_size, rng);
  return split;
}

Dataset load_cifar10_binary(const std::string& path, size_t max_records) {
  constexpr size_t kPixels = 32 * 32 * 3;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open CIFAR-10 batch " + path);
  Dataset d;
  d.height = d.width = 32;
  d.channels = 3;
  d.num_classes = 10;
  std::vector<unsigned char> record(kPixels + 1);
  while (max_records == 0 || d.size() < max_records) {
    in.read(reinterpret_cast<char*>(record.data()), static_cast<std::streamsize>(record.size()));
    if (in.gcount() == 0) break;
    if (static_cast<size_t>(in.gcount()) != record.size()) {
      throw std::runtime_error(path + ": truncated CIFAR-10 record");
    }
    if (record[0] > 9) throw std::runtime_error(path + ": label byte out of range");
    d.labels.push_back(record[0]);
    for (size_t i = 0; i < kPixels; ++i) d.images.push_back(record[i + 1] / 255.0 - 0.5);
  }
  return d;
}

// --- network --------------------------------------------------------------

int64_t Network::parameter_count() const {
  int64_t total = 0;
  for (const auto& c : convs) total += static_cast<int64_t>(c.weights.size() + c.bias.size());
  for (const auto& l : dense) total += static_cast<int64_t>(l.weights.size() + l.bias.size());
  return total;
}

InputShape Network::conv_output_shape(size_t i) const {
  const auto& c = convs.at(i);
  return c.pool ? InputShape{c.height / 2, c.width / 2, c.out_channels}
                : InputShape{c.height, c.width, c.out_channels};
}

int Network::flatten_size() const {
  if (convs.empty()) return input.height * input.width * input.channels;
  const auto s = conv_output_shape(convs.size() - 1);
  return s.height * s.width * s.channels;
}

Network build_network(const Rollout& rollout, const Backbone& backbone, uint64_t seed) {
  if (rollout.layers.empty()) throw std::invalid_argument("build_network: rollout has no layers");
  Network net;
  net.input = backbone.input_shape;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto fill = [&](std::vector<double>& w, size_t n, int fan_in) {
    const double scale = std::sqrt(2.0 / fan_in);
    w.resize(n);
    for (double& v : w) v = scale * gauss(rng);
  };

  int h = backbone.input_shape.height;
  int w = backbone.input_shape.width;
  int c = backbone.input_shape.channels;
  for (size_t i = 0; i < rollout.layers.size(); ++i) {
    ConvLayer layer;
    layer.in_channels = c;
    layer.out_channels = rollout.layers[i].out_channels;
    layer.kernel = rollout.layers[i].kernel;
    layer.height = h;
    layer.width = w;
    layer.pool = backbone.pool_after.count(static_cast<int>(i)) > 0;
    if (layer.out_channels < 1 || layer.kernel < 1 || layer.kernel % 2 == 0) {
      throw std::invalid_argument("build_network: layer " + std::to_string(i) +
                                  " needs positive channels and an odd kernel");
    }
    const int fan_in = c * layer.kernel * layer.kernel;
    fill(layer.weights, static_cast<size_t>(layer.out_channels) * fan_in, fan_in);
    layer.bias.assign(static_cast<size_t>(layer.out_channels), 0.0);
    if (layer.pool) {
      h /= 2;
      w /= 2;
      if (h < 1 || w < 1) {
        throw SpatialCollapse("build_network: pooling after layer " + std::to_string(i) +
                              " collapses the feature map");
      }
    }
    c = layer.out_channels;
    net.convs.push_back(std::move(layer));
  }
  int features = h * w * c;
  for (int f = 0; f < backbone.num_fc_layers; ++f) {
    DenseLayer layer;
    layer.relu = f + 1 < backbone.num_fc_layers;
    layer.in_features = features;
    layer.out_features = layer.relu ? backbone.fc_hidden_size : backbone.num_classes;
    fill(layer.weights, static_cast<size_t>(layer.in_features) * layer.out_features, features);
    layer.bias.assign(static_cast<size_t>(layer.out_features), 0.0);
    features = layer.out_features;
    net.dense.push_back(std::move(layer));
  }
  return net;
}

Gradients::Gradients(const Network& net) {
  for (const auto& c : net.convs) {
    conv_w.emplace_back(c.weights.size(), 0.0);
    conv_b.emplace_back(c.bias.size(), 0.0);
  }
  for (const auto& l : net.dense) {
    dense_w.emplace_back(l.weights.size(), 0.0);
    dense_b.emplace_back(l.bias.size(), 0.0);
  }
}

void Gradients::scale(double factor) {
  for (auto* group : {&conv_w, &conv_b, &dense_w, &dense_b}) {
    for (auto& t : *group) {
      for (double& v : t) v *= factor;
    }
  }
}

namespace {

struct ConvCache {
  RowMat cols;               // (in*k*k) x (h*w)
  RowMat activ;              // out x (h*w), post-ReLU
  std::vector<int> argmax;   // pooled position -> flat index into activ row
  RowMat output;             // out x (h'*w')
};

struct DenseCache {
  Vec input;
  Vec output;  // post-activation (logits for the head)
};

struct Trace {
  std::vector<ConvCache> conv;
  std::vector<DenseCache> dense;
};

void im2col(const double* in, const ConvLayer& l, RowMat& cols) {
  const int k = l.kernel, pad = (l.kernel - 1) / 2, h = l.height, w = l.width;
  cols.setZero(static_cast<Eigen::Index>(l.in_channels) * k * k, static_cast<Eigen::Index>(h) * w);
  for (int c = 0; c < l.in_channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const Eigen::Index row = (c * k + ky) * k + kx;
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= h) continue;
          for (int x = 0; x < w; ++x) {
            const int sx = x + kx - pad;
            if (sx < 0 || sx >= w) continue;
            cols(row, y * w + x) = in[(c * h + sy) * w + sx];
          }
        }
      }
    }
  }
}

void col2im(const RowMat& dcols, const ConvLayer& l, std::vector<double>& din) {
  const int k = l.kernel, pad = (l.kernel - 1) / 2, h = l.height, w = l.width;
  din.assign(static_cast<size_t>(l.in_channels) * h * w, 0.0);
  for (int c = 0; c < l.in_channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const Eigen::Index row = (c * k + ky) * k + kx;
        for (int y = 0; y < h; ++y) {
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= h) continue;
          for (int x = 0; x < w; ++x) {
            const int sx = x + kx - pad;
            if (sx < 0 || sx >= w) continue;
            din[static_cast<size_t>((c * h + sy) * w + sx)] += dcols(row, y * w + x);
          }
        }
      }
    }
  }
}

Vec run_forward(const Network& net, std::span<const double> image, Trace* trace) {
  RowMat current = ConstMapMat(image.data(), net.input.channels,
                               static_cast<Eigen::Index>(net.input.height) * net.input.width);
  if (trace) {
    trace->conv.resize(net.convs.size());
    trace->dense.resize(net.dense.size());
  }
  ConvCache local;
  for (size_t i = 0; i < net.convs.size(); ++i) {
    const auto& l = net.convs[i];
    ConvCache& cache = trace ? trace->conv[i] : local;
    im2col(current.data(), l, cache.cols);
    ConstMapMat wmat(l.weights.data(), l.out_channels,
                     static_cast<Eigen::Index>(l.in_channels) * l.kernel * l.kernel);
    cache.activ = wmat * cache.cols;
    for (Eigen::Index r = 0; r < cache.activ.rows(); ++r) {
      cache.activ.row(r).array() += l.bias[static_cast<size_t>(r)];
    }
    cache.activ = cache.activ.cwiseMax(0.0);
    if (l.pool) {
      const int oh = l.height / 2, ow = l.width / 2;
      cache.output.resize(l.out_channels, static_cast<Eigen::Index>(oh) * ow);
      cache.argmax.assign(static_cast<size_t>(l.out_channels) * oh * ow, 0);
      for (int c = 0; c < l.out_channels; ++c) {
        for (int y = 0; y < oh; ++y) {
          for (int x = 0; x < ow; ++x) {
            int best = (2 * y) * l.width + 2 * x;
            for (int dy = 0; dy < 2; ++dy) {
              for (int dx = 0; dx < 2; ++dx) {
                const int idx = (2 * y + dy) * l.width + 2 * x + dx;
                if (cache.activ(c, idx) > cache.activ(c, best)) best = idx;
              }
            }
            cache.output(c, y * ow + x) = cache.activ(c, best);
            cache.argmax[static_cast<size_t>((c * oh + y) * ow + x)] = best;
          }
        }
      }
      current = cache.output;
    } else {
      current = cache.activ;
    }
  }
  Vec x = Eigen::Map<const Vec>(current.data(), current.size());
  for (size_t i = 0; i < net.dense.size(); ++i) {
    const auto& l = net.dense[i];
    ConstMapMat wmat(l.weights.data(), l.out_features, l.in_features);
    Vec z = wmat * x + Eigen::Map<const Vec>(l.bias.data(), l.out_features);
    if (l.relu) z = z.cwiseMax(0.0);
    if (trace) {
      trace->dense[i].input = x;
      trace->dense[i].output = z;
    }
    x = std::move(z);
  }
  return x;
}

// Softmax cross-entropy; returns loss and writes dL/dlogits.
double softmax_xent(const Vec& logits, int label, Vec* dlogits) {
  const double m = logits.maxCoeff();
  Vec p = (logits.array() - m).exp();
  const double z = p.sum();
  p /= z;
  if (dlogits) {
    *dlogits = p;
    (*dlogits)(label) -= 1.0;
  }
  return -(logits(label) - m - std::log(z));
}

void backward(const Network& net, const Trace& trace, Vec grad_out, Gradients& g, double weight) {
  Vec dx = std::move(grad_out);
  for (size_t ii = net.dense.size(); ii-- > 0;) {
    const auto& l = net.dense[ii];
    const auto& cache = trace.dense[ii];
    if (l.relu) {
      for (Eigen::Index j = 0; j < dx.size(); ++j) {
        if (cache.output(j) <= 0.0) dx(j) = 0.0;
      }
    }
    MapMat gw(g.dense_w[ii].data(), l.out_features, l.in_features);
    gw.noalias() += weight * dx * cache.input.transpose();
    Eigen::Map<Vec>(g.dense_b[ii].data(), l.out_features) += weight * dx;
    ConstMapMat wmat(l.weights.data(), l.out_features, l.in_features);
    dx = wmat.transpose() * dx;
  }
  std::vector<double> dcur(dx.data(), dx.data() + dx.size());
  for (size_t ii = net.convs.size(); ii-- > 0;) {
    const auto& l = net.convs[ii];
    const auto& cache = trace.conv[ii];
    const Eigen::Index hw = static_cast<Eigen::Index>(l.height) * l.width;
    RowMat dact = RowMat::Zero(l.out_channels, hw);
    if (l.pool) {
      for (size_t p = 0; p < cache.argmax.size(); ++p) {
        const Eigen::Index c = static_cast<Eigen::Index>(p / ((l.height / 2) * (l.width / 2)));
        dact(c, cache.argmax[p]) += dcur[p];
      }
    } else {
      dact = ConstMapMat(dcur.data(), l.out_channels, hw);
    }
    dact = (cache.activ.array() > 0.0).select(dact, 0.0);
    const Eigen::Index fan = static_cast<Eigen::Index>(l.in_channels) * l.kernel * l.kernel;
    MapMat gw(g.conv_w[ii].data(), l.out_channels, fan);
    gw.noalias() += weight * dact * cache.cols.transpose();
    Eigen::Map<Vec>(g.conv_b[ii].data(), l.out_channels) += weight * dact.rowwise().sum();
    if (ii == 0) break;
    ConstMapMat wmat(l.weights.data(), l.out_channels, fan);
    const RowMat dcols = wmat.transpose() * dact;
    col2im(dcols, l, dcur);
  }
}

void check_input(const Network& net, const Dataset& data) {
  if (data.height != net.input.height || data.width != net.input.width ||
      data.channels != net.input.channels) {
    throw std::invalid_argument("dataset shape does not match the network input");
  }
}

}  // namespace

std::vector<double> forward(const Network& net, std::span<const double> image) {
  const Vec out = run_forward(net, image, nullptr);
  return {out.data(), out.data() + out.size()};
}

double loss_and_gradient(const Network& net, const Dataset& data,
                         std::span<const size_t> indices, Gradients* grad) {
  check_input(net, data);
  if (indices.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
  const double weight = 1.0 / static_cast<double>(indices.size());
  double total = 0.0;
  Trace trace;
  for (size_t idx : indices) {
    const Vec logits = run_forward(net, data.image(idx), grad ? &trace : nullptr);
    Vec dlogits;
    total += softmax_xent(logits, data.labels[idx], grad ? &dlogits : nullptr);
    if (grad) backward(net, trace, std::move(dlogits), *grad, weight);
  }
  return total * weight;
}

size_t correct_count(const Network& net, const Dataset& data) {
  check_input(net, data);
  size_t correct = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    const Vec logits = run_forward(net, data.image(i), nullptr);
    Eigen::Index best = 0;
    logits.maxCoeff(&best);
    correct += static_cast<int>(best) == data.labels[i];
  }
  return correct;
}

double accuracy(const Network& net, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("accuracy: empty dataset");
  return static_cast<double>(correct_count(net, data)) / static_cast<double>(data.size());
}

Network perturb(const Network& net, const NoiseModel& noise, std::mt19937_64& rng,
                std::vector<std::vector<double>>* factors) {
  if (!(noise.sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  Network out = net;
  std::normal_distribution<double> gauss(0.0, noise.sigma > 0.0 ? noise.sigma : 1.0);
  if (factors) factors->clear();
  auto apply = [&](std::vector<double>& w) {
    std::vector<double> f(w.size(), 1.0);
    for (size_t i = 0; i < w.size(); ++i) {
      if (noise.sigma > 0.0) f[i] += gauss(rng);
      w[i] *= f[i];
    }
    if (factors) factors->push_back(std::move(f));
  };
  for (auto& c : out.convs) apply(c.weights);
  for (auto& l : out.dense) apply(l.weights);
  return out;
}

Network train_noise_injection(Network net, const Dataset& data, const NoiseModel& noise,
                              const TrainOptions& options, TrainStats* stats) {
  if (options.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (options.batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");
  if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
  if (!(noise.sigma >= 0.0)) throw std::invalid_argument("train: sigma must be >= 0");
  check_input(net, data);

  std::mt19937_64 order_rng(options.seed);
  std::mt19937_64 noise_rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const double lr = options.learning_rate;
  std::vector<std::vector<double>> factors;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    double epoch_loss = 0.0;
    size_t batches = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(options.batch_size)) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(options.batch_size));
      std::span<const size_t> batch(order.data() + start, end - start);
      Gradients g(net);
      double loss = 0.0;
      if (noise.sigma > 0.0) {
        const Network noisy = perturb(net, noise, noise_rng, &factors);
        loss = loss_and_gradient(noisy, data, batch, &g);
        // d(w * f)/dw = f
        size_t t = 0;
        for (auto& gw : g.conv_w) {
          for (size_t i = 0; i < gw.size(); ++i) gw[i] *= factors[t][i];
          ++t;
        }
        for (auto& gw : g.dense_w) {
          for (size_t i = 0; i < gw.size(); ++i) gw[i] *= factors[t][i];
          ++t;
        }
      } else {
        loss = loss_and_gradient(net, data, batch, &g);
      }
      if (!std::isfinite(loss)) {
        throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch) +
                               " (non-finite loss)");
      }
      epoch_loss += loss;
      ++batches;
      for (size_t i = 0; i < net.convs.size(); ++i) {
        auto& c = net.convs[i];
        for (size_t j = 0; j < c.weights.size(); ++j) c.weights[j] -= lr * g.conv_w[i][j];
        for (size_t j = 0; j < c.bias.size(); ++j) c.bias[j] -= lr * g.conv_b[i][j];
      }
      for (size_t i = 0; i < net.dense.size(); ++i) {
        auto& l = net.dense[i];
        for (size_t j = 0; j < l.weights.size(); ++j) l.weights[j] -= lr * g.dense_w[i][j];
        for (size_t j = 0; j < l.bias.size(); ++j) l.bias[j] -= lr * g.dense_b[i][j];
      }
    }
    if (stats) stats->epoch_loss.push_back(epoch_loss / static_cast<double>(batches));
  }
  return net;
}

EvalResult mc_accuracy(const Network& net, const Dataset& data, const NoiseModel& noise,
                       int num_samples, uint64_t seed) {
  if (num_samples < 1) throw std::invalid_argument("mc_accuracy: num_samples must be >= 1");
  if (data.size() == 0) throw std::invalid_argument("mc_accuracy: empty dataset");
  const double n = static_cast<double>(data.size());
  EvalResult r;
  r.num_samples = num_samples;
  r.seed = seed;
  const size_t clean = correct_count(net, data);
  r.clean_accuracy = static_cast<double>(clean) / n;

  // Means come from integer counts so sigma = 0 reproduces the clean accuracy bit for bit.
  std::vector<size_t> counts;
  std::mt19937_64 rng(seed);
  for (int s = 0; s < num_samples; ++s) counts.push_back(correct_count(perturb(net, noise, rng), data));
  const size_t total = std::accumulate(counts.begin(), counts.end(), size_t{0});
  r.mc_mean_accuracy = static_cast<double>(total) / (n * num_samples);
  if (num_samples > 1) {
    double ss = 0.0;
    for (size_t c : counts) {
      const double d = static_cast<double>(c) / n - r.mc_mean_accuracy;
      ss += d * d;
    }
    r.mc_std = std::sqrt(ss / (num_samples - 1));
  }
  return r;
}

}  // namespace lcda
