/*
 * Copyright 2026 The ListFold Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "listfold/network.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "listfold/error.hpp"

namespace listfold {

std::vector<std::size_t> layer_dims(std::size_t feature_dim) {
  if (feature_dim == 0) throw InvalidArgument("feature_dim must be >= 1");
  return {feature_dim, 2 * feature_dim, 4 * feature_dim,
          (feature_dim + 1) / 2, 1};
}

ScoringNet::ScoringNet(std::vector<std::size_t> dims, bool final_relu,
                       std::uint64_t seed)
    : dims_(std::move(dims)), final_relu_(final_relu), seed_(seed) {
  if (dims_.size() < 2) throw InvalidArgument("network needs >= 2 widths");
  for (std::size_t w : dims_) {
    if (w == 0) throw InvalidArgument("layer widths must be >= 1");
  }
  layers_.resize(dims_.size() - 1);
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(dims_[l]);
    const auto out = static_cast<Eigen::Index>(dims_[l + 1]);
    layers_[l].weight = Eigen::MatrixXd::Zero(in, out);
    layers_[l].bias = Eigen::VectorXd::Zero(out);
  }
}

ScoringNet ScoringNet::init(std::size_t feature_dim, std::uint64_t seed,
                            bool final_relu) {
  ScoringNet net(layer_dims(feature_dim), final_relu, seed);
  std::mt19937_64 rng(seed);
  for (auto& layer : net.layers_) {
    const double fan = static_cast<double>(layer.weight.rows() + layer.weight.cols());
    const double limit = std::sqrt(6.0 / fan);
    std::uniform_real_distribution<double> uniform(-limit, limit);
    // Row-major fill keeps the draw order independent of Eigen's storage.
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        layer.weight(r, c) = uniform(rng);
      }
    }
  }
  // Start the output on the active side of a final ReLU.
  if (final_relu) net.layers_.back().bias.setConstant(kFinalReluBias);
  return net;
}

Eigen::VectorXd ScoringNet::forward(const Eigen::MatrixXd& features) const {
  ForwardCache cache;
  return forward(features, cache);
}

Eigen::VectorXd ScoringNet::forward(const Eigen::MatrixXd& features,
                                    ForwardCache& cache) const {
  if (static_cast<std::size_t>(features.cols()) != feature_dim()) {
    throw InvalidArgument("forward: expected " + std::to_string(feature_dim()) +
                          " features, got " + std::to_string(features.cols()));
  }
  cache.inputs.resize(layers_.size());
  cache.pre.resize(layers_.size());
  Eigen::MatrixXd current = features;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = current * layers_[l].weight;
    z.rowwise() += layers_[l].bias.transpose();
    cache.inputs[l] = std::move(current);
    current = relu_after(l) ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
    cache.pre[l] = std::move(z);
  }
  return current.col(0);
}

NetGradients ScoringNet::backward(const ForwardCache& cache,
                                  const Eigen::VectorXd& score_gradient) const {
  if (cache.pre.size() != layers_.size() ||
      cache.pre.back().rows() != score_gradient.size()) {
    throw InvalidArgument("backward: cache does not match the gradient");
  }
  NetGradients grads;
  grads.weight.resize(layers_.size());
  grads.bias.resize(layers_.size());
  Eigen::MatrixXd upstream = score_gradient;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    if (relu_after(l)) {
      upstream = (cache.pre[l].array() > 0.0).select(upstream, 0.0);
    }
    grads.weight[l] = cache.inputs[l].transpose() * upstream;
    grads.bias[l] = upstream.colwise().sum().transpose();
    if (l > 0) upstream = upstream * layers_[l].weight.transpose();
  }
  return grads;
}

std::size_t ScoringNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) {
    n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  }
  return n;
}

std::vector<double> ScoringNet::parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        out.push_back(layer.weight(r, c));
      }
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) out.push_back(layer.bias(i));
  }
  return out;
}

void ScoringNet::set_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw InvalidArgument("set_parameters: expected " +
                          std::to_string(parameter_count()) + " values");
  }
  std::size_t k = 0;
  for (auto& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        layer.weight(r, c) = values[k++];
      }
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = values[k++];
  }
}

std::vector<double> ScoringNet::flatten(const NetGradients& grads) {
  std::vector<double> out;
  for (std::size_t l = 0; l < grads.weight.size(); ++l) {
    const auto& w = grads.weight[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) out.push_back(w(r, c));
    }
    for (Eigen::Index i = 0; i < grads.bias[l].size(); ++i) {
      out.push_back(grads.bias[l](i));
    }
  }
  return out;
}

NetGradients ScoringNet::zero_gradients() const {
  NetGradients g;
  for (const auto& layer : layers_) {
    g.weight.push_back(Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()));
    g.bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
  }
  return g;
}

bool operator==(const ScoringNet& a, const ScoringNet& b) {
  return a.dims_ == b.dims_ && a.final_relu_ == b.final_relu_ &&
         a.seed_ == b.seed_ && a.parameters() == b.parameters();
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

constexpr const char* kMagic = "listfold-checkpoint";
constexpr int kVersion = 1;

void put_hex(std::ostream& out, double v) {
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  out.write(buf, ptr - buf);
}

double get_hex(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw DataError("checkpoint: truncated parameter list");
  std::string_view sv = token;
  bool negative = false;
  if (!sv.empty() && sv.front() == '-') {
    negative = true;
    sv.remove_prefix(1);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v,
                                         std::chars_format::hex);
  if (ec != std::errc() || ptr != sv.data() + sv.size()) {
    throw DataError("checkpoint: bad parameter '" + token + "'");
  }
  return negative ? -v : v;
}

void expect(std::istream& in, const std::string& word) {
  std::string token;
  if (!(in >> token) || token != word) {
    throw DataError("checkpoint: expected '" + word + "'");
  }
}

}  // namespace

void write_checkpoint(const ScoringNet& net, std::uint64_t config_hash,
                      std::ostream& out) {
  out << kMagic << ' ' << kVersion << '\n';
  out << "dims";
  for (std::size_t d : net.dims()) out << ' ' << d;
  out << '\n';
  out << "final_relu " << (net.final_relu() ? 1 : 0) << '\n';
  out << "seed " << net.seed() << '\n';
  out << "config_hash " << config_hash << '\n';
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& w = layers[l].weight;
    out << "layer " << l << ' ' << w.rows() << ' ' << w.cols() << '\n';
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        if (c) out << ' ';
        put_hex(out, w(r, c));
      }
      out << '\n';
    }
    out << "bias";
    for (Eigen::Index i = 0; i < layers[l].bias.size(); ++i) {
      out << ' ';
      put_hex(out, layers[l].bias(i));
    }
    out << '\n';
  }
}

ScoringNet read_checkpoint(std::istream& in, std::uint64_t* config_hash) {
  expect(in, kMagic);
  int version = 0;
  if (!(in >> version) || version != kVersion) {
    throw DataError("checkpoint: unsupported version");
  }
  std::string line;
  std::getline(in, line);
  if (!std::getline(in, line)) throw DataError("checkpoint: missing dims");
  std::istringstream dims_line(line);
  expect(dims_line, "dims");
  std::vector<std::size_t> dims;
  for (std::size_t d; dims_line >> d;) dims.push_back(d);

  int relu = 0;
  std::uint64_t seed = 0, hash = 0;
  expect(in, "final_relu");
  in >> relu;
  expect(in, "seed");
  in >> seed;
  expect(in, "config_hash");
  in >> hash;
  if (!in) throw DataError("checkpoint: malformed header");

  ScoringNet net(dims, relu != 0, seed);
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    auto& layer = net.layers()[l];
    expect(in, "layer");
    std::size_t index = 0;
    Eigen::Index rows = 0, cols = 0;
    in >> index >> rows >> cols;
    if (!in || index != l || rows != layer.weight.rows() ||
        cols != layer.weight.cols()) {
      throw DataError("checkpoint: layer " + std::to_string(l) +
                      " shape mismatch");
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) layer.weight(r, c) = get_hex(in);
    }
    expect(in, "bias");
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = get_hex(in);
  }
  if (config_hash) *config_hash = hash;
  return net;
}

void save_checkpoint(const ScoringNet& net, std::uint64_t config_hash,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  write_checkpoint(net, config_hash, out);
}

ScoringNet load_checkpoint(const std::filesystem::path& path,
                           std::uint64_t* config_hash) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return read_checkpoint(in, config_hash);
}

}  // namespace listfold
