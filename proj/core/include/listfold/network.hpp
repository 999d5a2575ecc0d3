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

#ifndef LISTFOLD_NETWORK_HPP_
#define LISTFOLD_NETWORK_HPP_

// Fully-connected scoring network with hand-written forward and backward
// passes. The same parameters score every row (stock) of an input matrix.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace listfold {

// One affine map: outputs = inputs * weight + bias^T.
struct DenseLayer {
  Eigen::MatrixXd weight;  // fan_in x fan_out
  Eigen::VectorXd bias;    // fan_out
};

// Layer widths [d, 2d, 4d, ceil(d/2), 1].
std::vector<std::size_t> layer_dims(std::size_t feature_dim);

// Activations kept by a forward pass for the backward pass.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;  // input of each layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activation output of each layer
};

struct NetGradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
};

inline constexpr double kFinalReluBias = 1.0;

class ScoringNet {
 public:
  ScoringNet() = default;
  // Zero-initialised network with explicit widths (dims.front() = input).
  ScoringNet(std::vector<std::size_t> dims, bool final_relu,
             std::uint64_t seed = 0);

  // Widths from layer_dims(); weights uniform in +-sqrt(6 / (fan_in +
  // fan_out)), biases zero except the output bias, which starts at
  // kFinalReluBias when the final ReLU is on.
  static ScoringNet init(std::size_t feature_dim, std::uint64_t seed,
                         bool final_relu);

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t feature_dim() const { return dims_.empty() ? 0 : dims_.front(); }
  bool final_relu() const { return final_relu_; }
  std::uint64_t seed() const { return seed_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  // One score per row of `features`. Throws InvalidArgument on a column
  // count mismatch.
  Eigen::VectorXd forward(const Eigen::MatrixXd& features) const;
  Eigen::VectorXd forward(const Eigen::MatrixXd& features,
                          ForwardCache& cache) const;

  // Parameter gradients given d(loss)/d(score) for every row of the cached
  // pass. ReLU has subgradient 0 at 0.
  NetGradients backward(const ForwardCache& cache,
                        const Eigen::VectorXd& score_gradient) const;

  // Flat parameter view: for each layer, weight (row-major) then bias.
  std::size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> values);
  static std::vector<double> flatten(const NetGradients& grads);

  NetGradients zero_gradients() const;

  friend bool operator==(const ScoringNet& a, const ScoringNet& b);

 private:
  bool relu_after(std::size_t layer) const {
    return layer + 1 < layers_.size() || final_relu_;
  }

  std::vector<std::size_t> dims_;
  std::vector<DenseLayer> layers_;
  bool final_relu_ = true;
  std::uint64_t seed_ = 0;
};

// Text checkpoint: widths, flags, seed, a config hash and every parameter as
// a hexadecimal float, so reloading reproduces forward outputs bit-exactly.
void write_checkpoint(const ScoringNet& net, std::uint64_t config_hash,
                      std::ostream& out);
ScoringNet read_checkpoint(std::istream& in, std::uint64_t* config_hash = nullptr);
void save_checkpoint(const ScoringNet& net, std::uint64_t config_hash,
                     const std::filesystem::path& path);
ScoringNet load_checkpoint(const std::filesystem::path& path,
                           std::uint64_t* config_hash = nullptr);

// 64-bit FNV-1a, used to fingerprint configurations in checkpoints.
std::uint64_t fnv1a64(std::string_view text);

}  // namespace listfold

#endif  // LISTFOLD_NETWORK_HPP_
