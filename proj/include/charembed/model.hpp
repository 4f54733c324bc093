#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "charembed/ops.hpp"
#include "charembed/rng.hpp"
#include "charembed/tape.hpp"
#include "charembed/tensor.hpp"

namespace charembed {

struct ConvLayerSpec {
  std::size_t window = 0;
  std::size_t filters = 0;
  std::size_t pool = 0;  // 0: no pooling after this layer

  friend bool operator==(const ConvLayerSpec&, const ConvLayerSpec&) = default;
};

struct EncoderConfig {
  // Four layers: (7,512,pool 3), (7,512,pool 3), (3,512), (3,512).
  std::vector<ConvLayerSpec> layers = {{7, 512, 3}, {7, 512, 3}, {3, 512, 0}, {3, 512, 0}};
  std::size_t hidden = 256;

  // Row counts after each conv and each pool, starting with the 150 input
  // rows. Throws ConfigError if any window exceeds the incoming length.
  std::vector<std::size_t> length_trace() const;
  std::size_t output_length() const { return length_trace().back(); }
  std::size_t output_channels() const { return layers.back().filters; }
  // Throws ConfigError on: no layers, zero sizes, pooling past layer 2, or a
  // trace that runs out of rows.
  void validate() const;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

struct DecoderConfig {
  static constexpr std::size_t kLayers = 2;
  std::size_t hidden = 128;

  void validate() const;
  friend bool operator==(const DecoderConfig&, const DecoderConfig&) = default;
};

struct ModelConfig {
  EncoderConfig encoder;
  DecoderConfig decoder;

  // Divides every filter count and hidden size by factor (each at least 1).
  static ModelConfig scaled(std::size_t factor);

  void validate() const {
    encoder.validate();
    decoder.validate();
  }
  // key=value lines, parsed back by from_key_values().
  std::map<std::string, std::string> to_key_values() const;
  static ModelConfig from_key_values(const std::map<std::string, std::string>& kv);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Named learnable tensors in a fixed insertion order. Names are unique.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Tensor value);
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  std::size_t size() const { return entries_.size(); }
  std::size_t element_count() const;

  std::vector<std::pair<std::string, Tensor>>& entries() { return entries_; }
  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }

  // Same names and shapes, zero values.
  ParamStore zeros_like() const;

  friend bool operator==(const ParamStore& a, const ParamStore& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::map<std::string, std::size_t> index_;
};

struct InitOptions {
  // Zero output projection gives a uniform softmax at every decoder step.
  bool zero_output_projection = false;
};

// Conv filters draw He-uniform weights, LSTM gates and affine maps draw
// Glorot-uniform weights. Biases start at zero except the LSTM forget gates,
// which start at one. The decoder start vector is uniform in +-1/sqrt(70).
ParamStore init_params(const ModelConfig& config, Rng& rng, InitOptions options = {});

// Parameters placed on a tape. Trainable bindings are gradient-tracked
// variables; frozen bindings are constants.
class ParamBinding {
 public:
  ParamBinding(Tape& tape, const ParamStore& params, bool trainable);

  Var operator[](const std::string& name) const;
  ops::LstmWeights lstm(const std::string& prefix) const;
  Tape& tape() const { return *tape_; }

  // Gradients of every bound parameter (zeros where nothing flowed).
  ParamStore gradients() const;

 private:
  Tape* tape_;
  std::vector<std::pair<std::string, Var>> vars_;
  std::map<std::string, std::size_t> index_;
};

// Parameter name helpers.
std::string conv_weight_name(std::size_t layer);  // 1-based layer
std::string conv_bias_name(std::size_t layer);
inline constexpr const char* kGateSuffixes[4] = {"i", "f", "l", "o"};

}  // namespace charembed
