#include "charembed/model.hpp"

#include <cmath>
#include <sstream>
#include <string_view>

#include "charembed/charset.hpp"
#include "charembed/errors.hpp"

namespace charembed {

std::vector<std::size_t> EncoderConfig::length_trace() const {
  std::vector<std::size_t> trace{kMaxChars};
  for (std::size_t h = 0; h < layers.size(); ++h) {
    const ConvLayerSpec& spec = layers[h];
    if (spec.window > trace.back()) {
      throw ConfigError("conv layer " + std::to_string(h + 1) + " window " + std::to_string(spec.window) +
                        " exceeds its input length " + std::to_string(trace.back()));
    }
    trace.push_back(trace.back() - spec.window + 1);
    if (spec.pool > 0) {
      if (spec.pool > trace.back()) {
        throw ConfigError("pool after layer " + std::to_string(h + 1) + " exceeds its input length");
      }
      trace.push_back((trace.back() - spec.pool) / spec.pool + 1);
    }
  }
  return trace;
}

void EncoderConfig::validate() const {
  if (layers.empty()) throw ConfigError("encoder needs at least one conv layer");
  for (std::size_t h = 0; h < layers.size(); ++h) {
    if (layers[h].window == 0 || layers[h].filters == 0) {
      throw ConfigError("conv layer " + std::to_string(h + 1) + " has a zero window or filter count");
    }
    if (h >= 2 && layers[h].pool != 0) {
      throw ConfigError("pooling is only allowed after the first two conv layers");
    }
  }
  if (hidden == 0) throw ConfigError("encoder hidden size must be positive");
  (void)length_trace();
}

void DecoderConfig::validate() const {
  if (hidden == 0) throw ConfigError("decoder hidden size must be positive");
}

ModelConfig ModelConfig::scaled(std::size_t factor) {
  if (factor == 0) throw ConfigError("scale factor must be positive");
  ModelConfig config;
  for (ConvLayerSpec& layer : config.encoder.layers) layer.filters = std::max<std::size_t>(1, layer.filters / factor);
  config.encoder.hidden = std::max<std::size_t>(1, config.encoder.hidden / factor);
  config.decoder.hidden = std::max<std::size_t>(1, config.decoder.hidden / factor);
  return config;
}

std::map<std::string, std::string> ModelConfig::to_key_values() const {
  std::ostringstream layers_out;
  for (std::size_t i = 0; i < encoder.layers.size(); ++i) {
    if (i) layers_out << ',';
    layers_out << encoder.layers[i].window << ':' << encoder.layers[i].filters << ':' << encoder.layers[i].pool;
  }
  return {{"encoder.layers", layers_out.str()},
          {"encoder.hidden", std::to_string(encoder.hidden)},
          {"decoder.hidden", std::to_string(decoder.hidden)}};
}

ModelConfig ModelConfig::from_key_values(const std::map<std::string, std::string>& kv) {
  auto get = [&kv](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError("missing model config key '" + key + "'");
    return it->second;
  };
  ModelConfig config;
  config.encoder.layers.clear();
  std::istringstream layers_in(get("encoder.layers"));
  std::string item;
  while (std::getline(layers_in, item, ',')) {
    ConvLayerSpec spec;
    char sep1 = 0, sep2 = 0;
    std::istringstream fields(item);
    if (!(fields >> spec.window >> sep1 >> spec.filters >> sep2 >> spec.pool) || sep1 != ':' || sep2 != ':') {
      throw ConfigError("malformed conv layer spec '" + item + "'");
    }
    config.encoder.layers.push_back(spec);
  }
  config.encoder.hidden = std::stoul(get("encoder.hidden"));
  config.decoder.hidden = std::stoul(get("decoder.hidden"));
  config.validate();
  return config;
}

Tensor& ParamStore::add(const std::string& name, Tensor value) {
  if (contains(name)) throw ContractError("duplicate parameter name '" + name + "'");
  index_[name] = entries_.size();
  entries_.emplace_back(name, std::move(value));
  return entries_.back().second;
}

Tensor& ParamStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

const Tensor& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter '" + name + "'");
  return entries_[it->second].second;
}

std::size_t ParamStore::element_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : entries_) n += t.size();
  return n;
}

ParamStore ParamStore::zeros_like() const {
  ParamStore out;
  for (const auto& [name, t] : entries_) out.add(name, Tensor(t.shape()));
  return out;
}

std::string conv_weight_name(std::size_t layer) { return "enc.conv" + std::to_string(layer) + ".weight"; }
std::string conv_bias_name(std::size_t layer) { return "enc.conv" + std::to_string(layer) + ".bias"; }

namespace {

Tensor uniform_tensor(Shape shape, Real bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (Real& v : t.values()) v = rng.uniform(-bound, bound);
  return t;
}

// He-uniform keeps activation variance roughly constant through ReLU layers.
Real he_bound(std::size_t fan_in) { return std::sqrt(6.0 / static_cast<Real>(fan_in)); }

Real glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<Real>(fan_in + fan_out));
}

void add_lstm(ParamStore& params, const std::string& prefix, std::size_t hidden, std::size_t input, Rng& rng) {
  const std::size_t fan_in = hidden + input;
  for (const char* gate : kGateSuffixes) {
    params.add(prefix + ".w_" + gate, uniform_tensor({hidden, fan_in}, glorot_bound(fan_in, hidden), rng));
  }
  for (const char* gate : kGateSuffixes) {
    // A forget bias of one lets the cell state carry information early in training.
    params.add(prefix + ".b_" + gate, Tensor({hidden}, std::string_view(gate) == "f" ? 1.0 : 0.0));
  }
}

}  // namespace

ParamStore init_params(const ModelConfig& config, Rng& rng, InitOptions options) {
  config.validate();
  ParamStore params;
  std::size_t channels = kAlphabetSize;
  for (std::size_t h = 0; h < config.encoder.layers.size(); ++h) {
    const ConvLayerSpec& spec = config.encoder.layers[h];
    const std::size_t fan_in = spec.window * channels;
    params.add(conv_weight_name(h + 1), uniform_tensor({spec.filters, spec.window, channels}, he_bound(fan_in), rng));
    params.add(conv_bias_name(h + 1), Tensor({spec.filters}));
    channels = spec.filters;
  }
  const std::size_t emb = config.encoder.hidden;
  add_lstm(params, "enc.lstm", emb, channels, rng);

  const std::size_t dh = config.decoder.hidden;
  for (const char* bridge : {"h1", "c1", "h2", "c2"}) {
    const std::string prefix = std::string("dec.bridge.") + bridge;
    params.add(prefix + ".weight", uniform_tensor({dh, emb}, glorot_bound(emb, dh), rng));
    params.add(prefix + ".bias", Tensor({dh}));
  }
  add_lstm(params, "dec.lstm1", dh, kAlphabetSize, rng);
  add_lstm(params, "dec.lstm2", dh, dh, rng);
  Tensor out_w = uniform_tensor({kAlphabetSize, dh}, glorot_bound(dh, kAlphabetSize), rng);
  Tensor out_b({kAlphabetSize});
  if (options.zero_output_projection) {
    out_w.fill(0.0);
    out_b.fill(0.0);
  }
  params.add("dec.out.weight", std::move(out_w));
  params.add("dec.out.bias", std::move(out_b));
  params.add("dec.start", uniform_tensor({kAlphabetSize}, 1.0 / std::sqrt(Real(kAlphabetSize)), rng));
  return params;
}

ParamBinding::ParamBinding(Tape& tape, const ParamStore& params, bool trainable) : tape_(&tape) {
  for (const auto& [name, value] : params.entries()) {
    index_[name] = vars_.size();
    vars_.emplace_back(name, trainable ? tape.variable(value) : tape.constant(value));
  }
}

Var ParamBinding::operator[](const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("parameter '" + name + "' is not bound");
  return vars_[it->second].second;
}

ops::LstmWeights ParamBinding::lstm(const std::string& prefix) const {
  const auto& p = *this;
  return ops::LstmWeights{p[prefix + ".w_i"], p[prefix + ".w_f"], p[prefix + ".w_l"], p[prefix + ".w_o"],
                          p[prefix + ".b_i"], p[prefix + ".b_f"], p[prefix + ".b_l"], p[prefix + ".b_o"]};
}

ParamStore ParamBinding::gradients() const {
  ParamStore grads;
  for (const auto& [name, var] : vars_) grads.add(name, tape_->grad(var.id));
  return grads;
}

}  // namespace charembed
