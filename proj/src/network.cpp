#include "otb/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "otb/numfmt.hpp"

namespace otb {

using json = nlohmann::json;

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::softmax: return "softmax";
    case Activation::identity: return "identity";
  }
  return "?";
}

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::relu;
  if (s == "softmax") return Activation::softmax;
  if (s == "identity") return Activation::identity;
  fail(ErrorKind::schema, "unknown activation '" + std::string(s) + "'");
}

NetworkModel::NetworkModel(std::size_t input_dim, std::vector<DenseLayer> layers,
                           int significant_digits)
    : input_dim_(input_dim), layers_(std::move(layers)),
      significant_digits_(significant_digits) {
  if (input_dim_ == 0) fail(ErrorKind::schema, "network input_dim must be >= 1");
  if (layers_.empty()) fail(ErrorKind::schema, "network needs at least one layer");
  if (significant_digits_ < 0 || significant_digits_ > 17)
    fail(ErrorKind::schema, "significant_digits must lie in [0, 17]");
  std::size_t in = input_dim_;
  for (std::size_t t = 0; t < layers_.size(); ++t) {
    const auto& layer = layers_[t];
    const std::string where = "layer " + std::to_string(t);
    if (layer.out_dim() == 0) fail(ErrorKind::schema, where + ": empty weight matrix");
    for (const auto& row : layer.weights) check_dim(in, row.size(), (where + " weights").c_str());
    check_dim(layer.out_dim(), layer.bias.size(), (where + " bias").c_str());
    in = layer.out_dim();
  }
}

NetworkModel NetworkModel::from_json_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
    std::vector<DenseLayer> layers;
    for (const auto& jl : j.at("layers")) {
      DenseLayer l;
      l.weights = jl.at("weights").get<std::vector<Vector>>();
      l.bias = jl.at("bias").get<Vector>();
      l.activation = parse_activation(jl.at("activation").get<std::string>());
      layers.push_back(std::move(l));
    }
    return NetworkModel(j.at("input_dim").get<std::size_t>(), std::move(layers),
                        j.value("significant_digits", 0));
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, std::string("network model: ") + e.what());
  }
}

NetworkModel NetworkModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open network file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::size_t NetworkModel::resolve(LayerKey layer) const {
  const auto n = static_cast<long>(layers_.size());
  const long idx = layer < 0 ? n + layer : layer;
  if (idx < 0 || idx >= n)
    fail(ErrorKind::usage, "layer " + std::to_string(layer) + " out of range for a " +
                               std::to_string(n) + "-layer network");
  return static_cast<std::size_t>(idx);
}

std::vector<Vector> NetworkModel::forward(std::span<const double> x) const {
  check_dim(input_dim_, x.size(), "network input");
  std::vector<Vector> outputs;
  outputs.reserve(layers_.size());
  Vector prev(x.begin(), x.end());
  for (const auto& layer : layers_) {
    Vector out(layer.out_dim());
    for (std::size_t r = 0; r < out.size(); ++r) {
      double s = layer.bias[r];
      const auto& w = layer.weights[r];
      for (std::size_t c = 0; c < prev.size(); ++c) s += w[c] * prev[c];
      out[r] = s;
    }
    switch (layer.activation) {
      case Activation::relu:
        for (auto& v : out) v = std::max(0.0, v);
        break;
      case Activation::softmax:
        out = softmax(out);
        break;
      case Activation::identity:
        break;
    }
    if (significant_digits_ > 0)
      for (auto& v : out) v = round_significant(v, significant_digits_);
    outputs.push_back(out);
    prev = std::move(out);
  }
  return outputs;
}

Vector NetworkModel::watch(std::span<const double> x, LayerKey layer) const {
  const std::size_t idx = resolve(layer);
  return std::move(forward(x)[idx]);
}

ClassId NetworkModel::classify(std::span<const double> x) const {
  return argmax(forward(x).back());
}

ClassId argmax(std::span<const double> v) {
  if (v.empty()) fail(ErrorKind::dimension, "argmax of an empty vector");
  ClassId best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

Vector softmax(std::span<const double> v) {
  if (v.empty()) return {};
  const double m = *std::max_element(v.begin(), v.end());
  Vector out(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) total += out[i] = std::exp(v[i] - m);
  for (auto& x : out) x /= total;
  return out;
}

Vector normalize_sum(std::span<const double> v) {
  double total = 0.0;
  for (double x : v) total += x;
  if (total == 0.0) fail(ErrorKind::usage, "cannot normalize: outputs sum to zero");
  Vector out(v.begin(), v.end());
  for (auto& x : out) x /= total;
  return out;
}

}  // namespace otb
