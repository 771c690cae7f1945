#pragma once

#include <filesystem>
#include <span>
#include <string_view>

#include "otb/types.hpp"

namespace otb {

enum class Activation { relu, softmax, identity };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view s);

struct DenseLayer {
  std::vector<Vector> weights;  // out x in, row-major
  Vector bias;                  // out
  Activation activation = Activation::relu;

  std::size_t in_dim() const { return weights.empty() ? 0 : weights.front().size(); }
  std::size_t out_dim() const { return weights.size(); }
};

/// Dense feedforward classifier. Immutable once constructed.
class NetworkModel {
 public:
  /// significant_digits > 0 rounds every layer output to that many
  /// significant decimal digits, so models written with decimal weights
  /// reproduce hand-computed activations exactly.
  NetworkModel(std::size_t input_dim, std::vector<DenseLayer> layers,
               int significant_digits = 0);

  static NetworkModel load(const std::filesystem::path& path);
  static NetworkModel from_json_text(std::string_view text);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t layer_count() const { return layers_.size(); }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  int significant_digits() const { return significant_digits_; }

  /// Resolves a signed layer key to a position in layers(); throws on
  /// out-of-range keys.
  std::size_t resolve(LayerKey layer) const;

  /// Post-activation output of every layer, first to last.
  std::vector<Vector> forward(std::span<const double> x) const;
  Vector watch(std::span<const double> x, LayerKey layer) const;
  ClassId classify(std::span<const double> x) const;

 private:
  std::size_t input_dim_;
  std::vector<DenseLayer> layers_;
  int significant_digits_;
};

/// Index of the largest entry; ties go to the lowest index.
ClassId argmax(std::span<const double> v);

/// Exponential softmax (max-shifted).
Vector softmax(std::span<const double> v);

/// Plain normalization o_i / sum_j o_j; throws on a zero sum.
Vector normalize_sum(std::span<const double> v);

}  // namespace otb
